#pragma once

#include <string>

#include "ultrasim/waveform.hpp"

namespace ultrasim {

enum class WavFormat { pcm16, float32 };

// Reads a RIFF/WAVE file (PCM16 or IEEE float32). Multi-channel input keeps
// channel 0 and warns on stderr. Malformed or unsupported files throw
// std::runtime_error naming the file and the problem.
Waveform read_wav(const std::string& path);

// Writes mono PCM16 (default) or float32. PCM16 samples are clamped to
// [-1, 1] and round-trip within one LSB (2^-15). The file is composed in
// memory and moved into place, so a failure never leaves a partial artifact.
void write_wav(const std::string& path, const Waveform& w, WavFormat format = WavFormat::pcm16);

}  // namespace ultrasim
