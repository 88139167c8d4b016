#pragma once

#include <cstdint>

#include "ultrasim/waveform.hpp"

namespace ultrasim {

// Deterministic synthetic voice command: a few vowel-like syllables built
// from a glided fundamental (120..180 Hz) with formant-weighted harmonics
// below 4 kHz plus faint breath noise. Same seed, same clip. Peak 0.8.
// Intended as pipeline input where a real recording is not available.
Waveform make_voice_command(std::uint64_t seed, double rate = 192000.0);

}  // namespace ultrasim
