#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ultrasim {

// Uniformly sampled mono audio, nominal full scale +/-1, double precision
// throughout. Quantization happens only at WAV export and the explicit ADC
// stage of the capture chain.
struct Waveform {
    std::vector<double> samples;
    double sample_rate = 0.0;  // Hz
    std::string label;

    Waveform() = default;
    Waveform(std::vector<double> s, double rate, std::string tag = {})
        : samples(std::move(s)), sample_rate(rate), label(std::move(tag)) {}

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    double duration() const { return sample_rate > 0 ? samples.size() / sample_rate : 0.0; }
    double nyquist() const { return sample_rate / 2.0; }
};

// Throws std::invalid_argument if the waveform is unusable for processing
// (empty, non-positive rate, or contains NaN/Inf).
void validate(const Waveform& w, const char* context);

double peak_abs(const Waveform& w);
double rms(const Waveform& w);

// Pure sinusoid amplitude*sin(2*pi*freq*t), zero initial phase.
// freq must lie strictly below rate/2, amplitude in (0, 1].
Waveform make_tone(double freq, double amplitude, double duration, double rate);

// Seeded Gaussian white noise with the given RMS level. Uses an explicit
// Box-Muller transform over mt19937_64 draws so results are identical
// across standard library implementations.
Waveform make_noise(std::size_t length, double rate, double rms_level, std::uint64_t seed);

// In-place: w += noise at rms_level, seeded.
void add_noise(Waveform& w, double rms_level, std::uint64_t seed);

// Peak-normalize to the given level (no-op on silence).
Waveform normalized(const Waveform& w, double target_peak = 1.0);

}  // namespace ultrasim
