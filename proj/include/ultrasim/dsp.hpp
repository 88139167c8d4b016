#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ultrasim/waveform.hpp"

namespace ultrasim {

inline double to_db(double amplitude) {
    return 20.0 * std::log10(std::max(amplitude, 1e-300));
}
inline double from_db(double db) { return std::pow(10.0, db / 20.0); }

enum class Window { hann, rect };

// Single-sided amplitude spectrum: a unit-amplitude tone centered on a bin
// reads magnitude 1.0 regardless of window.
struct Spectrum {
    std::vector<double> bin_freqs;   // Hz, strictly increasing, 0..Nyquist
    std::vector<double> magnitudes;  // linear amplitude per bin
    double resolution = 0.0;         // Hz per bin
    double window_sum = 0.0;         // sum of window samples (for energy reconstruction)
    std::size_t fft_size = 0;
};

// Analyzes the first min(len, fft_size) samples, zero-padded to fft_size.
// fft_size must be a power of two >= 2.
Spectrum spectrum(const Waveform& w, Window window = Window::hann, std::size_t fft_size = 65536);

// Amplitude spectrum at the signal's natural length, rect window. With
// integer-periodic content every component sits on a bin and reads exactly.
Spectrum amplitude_spectrum(const Waveform& w);

// Amplitude of the component at freq, via the Goertzel recurrence over the
// whole signal (rect window, 2/N scaling). Exact for bin-aligned tones.
double amplitude_at(const Waveform& w, double freq);

// Energy in [lo, hi] Hz as the sum of squared single-sided spectrum
// magnitudes (hann window, natural length). Ratios against the full band
// [0, Nyquist] are what the detection features consume.
double band_energy(const Waveform& w, double lo, double hi);

// Linear-phase windowed-sinc (Kaiser) low-pass. Passband ripple <= 0.5 dB up
// to cutoff, stopband >= 60 dB beyond cutoff + transition. Group delay is
// compensated so the output aligns with the input sample-for-sample.
Waveform fir_lowpass(const Waveform& w, double cutoff, double transition = 2000.0);

// Band-limited rate conversion (windowed-sinc interpolation). Identical
// rates return the input unchanged.
Waveform resample(const Waveform& w, double new_rate);

// One-pole DC blocker, -3 dB near cutoff (default 20 Hz).
Waveform dc_block(const Waveform& w, double cutoff = 20.0);

// Kaiser-windowed sinc taps; exposed for tests that probe the design.
std::vector<double> design_kaiser_lowpass(double cutoff, double transition, double rate,
                                          double atten_db = 80.0);

}  // namespace ultrasim
