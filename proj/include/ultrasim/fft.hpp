#pragma once

#include <complex>
#include <vector>

namespace ultrasim {

// Thin wrappers around FFTW (double precision, any length). Planning uses
// FFTW_ESTIMATE and is serialized internally; execution is reentrant, so
// these are safe to call from parallel maps over independent waveforms.
std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& in);
std::vector<std::complex<double>> ifft(const std::vector<std::complex<double>>& in);

// Real-input transform; returns the non-negative-frequency half spectrum,
// n/2 + 1 bins (the rest is the conjugate mirror).
std::vector<std::complex<double>> fft_real(const std::vector<double>& in);

// Linear convolution via FFT, output length a.size() + b.size() - 1.
std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace ultrasim
