#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ultrasim/mic_model.hpp"
#include "ultrasim/modulation.hpp"
#include "ultrasim/waveform.hpp"

namespace ultrasim {

struct MfccConfig {
    int n_coeffs = 13;       // c0..c12; c0 is excluded from distances
    int n_mel_filters = 26;  // must be >= n_coeffs
    double frame_len = 0.025;  // seconds
    double hop = 0.010;        // seconds, < frame_len
    double pre_emphasis = 0.97;
    double fmin = 0.0;  // Hz
    double fmax = 0.0;  // Hz; 0 means Nyquist
};

using MfccMatrix = std::vector<std::vector<double>>;  // frames x n_coeffs

// Per frame: pre-emphasis, hann window, power spectrum, mel filterbank, log,
// orthonormal DCT-II. Frame count = floor((len - frame)/hop) + 1; input
// shorter than one frame is rejected.
MfccMatrix mfcc(const Waveform& w, const MfccConfig& cfg = {});

// DTW-aligned mel-cepstral distortion in dB, c0 excluded:
// mean over aligned pairs of (10/ln10)*sqrt(2*sum_{i>=1}(c_i - c'_i)^2).
// Both matrices must share a coefficient count (and, to mean anything, the
// same frame geometry and filterbank; resample to a common rate first).
double mcd(const MfccMatrix& ref, const MfccMatrix& test);

enum class SweepAxis { carrier, depth };

struct SweepPoint {
    double value = 0.0;  // f_c in Hz, or depth
    double h1 = 0.0;     // captured amplitude at f_m
    double h2 = 0.0;     // at 2*f_m
    double h3 = 0.0;     // at 3*f_m
    bool feasible = false;  // h1 dominant and >10 dB above the mic noise floor
};

struct SweepReport {
    SweepAxis axis = SweepAxis::carrier;
    std::vector<SweepPoint> points;        // sorted by value ascending
    std::vector<double> feasible_values;   // values with feasible == true
    std::optional<double> prime_fc;        // carrier axis only
    bool prime_degraded = false;           // no harmonic-clean point existed
    std::vector<double> skipped_audible;   // carrier grid values failing the 20 kHz rule
};

// For each carrier in the grid: modulate the baseband, run capture, read
// h1..h3 at the baseband's dominant frequency. Grid values violating the
// inaudibility rule (against the measured bandwidth) are recorded in
// skipped_audible instead of being evaluated. The grid is deduplicated and
// sorted, so permuting it cannot change the report.
SweepReport sweep_carrier(const Waveform& baseband, const MicrophoneModel& mic,
                          const std::vector<double>& fc_grid, const ModulationParams& tmpl,
                          double out_rate = 192000.0);

// Same pipeline over modulation depths at the template's fixed carrier.
SweepReport sweep_depth(const Waveform& baseband, const MicrophoneModel& mic,
                        const std::vector<double>& depth_grid, const ModulationParams& tmpl,
                        double out_rate = 192000.0);

struct PrimeCarrier {
    std::optional<double> value;
    bool degraded = false;  // set when every point had h2 or h3 >= h1
};

// Highest-h1 carrier among harmonic-clean points (h1 > h2 and h1 > h3); if
// none are clean, the global argmax flagged degraded. Ties break toward the
// lower frequency. Empty reports yield an absent value.
PrimeCarrier prime_fc(const SweepReport& report);

// CSV: header axis_value,h1,h2,h3,feasible; one row per point; prime_fc
// footer row on carrier reports. Written atomically.
void write_sweep_csv(const SweepReport& report, const std::string& path);

void write_mfcc_csv(const MfccMatrix& m, const std::string& path);

// Shared atomic text writer: compose in memory, then move into place.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace ultrasim
