#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ultrasim/waveform.hpp"

namespace ultrasim {

// Magnitude-only frequency response: linear interpolation in dB between
// (hz, gain_db) breakpoints, held flat outside the first/last point. An
// empty point list means unity gain everywhere.
struct FreqResponse {
    std::vector<std::pair<double, double>> points;  // (hz, gain_db), hz strictly increasing

    double gain_db_at(double hz) const;
    double gain_at(double hz) const;  // linear, always > 0
    double highest_breakpoint() const;
};

struct MicrophoneModel {
    std::string name = "flat";
    double gain_linear = 1.0;     // A in s_out = A*s + B*s^2
    double gain_quadratic = 0.1;  // B; 0 models an ideal linear microphone
    FreqResponse freq_response;   // applied to the incident signal, zero phase
    double lpf_cutoff = 20000.0;  // Hz
    double lpf_transition = 2000.0;
    double coupling_hz = 20.0;  // AC-coupling corner between preamp and ADC
    double adc_rate = 44100.0;  // Hz
    int adc_bits = 16;
    double noise_floor_dbfs = -90.0;  // RMS of additive acquisition noise
};

void validate(const MicrophoneModel& mic);

// Built-in profiles: "flat" (unity 20 Hz..48 kHz), "selective" (ultrasound
// hump peaking +8 dB at 28 kHz), "weak" (rolling off above 20 kHz).
MicrophoneModel mic_profile(const std::string& name);

// JSON file whose fields mirror MicrophoneModel; freq_response is a list of
// [hz, gain_db] pairs. Missing fields keep their defaults.
MicrophoneModel load_mic(const std::string& path);

struct ChannelModel {
    double source_spl_db = 125.0;     // dB SPL at the reference distance
    double ref_distance_m = 0.1;      // m
    double distance_m = 0.1;          // m
    double scene_noise_spl_db = 0.0;  // dB SPL; values <= 0 disable scene noise
};

void validate(const ChannelModel& ch);

// Scene presets use ambient-level midpoints: office 60, cafe 70, street 80 dB
// SPL; "none" disables scene noise.
ChannelModel scene_channel(const std::string& scene, double distance_m = 0.1);
ChannelModel load_channel(const std::string& path);

// Calibration anchor: 94 dB SPL at the diaphragm == -30 dBFS.
double spl_to_dbfs(double spl_db);
// Linear full-scale amplitude equivalent of an SPL, via the same anchor.
double spl_to_amplitude(double spl_db);

// Inverse-distance attenuation (20*log10(distance/ref) dB) plus additive
// white Gaussian scene noise at the calibrated dBFS level.
Waveform apply_channel(const Waveform& w, const ChannelModel& ch, std::uint64_t seed = 0);

// First two capture stages only: frequency response, then A*s + B*s^2. This
// is the wideband signal a hardware tap ahead of the mic's LPF would see,
// which is what the cancellation defense consumes.
Waveform analog_frontend(const Waveform& incident, const MicrophoneModel& mic);

// Full chain: response -> nonlinearity -> AC coupling -> anti-alias LPF ->
// resample to adc_rate -> quantize to adc_bits (clamped to full scale) ->
// noise floor.
// The incident rate must cover twice the highest response breakpoint.
Waveform capture(const Waveform& incident, const MicrophoneModel& mic, std::uint64_t seed = 0);

struct HarmonicAmplitude {
    int k = 0;               // harmonic index, frequency k * f_m
    double amplitude = 0.0;  // linear, bin-aligned read
};

// Amplitudes at k*f_m for k = 1..n_harmonics. Harmonics at or above Nyquist
// are dropped with a warning, so the list may be shorter than requested.
std::vector<HarmonicAmplitude> harmonic_amplitudes(const Waveform& captured, double f_m,
                                                   int n_harmonics = 3);

}  // namespace ultrasim
