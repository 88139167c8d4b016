#pragma once

#include <string>
#include <vector>

#include "ultrasim/waveform.hpp"

namespace ultrasim {

struct ModulationParams {
    double carrier_freq = 30000.0;    // f_c, Hz; leaves headroom for wideband
                                      // voices under the f_c - w > 20 kHz rule
    double depth = 1.0;               // m = M/A, in [0, 1]
    double carrier_amplitude = 0.5;   // A_c; A_c * (1 + depth) <= 1 keeps full modulation clip-free
    double baseband_bandwidth = 0.0;  // w, Hz; 0 means "measure from the baseband"
    bool inaudible = false;           // when set, f_c - w > 20 kHz is enforced
};

// Throws std::invalid_argument on any violated field constraint.
void validate(const ModulationParams& p);

struct InaudibilityReport {
    bool ok = false;           // true iff carrier_freq - bandwidth > 20 kHz, strictly
    double lowest_freq = 0.0;  // carrier_freq - bandwidth
};

// Pure predicate; never throws. Uses p.baseband_bandwidth as w.
InaudibilityReport check_inaudibility(const ModulationParams& p);

// Smallest frequency below which `energy_fraction` of the total spectral
// energy lies. Rejects silent input (RMS gate at 1e-8).
double estimate_bandwidth(const Waveform& voice, double energy_fraction = 0.99);

// AM attack waveform: A_c * (1 + depth * x(t)) * cos(2*pi*f_c*t), where x is
// the baseband resampled to out_rate, DC-blocked, and scaled to unit peak so
// that depth means exactly M/A. Requires out_rate > 2*(f_c + w), strictly;
// with p.inaudible set, also f_c - w > 20 kHz. A silent baseband yields the
// bare carrier.
Waveform am_modulate(const Waveform& baseband, const ModulationParams& p,
                     double out_rate = 192000.0);

struct Segment {
    Waveform source;
    double start = 0.0;  // seconds, 0 <= start < end <= source duration
    double end = 0.0;
    std::string label;
};

// Splices the [start, end) spans in order with an equal-power raised-cosine
// crossfade at each joint. All segments must share a sample rate and the
// crossfade must be shorter than every segment.
Waveform concatenate_segments(const std::vector<Segment>& segments, double crossfade = 0.01);

}  // namespace ultrasim
