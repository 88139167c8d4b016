#include "ultrasim/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ultrasim/dsp.hpp"

namespace ultrasim {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kAudibleLimit = 20000.0;  // Hz; content below this is audible
}  // namespace

void validate(const ModulationParams& p) {
    if (!(p.carrier_freq > 0.0))
        throw std::invalid_argument("modulation: carrier_freq must be > 0");
    if (!(p.depth >= 0.0 && p.depth <= 1.0))
        throw std::invalid_argument("modulation: depth must lie in [0, 1], got " +
                                    std::to_string(p.depth));
    if (!(p.carrier_amplitude > 0.0 && p.carrier_amplitude <= 1.0))
        throw std::invalid_argument("modulation: carrier_amplitude must lie in (0, 1]");
    if (p.carrier_amplitude * (1.0 + p.depth) > 1.0 + 1e-12)
        throw std::invalid_argument(
            "modulation: carrier_amplitude*(1+depth) must not exceed 1 (would clip at full "
            "modulation)");
    if (p.baseband_bandwidth < 0.0)
        throw std::invalid_argument("modulation: baseband_bandwidth must be >= 0");
}

InaudibilityReport check_inaudibility(const ModulationParams& p) {
    InaudibilityReport r;
    r.lowest_freq = p.carrier_freq - p.baseband_bandwidth;
    r.ok = r.lowest_freq > kAudibleLimit;  // strictly above 20 kHz
    return r;
}

double estimate_bandwidth(const Waveform& voice, double energy_fraction) {
    validate(voice, "estimate_bandwidth");
    if (!(energy_fraction > 0.0 && energy_fraction <= 1.0))
        throw std::invalid_argument("estimate_bandwidth: energy_fraction must lie in (0, 1]");
    if (rms(voice) < 1e-8)
        throw std::invalid_argument("estimate_bandwidth: input is silent (RMS below 1e-8)");

    const Spectrum s = amplitude_spectrum(voice);
    double total = 0.0;
    for (double m : s.magnitudes) total += m * m;
    double cum = 0.0;
    for (std::size_t k = 0; k < s.magnitudes.size(); ++k) {
        cum += s.magnitudes[k] * s.magnitudes[k];
        if (cum >= energy_fraction * total) return s.bin_freqs[k];
    }
    return voice.nyquist();
}

Waveform am_modulate(const Waveform& baseband, const ModulationParams& p, double out_rate) {
    validate(baseband, "am_modulate");
    validate(p);
    if (out_rate <= 0.0) throw std::invalid_argument("am_modulate: out_rate must be > 0");

    ModulationParams resolved = p;
    if (resolved.baseband_bandwidth <= 0.0)
        resolved.baseband_bandwidth = estimate_bandwidth(baseband);

    if (p.inaudible) {
        const InaudibilityReport rep = check_inaudibility(resolved);
        if (!rep.ok)
            throw std::invalid_argument(
                "am_modulate: f_c-w must exceed 20000 Hz for an inaudible signal (f_c=" +
                std::to_string(resolved.carrier_freq) +
                ", w=" + std::to_string(resolved.baseband_bandwidth) +
                ", lowest=" + std::to_string(rep.lowest_freq) + ")");
    }
    const double min_rate = 2.0 * (resolved.carrier_freq + resolved.baseband_bandwidth);
    if (!(out_rate > min_rate))
        throw std::invalid_argument(
            "am_modulate: out_rate must exceed 2*(f_c+w) = " + std::to_string(min_rate) +
            " Hz to avoid aliasing, got " + std::to_string(out_rate));

    Waveform x = dc_block(resample(baseband, out_rate));
    const double pk = peak_abs(x);
    if (pk > 1e-12)
        for (double& v : x.samples) v /= pk;  // unit peak, so depth == M/A

    Waveform out;
    out.sample_rate = out_rate;
    out.label = baseband.label;
    out.samples.resize(x.size());
    const double w0 = 2.0 * kPi * resolved.carrier_freq / out_rate;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out.samples[i] = resolved.carrier_amplitude * (1.0 + resolved.depth * x.samples[i]) *
                         std::cos(w0 * static_cast<double>(i));
    }
    return out;
}

Waveform concatenate_segments(const std::vector<Segment>& segments, double crossfade) {
    if (segments.empty())
        throw std::invalid_argument("concatenate_segments: empty segment list");
    if (crossfade < 0.0)
        throw std::invalid_argument("concatenate_segments: crossfade must be >= 0");

    const double rate = segments.front().source.sample_rate;
    std::vector<std::vector<double>> spans;
    for (const Segment& seg : segments) {
        validate(seg.source, "concatenate_segments");
        if (seg.source.sample_rate != rate)
            throw std::invalid_argument("concatenate_segments: sample rate mismatch (" +
                                        std::to_string(seg.source.sample_rate) + " vs " +
                                        std::to_string(rate) + ")");
        if (!(seg.start >= 0.0 && seg.start < seg.end && seg.end <= seg.source.duration() + 1e-9))
            throw std::invalid_argument("concatenate_segments: need 0 <= start < end <= duration "
                                        "for segment '" + seg.label + "'");
        const auto a = static_cast<std::size_t>(std::llround(seg.start * rate));
        const auto b = std::min(seg.source.size(),
                                static_cast<std::size_t>(std::llround(seg.end * rate)));
        spans.emplace_back(seg.source.samples.begin() + static_cast<std::ptrdiff_t>(a),
                           seg.source.samples.begin() + static_cast<std::ptrdiff_t>(b));
    }

    const std::size_t fade = static_cast<std::size_t>(std::llround(crossfade * rate));
    for (std::size_t s = 0; s < spans.size(); ++s) {
        if (spans[s].size() <= fade)
            throw std::invalid_argument("concatenate_segments: crossfade longer than segment '" +
                                        segments[s].label + "'");
    }
    std::vector<double> out = spans.front();
    for (std::size_t s = 1; s < spans.size(); ++s) {
        const std::vector<double>& next = spans[s];
        const std::size_t base = out.size() - fade;
        for (std::size_t k = 0; k < fade; ++k) {
            // Equal-power: gains are cos/sin of the same angle, so the summed
            // power through the joint stays flat.
            const double theta = (static_cast<double>(k) + 0.5) / static_cast<double>(fade) * kPi / 2.0;
            out[base + k] = out[base + k] * std::cos(theta) + next[k] * std::sin(theta);
        }
        out.insert(out.end(), next.begin() + static_cast<std::ptrdiff_t>(fade), next.end());
    }

    Waveform w;
    w.sample_rate = rate;
    w.samples = std::move(out);
    for (const Segment& seg : segments) {
        if (!w.label.empty()) w.label += "+";
        w.label += seg.label;
    }
    return w;
}

}  // namespace ultrasim
