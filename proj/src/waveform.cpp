#include "ultrasim/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace ultrasim {

void validate(const Waveform& w, const char* context) {
    if (w.sample_rate <= 0.0)
        throw std::invalid_argument(std::string(context) + ": sample rate must be positive");
    if (w.samples.empty())
        throw std::invalid_argument(std::string(context) + ": waveform has no samples");
    for (double s : w.samples) {
        if (!std::isfinite(s))
            throw std::invalid_argument(std::string(context) + ": waveform contains NaN/Inf");
    }
}

double peak_abs(const Waveform& w) {
    double p = 0.0;
    for (double s : w.samples) p = std::max(p, std::abs(s));
    return p;
}

double rms(const Waveform& w) {
    if (w.samples.empty()) return 0.0;
    double acc = 0.0;
    for (double s : w.samples) acc += s * s;
    return std::sqrt(acc / w.samples.size());
}

Waveform make_tone(double freq, double amplitude, double duration, double rate) {
    if (rate <= 0.0) throw std::invalid_argument("make_tone: sample rate must be positive");
    if (freq <= 0.0 || freq >= rate / 2.0)
        throw std::invalid_argument(
            "make_tone: frequency must lie in (0, rate/2); " + std::to_string(freq) +
            " Hz would alias at rate " + std::to_string(rate));
    if (amplitude <= 0.0 || amplitude > 1.0)
        throw std::invalid_argument("make_tone: amplitude must be in (0, 1]");

    auto n = static_cast<std::size_t>(std::llround(duration * rate));
    if (n == 0) throw std::invalid_argument("make_tone: duration too short for one sample");

    Waveform w;
    w.sample_rate = rate;
    w.samples.resize(n);
    const double step = 2.0 * std::numbers::pi * freq / rate;
    for (std::size_t i = 0; i < n; ++i)
        w.samples[i] = amplitude * std::sin(step * static_cast<double>(i));
    return w;
}

namespace {

// Deterministic standard-normal draws: mt19937_64 → uniform(0,1] → Box-Muller.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : gen_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    // (0,1]: never returns 0, so log() above is finite.
    double uniform01() {
        return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1p-53;
    }

    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace

Waveform make_noise(std::size_t length, double rate, double rms_level, std::uint64_t seed) {
    if (rate <= 0.0) throw std::invalid_argument("make_noise: sample rate must be positive");
    Waveform w;
    w.sample_rate = rate;
    w.samples.resize(length);
    GaussianSource g(seed);
    for (auto& s : w.samples) s = rms_level * g.next();
    return w;
}

void add_noise(Waveform& w, double rms_level, std::uint64_t seed) {
    GaussianSource g(seed);
    for (auto& s : w.samples) s += rms_level * g.next();
}

Waveform normalized(const Waveform& w, double target_peak) {
    double p = peak_abs(w);
    if (p <= 0.0) return w;
    Waveform out = w;
    const double k = target_peak / p;
    for (auto& s : out.samples) s *= k;
    return out;
}

}  // namespace ultrasim
