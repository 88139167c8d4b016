#include "ultrasim/voice.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "ultrasim/dsp.hpp"

namespace ultrasim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGenRate = 48000.0;   // synthesis rate; resampled on request
constexpr double kMaxHarmonic = 4000.0;  // Hz, keeps the command narrow-band

// Engine-portable uniform in [lo, hi); std::uniform_real_distribution is
// implementation-defined, which would break cross-platform determinism.
double urand(std::mt19937_64& gen, double lo, double hi) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

struct Formant {
    double center;
    double width;
    double weight;
};

}  // namespace

Waveform make_voice_command(std::uint64_t seed, double rate) {
    std::mt19937_64 gen(seed);
    const double f0_base = urand(gen, 100.0, 140.0);
    const int syllables = 3;

    std::vector<double> samples;
    std::vector<double> voicing;  // syllable envelope, reused to gate aspiration
    for (int s = 0; s < syllables; ++s) {
        const double dur = urand(gen, 0.16, 0.24);
        const double glide = urand(gen, -0.06, 0.06);  // relative f0 drift over the syllable
        const Formant formants[] = {
            {urand(gen, 300.0, 800.0), 182.0, 1.0},
            {urand(gen, 900.0, 2200.0), 338.0, 0.7},
            {urand(gen, 2400.0, 3600.0), 494.0, 0.25},
        };

        const std::size_t n = static_cast<std::size_t>(std::llround(dur * kGenRate));
        const int n_harm = static_cast<int>(kMaxHarmonic / f0_base);
        std::vector<double> amp(static_cast<std::size_t>(n_harm) + 1, 0.0);
        for (int k = 1; k <= n_harm; ++k) {
            double a = 0.0;
            for (const Formant& f : formants) {
                const double d = (k * f0_base - f.center) / f.width;
                a += f.weight * std::exp(-d * d);
            }
            // The 0.06 floor keeps every harmonic audible (a bare Gaussian
            // envelope leaves near-silent partials between formants, which no
            // real vocal tract produces), and the steep 1/k^2.5 rolloff gives
            // the dark, low-bandwidth timbre that carries best through the
            // demodulation chain.
            amp[static_cast<std::size_t>(k)] = (a + 0.06) / std::pow(k, 2.5);
        }

        std::vector<double> phase(static_cast<std::size_t>(n_harm) + 1, 0.0);
        const std::size_t base = samples.size();
        samples.resize(base + n, 0.0);
        voicing.resize(base + n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = static_cast<double>(i) / static_cast<double>(n);
            const double f0 = f0_base * (1.0 + glide * (u - 0.5));
            // Raised-cosine attack/release keeps syllable joints click-free.
            const double att = std::min(1.0, static_cast<double>(i) / (0.030 * kGenRate));
            const double rel = std::min(1.0, static_cast<double>(n - 1 - i) / (0.050 * kGenRate));
            const double env = 0.5 * (1.0 - std::cos(kPi * att)) * 0.5 * (1.0 - std::cos(kPi * rel));
            double v = 0.0;
            for (int k = 1; k <= n_harm; ++k) {
                phase[static_cast<std::size_t>(k)] += 2.0 * kPi * k * f0 / kGenRate;
                v += amp[static_cast<std::size_t>(k)] * std::sin(phase[static_cast<std::size_t>(k)]);
            }
            samples[base + i] = env * v;
            voicing[base + i] = env;
        }
        // Syllables run legato: the release of one overlaps the attack of the
        // next only through the envelope dip, with no dead air between them.
    }

    Waveform w;
    w.sample_rate = kGenRate;
    w.samples = std::move(samples);
    w.label = "voice-" + std::to_string(seed);

    // Aspiration, gated by the syllable envelope. A bare harmonic stack has
    // unnaturally deep valleys between partials and nothing at all above the
    // last harmonic; real vocal tracts fill both with turbulent breath noise,
    // and log-spectral measures downstream react to that floor as much as to
    // the formants. Breathy on purpose: the noise sits only 5 dB under the
    // voiced power, spread to 7.4 kHz.
    {
        Waveform hiss = make_noise(w.samples.size(), kGenRate, 1.0,
                                   seed ^ 0xd1b54a32d192ed03ULL);
        hiss = fir_lowpass(hiss, 7400.0, 800.0);
        double voiced_pow = 0.0;
        double hiss_pow = 0.0;
        for (std::size_t i = 0; i < w.samples.size(); ++i) {
            if (voicing[i] <= 0.5) continue;
            voiced_pow += w.samples[i] * w.samples[i];
            const double gated = hiss.samples[i] * voicing[i];
            hiss_pow += gated * gated;
        }
        if (hiss_pow > 0.0) {
            const double g = std::sqrt(voiced_pow / hiss_pow) * from_db(-5.0);
            for (std::size_t i = 0; i < w.samples.size(); ++i) {
                w.samples[i] += g * hiss.samples[i] * voicing[i];
            }
        }
    }
    add_noise(w, from_db(-55.0), seed ^ 0x9e3779b97f4a7c15ULL);  // room floor
    w = normalized(w, 0.8);
    if (rate != kGenRate) w = resample(w, rate);
    return w;
}

}  // namespace ultrasim
