#include "ultrasim/defense.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "ultrasim/analysis.hpp"
#include "ultrasim/dsp.hpp"
#include "ultrasim/modulation.hpp"
#include "ultrasim/voice.hpp"

namespace ultrasim {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr const char* kModelFormat = "ultrasim-model-v1";
constexpr double kEps = 1e-20;
}  // namespace

std::array<double, kNumFeatures> FeatureVector::as_array() const {
    return {rms, peak, crest_factor, zero_crossing_rate, short_time_energy_variance,
            spectral_centroid, spectral_rolloff_95, spectral_flatness,
            band_energy_ratio_500_1000, band_energy_ratio_1000_2000,
            high_band_fraction_above_4k, spectral_entropy, dominant_peak_freq,
            dominant_peak_prominence, spectral_slope};
}

const std::array<std::string, kNumFeatures>& FeatureVector::names() {
    static const std::array<std::string, kNumFeatures> n = {
        "rms", "peak", "crest_factor", "zero_crossing_rate", "short_time_energy_variance",
        "spectral_centroid", "spectral_rolloff_95", "spectral_flatness",
        "band_energy_ratio_500_1000", "band_energy_ratio_1000_2000",
        "high_band_fraction_above_4k", "spectral_entropy", "dominant_peak_freq",
        "dominant_peak_prominence", "spectral_slope"};
    return n;
}

FeatureVector extract_features(const Waveform& w) {
    validate(w, "extract_features");
    if (w.duration() < 0.2)
        throw std::invalid_argument("extract_features: need at least 0.2 s of audio, got " +
                                    std::to_string(w.duration()) + " s");
    if (w.sample_rate < 8000.0)
        throw std::invalid_argument("extract_features: need sample rate >= 8 kHz");
    FeatureVector f;
    f.rms = rms(w);
    if (f.rms < 1e-8) throw std::invalid_argument("extract_features: input is silent");
    f.peak = peak_abs(w);
    f.crest_factor = f.peak / f.rms;

    std::size_t flips = 0;
    for (std::size_t i = 1; i < w.size(); ++i)
        if ((w.samples[i] >= 0.0) != (w.samples[i - 1] >= 0.0)) ++flips;
    f.zero_crossing_rate = static_cast<double>(flips) / static_cast<double>(w.size() - 1);

    // Frame energies over 20 ms / 10 ms; variance relative to the squared
    // mean so amplitude scaling cancels.
    {
        const std::size_t frame = static_cast<std::size_t>(0.020 * w.sample_rate);
        const std::size_t hop = frame / 2;
        std::vector<double> energies;
        for (std::size_t off = 0; off + frame <= w.size(); off += hop) {
            double e = 0.0;
            for (std::size_t i = 0; i < frame; ++i) e += w.samples[off + i] * w.samples[off + i];
            energies.push_back(e / static_cast<double>(frame));
        }
        double mean = 0.0;
        for (double e : energies) mean += e;
        mean /= static_cast<double>(energies.size());
        double var = 0.0;
        for (double e : energies) var += (e - mean) * (e - mean);
        var /= static_cast<double>(energies.size());
        f.short_time_energy_variance = var / std::max(mean * mean, kEps);
    }

    const Spectrum s = spectrum(w, Window::hann, [&] {
        std::size_t p = 1;
        while (p < w.size()) p <<= 1;
        return p;
    }());
    std::vector<double> power(s.magnitudes.size());
    double total = 0.0;
    for (std::size_t k = 0; k < power.size(); ++k) {
        power[k] = s.magnitudes[k] * s.magnitudes[k];
        total += power[k];
    }
    total = std::max(total, kEps);

    double centroid = 0.0;
    for (std::size_t k = 0; k < power.size(); ++k) centroid += s.bin_freqs[k] * power[k];
    f.spectral_centroid = centroid / total;

    double cum = 0.0;
    f.spectral_rolloff_95 = s.bin_freqs.back();
    for (std::size_t k = 0; k < power.size(); ++k) {
        cum += power[k];
        if (cum >= 0.95 * total) {
            f.spectral_rolloff_95 = s.bin_freqs[k];
            break;
        }
    }

    {
        double log_sum = 0.0, lin_sum = 0.0;
        const std::size_t n = power.size() - 1;  // skip DC
        for (std::size_t k = 1; k < power.size(); ++k) {
            log_sum += std::log(power[k] + kEps);
            lin_sum += power[k];
        }
        f.spectral_flatness = std::exp(log_sum / static_cast<double>(n)) /
                              std::max(lin_sum / static_cast<double>(n), kEps);
    }

    auto band = [&](double lo, double hi) {
        double e = 0.0;
        for (std::size_t k = 0; k < power.size(); ++k)
            if (s.bin_freqs[k] >= lo && s.bin_freqs[k] <= hi) e += power[k];
        return e;
    };
    const double e_low = std::max(band(0.0, 500.0), kEps);
    f.band_energy_ratio_500_1000 = band(500.0, 1000.0) / e_low;
    f.band_energy_ratio_1000_2000 = band(1000.0, 2000.0) / e_low;
    f.high_band_fraction_above_4k = band(4000.0, w.nyquist()) / total;

    {
        double h = 0.0;
        for (std::size_t k = 0; k < power.size(); ++k) {
            const double q = power[k] / total;
            if (q > 0.0) h -= q * std::log2(q);
        }
        f.spectral_entropy = h / std::log2(static_cast<double>(power.size()));
    }

    {
        std::size_t best = 1;
        for (std::size_t k = 1; k < s.magnitudes.size(); ++k)
            if (s.magnitudes[k] > s.magnitudes[best]) best = k;
        f.dominant_peak_freq = s.bin_freqs[best];
        std::vector<double> mags_db(s.magnitudes.size());
        for (std::size_t k = 0; k < mags_db.size(); ++k) mags_db[k] = to_db(s.magnitudes[k]);
        std::vector<double> sorted = mags_db;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2),
                         sorted.end());
        f.dominant_peak_prominence = mags_db[best] - sorted[sorted.size() / 2];

        // Least-squares line through (kHz, dB) points.
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        const double n = static_cast<double>(mags_db.size());
        for (std::size_t k = 0; k < mags_db.size(); ++k) {
            const double x = s.bin_freqs[k] / 1000.0;
            sx += x;
            sy += mags_db[k];
            sxx += x * x;
            sxy += x * mags_db[k];
        }
        f.spectral_slope = (n * sxy - sx * sy) / std::max(n * sxx - sx * sx, kEps);
    }
    return f;
}

namespace {

double hinge_objective(const std::vector<std::array<double, kNumFeatures>>& x,
                       const std::vector<double>& y, const std::array<double, kNumFeatures>& w,
                       double b, double lambda) {
    double loss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double s = b;
        for (std::size_t j = 0; j < kNumFeatures; ++j) s += w[j] * x[i][j];
        loss += std::max(0.0, 1.0 - y[i] * s);
    }
    loss /= static_cast<double>(x.size());
    double reg = 0.0;
    for (double v : w) reg += v * v;
    return loss + 0.5 * lambda * reg;
}

}  // namespace

ClassifierModel train_classifier(const std::vector<FeatureVector>& genuine,
                                 const std::vector<FeatureVector>& recovered,
                                 std::uint64_t /*seed*/, int iterations) {
    if (genuine.size() < 2 || recovered.size() < 2)
        throw std::invalid_argument("train_classifier: need at least 2 samples per class");
    if (iterations < 1) throw std::invalid_argument("train_classifier: iterations must be >= 1");

    std::vector<std::array<double, kNumFeatures>> x;
    std::vector<double> y;
    for (const FeatureVector& f : genuine) {
        x.push_back(f.as_array());
        y.push_back(1.0);
    }
    for (const FeatureVector& f : recovered) {
        x.push_back(f.as_array());
        y.push_back(-1.0);
    }
    const std::size_t n = x.size();

    ClassifierModel m;
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
        double mean = 0.0;
        for (const auto& row : x) mean += row[j];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (const auto& row : x) var += (row[j] - mean) * (row[j] - mean);
        var /= static_cast<double>(n);
        m.feature_mean[j] = mean;
        m.feature_std[j] = std::sqrt(var);
        if (m.feature_std[j] < 1e-12) {
            m.feature_std[j] = 1.0;  // weight stays zero; feature carries no signal
            m.dropped_features.push_back(FeatureVector::names()[j]);
        }
    }
    for (auto& row : x)
        for (std::size_t j = 0; j < kNumFeatures; ++j)
            row[j] = (row[j] - m.feature_mean[j]) / m.feature_std[j];

    {
        double sep = 0.0;
        for (std::size_t j = 0; j < kNumFeatures; ++j) {
            double mg = 0.0, mr = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                (y[i] > 0 ? mg : mr) += x[i][j];
            mg /= static_cast<double>(genuine.size());
            mr /= static_cast<double>(recovered.size());
            sep = std::max(sep, std::abs(mg - mr));
        }
        if (sep < 1e-9)
            throw std::invalid_argument(
                "train_classifier: class feature means coincide; classes are statistically "
                "identical and cannot be separated");
    }

    // Full-batch Pegasos-style descent. The incumbent (lowest objective seen)
    // is what the model keeps.
    const double lambda = 1e-4;
    std::array<double, kNumFeatures> w{};
    double b = 0.0;
    std::array<double, kNumFeatures> best_w{};
    double best_b = 0.0;
    double best_obj = hinge_objective(x, y, w, b, lambda);
    m.objective_history.push_back(best_obj);
    const int checkpoint = std::max(1, iterations / 200);
    for (int t = 1; t <= iterations; ++t) {
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        std::array<double, kNumFeatures> grad{};
        double grad_b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = b;
            for (std::size_t j = 0; j < kNumFeatures; ++j) s += w[j] * x[i][j];
            if (y[i] * s < 1.0) {
                for (std::size_t j = 0; j < kNumFeatures; ++j) grad[j] -= y[i] * x[i][j];
                grad_b -= y[i];
            }
        }
        for (std::size_t j = 0; j < kNumFeatures; ++j)
            w[j] -= eta * (lambda * w[j] + grad[j] / static_cast<double>(n));
        b -= eta * grad_b / static_cast<double>(n);

        const double obj = hinge_objective(x, y, w, b, lambda);
        if (obj < best_obj) {
            best_obj = obj;
            best_w = w;
            best_b = b;
        }
        if (t % checkpoint == 0) m.objective_history.push_back(best_obj);
    }

    m.weights = best_w;
    m.bias = best_b;
    m.trained = true;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = m.bias;
        for (std::size_t j = 0; j < kNumFeatures; ++j) s += m.weights[j] * x[i][j];
        const bool genuine_pred = s > 0.0;
        if (genuine_pred == (y[i] > 0.0)) ++correct;
    }
    m.training_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    return m;
}

Classification classify(const ClassifierModel& model, const FeatureVector& f) {
    if (!model.trained) throw std::invalid_argument("classify: model is not trained");
    const auto raw = f.as_array();
    double s = model.bias;
    for (std::size_t j = 0; j < kNumFeatures; ++j)
        s += model.weights[j] * (raw[j] - model.feature_mean[j]) / model.feature_std[j];
    Classification c;
    c.score = s;
    c.label = s > 0.0 ? Verdict::genuine : Verdict::attack;  // boundary fails safe
    return c;
}

void save_model(const ClassifierModel& model, const std::string& path) {
    if (!model.trained) throw std::invalid_argument("save_model: refusing to save an untrained model");
    nlohmann::json j;
    j["format"] = kModelFormat;
    j["features"] = FeatureVector::names();
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    j["feature_mean"] = model.feature_mean;
    j["feature_std"] = model.feature_std;
    j["dropped_features"] = model.dropped_features;
    j["training_accuracy"] = model.training_accuracy;
    write_text_file(path, j.dump(2) + "\n");
}

ClassifierModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("model: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("model: " + path + ": " + e.what());
    }
    if (j.value("format", std::string()) != kModelFormat)
        throw std::runtime_error("model: " + path + ": unknown format id");
    const auto stored = j.at("features").get<std::vector<std::string>>();
    const auto& expected = FeatureVector::names();
    if (stored.size() != expected.size() ||
        !std::equal(stored.begin(), stored.end(), expected.begin()))
        throw std::runtime_error("model: " + path +
                                 ": feature list does not match this build; retrain");
    ClassifierModel m;
    const auto wv = j.at("weights").get<std::vector<double>>();
    const auto mv = j.at("feature_mean").get<std::vector<double>>();
    const auto sv = j.at("feature_std").get<std::vector<double>>();
    if (wv.size() != kNumFeatures || mv.size() != kNumFeatures || sv.size() != kNumFeatures)
        throw std::runtime_error("model: " + path + ": wrong vector lengths");
    std::copy(wv.begin(), wv.end(), m.weights.begin());
    std::copy(mv.begin(), mv.end(), m.feature_mean.begin());
    std::copy(sv.begin(), sv.end(), m.feature_std.begin());
    m.bias = j.at("bias").get<double>();
    m.dropped_features = j.value("dropped_features", std::vector<std::string>{});
    m.training_accuracy = j.value("training_accuracy", 0.0);
    m.trained = true;
    return m;
}

Waveform cancel_injection(const Waveform& wideband, double band_lo, double band_hi) {
    validate(wideband, "cancel_injection");
    const double nyq = wideband.nyquist();
    const double hi = band_hi > 0.0 ? std::min(band_hi, nyq) : nyq;
    if (!(band_lo > 0.0 && band_lo < hi))
        throw std::invalid_argument("cancel_injection: need 0 < band_lo < band_hi <= Nyquist");

    // Carrier hunt on a hann spectrum of the whole clip.
    const Spectrum s = spectrum(wideband, Window::hann, [&] {
        std::size_t p = 1;
        while (p < wideband.size()) p <<= 1;
        return p;
    }());
    std::vector<double> band_db;
    std::size_t best = 0;
    bool found = false;
    for (std::size_t k = 0; k < s.bin_freqs.size(); ++k) {
        if (s.bin_freqs[k] < band_lo || s.bin_freqs[k] > hi) continue;
        band_db.push_back(to_db(s.magnitudes[k]));
        if (!found || s.magnitudes[k] > s.magnitudes[best]) {
            best = k;
            found = true;
        }
    }
    if (!found) return wideband;
    std::nth_element(band_db.begin(), band_db.begin() + static_cast<std::ptrdiff_t>(band_db.size() / 2),
                     band_db.end());
    const double median_db = band_db[band_db.size() / 2];
    const double peak_db = to_db(s.magnitudes[best]);
    // Both a relative and an absolute gate: quiet clips have numerically tiny
    // ultrasound bins whose ratios are meaningless.
    if (peak_db < median_db + 10.0 || peak_db < -60.0) return wideband;
    const double fc = s.bin_freqs[best];

    const double audible_cutoff = 20000.0;
    const double transition = 2000.0;
    if (audible_cutoff + transition >= nyq) return wideband;  // nothing above the audible band

    // Quadrature envelope of the carrier band: I and Q keep the full
    // low-passed envelope (no DC removal here; the envelope's mean carries
    // half of the demodulated fundamental). I^2 + Q^2 is proportional to
    // envelope^2 independent of carrier phase, which is exactly the baseband
    // a square-law front end injects: h1, h2, and the DC pedestal share one
    // scale factor, so a single least-squares gain cancels them together.
    const std::size_t n = wideband.size();
    Waveform i_part, q_part;
    i_part.sample_rate = q_part.sample_rate = wideband.sample_rate;
    i_part.samples.resize(n);
    q_part.samples.resize(n);
    const double w0 = 2.0 * kPi * fc / wideband.sample_rate;
    for (std::size_t i = 0; i < n; ++i) {
        i_part.samples[i] = wideband.samples[i] * std::cos(w0 * static_cast<double>(i));
        q_part.samples[i] = wideband.samples[i] * std::sin(w0 * static_cast<double>(i));
    }
    i_part = fir_lowpass(i_part, audible_cutoff, transition);
    q_part = fir_lowpass(q_part, audible_cutoff, transition);

    Waveform envelope_sq;
    envelope_sq.sample_rate = wideband.sample_rate;
    envelope_sq.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        envelope_sq.samples[i] = i_part.samples[i] * i_part.samples[i] +
                                 q_part.samples[i] * q_part.samples[i];
    // Squaring doubles the bandwidth; refit the reference to the audible band
    // the subtraction target lives in. The matching DC blocker on both sides
    // keeps the gain fit insensitive to unrelated recording bias.
    const Waveform demod =
        dc_block(fir_lowpass(envelope_sq, audible_cutoff, transition));
    const Waveform audible = dc_block(fir_lowpass(wideband, audible_cutoff, transition));

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += audible.samples[i] * demod.samples[i];
        den += demod.samples[i] * demod.samples[i];
    }
    if (den < kEps) return wideband;
    const double alpha = num / den;

    Waveform out;
    out.sample_rate = wideband.sample_rate;
    out.label = wideband.label;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.samples[i] = audible.samples[i] - alpha * demod.samples[i];
    return out;
}

std::vector<CorpusClip> make_detection_corpus(int per_class, std::uint64_t seed) {
    if (per_class < 1) throw std::invalid_argument("make_detection_corpus: per_class must be >= 1");

    MicrophoneModel linear_mic = mic_profile("flat");
    linear_mic.gain_quadratic = 0.0;
    const MicrophoneModel attack_mic = mic_profile("flat");
    const ChannelModel channel = scene_channel("office");

    std::vector<CorpusClip> corpus;
    for (int i = 0; i < per_class; ++i) {
        const std::uint64_t clip_seed = seed + static_cast<std::uint64_t>(i);
        const Waveform voice = make_voice_command(clip_seed, 192000.0);

        CorpusClip g;
        g.genuine = true;
        g.seed = clip_seed;
        g.audio = normalized(
            capture(apply_channel(voice, channel, clip_seed), linear_mic, clip_seed), 0.5);
        g.audio.label = "genuine-" + std::to_string(clip_seed);
        corpus.push_back(std::move(g));

        ModulationParams p;
        p.depth = 1.0;
        p.inaudible = true;
        CorpusClip r;
        r.genuine = false;
        r.seed = clip_seed;
        r.audio = normalized(
            capture(apply_channel(am_modulate(voice, p), channel, clip_seed), attack_mic,
                    clip_seed),
            0.5);
        r.audio.label = "recovered-" + std::to_string(clip_seed);
        corpus.push_back(std::move(r));
    }
    return corpus;
}

}  // namespace ultrasim
