#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ultrasim/mic_model.hpp"
#include "ultrasim/waveform.hpp"

namespace ultrasim {

inline constexpr std::size_t kNumFeatures = 15;

// Time- and frequency-domain summary of one clip. The 500-1000 Hz band
// ratio is the headline discriminator between genuine and demodulated audio.
struct FeatureVector {
    double rms = 0.0;
    double peak = 0.0;
    double crest_factor = 0.0;
    double zero_crossing_rate = 0.0;          // fraction of adjacent sign flips, [0, 1]
    double short_time_energy_variance = 0.0;  // var(frame energy)/mean^2, scale-free
    double spectral_centroid = 0.0;           // Hz
    double spectral_rolloff_95 = 0.0;         // Hz
    double spectral_flatness = 0.0;           // geometric/arithmetic power mean, [0, 1]
    double band_energy_ratio_500_1000 = 0.0;  // E[500,1000] / E[0,500]
    double band_energy_ratio_1000_2000 = 0.0; // E[1000,2000] / E[0,500]
    double high_band_fraction_above_4k = 0.0; // E[4000,Nyquist] / total
    double spectral_entropy = 0.0;            // normalized to [0, 1]
    double dominant_peak_freq = 0.0;          // Hz, DC excluded
    double dominant_peak_prominence = 0.0;    // dB over the spectrum median
    double spectral_slope = 0.0;              // dB per kHz, least squares

    std::array<double, kNumFeatures> as_array() const;
    static const std::array<std::string, kNumFeatures>& names();
};

// Requires at least 0.2 s at 8 kHz or better; silent input is rejected.
FeatureVector extract_features(const Waveform& w);

struct ClassifierModel {
    std::array<double, kNumFeatures> weights{};
    double bias = 0.0;
    std::array<double, kNumFeatures> feature_mean{};
    std::array<double, kNumFeatures> feature_std{};
    std::vector<std::string> dropped_features;  // constant across training data
    bool trained = false;
    double training_accuracy = 0.0;
    std::vector<double> objective_history;  // incumbent hinge objective per checkpoint
};

// Linear max-margin separator (hinge loss + L2, deterministic full-batch
// sub-gradient descent; the incumbent with the lowest objective is kept, so
// objective_history is non-increasing). genuine is the positive class.
// The seed is accepted for interface stability; training has no random
// component. Throws when a class has fewer than two samples or the class
// feature means coincide.
ClassifierModel train_classifier(const std::vector<FeatureVector>& genuine,
                                 const std::vector<FeatureVector>& recovered,
                                 std::uint64_t seed = 0, int iterations = 20000);

enum class Verdict { genuine, attack };

struct Classification {
    Verdict label = Verdict::attack;
    double score = 0.0;  // signed margin; positive means genuine
};

// score = w . normalize(f) + b; a score of exactly zero labels attack
// (fail-safe boundary convention). Untrained models are rejected.
Classification classify(const ClassifierModel& model, const FeatureVector& f);

// Versioned JSON persistence; load verifies the format id and the stored
// feature-name list against this build.
void save_model(const ClassifierModel& model, const std::string& path);
ClassifierModel load_model(const std::string& path);

// Removes injected baseband from a wideband (pre-LPF) signal: finds the
// strongest ultrasonic carrier in [band_lo, band_hi] (band_hi 0 = Nyquist);
// if its peak clears the band median by 10 dB and an absolute -60 dBFS
// floor, builds a squared-envelope reference (I^2 + Q^2 of the carrier band,
// the exact baseband shape a square-law front end injects) and subtracts the
// least-squares-scaled reference from the audible band. Without a detected
// carrier the input is returned unchanged, which makes the operation
// idempotent on clean audio.
Waveform cancel_injection(const Waveform& wideband, double band_lo = 20000.0,
                          double band_hi = 0.0);

struct CorpusClip {
    Waveform audio;
    bool genuine = false;
    std::uint64_t seed = 0;
};

// Matched synthetic corpus: per seed, one voice command rendered two ways.
// genuine = voice -> channel -> linear capture (B = 0); recovered = the same
// voice AM-modulated at 25 kHz -> channel -> square-law capture. Clips are
// peak-normalized to 0.5 so loudness alone cannot separate the classes.
std::vector<CorpusClip> make_detection_corpus(int per_class, std::uint64_t seed);

}  // namespace ultrasim
