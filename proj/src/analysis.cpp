#include "ultrasim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ultrasim/dsp.hpp"
#include "ultrasim/fft.hpp"

namespace ultrasim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLogFloor = 1e-12;  // filterbank energies are clamped here before log

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

MfccMatrix mfcc(const Waveform& w, const MfccConfig& cfg) {
    validate(w, "mfcc");
    if (cfg.n_coeffs < 1 || cfg.n_mel_filters < cfg.n_coeffs)
        throw std::invalid_argument("mfcc: need 1 <= n_coeffs <= n_mel_filters");
    if (!(cfg.frame_len > cfg.hop && cfg.hop > 0.0))
        throw std::invalid_argument("mfcc: need frame_len > hop > 0");
    const std::size_t frame = static_cast<std::size_t>(std::llround(cfg.frame_len * w.sample_rate));
    const std::size_t hop = static_cast<std::size_t>(std::llround(cfg.hop * w.sample_rate));
    if (w.size() < frame)
        throw std::invalid_argument("mfcc: input shorter than one frame (" +
                                    std::to_string(w.duration()) + " s < " +
                                    std::to_string(cfg.frame_len) + " s)");
    const double fmax = cfg.fmax > 0.0 ? std::min(cfg.fmax, w.nyquist()) : w.nyquist();
    if (!(cfg.fmin >= 0.0 && cfg.fmin < fmax))
        throw std::invalid_argument("mfcc: need 0 <= fmin < fmax <= Nyquist");

    // Pre-emphasis over the whole signal.
    std::vector<double> x(w.size());
    x[0] = w.samples[0];
    for (std::size_t i = 1; i < w.size(); ++i)
        x[i] = w.samples[i] - cfg.pre_emphasis * w.samples[i - 1];

    const std::size_t nfft = next_pow2(frame);
    const std::size_t n_bins = nfft / 2 + 1;
    const double df = w.sample_rate / static_cast<double>(nfft);

    // HTK-style triangular mel filterbank.
    const int nf = cfg.n_mel_filters;
    std::vector<double> mel_edges(static_cast<std::size_t>(nf) + 2);
    const double mel_lo = hz_to_mel(cfg.fmin), mel_hi = hz_to_mel(fmax);
    for (int i = 0; i < nf + 2; ++i)
        mel_edges[static_cast<std::size_t>(i)] =
            mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / static_cast<double>(nf + 1));
    std::vector<std::vector<double>> fbank(static_cast<std::size_t>(nf),
                                           std::vector<double>(n_bins, 0.0));
    for (int m = 0; m < nf; ++m) {
        const double lo = mel_edges[static_cast<std::size_t>(m)];
        const double mid = mel_edges[static_cast<std::size_t>(m) + 1];
        const double hi = mel_edges[static_cast<std::size_t>(m) + 2];
        for (std::size_t k = 0; k < n_bins; ++k) {
            const double f = df * static_cast<double>(k);
            if (f > lo && f < mid)
                fbank[static_cast<std::size_t>(m)][k] = (f - lo) / (mid - lo);
            else if (f >= mid && f < hi)
                fbank[static_cast<std::size_t>(m)][k] = (hi - f) / (hi - mid);
        }
    }

    std::vector<double> win(frame);
    for (std::size_t i = 0; i < frame; ++i)
        win[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                      static_cast<double>(frame - 1));

    // Orthonormal DCT-II matrix rows for c0..c(n_coeffs-1).
    std::vector<std::vector<double>> dct(static_cast<std::size_t>(cfg.n_coeffs),
                                         std::vector<double>(static_cast<std::size_t>(nf)));
    for (int c = 0; c < cfg.n_coeffs; ++c) {
        const double norm = c == 0 ? std::sqrt(1.0 / nf) : std::sqrt(2.0 / nf);
        for (int m = 0; m < nf; ++m)
            dct[static_cast<std::size_t>(c)][static_cast<std::size_t>(m)] =
                norm * std::cos(kPi * c * (m + 0.5) / nf);
    }

    const std::size_t n_frames = 1 + (w.size() - frame) / hop;
    MfccMatrix out(n_frames, std::vector<double>(static_cast<std::size_t>(cfg.n_coeffs)));
    std::vector<double> buf(nfft);
    for (std::size_t fr = 0; fr < n_frames; ++fr) {
        std::fill(buf.begin(), buf.end(), 0.0);
        const std::size_t off = fr * hop;
        for (std::size_t i = 0; i < frame; ++i) buf[i] = x[off + i] * win[i];
        const auto spec = fft_real(buf);
        std::vector<double> power(n_bins);
        for (std::size_t k = 0; k < n_bins; ++k) power[k] = std::norm(spec[k]);
        std::vector<double> logmel(static_cast<std::size_t>(nf));
        for (int m = 0; m < nf; ++m) {
            double e = 0.0;
            for (std::size_t k = 0; k < n_bins; ++k)
                e += fbank[static_cast<std::size_t>(m)][k] * power[k];
            logmel[static_cast<std::size_t>(m)] = std::log(std::max(e, kLogFloor));
        }
        for (int c = 0; c < cfg.n_coeffs; ++c) {
            double acc = 0.0;
            for (int m = 0; m < nf; ++m)
                acc += dct[static_cast<std::size_t>(c)][static_cast<std::size_t>(m)] *
                       logmel[static_cast<std::size_t>(m)];
            out[fr][static_cast<std::size_t>(c)] = acc;
        }
    }
    return out;
}

namespace {

// Euclidean c1..c(n-1) distance scaled to the conventional dB form.
double mcd_local(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 1; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return 10.0 / std::log(10.0) * std::sqrt(2.0 * s);
}

}  // namespace

double mcd(const MfccMatrix& ref, const MfccMatrix& test) {
    if (ref.empty() || test.empty()) throw std::invalid_argument("mcd: empty MFCC matrix");
    const std::size_t nc = ref.front().size();
    for (const auto& row : ref)
        if (row.size() != nc) throw std::invalid_argument("mcd: ragged reference matrix");
    for (const auto& row : test)
        if (row.size() != nc)
            throw std::invalid_argument("mcd: coefficient count mismatch (" +
                                        std::to_string(row.size()) + " vs " + std::to_string(nc) +
                                        ")");

    const std::size_t n = ref.size(), m = test.size();
    const double inf = std::numeric_limits<double>::infinity();
    // acc = cumulative DTW cost, len = aligned pairs along the chosen path.
    std::vector<std::vector<double>> acc(n, std::vector<double>(m, inf));
    std::vector<std::vector<std::size_t>> len(n, std::vector<std::size_t>(m, 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double d = mcd_local(ref[i], test[j]);
            if (i == 0 && j == 0) {
                acc[i][j] = d;
                len[i][j] = 1;
                continue;
            }
            // Symmetric steps; diagonal preferred on ties to keep mcd(X,Y)
            // == mcd(Y,X).
            double best = inf;
            std::size_t best_len = 0;
            if (i > 0 && j > 0 && acc[i - 1][j - 1] < best) {
                best = acc[i - 1][j - 1];
                best_len = len[i - 1][j - 1];
            }
            if (i > 0 && acc[i - 1][j] < best) {
                best = acc[i - 1][j];
                best_len = len[i - 1][j];
            }
            if (j > 0 && acc[i][j - 1] < best) {
                best = acc[i][j - 1];
                best_len = len[i][j - 1];
            }
            acc[i][j] = best + d;
            len[i][j] = best_len + 1;
        }
    }
    return acc[n - 1][m - 1] / static_cast<double>(len[n - 1][m - 1]);
}

namespace {

struct HarmonicTriple {
    double h1 = 0.0, h2 = 0.0, h3 = 0.0;
};

HarmonicTriple measure_harmonics(const Waveform& captured, double f_m) {
    HarmonicTriple t;
    const auto hs = harmonic_amplitudes(captured, f_m, 3);
    for (const auto& h : hs) {
        if (h.k == 1) t.h1 = h.amplitude;
        if (h.k == 2) t.h2 = h.amplitude;
        if (h.k == 3) t.h3 = h.amplitude;
    }
    return t;
}

double dominant_freq(const Waveform& w) {
    const Spectrum s = amplitude_spectrum(w);
    std::size_t best = 1;
    for (std::size_t k = 1; k < s.magnitudes.size(); ++k)
        if (s.magnitudes[k] > s.magnitudes[best]) best = k;
    return s.bin_freqs[best];
}

std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

bool point_feasible(const HarmonicTriple& t, const MicrophoneModel& mic) {
    return t.h1 > t.h2 && t.h1 > t.h3 && to_db(t.h1) > mic.noise_floor_dbfs + 10.0;
}

}  // namespace

SweepReport sweep_carrier(const Waveform& baseband, const MicrophoneModel& mic,
                          const std::vector<double>& fc_grid, const ModulationParams& tmpl,
                          double out_rate) {
    if (fc_grid.empty()) throw std::invalid_argument("sweep_carrier: empty carrier grid");
    validate(baseband, "sweep_carrier");
    validate(mic);

    const double w_hz = tmpl.baseband_bandwidth > 0.0 ? tmpl.baseband_bandwidth
                                                      : estimate_bandwidth(baseband);
    const double f_m = dominant_freq(baseband);

    SweepReport rep;
    rep.axis = SweepAxis::carrier;
    for (double fc : sorted_unique(fc_grid)) {
        ModulationParams p = tmpl;
        p.carrier_freq = fc;
        p.baseband_bandwidth = w_hz;
        if (!check_inaudibility(p).ok) {
            rep.skipped_audible.push_back(fc);
            continue;
        }
        p.inaudible = true;
        const Waveform cap = capture(am_modulate(baseband, p, out_rate), mic);
        const HarmonicTriple t = measure_harmonics(cap, f_m);
        rep.points.push_back({fc, t.h1, t.h2, t.h3, point_feasible(t, mic)});
    }
    for (const SweepPoint& pt : rep.points)
        if (pt.feasible) rep.feasible_values.push_back(pt.value);
    const PrimeCarrier pc = prime_fc(rep);
    rep.prime_fc = pc.value;
    rep.prime_degraded = pc.degraded;
    return rep;
}

SweepReport sweep_depth(const Waveform& baseband, const MicrophoneModel& mic,
                        const std::vector<double>& depth_grid, const ModulationParams& tmpl,
                        double out_rate) {
    if (depth_grid.empty()) throw std::invalid_argument("sweep_depth: empty depth grid");
    validate(baseband, "sweep_depth");
    validate(mic);
    for (double d : depth_grid)
        if (!(d >= 0.0 && d <= 1.0))
            throw std::invalid_argument("sweep_depth: depth " + std::to_string(d) +
                                        " outside [0, 1]");

    const double f_m = dominant_freq(baseband);
    SweepReport rep;
    rep.axis = SweepAxis::depth;
    for (double depth : sorted_unique(depth_grid)) {
        ModulationParams p = tmpl;
        p.depth = depth;
        const Waveform cap = capture(am_modulate(baseband, p, out_rate), mic);
        const HarmonicTriple t = measure_harmonics(cap, f_m);
        rep.points.push_back({depth, t.h1, t.h2, t.h3, point_feasible(t, mic)});
    }
    for (const SweepPoint& pt : rep.points)
        if (pt.feasible) rep.feasible_values.push_back(pt.value);
    return rep;
}

PrimeCarrier prime_fc(const SweepReport& report) {
    if (report.axis != SweepAxis::carrier)
        throw std::invalid_argument("prime_fc: report is not a carrier sweep");
    PrimeCarrier out;
    if (report.points.empty()) return out;

    const SweepPoint* best = nullptr;
    for (const SweepPoint& pt : report.points) {
        if (!(pt.h1 > pt.h2 && pt.h1 > pt.h3)) continue;
        if (best == nullptr || pt.h1 > best->h1) best = &pt;  // ties keep the lower f_c
    }
    if (best == nullptr) {
        out.degraded = true;
        for (const SweepPoint& pt : report.points)
            if (best == nullptr || pt.h1 > best->h1) best = &pt;
    }
    out.value = best->value;
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open " + path + " for writing");
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!os) throw std::runtime_error("write failed: " + path);
    }
    std::filesystem::rename(tmp, path);
}

void write_sweep_csv(const SweepReport& report, const std::string& path) {
    std::string out = "axis_value,h1,h2,h3,feasible\n";
    char line[160];
    for (const SweepPoint& pt : report.points) {
        std::snprintf(line, sizeof line, "%.6f,%.9e,%.9e,%.9e,%d\n", pt.value, pt.h1, pt.h2,
                      pt.h3, pt.feasible ? 1 : 0);
        out += line;
    }
    if (report.axis == SweepAxis::carrier) {
        if (report.prime_fc) {
            std::snprintf(line, sizeof line, "prime_fc,%.6f,,,%s\n", *report.prime_fc,
                          report.prime_degraded ? "degraded" : "");
            out += line;
        } else {
            out += "prime_fc,absent,,,\n";
        }
    }
    write_text_file(path, out);
}

void write_mfcc_csv(const MfccMatrix& m, const std::string& path) {
    std::string out;
    char cell[40];
    for (const auto& row : m) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(cell, sizeof cell, i + 1 == row.size() ? "%.9e\n" : "%.9e,", row[i]);
            out += cell;
        }
    }
    write_text_file(path, out);
}

}  // namespace ultrasim
