#include "ultrasim/mic_model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

#include "ultrasim/dsp.hpp"
#include "ultrasim/fft.hpp"

namespace ultrasim {

namespace {

// 94 dB SPL at the diaphragm maps to -30 dBFS; one constant anchors every
// SPL-denominated experiment to the digital domain.
constexpr double kSplToDbfsOffset = -124.0;

nlohmann::json parse_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(std::string(what) + ": cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string(what) + ": " + path + ": " + e.what());
    }
    return j;
}

}  // namespace

double FreqResponse::gain_db_at(double hz) const {
    if (points.empty()) return 0.0;
    if (hz <= points.front().first) return points.front().second;
    if (hz >= points.back().first) return points.back().second;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (hz <= points[i].first) {
            const auto& [f0, g0] = points[i - 1];
            const auto& [f1, g1] = points[i];
            const double u = (hz - f0) / (f1 - f0);
            return g0 + u * (g1 - g0);
        }
    }
    return points.back().second;
}

double FreqResponse::gain_at(double hz) const { return from_db(gain_db_at(hz)); }

double FreqResponse::highest_breakpoint() const {
    return points.empty() ? 0.0 : points.back().first;
}

void validate(const MicrophoneModel& mic) {
    if (!(mic.gain_linear > 0.0))
        throw std::invalid_argument("mic '" + mic.name + "': gain_linear must be > 0");
    if (mic.gain_quadratic < 0.0)
        throw std::invalid_argument("mic '" + mic.name + "': gain_quadratic must be >= 0");
    if (!(mic.adc_rate > 0.0))
        throw std::invalid_argument("mic '" + mic.name + "': adc_rate must be > 0");
    if (!(mic.lpf_cutoff > 0.0) || mic.lpf_cutoff > mic.adc_rate / 2.0)
        throw std::invalid_argument("mic '" + mic.name +
                                    "': lpf_cutoff must lie in (0, adc_rate/2]");
    if (mic.coupling_hz < 0.0 || mic.coupling_hz >= mic.lpf_cutoff)
        throw std::invalid_argument("mic '" + mic.name +
                                    "': coupling_hz must lie in [0, lpf_cutoff)");
    if (mic.adc_bits < 2 || mic.adc_bits > 32)
        throw std::invalid_argument("mic '" + mic.name + "': adc_bits must lie in [2, 32]");
    for (std::size_t i = 1; i < mic.freq_response.points.size(); ++i) {
        if (!(mic.freq_response.points[i].first > mic.freq_response.points[i - 1].first))
            throw std::invalid_argument("mic '" + mic.name +
                                        "': freq_response breakpoints must be strictly increasing");
    }
}

MicrophoneModel mic_profile(const std::string& name) {
    MicrophoneModel mic;
    mic.name = name;
    if (name == "flat") {
        mic.freq_response.points = {{20.0, 0.0}, {48000.0, 0.0}};
    } else if (name == "selective") {
        mic.freq_response.points = {{20.0, 0.0},    {20000.0, 0.0}, {25000.0, 2.0},
                                    {28000.0, 8.0}, {31000.0, 2.0}, {36000.0, 0.0},
                                    {48000.0, 0.0}};
    } else if (name == "weak") {
        mic.freq_response.points = {
            {20.0, 0.0}, {20000.0, 0.0}, {28000.0, -16.0}, {38000.0, -30.0}, {48000.0, -40.0}};
    } else {
        throw std::invalid_argument("unknown mic profile '" + name +
                                    "' (expected flat, selective, or weak)");
    }
    return mic;
}

MicrophoneModel load_mic(const std::string& path) {
    const nlohmann::json j = parse_json_file(path, "mic config");
    MicrophoneModel mic;
    mic.name = j.value("name", std::string("custom"));
    mic.gain_linear = j.value("gain_linear", mic.gain_linear);
    mic.gain_quadratic = j.value("gain_quadratic", mic.gain_quadratic);
    mic.lpf_cutoff = j.value("lpf_cutoff", mic.lpf_cutoff);
    mic.lpf_transition = j.value("lpf_transition", mic.lpf_transition);
    mic.coupling_hz = j.value("coupling_hz", mic.coupling_hz);
    mic.adc_rate = j.value("adc_rate", mic.adc_rate);
    mic.adc_bits = j.value("adc_bits", mic.adc_bits);
    mic.noise_floor_dbfs = j.value("noise_floor_dbfs", mic.noise_floor_dbfs);
    if (j.contains("freq_response")) {
        mic.freq_response.points.clear();
        for (const auto& pt : j.at("freq_response")) {
            if (!pt.is_array() || pt.size() != 2)
                throw std::runtime_error("mic config: " + path +
                                         ": freq_response entries must be [hz, gain_db] pairs");
            mic.freq_response.points.emplace_back(pt[0].get<double>(), pt[1].get<double>());
        }
    }
    validate(mic);
    return mic;
}

void validate(const ChannelModel& ch) {
    if (!(ch.ref_distance_m > 0.0) || !(ch.distance_m > 0.0))
        throw std::invalid_argument("channel: distances must be > 0");
    if (!std::isfinite(ch.source_spl_db) || !std::isfinite(ch.scene_noise_spl_db))
        throw std::invalid_argument("channel: SPL values must be finite");
}

ChannelModel scene_channel(const std::string& scene, double distance_m) {
    ChannelModel ch;
    ch.distance_m = distance_m;
    if (scene == "office") {
        ch.scene_noise_spl_db = 60.0;
    } else if (scene == "cafe") {
        ch.scene_noise_spl_db = 70.0;
    } else if (scene == "street") {
        ch.scene_noise_spl_db = 80.0;
    } else if (scene == "none") {
        ch.scene_noise_spl_db = 0.0;
    } else {
        throw std::invalid_argument("unknown scene '" + scene +
                                    "' (expected office, cafe, street, or none)");
    }
    validate(ch);
    return ch;
}

ChannelModel load_channel(const std::string& path) {
    const nlohmann::json j = parse_json_file(path, "channel config");
    ChannelModel ch;
    ch.source_spl_db = j.value("source_spl_db", ch.source_spl_db);
    ch.ref_distance_m = j.value("ref_distance_m", ch.ref_distance_m);
    ch.distance_m = j.value("distance_m", ch.distance_m);
    ch.scene_noise_spl_db = j.value("scene_noise_spl_db", ch.scene_noise_spl_db);
    if (j.contains("scene")) {
        const ChannelModel preset = scene_channel(j.at("scene").get<std::string>(), ch.distance_m);
        ch.scene_noise_spl_db = preset.scene_noise_spl_db;
    }
    validate(ch);
    return ch;
}

double spl_to_dbfs(double spl_db) { return spl_db + kSplToDbfsOffset; }

double spl_to_amplitude(double spl_db) { return from_db(spl_to_dbfs(spl_db)); }

Waveform apply_channel(const Waveform& w, const ChannelModel& ch, std::uint64_t seed) {
    validate(w, "apply_channel");
    validate(ch);
    const double scale = ch.ref_distance_m / ch.distance_m;
    Waveform out = w;
    for (double& v : out.samples) v *= scale;
    if (ch.scene_noise_spl_db > 0.0)
        add_noise(out, from_db(spl_to_dbfs(ch.scene_noise_spl_db)), seed);
    return out;
}

namespace {

// Zero-phase application of the response curve: scale each FFT bin by the
// interpolated magnitude gain and invert.
Waveform apply_response(const Waveform& w, const FreqResponse& resp) {
    if (resp.points.empty()) return w;
    const std::size_t n = w.size();
    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = w.samples[i];
    auto spec = fft(buf);
    const double df = w.sample_rate / static_cast<double>(n);
    for (std::size_t k = 0; k <= n / 2; ++k) {
        const double g = resp.gain_at(df * static_cast<double>(k));
        spec[k] *= g;
        if (k != 0 && k != n - k) spec[n - k] *= g;  // keep conjugate symmetry
    }
    const auto back = ifft(spec);
    Waveform out;
    out.sample_rate = w.sample_rate;
    out.label = w.label;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = back[i].real();
    return out;
}

void square_law(Waveform& w, double a, double b) {
    for (double& s : w.samples) s = a * s + b * s * s;
}

void quantize(Waveform& w, int bits) {
    const double scale = static_cast<double>((1LL << (bits - 1)) - 1);
    for (double& s : w.samples)
        s = std::round(std::clamp(s, -1.0, 1.0) * scale) / scale;
}

}  // namespace

Waveform analog_frontend(const Waveform& incident, const MicrophoneModel& mic) {
    validate(incident, "analog_frontend");
    validate(mic);
    Waveform w = apply_response(incident, mic.freq_response);
    square_law(w, mic.gain_linear, mic.gain_quadratic);
    return w;
}

Waveform capture(const Waveform& incident, const MicrophoneModel& mic, std::uint64_t seed) {
    validate(incident, "capture");
    validate(mic);
    const double top = mic.freq_response.highest_breakpoint();
    if (incident.sample_rate < 2.0 * top)
        throw std::invalid_argument(
            "capture: incident sample rate " + std::to_string(incident.sample_rate) +
            " must be at least twice the highest response breakpoint (" + std::to_string(top) +
            " Hz); resample the input first");

    Waveform w = analog_frontend(incident, mic);
    // Input coupling: the quadratic term biases the preamp with a DC offset
    // comparable to the demodulated signal itself, and also drops slow
    // envelope-squared wander into the sub-bass region. A real front end is
    // AC-coupled well above DC, so strip both before filtering/conversion.
    // coupling_hz = 0 models a DC-coupled lab chain.
    if (mic.coupling_hz > 0.0) w = dc_block(w, mic.coupling_hz);
    w = fir_lowpass(w, mic.lpf_cutoff, mic.lpf_transition);
    w = resample(w, mic.adc_rate);
    quantize(w, mic.adc_bits);
    add_noise(w, from_db(mic.noise_floor_dbfs), seed);
    return w;
}

std::vector<HarmonicAmplitude> harmonic_amplitudes(const Waveform& captured, double f_m,
                                                   int n_harmonics) {
    validate(captured, "harmonic_amplitudes");
    if (!(f_m > 0.0)) throw std::invalid_argument("harmonic_amplitudes: f_m must be > 0");
    if (n_harmonics < 1) throw std::invalid_argument("harmonic_amplitudes: need n_harmonics >= 1");
    std::vector<HarmonicAmplitude> out;
    for (int k = 1; k <= n_harmonics; ++k) {
        const double f = f_m * k;
        if (f >= captured.nyquist()) {
            std::cerr << "harmonic_amplitudes: harmonic " << k << " (" << f
                      << " Hz) at or above Nyquist, truncating\n";
            break;
        }
        out.push_back({k, amplitude_at(captured, f)});
    }
    return out;
}

}  // namespace ultrasim
