// ultrasim: experiment runner for the ultrasonic-injection simulator.
// Subcommands: modulate, capture, simulate, spectrum, sweep-fc, sweep-depth,
// mcd, features, train, classify, cancel. Every run prints one
// machine-readable `key=value` summary line on stdout; every failure exits
// non-zero without leaving partial artifacts.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ultrasim/analysis.hpp"
#include "ultrasim/defense.hpp"
#include "ultrasim/dsp.hpp"
#include "ultrasim/mic_model.hpp"
#include "ultrasim/modulation.hpp"
#include "ultrasim/voice.hpp"
#include "ultrasim/wav_io.hpp"
#include "ultrasim/waveform.hpp"

namespace us = ultrasim;

namespace {

std::vector<double> parse_grid(const std::string& spec) {
    double start = 0.0, stop = 0.0, step = 0.0;
    char extra = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf%c", &start, &stop, &step, &extra) != 3)
        throw std::invalid_argument("grid must be start:stop:step, got '" + spec + "'");
    if (step <= 0.0) throw std::invalid_argument("grid step must be > 0");
    if (stop < start) throw std::invalid_argument("grid stop must be >= start");
    std::vector<double> grid;
    for (double v = start; v <= stop + step * 1e-9; v += step) grid.push_back(v);
    return grid;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(cell);
        rows.push_back(std::move(row));
    }
    return rows;
}

us::MicrophoneModel resolve_mic(const std::string& spec) {
    if (std::filesystem::exists(spec)) return us::load_mic(spec);
    return us::mic_profile(spec);
}

void write_spectrum_csv(const us::Spectrum& s, const std::string& path) {
    std::string out = "freq_hz,magnitude\n";
    char line[80];
    for (std::size_t k = 0; k < s.bin_freqs.size(); ++k) {
        std::snprintf(line, sizeof line, "%.6f,%.9e\n", s.bin_freqs[k], s.magnitudes[k]);
        out += line;
    }
    us::write_text_file(path, out);
}

// Shared options for commands that start from a baseband signal.
struct BasebandSource {
    std::string in_path;
    double tone_freq = 0.0;
    bool synth = false;
    std::string segments_path;
    double duration = 1.0;
    double rate = 192000.0;
    double crossfade = 0.01;

    void add_options(CLI::App* cmd) {
        auto* in = cmd->add_option("--in", in_path, "Input WAV file");
        auto* tone = cmd->add_option("--tone", tone_freq, "Generate a pure tone at this frequency (Hz)");
        auto* synth_f = cmd->add_flag("--synth", synth, "Generate a synthetic voice command (uses --seed)");
        auto* seg = cmd->add_option("--segments", segments_path,
                                    "Segment manifest CSV (path,start_s,end_s,label) to splice");
        in->excludes(tone)->excludes(synth_f)->excludes(seg);
        tone->excludes(synth_f)->excludes(seg);
        synth_f->excludes(seg);
        cmd->add_option("--duration", duration, "Generated signal length, seconds")
            ->capture_default_str();
        cmd->add_option("--rate", rate, "Working sample rate, Hz")->capture_default_str();
        cmd->add_option("--crossfade", crossfade, "Segment crossfade, seconds")
            ->capture_default_str();
    }

    us::Waveform load(std::uint64_t seed) const {
        if (!in_path.empty()) return us::read_wav(in_path);
        if (tone_freq > 0.0) return us::make_tone(tone_freq, 1.0, duration, rate);
        if (synth) return us::make_voice_command(seed, rate);
        if (!segments_path.empty()) {
            std::vector<us::Segment> segs;
            for (const auto& row : parse_csv(segments_path)) {
                if (row.size() != 4)
                    throw std::runtime_error(segments_path +
                                             ": manifest rows must be path,start_s,end_s,label");
                if (row[0] == "path") continue;  // header
                us::Segment s;
                s.source = us::read_wav(row[0]);
                s.start = std::stod(row[1]);
                s.end = std::stod(row[2]);
                s.label = row[3];
                segs.push_back(std::move(s));
            }
            return us::concatenate_segments(segs, crossfade);
        }
        throw std::runtime_error("no input: give one of --in, --tone, --synth, --segments");
    }
};

struct ModulationFlags {
    us::ModulationParams params;
    void add_options(CLI::App* cmd, bool fc_required) {
        auto* fc = cmd->add_option("--fc", params.carrier_freq, "Carrier frequency f_c, Hz");
        if (fc_required)
            fc->required();
        else
            fc->capture_default_str();
        cmd->add_option("--depth", params.depth, "Modulation depth m in [0,1]")
            ->capture_default_str();
        cmd->add_option("--amp", params.carrier_amplitude, "Carrier amplitude A_c")
            ->capture_default_str();
        cmd->add_option("--bandwidth", params.baseband_bandwidth,
                        "Declared baseband bandwidth w, Hz (0 = measure)")
            ->capture_default_str();
        cmd->add_flag("--inaudible", params.inaudible,
                      "Require f_c - w > 20 kHz and fail otherwise");
    }
};

int cmd_modulate(const BasebandSource& src, const ModulationFlags& mf, std::uint64_t seed,
                 const std::string& out, bool pcm16) {
    const us::Waveform baseband = src.load(seed);
    us::ModulationParams p = mf.params;
    if (p.baseband_bandwidth <= 0.0) p.baseband_bandwidth = us::estimate_bandwidth(baseband);
    const us::Waveform mod = us::am_modulate(baseband, p, src.rate);
    us::write_wav(out, mod, pcm16 ? us::WavFormat::pcm16 : us::WavFormat::float32);
    const us::InaudibilityReport rep = us::check_inaudibility(p);
    std::printf(
        "command=modulate fc=%g depth=%g amp=%g bandwidth=%g lowest_freq=%g inaudible_ok=%d "
        "rate=%g samples=%zu out=%s\n",
        p.carrier_freq, p.depth, p.carrier_amplitude, p.baseband_bandwidth, rep.lowest_freq,
        rep.ok ? 1 : 0, src.rate, mod.size(), out.c_str());
    return 0;
}

int cmd_capture(const std::string& in_path, const std::string& mic_spec, double work_rate,
                std::uint64_t seed, const std::string& out, bool float32) {
    us::Waveform in = us::read_wav(in_path);
    if (in.sample_rate != work_rate) in = us::resample(in, work_rate);
    const us::MicrophoneModel mic = resolve_mic(mic_spec);
    const us::Waveform cap = us::capture(in, mic, seed);
    us::write_wav(out, cap, float32 ? us::WavFormat::float32 : us::WavFormat::pcm16);
    std::printf("command=capture mic=%s adc_rate=%g adc_bits=%d samples=%zu peak_db=%.2f out=%s\n",
                mic.name.c_str(), mic.adc_rate, mic.adc_bits, cap.size(),
                us::to_db(us::peak_abs(cap)), out.c_str());
    return 0;
}

int cmd_simulate(const BasebandSource& src, const ModulationFlags& mf, const std::string& mic_spec,
                 const std::string& scene, double distance, double ref_distance,
                 std::optional<double> spl, std::uint64_t seed, const std::string& out,
                 const std::string& csv) {
    const us::Waveform baseband = src.load(seed);
    us::ModulationParams p = mf.params;
    if (p.baseband_bandwidth <= 0.0) p.baseband_bandwidth = us::estimate_bandwidth(baseband);
    us::Waveform mod = us::am_modulate(baseband, p, src.rate);

    us::ChannelModel ch = us::scene_channel(scene, distance);
    ch.ref_distance_m = ref_distance;
    if (spl) {
        ch.source_spl_db = *spl;
        mod = us::normalized(mod, us::spl_to_amplitude(*spl));
    }
    const us::Waveform at_mic = us::apply_channel(mod, ch, seed);
    const us::MicrophoneModel mic = resolve_mic(mic_spec);
    const us::Waveform cap = us::capture(at_mic, mic, seed);
    us::write_wav(out, cap, us::WavFormat::pcm16);
    write_spectrum_csv(us::spectrum(cap), csv);
    std::printf(
        "command=simulate fc=%g depth=%g mic=%s scene=%s distance=%g peak_db=%.2f out=%s "
        "csv=%s\n",
        p.carrier_freq, p.depth, mic.name.c_str(), scene.c_str(), distance,
        us::to_db(us::peak_abs(cap)), out.c_str(), csv.c_str());
    return 0;
}

int cmd_spectrum(const std::string& in_path, const std::string& window, std::size_t fft_size,
                 const std::string& out) {
    const us::Waveform in = us::read_wav(in_path);
    const us::Window win = [&] {
        if (window == "hann") return us::Window::hann;
        if (window == "rect") return us::Window::rect;
        throw std::invalid_argument("window must be hann or rect, got '" + window + "'");
    }();
    const us::Spectrum s = us::spectrum(in, win, fft_size);
    write_spectrum_csv(s, out);
    std::size_t best = 0;
    for (std::size_t k = 1; k < s.magnitudes.size(); ++k)
        if (s.magnitudes[k] > s.magnitudes[best]) best = k;
    std::printf("command=spectrum peak_freq=%g peak_db=%.2f resolution=%g bins=%zu out=%s\n",
                s.bin_freqs[best], us::to_db(s.magnitudes[best]), s.resolution,
                s.bin_freqs.size(), out.c_str());
    return 0;
}

void print_sweep_summary(const char* name, const us::SweepReport& rep, const std::string& out) {
    std::string prime = "n/a";
    if (rep.axis == us::SweepAxis::carrier) {
        if (rep.prime_fc) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%g", *rep.prime_fc);
            prime = buf;
        } else {
            prime = "absent";
        }
    }
    std::printf("command=%s points=%zu skipped=%zu feasible=%zu prime_fc=%s degraded=%d out=%s\n",
                name, rep.points.size(), rep.skipped_audible.size(), rep.feasible_values.size(),
                prime.c_str(), rep.prime_degraded ? 1 : 0, out.c_str());
}

int cmd_sweep_fc(const std::string& grid_spec, const std::string& mic_spec, double tone,
                 double duration, double rate, const us::ModulationParams& tmpl,
                 const std::string& out) {
    const us::Waveform baseband = us::make_tone(tone, 1.0, duration, rate);
    const us::MicrophoneModel mic = resolve_mic(mic_spec);
    const us::SweepReport rep =
        us::sweep_carrier(baseband, mic, parse_grid(grid_spec), tmpl, rate);
    us::write_sweep_csv(rep, out);
    print_sweep_summary("sweep-fc", rep, out);
    return 0;
}

int cmd_sweep_depth(const std::string& grid_spec, const std::string& mic_spec, double tone,
                    double duration, double rate, const us::ModulationParams& tmpl,
                    const std::string& out) {
    const us::Waveform baseband = us::make_tone(tone, 1.0, duration, rate);
    const us::MicrophoneModel mic = resolve_mic(mic_spec);
    const us::SweepReport rep = us::sweep_depth(baseband, mic, parse_grid(grid_spec), tmpl, rate);
    us::write_sweep_csv(rep, out);
    print_sweep_summary("sweep-depth", rep, out);
    return 0;
}

int cmd_mcd(const std::string& ref_path, const std::string& test_path, us::MfccConfig cfg) {
    us::Waveform ref = us::read_wav(ref_path);
    us::Waveform test = us::read_wav(test_path);
    // MFCC frame geometry must match for the distance to mean anything.
    const double rate = std::min(ref.sample_rate, test.sample_rate);
    ref = us::resample(ref, rate);
    test = us::resample(test, rate);
    const us::MfccMatrix a = us::mfcc(ref, cfg);
    const us::MfccMatrix b = us::mfcc(test, cfg);
    std::printf("command=mcd value=%.4f frames_ref=%zu frames_test=%zu rate=%g\n",
                us::mcd(a, b), a.size(), b.size(), rate);
    return 0;
}

int cmd_features(const std::string& in_path, const std::string& out) {
    const us::FeatureVector f = us::extract_features(us::read_wav(in_path));
    const auto vals = f.as_array();
    const auto& names = us::FeatureVector::names();
    if (!out.empty()) {
        std::string csv;
        for (std::size_t i = 0; i < names.size(); ++i)
            csv += names[i] + (i + 1 == names.size() ? "\n" : ",");
        char cell[40];
        for (std::size_t i = 0; i < vals.size(); ++i) {
            std::snprintf(cell, sizeof cell, i + 1 == vals.size() ? "%.9e\n" : "%.9e,", vals[i]);
            csv += cell;
        }
        us::write_text_file(out, csv);
    }
    std::printf("command=features");
    for (std::size_t i = 0; i < names.size(); ++i)
        std::printf(" %s=%.6g", names[i].c_str(), vals[i]);
    if (!out.empty()) std::printf(" out=%s", out.c_str());
    std::printf("\n");
    return 0;
}

// Manifest rows: path,label with label in {genuine, attack, recovered}.
void load_corpus(const std::string& manifest, std::vector<us::FeatureVector>& genuine,
                 std::vector<us::FeatureVector>& attack) {
    for (const auto& row : parse_csv(manifest)) {
        if (row.size() != 2)
            throw std::runtime_error(manifest + ": manifest rows must be path,label");
        if (row[0] == "path") continue;
        const us::FeatureVector f = us::extract_features(us::read_wav(row[0]));
        if (row[1] == "genuine")
            genuine.push_back(f);
        else if (row[1] == "attack" || row[1] == "recovered")
            attack.push_back(f);
        else
            throw std::runtime_error(manifest + ": unknown label '" + row[1] +
                                     "' (expected genuine, attack, or recovered)");
    }
}

int cmd_train(const std::string& manifest, const std::string& eval_manifest,
              std::uint64_t seed, int iterations, const std::string& out) {
    std::vector<us::FeatureVector> genuine, attack;
    load_corpus(manifest, genuine, attack);
    const us::ClassifierModel model = us::train_classifier(genuine, attack, seed, iterations);
    us::save_model(model, out);
    std::printf("command=train genuine=%zu attack=%zu training_accuracy=%.4f dropped=%zu out=%s",
                genuine.size(), attack.size(), model.training_accuracy,
                model.dropped_features.size(), out.c_str());
    if (!eval_manifest.empty()) {
        std::vector<us::FeatureVector> eg, ea;
        load_corpus(eval_manifest, eg, ea);
        std::size_t tp = 0, tn = 0;
        for (const auto& f : eg)
            if (us::classify(model, f).label == us::Verdict::genuine) ++tp;
        for (const auto& f : ea)
            if (us::classify(model, f).label == us::Verdict::attack) ++tn;
        const double acc = static_cast<double>(tp + tn) /
                           static_cast<double>(std::max<std::size_t>(1, eg.size() + ea.size()));
        std::printf(" eval_accuracy=%.4f eval_tp=%zu/%zu eval_tn=%zu/%zu", acc, tp, eg.size(),
                    tn, ea.size());
    }
    std::printf("\n");
    return 0;
}

int cmd_classify(const std::string& model_path, const std::string& in_path) {
    const us::ClassifierModel model = us::load_model(model_path);
    const us::Classification c = us::classify(model, us::extract_features(us::read_wav(in_path)));
    std::printf("command=classify label=%s score=%.6f\n",
                c.label == us::Verdict::genuine ? "genuine" : "attack", c.score);
    return 0;
}

int cmd_cancel(const std::string& in_path, const std::string& band_spec, const std::string& out,
               bool float32) {
    double lo = 20000.0, hi = 0.0;
    if (!band_spec.empty()) {
        char extra = 0;
        if (std::sscanf(band_spec.c_str(), "%lf:%lf%c", &lo, &hi, &extra) != 2)
            throw std::invalid_argument("band must be lo:hi (hi 0 = Nyquist), got '" + band_spec +
                                        "'");
    }
    const us::Waveform in = us::read_wav(in_path);
    const us::Waveform cleaned = us::cancel_injection(in, lo, hi);
    const bool acted = cleaned.samples != in.samples;
    us::write_wav(out, cleaned, float32 ? us::WavFormat::float32 : us::WavFormat::pcm16);
    std::printf("command=cancel carrier_detected=%d samples=%zu out=%s\n", acted ? 1 : 0,
                cleaned.size(), out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ultrasonic AM voice-injection simulator and defense toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Config file (key=value, [subcommand] sections); flags override");
    app.fallthrough();

    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Global RNG seed")->capture_default_str();

    int exit_code = 0;
    auto guard = [&exit_code](auto fn) {
        return [fn, &exit_code]() {
            try {
                exit_code = fn();
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                exit_code = 1;
            }
        };
    };

    // modulate
    {
        auto* cmd = app.add_subcommand("modulate", "Build an AM attack waveform from a baseband");
        auto src = std::make_shared<BasebandSource>();
        auto mf = std::make_shared<ModulationFlags>();
        auto out = std::make_shared<std::string>("modulated.wav");
        auto pcm16 = std::make_shared<bool>(false);
        src->add_options(cmd);
        mf->add_options(cmd, true);
        cmd->add_option("--out", *out, "Output WAV")->capture_default_str();
        cmd->add_flag("--pcm16", *pcm16, "Write PCM16 instead of float32");
        cmd->callback(guard([=, &seed]() { return cmd_modulate(*src, *mf, seed, *out, *pcm16); }));
    }
    // capture
    {
        auto* cmd = app.add_subcommand("capture", "Run a WAV through the microphone capture chain");
        auto in = std::make_shared<std::string>();
        auto mic = std::make_shared<std::string>("flat");
        auto rate = std::make_shared<double>(192000.0);
        auto out = std::make_shared<std::string>("captured.wav");
        auto f32 = std::make_shared<bool>(false);
        cmd->add_option("--in", *in, "Input WAV")->required();
        cmd->add_option("--mic", *mic, "Mic profile name (flat|selective|weak) or JSON path")
            ->capture_default_str();
        cmd->add_option("--rate", *rate, "Working rate before capture, Hz")->capture_default_str();
        cmd->add_option("--out", *out, "Output WAV")->capture_default_str();
        cmd->add_flag("--float32", *f32, "Write float32 instead of PCM16");
        cmd->callback(guard([=, &seed]() { return cmd_capture(*in, *mic, *rate, seed, *out, *f32); }));
    }
    // simulate
    {
        auto* cmd = app.add_subcommand(
            "simulate", "Full attack path: modulate, acoustic channel, capture, spectrum");
        auto src = std::make_shared<BasebandSource>();
        auto mf = std::make_shared<ModulationFlags>();
        auto mic = std::make_shared<std::string>("flat");
        auto scene = std::make_shared<std::string>("none");
        auto distance = std::make_shared<double>(0.1);
        auto ref_distance = std::make_shared<double>(0.1);
        auto spl = std::make_shared<double>(0.0);
        auto has_spl = std::make_shared<bool>(false);
        auto out = std::make_shared<std::string>("captured.wav");
        auto csv = std::make_shared<std::string>("spectrum.csv");
        src->add_options(cmd);
        mf->add_options(cmd, true);
        cmd->add_option("--mic", *mic, "Mic profile name or JSON path")->capture_default_str();
        cmd->add_option("--scene", *scene, "Noise scene: office|cafe|street|none")
            ->capture_default_str();
        cmd->add_option("--distance", *distance, "Speaker-to-mic distance, m")
            ->capture_default_str();
        cmd->add_option("--ref-distance", *ref_distance, "Reference distance, m")
            ->capture_default_str();
        auto* spl_opt = cmd->add_option("--spl", *spl,
                                        "Source SPL at the reference distance, dB (sets level)");
        cmd->add_option("--out", *out, "Captured WAV")->capture_default_str();
        cmd->add_option("--csv", *csv, "Captured spectrum CSV")->capture_default_str();
        cmd->callback(guard([=, &seed]() {
            std::optional<double> spl_val;
            if (spl_opt->count() > 0) spl_val = *spl;
            (void)has_spl;
            return cmd_simulate(*src, *mf, *mic, *scene, *distance, *ref_distance, spl_val, seed,
                                *out, *csv);
        }));
    }
    // spectrum
    {
        auto* cmd = app.add_subcommand("spectrum", "Export the magnitude spectrum of a WAV");
        auto in = std::make_shared<std::string>();
        auto window = std::make_shared<std::string>("hann");
        auto fft_size = std::make_shared<std::size_t>(65536);
        auto out = std::make_shared<std::string>("spectrum.csv");
        cmd->add_option("--in", *in, "Input WAV")->required();
        cmd->add_option("--window", *window, "Analysis window: hann|rect")->capture_default_str();
        cmd->add_option("--fft-size", *fft_size, "FFT size (power of two)")->capture_default_str();
        cmd->add_option("--out", *out, "Spectrum CSV")->capture_default_str();
        cmd->callback(guard([=]() { return cmd_spectrum(*in, *window, *fft_size, *out); }));
    }
    // sweep-fc / sweep-depth share most flags
    auto add_sweep = [&](const char* name, const char* help, bool carrier_axis) {
        auto* cmd = app.add_subcommand(name, help);
        auto grid = std::make_shared<std::string>(carrier_axis ? "20000:48000:500" : "0.1:1.0:0.1");
        auto mic = std::make_shared<std::string>("flat");
        auto tone = std::make_shared<double>(400.0);
        auto duration = std::make_shared<double>(0.5);
        auto rate = std::make_shared<double>(192000.0);
        auto mf = std::make_shared<ModulationFlags>();
        auto out = std::make_shared<std::string>(carrier_axis ? "sweep_fc.csv" : "sweep_depth.csv");
        cmd->add_option("--grid", *grid, "Grid start:stop:step")->capture_default_str();
        cmd->add_option("--mic", *mic, "Mic profile name or JSON path")->capture_default_str();
        cmd->add_option("--tone", *tone, "Baseband tone frequency, Hz")->capture_default_str();
        cmd->add_option("--duration", *duration, "Baseband duration, s")->capture_default_str();
        cmd->add_option("--rate", *rate, "Working rate, Hz")->capture_default_str();
        mf->add_options(cmd, false);
        cmd->add_option("--out", *out, "Sweep CSV")->capture_default_str();
        cmd->callback(guard([=]() {
            return carrier_axis
                       ? cmd_sweep_fc(*grid, *mic, *tone, *duration, *rate, mf->params, *out)
                       : cmd_sweep_depth(*grid, *mic, *tone, *duration, *rate, mf->params, *out);
        }));
    };
    add_sweep("sweep-fc", "Harmonic amplitudes across a carrier-frequency grid", true);
    add_sweep("sweep-depth", "Harmonic amplitudes across a modulation-depth grid", false);
    // mcd
    {
        auto* cmd = app.add_subcommand("mcd", "Mel-cepstral distortion between two WAVs");
        auto ref = std::make_shared<std::string>();
        auto test = std::make_shared<std::string>();
        auto cfg = std::make_shared<us::MfccConfig>();
        cmd->add_option("--ref", *ref, "Reference WAV")->required();
        cmd->add_option("--test", *test, "Test WAV")->required();
        cmd->add_option("--coeffs", cfg->n_coeffs, "MFCC coefficient count")->capture_default_str();
        cmd->add_option("--filters", cfg->n_mel_filters, "Mel filter count")->capture_default_str();
        cmd->add_option("--frame-len", cfg->frame_len, "Frame length, s")->capture_default_str();
        cmd->add_option("--hop", cfg->hop, "Hop, s")->capture_default_str();
        cmd->add_option("--fmax", cfg->fmax, "Filterbank upper edge, Hz (0 = Nyquist)")
            ->capture_default_str();
        cmd->callback(guard([=]() { return cmd_mcd(*ref, *test, *cfg); }));
    }
    // features
    {
        auto* cmd = app.add_subcommand("features", "Extract the 15 detection features from a WAV");
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        cmd->add_option("--in", *in, "Input WAV")->required();
        cmd->add_option("--out", *out, "Optional feature CSV");
        cmd->callback(guard([=]() { return cmd_features(*in, *out); }));
    }
    // train
    {
        auto* cmd = app.add_subcommand("train", "Train the genuine-vs-attack classifier");
        auto manifest = std::make_shared<std::string>();
        auto eval_manifest = std::make_shared<std::string>();
        auto iterations = std::make_shared<int>(20000);
        auto out = std::make_shared<std::string>("model.json");
        cmd->add_option("--manifest", *manifest, "Training corpus CSV (path,label)")->required();
        cmd->add_option("--eval-manifest", *eval_manifest, "Held-out corpus CSV to score");
        cmd->add_option("--iterations", *iterations, "Training iterations")->capture_default_str();
        cmd->add_option("--out", *out, "Model JSON")->capture_default_str();
        cmd->callback(
            guard([=, &seed]() { return cmd_train(*manifest, *eval_manifest, seed, *iterations, *out); }));
    }
    // classify
    {
        auto* cmd = app.add_subcommand("classify", "Label a WAV with a trained model");
        auto model = std::make_shared<std::string>();
        auto in = std::make_shared<std::string>();
        cmd->add_option("--model", *model, "Model JSON")->required();
        cmd->add_option("--in", *in, "Input WAV")->required();
        cmd->callback(guard([=]() { return cmd_classify(*model, *in); }));
    }
    // cancel
    {
        auto* cmd = app.add_subcommand("cancel", "Subtract injected baseband from a wideband WAV");
        auto in = std::make_shared<std::string>();
        auto band = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>("cleaned.wav");
        auto f32 = std::make_shared<bool>(false);
        cmd->add_option("--in", *in, "Wideband (pre-LPF) WAV")->required();
        cmd->add_option("--band", *band, "Carrier search band lo:hi, Hz (hi 0 = Nyquist)");
        cmd->add_option("--out", *out, "Cleaned WAV")->capture_default_str();
        cmd->add_flag("--float32", *f32, "Write float32 instead of PCM16");
        cmd->callback(guard([=]() { return cmd_cancel(*in, *band, *out, *f32); }));
    }

    CLI11_PARSE(app, argc, argv);
    return exit_code;
}
