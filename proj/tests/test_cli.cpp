#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ultrasim/defense.hpp"
#include "ultrasim/wav_io.hpp"
#include "ultrasim/waveform.hpp"

// End-to-end checks against the installed binary; ULTRASIM_CLI_PATH is
// injected by the build.

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int status = -1;
    std::string output;  // stdout and stderr interleaved
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(ULTRASIM_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    RunResult r;
    if (!pipe) return r;
    char buf[4096];
    while (fgets(buf, sizeof buf, pipe)) r.output += buf;
    const int rc = pclose(pipe);
    r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return r;
}

std::string work_dir() {
    const std::string dir = "/tmp/ultrasim_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("help exists and names the tool") {
    const RunResult r = run_cli("--help");
    CHECK(r.status == 0);
    CHECK(r.output.find("ultrasim") != std::string::npos);
    CHECK(r.output.find("modulate") != std::string::npos);
}

TEST_CASE("unknown flags are rejected") {
    CHECK(run_cli("modulate --tone 2000 --frobnicate 7").status != 0);
    CHECK(run_cli("no-such-command").status != 0);
}

TEST_CASE("modulate writes the attack waveform and a summary") {
    const std::string dir = work_dir();
    const std::string out = dir + "/mod.wav";
    const RunResult r =
        run_cli("modulate --tone 2000 --fc 25000 --duration 0.5 --out " + out);
    REQUIRE(r.status == 0);
    CHECK(r.output.find("command=modulate") != std::string::npos);
    CHECK(r.output.find("fc=25000") != std::string::npos);
    CHECK(r.output.find("inaudible_ok=1") != std::string::npos);

    const ultrasim::Waveform w = ultrasim::read_wav(out);
    CHECK(w.sample_rate == 192000.0);
    CHECK(w.size() == 96000);
}

TEST_CASE("modulate refuses an audible configuration") {
    const std::string out = work_dir() + "/bad.wav";
    const RunResult r = run_cli("modulate --tone 2000 --fc 21000 --inaudible --duration 0.2 --out " +
                                out);
    CHECK(r.status != 0);
    CHECK(r.output.find("20000") != std::string::npos);
    CHECK(!fs::exists(out));  // no partial artifact
}

TEST_CASE("identical invocations produce identical bytes") {
    const std::string dir = work_dir();
    const std::string a = dir + "/det_a.wav", b = dir + "/det_b.wav";
    REQUIRE(run_cli("modulate --synth --seed 3 --fc 26000 --out " + a).status == 0);
    REQUIRE(run_cli("modulate --synth --seed 3 --fc 26000 --out " + b).status == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(!slurp(a).empty());
}

TEST_CASE("capture honors its seed") {
    const std::string dir = work_dir();
    const std::string mod = dir + "/cap_in.wav";
    REQUIRE(run_cli("modulate --tone 2000 --fc 25000 --duration 0.5 --out " + mod).status == 0);

    const std::string c1 = dir + "/cap1.wav", c2 = dir + "/cap2.wav", c3 = dir + "/cap3.wav";
    const RunResult r1 = run_cli("capture --in " + mod + " --seed 5 --out " + c1);
    REQUIRE(r1.status == 0);
    CHECK(r1.output.find("command=capture") != std::string::npos);
    CHECK(r1.output.find("adc_rate=44100") != std::string::npos);
    REQUIRE(run_cli("capture --in " + mod + " --seed 5 --out " + c2).status == 0);
    REQUIRE(run_cli("capture --in " + mod + " --seed 6 --out " + c3).status == 0);
    CHECK(slurp(c1) == slurp(c2));
    CHECK(slurp(c1) != slurp(c3));
}

TEST_CASE("sweep-fc reports the selective mic sweet spot") {
    const std::string csv = work_dir() + "/sweep.csv";
    const RunResult r = run_cli(
        "sweep-fc --grid 23000:33000:1000 --mic selective --tone 2000 --duration 0.5 --out " +
        csv);
    REQUIRE(r.status == 0);
    CHECK(r.output.find("command=sweep-fc") != std::string::npos);
    CHECK(r.output.find("prime_fc=28000") != std::string::npos);
    CHECK(r.output.find("degraded=0") != std::string::npos);

    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "axis_value,h1,h2,h3,feasible");
    std::size_t rows = 0;
    bool footer = false;
    while (std::getline(in, line)) {
        if (line.rfind("prime_fc,", 0) == 0) footer = true;
        else if (!line.empty()) ++rows;
    }
    CHECK(rows == 11);
    CHECK(footer);
}

TEST_CASE("mcd of a file against itself is zero") {
    const std::string dir = work_dir();
    const std::string wav = dir + "/mcd_self.wav";
    REQUIRE(run_cli("modulate --synth --seed 4 --fc 25000 --out " + wav).status == 0);
    const RunResult r = run_cli("mcd --ref " + wav + " --test " + wav);
    REQUIRE(r.status == 0);
    CHECK(r.output.find("command=mcd value=0.0000") != std::string::npos);
}

TEST_CASE("spectrum writes its csv and finds the peak") {
    const std::string dir = work_dir();
    const std::string wav = dir + "/tone.wav";
    const std::string csv = dir + "/spec.csv";
    REQUIRE(run_cli("modulate --tone 3000 --fc 25000 --duration 0.5 --out " + wav).status == 0);
    const RunResult r = run_cli("spectrum --in " + wav + " --fft-size 16384 --out " + csv);
    REQUIRE(r.status == 0);
    CHECK(r.output.find("command=spectrum") != std::string::npos);
    // Carrier dominates; the reported peak sits on the nearest bin.
    const auto pos = r.output.find("peak_freq=");
    REQUIRE(pos != std::string::npos);
    const double peak = std::stod(r.output.substr(pos + 10));
    CHECK(std::abs(peak - 25000.0) <= 192000.0 / 16384.0);

    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "freq_hz,magnitude");
}

TEST_CASE("features prints all fifteen values and writes csv on request") {
    const std::string dir = work_dir();
    const std::string wav = dir + "/feat.wav";
    const std::string csv = dir + "/feat.csv";
    // A captured clip has plenty of audible content for the extractor.
    REQUIRE(run_cli("modulate --tone 900 --fc 25000 --duration 0.6 --out " + dir + "/fm.wav")
                .status == 0);
    REQUIRE(run_cli("capture --in " + dir + "/fm.wav --out " + wav).status == 0);
    const RunResult r = run_cli("features --in " + wav + " --out " + csv);
    REQUIRE(r.status == 0);
    for (const auto& name : ultrasim::FeatureVector::names())
        CHECK(r.output.find(" " + name + "=") != std::string::npos);

    std::ifstream in(csv);
    std::string header, data;
    std::getline(in, header);
    std::getline(in, data);
    CHECK(header.rfind("rms,", 0) == 0);
    CHECK(std::count(header.begin(), header.end(), ',') == 14);
    CHECK(std::count(data.begin(), data.end(), ',') == 14);
}

TEST_CASE("train and classify round trip through the model file") {
    const std::string dir = work_dir();
    const auto corpus = ultrasim::make_detection_corpus(3, 7);
    std::string manifest_text = "path,label\n";
    std::vector<std::pair<std::string, bool>> files;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const std::string path = dir + "/clip" + std::to_string(i) + ".wav";
        ultrasim::write_wav(path, corpus[i].audio, ultrasim::WavFormat::pcm16);
        manifest_text += path + "," + (corpus[i].genuine ? "genuine" : "recovered") + "\n";
        files.emplace_back(path, corpus[i].genuine);
    }
    const std::string manifest = dir + "/manifest.csv";
    std::ofstream(manifest) << manifest_text;

    const std::string model = dir + "/model.json";
    const RunResult t = run_cli("train --manifest " + manifest + " --iterations 4000 --out " +
                                model + " --eval-manifest " + manifest);
    REQUIRE(t.status == 0);
    CHECK(t.output.find("command=train genuine=3 attack=3") != std::string::npos);
    CHECK(t.output.find("eval_accuracy=1.0000") != std::string::npos);

    int correct = 0;
    for (const auto& [path, genuine] : files) {
        const RunResult c = run_cli("classify --model " + model + " --in " + path);
        REQUIRE(c.status == 0);
        const bool said_genuine = c.output.find("label=genuine") != std::string::npos;
        if (said_genuine == genuine) ++correct;
    }
    CHECK(correct == 6);
}

TEST_CASE("cancel flags a carrier and passes clean audio through") {
    const std::string dir = work_dir();
    const std::string mod = dir + "/cx_mod.wav";
    REQUIRE(run_cli("modulate --tone 2000 --fc 25000 --duration 0.5 --out " + mod).status == 0);
    const RunResult hit = run_cli("cancel --in " + mod + " --out " + dir + "/cx_out.wav");
    REQUIRE(hit.status == 0);
    CHECK(hit.output.find("carrier_detected=1") != std::string::npos);

    // A plain captured voice clip has no ultrasonic carrier left. Carrier at
    // 30 kHz: at 25 kHz the voice's lower sideband would dip under 20 kHz and
    // its surviving skirt would, correctly, trip the detector.
    REQUIRE(run_cli("modulate --synth --seed 8 --fc 30000 --out " + dir + "/cv_mod.wav").status == 0);
    REQUIRE(run_cli("capture --in " + dir + "/cv_mod.wav --out " + dir + "/cv_cap.wav").status ==
            0);
    const RunResult miss =
        run_cli("cancel --in " + dir + "/cv_cap.wav --out " + dir + "/cv_out.wav");
    REQUIRE(miss.status == 0);
    CHECK(miss.output.find("carrier_detected=0") != std::string::npos);
    // Pass-through means the samples survive the pcm16 rewrite bit-for-bit.
    const ultrasim::Waveform before = ultrasim::read_wav(dir + "/cv_cap.wav");
    const ultrasim::Waveform after = ultrasim::read_wav(dir + "/cv_out.wav");
    CHECK(before.samples == after.samples);
}
