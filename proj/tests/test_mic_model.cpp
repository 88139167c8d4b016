#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "ultrasim/dsp.hpp"
#include "ultrasim/mic_model.hpp"
#include "ultrasim/modulation.hpp"
#include "ultrasim/wav_io.hpp"
#include "ultrasim/waveform.hpp"

using namespace ultrasim;

namespace {

// Standard attack-at-the-diaphragm fixture: 2 kHz tone AM on a 25 kHz
// carrier, bin-aligned at 192 kHz.
Waveform attack_waveform(double depth, double incident_scale = 1.0) {
    const Waveform tone = make_tone(2000.0, 1.0, 1.0, 192000.0);
    ModulationParams p;
    p.carrier_freq = 25000.0;
    p.depth = depth;
    Waveform mod = am_modulate(tone, p);
    for (double& s : mod.samples) s *= incident_scale;
    return mod;
}

MicrophoneModel quiet_flat_mic() {
    MicrophoneModel mic = mic_profile("flat");
    mic.noise_floor_dbfs = -160.0;  // keep the reads clean for exact checks
    mic.adc_bits = 24;
    return mic;
}

}  // namespace

TEST_CASE("frequency response interpolates linearly in dB and holds its ends") {
    FreqResponse r;
    r.points = {{100.0, 0.0}, {200.0, -6.0}, {400.0, -6.0}};
    CHECK(r.gain_db_at(100.0) == doctest::Approx(0.0));
    CHECK(r.gain_db_at(150.0) == doctest::Approx(-3.0));
    CHECK(r.gain_db_at(200.0) == doctest::Approx(-6.0));
    CHECK(r.gain_db_at(300.0) == doctest::Approx(-6.0));
    CHECK(r.gain_db_at(10.0) == doctest::Approx(0.0));     // held below
    CHECK(r.gain_db_at(1000.0) == doctest::Approx(-6.0));  // held above
    CHECK(r.gain_at(150.0) == doctest::Approx(std::pow(10.0, -3.0 / 20.0)));
    CHECK(FreqResponse{}.gain_db_at(1234.0) == 0.0);  // empty = unity
}

TEST_CASE("built-in profiles have the advertised shapes") {
    const MicrophoneModel flat = mic_profile("flat");
    CHECK(flat.freq_response.gain_db_at(25000.0) == doctest::Approx(0.0));

    const MicrophoneModel sel = mic_profile("selective");
    CHECK(sel.freq_response.gain_db_at(28000.0) == doctest::Approx(8.0));
    CHECK(sel.freq_response.gain_db_at(28000.0) > sel.freq_response.gain_db_at(22000.0));

    const MicrophoneModel weak = mic_profile("weak");
    CHECK(weak.freq_response.gain_db_at(28000.0) < -10.0);
    CHECK(weak.freq_response.gain_db_at(1000.0) == doctest::Approx(0.0));

    CHECK_THROWS_AS(mic_profile("bogus"), std::invalid_argument);
}

TEST_CASE("linear microphone does not demodulate") {
    // With B = 0 the chain is linear; the only 2 kHz residue is the LPF
    // ringing against the abrupt carrier onset, ~75 dB below the square-law
    // product the nonlinear mic would put there.
    MicrophoneModel mic = quiet_flat_mic();
    mic.gain_quadratic = 0.0;
    const Waveform cap = capture(attack_waveform(1.0), mic, 1);
    CHECK(oracle::db(oracle::tone_amplitude(cap, 2000.0)) < -100.0);
}

TEST_CASE("square law demodulates at the closed form level") {
    // h1 = B * Ac^2 * m on a flat mic (unit incident scale).
    MicrophoneModel mic = quiet_flat_mic();
    const Waveform cap = capture(attack_waveform(1.0), mic, 1);
    const auto pred = oracle::square_law_baseband(0.1, 1.0, 0.5, 1.0);
    CHECK(oracle::tone_amplitude(cap, 2000.0) == doctest::Approx(pred.h1).epsilon(0.01));
}

TEST_CASE("second harmonic over fundamental equals a quarter of the depth") {
    MicrophoneModel mic = quiet_flat_mic();
    for (double m : {0.25, 0.5, 1.0}) {
        const Waveform cap = capture(attack_waveform(m), mic, 1);
        const double h1 = oracle::tone_amplitude(cap, 2000.0);
        const double h2 = oracle::tone_amplitude(cap, 4000.0);
        const auto pred = oracle::square_law_baseband(0.1, 1.0, 0.5, m);
        CHECK(h1 == doctest::Approx(pred.h1).epsilon(0.01));
        CHECK(h2 == doctest::Approx(pred.h2).epsilon(0.02));
        CHECK(h2 / h1 == doctest::Approx(m / 4.0).epsilon(0.02));
    }
}

TEST_CASE("demodulated level quadruples when the incident amplitude doubles") {
    MicrophoneModel mic = quiet_flat_mic();
    const Waveform lo = capture(attack_waveform(1.0, 0.25), mic, 1);
    const Waveform hi = capture(attack_waveform(1.0, 0.5), mic, 1);
    const double ratio =
        oracle::tone_amplitude(hi, 2000.0) / oracle::tone_amplitude(lo, 2000.0);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("sideband response gains steer the demodulated level") {
    // Boost the sidebands only: h1 scales by (g_l + g_u) / 2 against the
    // closed form, exercising the response interpolation inside capture.
    MicrophoneModel mic = quiet_flat_mic();
    mic.freq_response.points = {{22500.0, 0.0}, {23000.0, 6.0}, {23500.0, 0.0},
                                {26500.0, 0.0}, {27000.0, 6.0}, {27500.0, 0.0}};
    const Waveform cap = capture(attack_waveform(1.0), mic, 1);
    const double g = std::pow(10.0, 6.0 / 20.0);
    const auto pred = oracle::square_law_baseband(0.1, 1.0, 0.5, 1.0, 1.0, g, g);
    CHECK(oracle::tone_amplitude(cap, 2000.0) == doctest::Approx(pred.h1).epsilon(0.02));
}

TEST_CASE("capture rejects undersampled incident signals") {
    MicrophoneModel mic = quiet_flat_mic();  // breakpoints reach 48 kHz
    const Waveform low_rate = make_tone(2000.0, 0.5, 0.5, 44100.0);
    CHECK_THROWS_WITH_AS(capture(low_rate, mic), doctest::Contains("resample"),
                         std::invalid_argument);
}

TEST_CASE("adc quantization stays within one step and clamps at full scale") {
    MicrophoneModel mic = mic_profile("flat");
    mic.gain_quadratic = 0.0;
    mic.noise_floor_dbfs = -300.0;
    mic.adc_bits = 16;
    mic.lpf_cutoff = 18000.0;
    mic.coupling_hz = 0.0;  // DC-coupled: the input coupling would phase-shift
                            // the 1 kHz probe and mask the quantizer error
    const Waveform in = make_tone(1000.0, 0.5, 0.5, 192000.0);
    const Waveform cap = capture(in, mic, 1);
    // Round trip against an analytically known tone at the new rate.
    const Waveform ref = make_tone(1000.0, 0.5, 0.5, 44100.0);
    double worst = 0.0;
    for (std::size_t i = 2000; i + 2000 < std::min(cap.size(), ref.size()); ++i)
        worst = std::max(worst, std::abs(cap.samples[i] - ref.samples[i]));
    CHECK(worst < 2.0 / 32768.0 + 2e-3);  // quantizer step plus filter ripple

    // Drive the chain into clipping: output must remain in [-1, 1].
    Waveform loud = make_tone(1000.0, 0.9, 0.5, 192000.0);
    for (double& s : loud.samples) s *= 2.0;
    const Waveform clipped = capture(loud, mic, 1);
    // Acquisition noise lands after the quantizer, so allow its tiny excess.
    CHECK(peak_abs(clipped) <= 1.0 + 1e-9);
    CHECK(peak_abs(clipped) > 0.99);
}

TEST_CASE("acquisition noise floor lands at the configured rms") {
    MicrophoneModel mic = mic_profile("flat");
    mic.noise_floor_dbfs = -60.0;
    Waveform silence(std::vector<double>(192000, 0.0), 192000.0);
    const Waveform cap = capture(silence, mic, 7);
    CHECK(oracle::db(rms(cap)) == doctest::Approx(-60.0).epsilon(0.02));
}

TEST_CASE("capture is deterministic for a fixed seed") {
    MicrophoneModel mic = mic_profile("flat");
    const Waveform in = attack_waveform(1.0);
    const Waveform a = capture(in, mic, 42);
    const Waveform b = capture(in, mic, 42);
    const Waveform c = capture(in, mic, 43);
    CHECK(a.samples == b.samples);
    CHECK(a.samples != c.samples);
}

TEST_CASE("analog_frontend is the first two stages only") {
    MicrophoneModel mic = quiet_flat_mic();
    const Waveform in = attack_waveform(1.0);
    const Waveform front = analog_frontend(in, mic);
    // Same rate (no resample), carrier still present, demodulated term there.
    CHECK(front.sample_rate == 192000.0);
    CHECK(oracle::tone_amplitude(front, 25000.0) > 0.4);
    const auto pred = oracle::square_law_baseband(0.1, 1.0, 0.5, 1.0);
    CHECK(oracle::tone_amplitude(front, 2000.0) == doctest::Approx(pred.h1).epsilon(0.01));
}

TEST_CASE("channel applies inverse distance attenuation") {
    const Waveform in = make_tone(1000.0, 0.5, 0.5, 48000.0);
    ChannelModel ch;
    ch.ref_distance_m = 0.1;
    ch.distance_m = 1.0;  // 10x: -20 dB
    const Waveform out = apply_channel(in, ch, 1);
    CHECK(oracle::db(oracle::tone_amplitude(out, 1000.0)) ==
          doctest::Approx(oracle::db(0.05)).epsilon(0.01));
}

TEST_CASE("street scene is 20 dB louder than office") {
    const ChannelModel office = scene_channel("office");
    const ChannelModel street = scene_channel("street");
    CHECK(street.scene_noise_spl_db - office.scene_noise_spl_db == doctest::Approx(20.0));
    CHECK(scene_channel("cafe").scene_noise_spl_db == doctest::Approx(70.0));
    CHECK(scene_channel("none").scene_noise_spl_db <= 0.0);
    CHECK_THROWS_AS(scene_channel("forest"), std::invalid_argument);

    // And the injected noise actually lands at those levels.
    Waveform silence(std::vector<double>(48000, 0.0), 48000.0);
    const Waveform in_office = apply_channel(silence, office, 3);
    const Waveform in_street = apply_channel(silence, street, 3);
    CHECK(oracle::db(rms(in_street)) - oracle::db(rms(in_office)) ==
          doctest::Approx(20.0).epsilon(0.02));
}

TEST_CASE("spl calibration is anchored at 94 dB == -30 dBFS") {
    CHECK(spl_to_dbfs(94.0) == doctest::Approx(-30.0));
    CHECK(spl_to_dbfs(114.0) == doctest::Approx(-10.0));
    CHECK(spl_to_amplitude(124.0) == doctest::Approx(1.0));
    CHECK(spl_to_amplitude(94.0) == doctest::Approx(std::pow(10.0, -30.0 / 20.0)));
}

TEST_CASE("mic json round trip preserves every field") {
    MicrophoneModel mic = mic_profile("selective");
    mic.gain_quadratic = 0.2;
    mic.adc_rate = 48000.0;
    mic.adc_bits = 24;
    mic.noise_floor_dbfs = -80.0;

    const std::string path = "/tmp/ultrasim_test_mic.json";
    {
        std::ofstream out(path);
        out << "{\n  \"name\": \"selective\",\n  \"gain_linear\": 1.0,\n"
            << "  \"gain_quadratic\": 0.2,\n  \"lpf_cutoff\": 20000.0,\n"
            << "  \"lpf_transition\": 2000.0,\n  \"adc_rate\": 48000.0,\n"
            << "  \"adc_bits\": 24,\n  \"noise_floor_dbfs\": -80.0,\n"
            << "  \"freq_response\": [";
        for (std::size_t i = 0; i < mic.freq_response.points.size(); ++i) {
            if (i) out << ", ";
            out << "[" << mic.freq_response.points[i].first << ", "
                << mic.freq_response.points[i].second << "]";
        }
        out << "]\n}\n";
    }
    const MicrophoneModel back = load_mic(path);
    CHECK(back.name == mic.name);
    CHECK(back.gain_quadratic == doctest::Approx(0.2));
    CHECK(back.adc_rate == doctest::Approx(48000.0));
    CHECK(back.adc_bits == 24);
    CHECK(back.noise_floor_dbfs == doctest::Approx(-80.0));
    REQUIRE(back.freq_response.points.size() == mic.freq_response.points.size());
    for (std::size_t i = 0; i < back.freq_response.points.size(); ++i) {
        CHECK(back.freq_response.points[i].first ==
              doctest::Approx(mic.freq_response.points[i].first));
        CHECK(back.freq_response.points[i].second ==
              doctest::Approx(mic.freq_response.points[i].second));
    }
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_mic("/tmp/ultrasim_missing_mic.json"), std::runtime_error);
}

TEST_CASE("model validation rejects nonsense") {
    MicrophoneModel mic = mic_profile("flat");
    mic.adc_bits = 1;
    CHECK_THROWS_AS(validate(mic), std::invalid_argument);
    mic = mic_profile("flat");
    mic.adc_rate = -44100.0;
    CHECK_THROWS_AS(validate(mic), std::invalid_argument);
    mic = mic_profile("flat");
    mic.freq_response.points = {{2000.0, 0.0}, {1000.0, 0.0}};  // not increasing
    CHECK_THROWS_AS(validate(mic), std::invalid_argument);

    ChannelModel ch;
    ch.distance_m = 0.0;
    CHECK_THROWS_AS(validate(ch), std::invalid_argument);
    ch = ChannelModel{};
    ch.ref_distance_m = -1.0;
    CHECK_THROWS_AS(validate(ch), std::invalid_argument);
}

TEST_CASE("harmonic_amplitudes reads the demodulated series") {
    MicrophoneModel mic = quiet_flat_mic();
    const Waveform cap = capture(attack_waveform(1.0), mic, 1);
    const auto h = harmonic_amplitudes(cap, 2000.0, 3);
    REQUIRE(h.size() == 3);
    CHECK(h[0].k == 1);
    CHECK(h[1].k == 2);
    CHECK(h[2].k == 3);
    const auto pred = oracle::square_law_baseband(0.1, 1.0, 0.5, 1.0);
    CHECK(h[0].amplitude == doctest::Approx(pred.h1).epsilon(0.01));
    CHECK(h[1].amplitude == doctest::Approx(pred.h2).epsilon(0.02));
    // A pure square law has no third harmonic; only residue remains.
    CHECK(h[2].amplitude < pred.h1 * 0.01);
}

TEST_CASE("harmonic_amplitudes truncates at Nyquist") {
    const Waveform w = make_tone(9000.0, 0.5, 0.5, 44100.0);
    const auto h = harmonic_amplitudes(w, 9000.0, 5);  // 27 kHz on would alias
    REQUIRE(h.size() == 2);
    CHECK(h.back().k == 2);
}
