#include "ultrasim/wav_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <vector>

namespace ultrasim {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw std::runtime_error("wav: " + path + ": " + why);
}

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}
void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

Waveform read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 12) fail(path, "truncated header");
    if (std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        fail(path, "not a RIFF/WAVE file");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;
    const unsigned char* data = nullptr;
    std::size_t data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* hdr = bytes.data() + pos;
        const std::uint32_t chunk_len = read_u32(hdr + 4);
        const unsigned char* body = hdr + 8;
        if (pos + 8 + chunk_len > bytes.size()) fail(path, "chunk extends past end of file");
        if (std::memcmp(hdr, "fmt ", 4) == 0) {
            if (chunk_len < 16) fail(path, "fmt chunk too short");
            format = read_u16(body);
            channels = read_u16(body + 2);
            rate = read_u32(body + 4);
            bits = read_u16(body + 14);
            if (format == 0xFFFE) {  // extensible: real format lives in the GUID
                if (chunk_len < 40) fail(path, "extensible fmt chunk too short");
                format = read_u16(body + 24);
            }
            have_fmt = true;
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            data = body;
            data_len = chunk_len;
        }
        pos += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
    }
    if (!have_fmt) fail(path, "missing fmt chunk");
    if (data == nullptr) fail(path, "missing data chunk");
    if (channels == 0) fail(path, "zero channels");
    if (rate == 0) fail(path, "zero sample rate");

    const bool pcm16 = (format == 1 && bits == 16);
    const bool f32 = (format == 3 && bits == 32);
    if (!pcm16 && !f32)
        fail(path, "unsupported encoding (format " + std::to_string(format) + ", " +
                       std::to_string(bits) + " bit); expected PCM16 or float32");
    if (channels > 1)
        std::cerr << "wav: " << path << ": " << channels << " channels, keeping channel 0\n";

    const std::size_t bytes_per = bits / 8;
    const std::size_t frame = bytes_per * channels;
    const std::size_t frames = data_len / frame;

    Waveform w;
    w.sample_rate = static_cast<double>(rate);
    w.label = path;
    w.samples.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        const unsigned char* p = data + i * frame;  // channel 0
        if (pcm16) {
            std::int16_t v;
            std::memcpy(&v, p, 2);
            w.samples[i] = static_cast<double>(v) / 32768.0;
        } else {
            float v;
            std::memcpy(&v, p, 4);
            w.samples[i] = static_cast<double>(v);
        }
    }
    return w;
}

void write_wav(const std::string& path, const Waveform& w, WavFormat format) {
    validate(w, "write_wav");
    const bool pcm = (format == WavFormat::pcm16);
    const std::uint16_t bits = pcm ? 16 : 32;
    const std::uint32_t rate = static_cast<std::uint32_t>(std::lround(w.sample_rate));
    const std::uint32_t data_len = static_cast<std::uint32_t>(w.size() * (bits / 8));

    std::string out;
    out.reserve(44 + data_len);
    out += "RIFF";
    put_u32(out, 36 + data_len);
    out += "WAVEfmt ";
    put_u32(out, 16);
    put_u16(out, pcm ? 1 : 3);
    put_u16(out, 1);  // mono
    put_u32(out, rate);
    put_u32(out, rate * (bits / 8));
    put_u16(out, bits / 8);
    put_u16(out, bits);
    out += "data";
    put_u32(out, data_len);
    for (double s : w.samples) {
        if (pcm) {
            // Same 1/32768 step the reader assumes, so a round trip stays
            // within half a step away from the positive rail.
            const long q = std::lround(std::clamp(s, -1.0, 1.0) * 32768.0);
            const std::int16_t v = static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L));
            put_u16(out, static_cast<std::uint16_t>(v));
        } else {
            const float f = static_cast<float>(s);
            std::uint32_t u;
            std::memcpy(&u, &f, 4);
            put_u32(out, u);
        }
    }

    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("wav: " + path + ": cannot open for writing");
        os.write(out.data(), static_cast<std::streamsize>(out.size()));
        if (!os) throw std::runtime_error("wav: " + path + ": write failed");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace ultrasim
