#include "ultrasim/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace ultrasim {

namespace {
// FFTW plan creation is not thread-safe; execution of a created plan is.
std::mutex plan_mutex;

std::vector<std::complex<double>> transform(const std::vector<std::complex<double>>& in, int sign) {
    if (in.empty()) throw std::invalid_argument("fft: empty input");
    const auto n = in.size();
    std::vector<std::complex<double>> out(n);
    // fftw_complex is layout-compatible with std::complex<double>.
    auto* src = const_cast<fftw_complex*>(reinterpret_cast<const fftw_complex*>(in.data()));
    auto* dst = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        plan = fftw_plan_dft_1d(static_cast<int>(n), src, dst, sign,
                                FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    }
    if (!plan) throw std::runtime_error("fft: planner failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        fftw_destroy_plan(plan);
    }
    return out;
}
}  // namespace

std::vector<std::complex<double>> fft(const std::vector<std::complex<double>>& in) {
    return transform(in, FFTW_FORWARD);
}

std::vector<std::complex<double>> ifft(const std::vector<std::complex<double>>& in) {
    auto out = transform(in, FFTW_BACKWARD);
    const double inv = 1.0 / static_cast<double>(in.size());
    for (auto& v : out) v *= inv;
    return out;
}

std::vector<std::complex<double>> fft_real(const std::vector<double>& in) {
    if (in.empty()) throw std::invalid_argument("fft_real: empty input");
    const auto n = in.size();
    std::vector<double> buf(in);  // r2c may scribble on its input
    std::vector<std::complex<double>> out(n / 2 + 1);
    auto* dst = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), buf.data(), dst, FFTW_ESTIMATE);
    }
    if (!plan) throw std::runtime_error("fft_real: planner failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex);
        fftw_destroy_plan(plan);
    }
    return out;
}

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("convolve: empty input");
    const std::size_t full = a.size() + b.size() - 1;
    std::size_t n = 1;
    while (n < full) n <<= 1;

    std::vector<std::complex<double>> fa(n), fb(n);
    for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
    for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
    fa = fft(fa);
    fb = fft(fb);
    for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
    auto prod = ifft(fa);

    std::vector<double> out(full);
    for (std::size_t i = 0; i < full; ++i) out[i] = prod[i].real();
    return out;
}

}  // namespace ultrasim
