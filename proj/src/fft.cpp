#include "fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <numbers>
#include <utility>

namespace pilotwave::detail {
namespace {
// The FFTW planner is not re-entrant.
std::mutex planner_mutex;
}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
    std::lock_guard lock(planner_mutex);
    auto* buf = fftw_alloc_complex(n);
    buffer_ = buf;
    const int len = static_cast<int>(n);
    fwd_ = fftw_plan_dft_1d(len, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(len, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

FftPlan::~FftPlan() { release(); }

FftPlan::FftPlan(FftPlan&& o) noexcept
    : n_(o.n_), buffer_(std::exchange(o.buffer_, nullptr)), fwd_(std::exchange(o.fwd_, nullptr)),
      bwd_(std::exchange(o.bwd_, nullptr)) {}

FftPlan& FftPlan::operator=(FftPlan&& o) noexcept {
    if (this != &o) {
        release();
        n_ = o.n_;
        buffer_ = std::exchange(o.buffer_, nullptr);
        fwd_ = std::exchange(o.fwd_, nullptr);
        bwd_ = std::exchange(o.bwd_, nullptr);
    }
    return *this;
}

void FftPlan::release() noexcept {
    if (!buffer_) return;
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
    fftw_free(buffer_);
    buffer_ = fwd_ = bwd_ = nullptr;
}

void FftPlan::forward() { fftw_execute(static_cast<fftw_plan>(fwd_)); }
void FftPlan::backward() { fftw_execute(static_cast<fftw_plan>(bwd_)); }

std::complex<double>* FftPlan::data() noexcept {
    return reinterpret_cast<std::complex<double>*>(buffer_);
}

std::vector<double> fft_wavenumbers(std::size_t n, double length) {
    std::vector<double> k(n);
    const double base = 2.0 * std::numbers::pi / length;
    for (std::size_t i = 0; i < n; ++i) {
        const auto m = i <= n / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
        k[i] = base * m;
    }
    // The Nyquist bin of an even grid is ambiguous in sign; keep it real-symmetric.
    if (n % 2 == 0) k[n / 2] = base * static_cast<double>(n / 2);
    return k;
}

}  // namespace pilotwave::detail
