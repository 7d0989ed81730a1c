#pragma once

// Internal RAII wrapper over an in-place complex FFTW plan.

#include <complex>
#include <cstddef>
#include <vector>

namespace pilotwave::detail {

class FftPlan {
public:
    explicit FftPlan(std::size_t n);
    ~FftPlan();
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    FftPlan(FftPlan&&) noexcept;
    FftPlan& operator=(FftPlan&&) noexcept;

    std::size_t size() const noexcept { return n_; }
    // Unnormalised transforms over the internal buffer.
    void forward();
    void backward();
    std::complex<double>* data() noexcept;

private:
    void release() noexcept;
    std::size_t n_ = 0;
    void* buffer_ = nullptr;
    void* fwd_ = nullptr;
    void* bwd_ = nullptr;
};

/// Angular wave numbers of the DFT bins for n samples spanning `length`.
std::vector<double> fft_wavenumbers(std::size_t n, double length);

}  // namespace pilotwave::detail
