#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace painbvp::detail {
namespace {

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double, FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex, FftwFree>;

RealBuffer alloc_real(std::size_t n) { return RealBuffer(fftw_alloc_real(std::max<std::size_t>(n, 1))); }
ComplexBuffer alloc_complex(std::size_t n) {
  return ComplexBuffer(fftw_alloc_complex(std::max<std::size_t>(n, 1)));
}

// Planning is not thread-safe in FFTW; execution with the new-array API is.
// Plans are created once per (size, direction) on fftw_malloc'd buffers so
// every later execution sees the same alignment.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n, bool forward) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(n, forward);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    auto real = alloc_real(n);
    auto cplx = alloc_complex(n / 2 + 1);
    const int size = static_cast<int>(n);
    fftw_plan plan = forward ? fftw_plan_dft_r2c_1d(size, real.get(), cplx.get(), FFTW_ESTIMATE)
                             : fftw_plan_dft_c2r_1d(size, cplx.get(), real.get(), FFTW_ESTIMATE);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<std::size_t, bool>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<std::complex<double>> rfft(std::span<const double> x, std::size_t nfft) {
  auto in = alloc_real(nfft);
  auto out = alloc_complex(nfft / 2 + 1);
  const std::size_t used = std::min(x.size(), nfft);
  std::copy_n(x.begin(), used, in.get());
  std::fill(in.get() + used, in.get() + nfft, 0.0);
  fftw_execute_dft_r2c(cache().get(nfft, true), in.get(), out.get());
  std::vector<std::complex<double>> result(nfft / 2 + 1);
  for (std::size_t k = 0; k < result.size(); ++k) result[k] = {out.get()[k][0], out.get()[k][1]};
  return result;
}

std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t nfft) {
  auto in = alloc_complex(nfft / 2 + 1);
  auto out = alloc_real(nfft);
  for (std::size_t k = 0; k < nfft / 2 + 1; ++k) {
    const auto v = k < spectrum.size() ? spectrum[k] : std::complex<double>{};
    in.get()[k][0] = v.real();
    in.get()[k][1] = v.imag();
  }
  fftw_execute_dft_c2r(cache().get(nfft, false), in.get(), out.get());
  return {out.get(), out.get() + nfft};
}

}  // namespace painbvp::detail
