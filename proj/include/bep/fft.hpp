#pragma once

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "bep/core.hpp"

namespace bep::detail {

// FFTW planning is not thread-safe; execution with the new-array API is. Plans are made
// once per (size, direction) with FFTW_ESTIMATE, so results do not depend on timing.
class FftPlans {
 public:
  static FftPlans& instance() {
    static FftPlans plans;
    return plans;
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    auto* in = fftw_alloc_complex(n);
    auto* out = fftw_alloc_complex(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, p);
    return p;
  }

  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

 private:
  FftPlans() = default;
  ~FftPlans() {
    for (auto& [key, p] : plans_) fftw_destroy_plan(p);
  }

  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

inline void fft_execute(const CVector& in, CVector& out, int sign) {
  out.resize(in.size());
  fftw_plan p = FftPlans::instance().get(in.size(), sign);
  // fftw_execute_dft does not modify its input for out-of-place complex transforms.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(p, src, dst);
}

/// c_m = (1/n) sum_k u_k e^{-i m theta_k}, FFT order.
inline CVector forward(const CVector& u) {
  CVector c;
  fft_execute(u, c, FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(u.size());
  for (auto& v : c) v *= scale;
  return c;
}

/// u_k = sum_m c_m e^{i m theta_k}.
inline CVector backward(const CVector& c) {
  CVector u;
  fft_execute(c, u, FFTW_BACKWARD);
  return u;
}

}  // namespace bep::detail
