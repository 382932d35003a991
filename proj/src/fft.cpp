#include "sng/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace sng {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("FftPlan: zero length");
  // Planning with FFTW_ESTIMATE does not touch the buffer contents.
  std::vector<std::complex<double>> scratch(n);
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_ = fftw_plan_dft_1d(static_cast<int>(n), as_fftw(scratch.data()), as_fftw(scratch.data()),
                              FFTW_FORWARD, flags);
  inverse_ = fftw_plan_dft_1d(static_cast<int>(n), as_fftw(scratch.data()), as_fftw(scratch.data()),
                              FFTW_BACKWARD, flags);
  if (forward_ == nullptr || inverse_ == nullptr) {
    release();
    throw std::runtime_error("FftPlan: FFTW planning failed");
  }
}

FftPlan::~FftPlan() { release(); }

FftPlan::FftPlan(FftPlan&& other) noexcept
    : n_(other.n_), forward_(other.forward_), inverse_(other.inverse_) {
  other.forward_ = nullptr;
  other.inverse_ = nullptr;
}

FftPlan& FftPlan::operator=(FftPlan&& other) noexcept {
  if (this != &other) {
    release();
    n_ = other.n_;
    forward_ = other.forward_;
    inverse_ = other.inverse_;
    other.forward_ = nullptr;
    other.inverse_ = nullptr;
  }
  return *this;
}

void FftPlan::release() noexcept {
  if (forward_ == nullptr && inverse_ == nullptr) return;
  std::lock_guard lock(planner_mutex());
  if (forward_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  if (inverse_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(inverse_));
  forward_ = nullptr;
  inverse_ = nullptr;
}

void FftPlan::forward(std::span<std::complex<double>> data) const {
  if (data.size() != n_) throw std::invalid_argument("FftPlan::forward: length mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(forward_), as_fftw(data.data()), as_fftw(data.data()));
}

void FftPlan::inverse(std::span<std::complex<double>> data) const {
  if (data.size() != n_) throw std::invalid_argument("FftPlan::inverse: length mismatch");
  fftw_execute_dft(static_cast<fftw_plan>(inverse_), as_fftw(data.data()), as_fftw(data.data()));
  const double scale = 1.0 / static_cast<double>(n_);
  for (auto& v : data) v *= scale;
}

RealFftPlanLong::RealFftPlanLong(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("RealFftPlanLong: zero length");
  std::vector<long double> real(n);
  std::vector<std::complex<long double>> modes(n / 2 + 1);
  auto* c = reinterpret_cast<fftwl_complex*>(modes.data());
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_ = fftwl_plan_dft_r2c_1d(static_cast<int>(n), real.data(), c, flags);
  inverse_ = fftwl_plan_dft_c2r_1d(static_cast<int>(n), c, real.data(), flags);
  if (forward_ == nullptr || inverse_ == nullptr) {
    throw std::runtime_error("RealFftPlanLong: FFTW planning failed");
  }
}

RealFftPlanLong::~RealFftPlanLong() {
  std::lock_guard lock(planner_mutex());
  if (forward_ != nullptr) fftwl_destroy_plan(static_cast<fftwl_plan>(forward_));
  if (inverse_ != nullptr) fftwl_destroy_plan(static_cast<fftwl_plan>(inverse_));
}

void RealFftPlanLong::forward(std::span<const long double> in,
                              std::span<std::complex<long double>> out) const {
  if (in.size() != n_ || out.size() != n_ / 2 + 1) {
    throw std::invalid_argument("RealFftPlanLong::forward: length mismatch");
  }
  // r2c leaves its input untouched.
  fftwl_execute_dft_r2c(static_cast<fftwl_plan>(forward_), const_cast<long double*>(in.data()),
                        reinterpret_cast<fftwl_complex*>(out.data()));
}

void RealFftPlanLong::inverse(std::span<std::complex<long double>> in,
                              std::span<long double> out) const {
  if (out.size() != n_ || in.size() != n_ / 2 + 1) {
    throw std::invalid_argument("RealFftPlanLong::inverse: length mismatch");
  }
  fftwl_execute_dft_c2r(static_cast<fftwl_plan>(inverse_),
                        reinterpret_cast<fftwl_complex*>(in.data()), out.data());
  const long double scale = 1.0L / static_cast<long double>(n_);
  for (auto& v : out) v *= scale;
}

std::vector<double> fft_wavenumbers(std::size_t n, double length) {
  std::vector<double> k(n);
  const double base = 2.0 * std::numbers::pi / length;
  const auto half = static_cast<long>(n / 2);
  for (std::size_t i = 0; i < n; ++i) {
    auto m = static_cast<long>(i);
    if (m >= half && n > 1) m -= static_cast<long>(n);
    // Nyquist bin: sign is ambiguous, keep it negative (FFT order convention).
    k[i] = base * static_cast<double>(m);
  }
  return k;
}

}  // namespace sng

#include <map>
#include <memory>

namespace sng {

const FftPlan& cached_plan(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<FftPlan>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<FftPlan>(n);
  return *slot;
}

const RealFftPlanLong& cached_real_plan_long(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<RealFftPlanLong>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFftPlanLong>(n);
  return *slot;
}

}  // namespace sng
