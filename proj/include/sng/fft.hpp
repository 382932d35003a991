#pragma once

#include <complex>
#include <span>
#include <vector>

namespace sng {

/// Owning FFTW plan pair for complex transforms of a fixed length.
///
/// Plans are created with FFTW_ESTIMATE so that the chosen algorithm, and
/// therefore the rounding, is identical from run to run. Creation and
/// destruction are serialized internally (the FFTW planner is not
/// re-entrant); execution is safe from any thread.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);
  ~FftPlan();

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  FftPlan(FftPlan&& other) noexcept;
  FftPlan& operator=(FftPlan&& other) noexcept;

  std::size_t size() const noexcept { return n_; }

  /// Unnormalized forward transform, in place.
  void forward(std::span<std::complex<double>> data) const;
  /// Inverse transform, in place, scaled by 1/n so that it undoes forward().
  void inverse(std::span<std::complex<double>> data) const;

 private:
  void release() noexcept;

  std::size_t n_ = 0;
  void* forward_ = nullptr;
  void* inverse_ = nullptr;
};

/// Real-to-complex transform pair in long double precision, used where
/// round-off relative to the field maximum must stay far below 1e-16.
class RealFftPlanLong {
 public:
  explicit RealFftPlanLong(std::size_t n);
  ~RealFftPlanLong();

  RealFftPlanLong(const RealFftPlanLong&) = delete;
  RealFftPlanLong& operator=(const RealFftPlanLong&) = delete;

  std::size_t size() const noexcept { return n_; }

  /// Unnormalized forward transform of n reals into n/2 + 1 modes.
  void forward(std::span<const long double> in, std::span<std::complex<long double>> out) const;
  /// Inverse of forward(), scaled by 1/n. Overwrites `in`.
  void inverse(std::span<std::complex<long double>> in, std::span<long double> out) const;

 private:
  std::size_t n_ = 0;
  void* forward_ = nullptr;
  void* inverse_ = nullptr;
};

/// Angular wavenumbers 2*pi*m/L in FFT order for n samples over length L.
std::vector<double> fft_wavenumbers(std::size_t n, double length);

}  // namespace sng

namespace sng {

/// Per-thread plan cache keyed by transform length.
const FftPlan& cached_plan(std::size_t n);
const RealFftPlanLong& cached_real_plan_long(std::size_t n);

}  // namespace sng
