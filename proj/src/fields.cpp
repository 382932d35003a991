#include "sng/fields.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "sng/errors.hpp"
#include "sng/fft.hpp"

namespace sng {

Grid1D::Grid1D(std::size_t n_points, double x_min, double x_max)
    : n_(n_points), x_min_(x_min), x_max_(x_max), dx_(0.0) {
  if (n_points < 2 || !std::has_single_bit(n_points)) {
    throw ConfigError("n_points must be a power of two >= 2, got " + std::to_string(n_points));
  }
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min)) {
    throw ConfigError("grid requires finite x_min < x_max");
  }
  dx_ = (x_max - x_min) / static_cast<double>(n_points);
}

RealField Grid1D::nodes() const {
  RealField out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = x(i);
  return out;
}

RealField Grid1D::wavenumbers() const { return fft_wavenumbers(n_, length()); }

WaveField::WaveField(Grid1D grid, std::vector<Complex> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw DegenerateInputError("WaveField: " + std::to_string(values_.size()) +
                               " samples for a grid of " + std::to_string(grid_.size()));
  }
  for (const auto& v : values_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw DegenerateInputError("WaveField: non-finite sample");
    }
  }
}

WaveField WaveField::scaled(Complex factor) const {
  auto v = values_;
  for (auto& z : v) z *= factor;
  return WaveField(grid_, std::move(v));
}

double squared_norm(const WaveField& f) {
  double s = 0.0;
  for (const auto& v : f.values()) s += std::norm(v);
  return s * f.grid().dx();
}

Complex inner_product(const WaveField& f, const WaveField& g) {
  if (!(f.grid() == g.grid())) throw ConfigError("inner_product: grid mismatch");
  Complex s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += std::conj(f[i]) * g[i];
  return s * f.grid().dx();
}

double mean_position(const WaveField& f) {
  const auto& grid = f.grid();
  double w = 0.0;
  double wx = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double rho = std::norm(f[i]);
    w += rho;
    wx += rho * grid.x(i);
  }
  if (!(w > 0.0)) throw DegenerateInputError("mean_position: zero-norm field");
  return wx / w;
}

double position_variance(const WaveField& f) {
  const double mean = mean_position(f);
  const auto& grid = f.grid();
  double w = 0.0;
  double wxx = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double rho = std::norm(f[i]);
    const double d = grid.x(i) - mean;
    w += rho;
    wxx += rho * d * d;
  }
  return wxx / w;
}

namespace {

// Multiplies the spectrum by (i k)^order, separately for the real and
// imaginary parts and in long double, so a real field has an exactly real
// derivative. The Nyquist bin is dropped for odd orders.
void real_derivative(std::span<const long double> in, std::span<long double> out, double length,
                     int order) {
  const auto n = in.size();
  const auto& plan = cached_real_plan_long(n);
  std::vector<std::complex<long double>> modes(n / 2 + 1);
  plan.forward(in, modes);
  const long double base = 2.0L * std::numbers::pi_v<long double> / static_cast<long double>(length);
  for (std::size_t m = 0; m < modes.size(); ++m) {
    if (order % 2 == 1 && m == n / 2) {
      modes[m] = 0.0L;
      continue;
    }
    const long double k = base * static_cast<long double>(m);
    std::complex<long double> factor = 1.0L;
    for (int j = 0; j < order; ++j) factor *= std::complex<long double>(0.0L, k);
    modes[m] *= factor;
  }
  plan.inverse(modes, out);
}

WaveField spectral_derivative(const WaveField& f, int order) {
  const auto& grid = f.grid();
  const auto n = grid.size();
  std::vector<long double> re(n), im(n), d_re(n), d_im(n);
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = f[i].real();
    im[i] = f[i].imag();
  }
  real_derivative(re, d_re, grid.length(), order);
  real_derivative(im, d_im, grid.length(), order);
  std::vector<Complex> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = Complex(static_cast<double>(d_re[i]), static_cast<double>(d_im[i]));
  }
  return WaveField(grid, std::move(out));
}

}  // namespace

WaveField spectral_gradient(const WaveField& f) { return spectral_derivative(f, 1); }
WaveField spectral_laplacian(const WaveField& f) { return spectral_derivative(f, 2); }

PhaseAmplitude phase_amplitude(const WaveField& f) {
  const auto n = f.size();
  PhaseAmplitude out;
  out.amplitude.resize(n);
  out.phase_gradient.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.phase_laplacian.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.log_amplitude_gradient.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.valid.assign(n, 0);

  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.amplitude[i] = std::abs(f[i]);
    peak = std::max(peak, out.amplitude[i]);
  }
  out.threshold = kMaskRelative * peak;
  if (peak == 0.0) return out;

  const auto d1 = spectral_gradient(f);
  const auto d2 = spectral_laplacian(f);
  // With psi'/psi = a + i s: s = dS/dx, a = A'/A, and
  // Im(psi''/psi - (psi'/psi)^2) = ds/dx.
  for (std::size_t i = 0; i < n; ++i) {
    if (!(out.amplitude[i] > out.threshold)) continue;
    const Complex r1 = d1[i] / f[i];
    const Complex r2 = d2[i] / f[i];
    out.valid[i] = 1;
    out.phase_gradient[i] = r1.imag();
    out.log_amplitude_gradient[i] = r1.real();
    out.phase_laplacian[i] = (r2 - r1 * r1).imag();
  }
  return out;
}

WaveField fourier_shift(const WaveField& f, double shift) {
  const auto& grid = f.grid();
  const auto n = grid.size();
  const auto k = grid.wavenumbers();
  auto buf = f.to_vector();
  const auto& plan = cached_plan(n);
  plan.forward(buf);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == n / 2) {
      // Nyquist mode cannot be shifted unambiguously; keep its real part.
      buf[i] *= std::cos(k[i] * shift);
      continue;
    }
    buf[i] *= std::polar(1.0, -k[i] * shift);
  }
  plan.inverse(buf);
  return WaveField(grid, std::move(buf));
}

double interpolate(const Grid1D& grid, std::span<const double> values, double x) {
  const double s = (x - grid.x_min()) / grid.dx();
  if (!(s >= 0.0) || s > static_cast<double>(grid.size() - 1)) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  auto i = static_cast<std::size_t>(std::floor(s));
  if (i >= grid.size() - 1) i = grid.size() - 2;
  const double frac = s - static_cast<double>(i);
  return (1.0 - frac) * values[i] + frac * values[i + 1];
}

WaveField gaussian_packet(const Grid1D& grid, double center, double width, double momentum,
                          double norm_sq) {
  if (!(width > 0.0)) throw ConfigError("gaussian_packet: width must be > 0");
  if (!(norm_sq > 0.0)) throw ConfigError("gaussian_packet: norm_sq must be > 0");
  std::vector<Complex> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    const double d = (x - center) / width;
    v[i] = std::polar(std::exp(-0.5 * d * d), momentum * x);
  }
  WaveField raw(grid, std::move(v));
  const double n0 = squared_norm(raw);
  if (!(n0 > 0.0)) throw DegenerateInputError("gaussian_packet: packet underflows on the grid");
  return raw.scaled(std::sqrt(norm_sq / n0));
}

WaveField multiply(const WaveField& a, const WaveField& b) {
  if (!(a.grid() == b.grid())) throw ConfigError("multiply: grid mismatch");
  auto v = a.to_vector();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= b[i];
  return WaveField(a.grid(), std::move(v));
}

double max_abs(const WaveField& f) {
  double m = 0.0;
  for (const auto& v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_difference(const WaveField& a, const WaveField& b) {
  if (!(a.grid() == b.grid())) throw ConfigError("max_abs_difference: grid mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace sng
