#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace sng {

using Complex = std::complex<double>;
using RealField = std::vector<double>;

/// Uniform periodic grid on [x_min, x_max) with n_points nodes.
///
/// Nodes sit at x_i = x_min + i*dx, dx = (x_max - x_min)/n_points. The node
/// count must be a power of two.
class Grid1D {
 public:
  Grid1D(std::size_t n_points, double x_min, double x_max);

  std::size_t size() const noexcept { return n_; }
  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  double dx() const noexcept { return dx_; }
  double length() const noexcept { return x_max_ - x_min_; }
  double x(std::size_t i) const noexcept { return x_min_ + static_cast<double>(i) * dx_; }
  RealField nodes() const;
  /// Angular wavenumbers in FFT order.
  RealField wavenumbers() const;

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

 private:
  std::size_t n_;
  double x_min_;
  double x_max_;
  double dx_;
};

/// Complex samples of a wavefunction on a Grid1D. Immutable once built.
class WaveField {
 public:
  /// Throws DegenerateInputError if the size does not match or any sample
  /// is not finite.
  WaveField(Grid1D grid, std::vector<Complex> values);

  const Grid1D& grid() const noexcept { return grid_; }
  std::span<const Complex> values() const noexcept { return values_; }
  const Complex& operator[](std::size_t i) const noexcept { return values_[i]; }
  std::size_t size() const noexcept { return values_.size(); }

  /// Copy of the samples, for code that needs to mutate a working buffer.
  std::vector<Complex> to_vector() const { return values_; }

  WaveField scaled(Complex factor) const;

 private:
  Grid1D grid_;
  std::vector<Complex> values_;
};

/// Amplitude/phase decomposition of a field, psi = A exp(i S).
///
/// Derivative quantities are only meaningful where `valid[i]` is set, that
/// is where |psi| exceeds `threshold`; elsewhere they are NaN.
struct PhaseAmplitude {
  RealField amplitude;
  RealField phase_gradient;          // dS/dx
  RealField phase_laplacian;         // d2S/dx2
  RealField log_amplitude_gradient;  // (dA/dx)/A
  std::vector<std::uint8_t> valid;
  double threshold = 0.0;
};

/// Relative mask threshold for pointwise ratios: nodes with
/// |f| <= kMaskRelative * max|f| are excluded.
inline constexpr double kMaskRelative = 1e-8;

double squared_norm(const WaveField& f);
Complex inner_product(const WaveField& f, const WaveField& g);

/// |f|^2-weighted mean of x. Throws DegenerateInputError on zero norm.
double mean_position(const WaveField& f);
/// |f|^2-weighted variance of x.
double position_variance(const WaveField& f);

WaveField spectral_gradient(const WaveField& f);
WaveField spectral_laplacian(const WaveField& f);

PhaseAmplitude phase_amplitude(const WaveField& f);

/// Translate a band-limited periodic field by `shift` using the Fourier
/// shift theorem.
WaveField fourier_shift(const WaveField& f, double shift);

/// Linear interpolation of a nodal field at an arbitrary position inside
/// the grid. Returns NaN if either bracketing node is NaN.
double interpolate(const Grid1D& grid, std::span<const double> values, double x);

/// Gaussian wave packet exp(-(x-center)^2/(2 width^2) + i momentum x),
/// normalized so that its squared norm equals `norm_sq`. `width` is the
/// amplitude e-folding length, i.e. sqrt(2) times the rms width of |psi|^2.
WaveField gaussian_packet(const Grid1D& grid, double center, double width, double momentum,
                          double norm_sq);

/// Pointwise product and maximum modulus helpers.
WaveField multiply(const WaveField& a, const WaveField& b);
double max_abs(const WaveField& f);
double max_abs_difference(const WaveField& a, const WaveField& b);

}  // namespace sng
