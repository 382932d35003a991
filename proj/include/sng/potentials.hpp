#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sng/fields.hpp"

namespace sng {

/// Dimensionless constants. hbar and mass default to 1; every field must
/// be strictly positive.
struct PhysParams {
  double hbar = 1.0;
  double mass = 1.0;
  double G = 1.0;
  double norm_sq = 1.0;

  void validate() const;
};

/// Stiffnesses of the one-dimensional harmonic self-trap model.
///
/// When the sphere parameters are present, k_self must equal
/// G*M^2*N^2/(2 R^3) to 1e-12 relative (see check_consistency()).
struct HarmonicModelParams {
  double k_ext = 0.0;
  double k_self = 0.0;
  std::optional<double> sphere_mass;
  std::optional<double> sphere_radius;

  void validate() const;
};

/// k_self of a homogeneous sphere of mass M and radius R whose
/// centre-of-mass wave has squared norm N^2.
double sphere_k_self(double G, double sphere_mass, double sphere_radius, double norm_sq);

/// Throws ConfigError if the sphere parameters and k_self disagree by more
/// than 1e-12 relative. No-op when the sphere parameters are absent.
void check_consistency(const HarmonicModelParams& model, const PhysParams& phys);

/// V_ext = k_ext x^2 / 2 on the grid nodes.
RealField harmonic_external(const Grid1D& grid, double k_ext);

/// (k_self/2) (x - <x>_f)^2. Throws DegenerateInputError for a zero-norm f.
RealField self_harmonic(const WaveField& f, const HarmonicModelParams& params);

/// Self-interaction kernel: V(x) = -coupling * sum_j |f_j|^2 F(|x - x_j|) dx.
///
/// `coupling` plays the role of G m^2. F must be finite on [0, L].
struct ConvolutionKernel {
  std::string name;
  std::function<double(double)> shape;
  double coupling = 0.0;
};

ConvolutionKernel zero_kernel();

/// Quadratic expansion of the homogeneous-sphere self-energy,
/// F(u) = (6/5 - u^2/(2 R^2)) / R.
///
/// The coupling is fixed from k_self so that, for a field of squared norm
/// norm_sq, the quadratic part of the potential is exactly
/// (k_self/2)(x - <x>)^2; the constant offset differs from self_harmonic().
ConvolutionKernel sphere_quadratic_kernel(double k_self, double norm_sq, double radius);

/// Tabulated F(u), linearly interpolated. `u` must be strictly increasing.
ConvolutionKernel tabulated_kernel(std::vector<double> u, std::vector<double> f,
                                   double coupling);

/// Reads a two-column text table "u F(u)"; '#' starts a comment.
ConvolutionKernel load_kernel_table(const std::filesystem::path& path, double coupling);

/// Precomputed spectrum of a kernel on a given grid; evaluates the
/// non-periodic (zero-padded) discrete convolution in O(n log n).
class KernelConvolver {
 public:
  KernelConvolver(const Grid1D& grid, const ConvolutionKernel& kernel);

  RealField potential(const WaveField& f) const;
  const Grid1D& grid() const noexcept { return grid_; }

 private:
  Grid1D grid_;
  std::vector<Complex> spectrum_;
  double coupling_;
};

RealField convolution_self_potential(const WaveField& f, const ConvolutionKernel& kernel);

/// max |V(lambda f) - |lambda|^2 V(f)| over the grid.
double scaling_check(const WaveField& f, Complex lambda, const ConvolutionKernel& kernel);

}  // namespace sng
