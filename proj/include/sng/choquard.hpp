#pragma once

#include <cstddef>
#include <vector>

#include "sng/fields.hpp"
#include "sng/potentials.hpp"

namespace sng {

/// Cell-centred radial nodes r_i = (i + 1/2) dr on (0, r_max).
class RadialGrid {
 public:
  RadialGrid(std::size_t n_points, double r_max);

  std::size_t size() const noexcept { return n_; }
  double r_max() const noexcept { return r_max_; }
  double dr() const noexcept { return dr_; }
  double r(std::size_t i) const noexcept { return (static_cast<double>(i) + 0.5) * dr_; }

 private:
  std::size_t n_;
  double r_max_;
  double dr_;
};

/// 4 pi int |phi|^2 r^2 dr.
double radial_norm_sq(const RadialGrid& grid, const RealField& profile);

/// Phi(r) = -G M [ (1/r) int_0^r 4 pi s^2 rho ds + int_r^inf 4 pi s rho ds ],
/// rho = profile^2, by cumulative midpoint sums (each node's own shell is
/// split half inside, half outside).
RealField radial_newton_potential(const RadialGrid& grid, const RealField& profile, double G,
                                  double M);

/// hbar^2/(2M) int |grad phi|^2 d^3x + (M/2) int Phi |phi|^2 d^3x, with the
/// same difference stencil as the solver (u = r phi, u odd about r = 0,
/// u(r_max) = 0).
double energy_functional(const RadialGrid& grid, const RealField& profile, const PhysParams& phys);

struct GroundStateResult {
  RadialGrid grid{3, 1.0};
  RealField profile;  // phi(r_i), positive
  double eigenvalue = 0.0;
  double functional_energy = 0.0;
  double norm_sq = 0.0;
  double extent = 0.0;  // rms radius
  std::size_t iters = 0;
  std::vector<double> energy_history;
};

struct ChoquardOptions {
  /// Domain radius; 0 selects 60 / norm_sq (the state shrinks as 1/N^2).
  double r_max = 0.0;
  std::size_t n_points = 3000;
  std::size_t max_iters = 100000;
  /// Largest allowed |phi(r_max)| / max |phi|.
  double tail_tolerance = 1e-10;
};

/// Ground state of -hbar^2/(2M) lap phi + M Phi[phi] phi = E0 phi at squared
/// norm target_norm_sq, by backward-Euler imaginary time with
/// renormalization. Stops when the relative change of the functional energy
/// per sweep drops below tol. The mass M is phys.mass.
GroundStateResult solve_ground_state(const PhysParams& phys, double target_norm_sq, double tol,
                                     const ChoquardOptions& options = {});

/// Constants of e_n = a / (n + b)^c.
struct SpectrumFit {
  double a = 0.096;
  double b = 0.76;
  double c = 2.00;
};

double spectrum_value(int n, const SpectrumFit& fit = {});

/// Appends "N_sq E0 E_functional extent iters" to a TSV file, writing the
/// header first if the file is new.
void append_choquard_result(const std::filesystem::path& path, const GroundStateResult& r);

}  // namespace sng
