#pragma once

#include <functional>
#include <vector>

#include "sng/fields.hpp"
#include "sng/potentials.hpp"

namespace sng {

/// First and second moments of a wave packet.
///
/// covariance is the symmetrized <(x-<x>)(p-<p>)>; for a pure Gaussian
/// variance*momentum_variance - covariance^2 = hbar^2/4.
struct GaussianMoments {
  double mean = 0.0;
  double momentum = 0.0;
  double variance = 0.0;
  double covariance = 0.0;
  double momentum_variance = 0.0;

  double uncertainty_product() const;  // sqrt(det) of the covariance matrix
};

/// Moments of a pure Gaussian with the given position variance and
/// position-momentum covariance.
GaussianMoments pure_gaussian_moments(double mean, double momentum, double variance,
                                      double covariance = 0.0, double hbar = 1.0);

/// Moments measured on a grid field (spectral derivatives).
GaussianMoments measure_moments(const WaveField& f, double hbar = 1.0);

struct MomentSample {
  double t = 0.0;
  GaussianMoments moments;
};

/// Integrates the closed moment equations of the harmonic self-trap model
/// with RK4 at step dt/10, sampling every dt. With K = k_ext + k_self:
///   d<x>/dt = <p>/m,            d<p>/dt = -k_ext <x>,
///   dVxx/dt = 2 Cxp/m,          dCxp/dt = Vpp/m - K Vxx,
///   dVpp/dt = -2 K Cxp.
std::vector<MomentSample> gaussian_moment_flow(const GaussianMoments& init,
                                               const HarmonicModelParams& params, double dt,
                                               double t_end, const PhysParams& phys = {});

struct CoherentState {
  WaveField field;
  GaussianMoments moments;
};

/// Exact displaced ground state of the trap k_ext x^2/2 at time t, released
/// at rest from x0_init. Centre x0 cos(wt), momentum -m w x0 sin(wt).
/// The amplitude e-folding length is sqrt(hbar/(m w)), i.e. sqrt(2) times
/// the position standard deviation sqrt(hbar/(2 m w)). Real at t = 0.
CoherentState coherent_state(const Grid1D& grid, double k_ext, double x0_init, double t,
                             const PhysParams& phys = {});

struct ClassicalState {
  double position = 0.0;
  double velocity = 0.0;
};

struct ClassicalSample {
  double t = 0.0;
  ClassicalState state;
};

/// External potential given by value and gradient.
struct ExternalPotential {
  std::function<double(double)> value;
  std::function<double(double)> gradient;
};

ExternalPotential harmonic_potential(double k_ext);
ExternalPotential free_potential();

/// RK4 integration of m x'' = -V'(x), ten substeps per sample.
std::vector<ClassicalSample> classical_trajectory(const ClassicalState& init,
                                                  const ExternalPotential& potential, double dt,
                                                  double t_end, double mass = 1.0);

double classical_energy(const ClassicalState& s, const ExternalPotential& potential,
                        double mass = 1.0);

}  // namespace sng
