#include "sng/oracles.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "sng/errors.hpp"

namespace sng {

namespace {

constexpr int kSubsteps = 10;

std::size_t sample_count(double dt, double t_end) {
  if (!(dt > 0.0) || !(t_end > 0.0)) throw ConfigError("dt and t_end must be > 0");
  const double ratio = t_end / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("t_end/dt is not an integer");
  }
  return static_cast<std::size_t>(rounded);
}

template <std::size_t N, class F>
std::array<double, N> rk4(const std::array<double, N>& y, double h, F&& rhs) {
  auto axpy = [](const std::array<double, N>& a, double s, const std::array<double, N>& b) {
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = a[i] + s * b[i];
    return out;
  };
  const auto k1 = rhs(y);
  const auto k2 = rhs(axpy(y, 0.5 * h, k1));
  const auto k3 = rhs(axpy(y, 0.5 * h, k2));
  const auto k4 = rhs(axpy(y, h, k3));
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

}  // namespace

double GaussianMoments::uncertainty_product() const {
  return std::sqrt(variance * momentum_variance - covariance * covariance);
}

GaussianMoments pure_gaussian_moments(double mean, double momentum, double variance,
                                      double covariance, double hbar) {
  if (!(variance > 0.0)) throw DegenerateInputError("variance must be > 0");
  return {mean, momentum, variance, covariance,
          (0.25 * hbar * hbar + covariance * covariance) / variance};
}

GaussianMoments measure_moments(const WaveField& f, double hbar) {
  const auto& grid = f.grid();
  const auto d = spectral_gradient(f);
  const double n = squared_norm(f);
  if (!(n > 0.0)) throw DegenerateInputError("measure_moments: zero norm");
  const double dx = grid.dx();
  double mx = 0.0;
  Complex mp = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    mx += std::norm(f[i]) * grid.x(i);
    mp += std::conj(f[i]) * Complex(0.0, -hbar) * d[i];
  }
  mx *= dx / n;
  const double p = mp.real() * dx / n;
  double vxx = 0.0;
  double cxp = 0.0;
  double vpp = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double u = grid.x(i) - mx;
    vxx += std::norm(f[i]) * u * u;
    // Re <psi| u (p - <p>) |psi> is the symmetrized covariance.
    cxp += (std::conj(f[i]) * u * (Complex(0.0, -hbar) * d[i] - p * f[i])).real();
    vpp += std::norm(Complex(0.0, -hbar) * d[i] - p * f[i]);
  }
  return {mx, p, vxx * dx / n, cxp * dx / n, vpp * dx / n};
}

std::vector<MomentSample> gaussian_moment_flow(const GaussianMoments& init,
                                               const HarmonicModelParams& params, double dt,
                                               double t_end, const PhysParams& phys) {
  params.validate();
  if (!(init.variance > 0.0)) throw DegenerateInputError("variance must be > 0");
  const auto n = sample_count(dt, t_end);
  const double m = phys.mass;
  const double k_ext = params.k_ext;
  const double k_tot = params.k_ext + params.k_self;
  auto rhs = [&](const std::array<double, 5>& y) {
    return std::array<double, 5>{y[1] / m, -k_ext * y[0], 2.0 * y[3] / m, y[4] / m - k_tot * y[2],
                                 -2.0 * k_tot * y[3]};
  };
  std::array<double, 5> y{init.mean, init.momentum, init.variance, init.covariance,
                          init.momentum_variance};
  std::vector<MomentSample> out;
  out.reserve(n + 1);
  out.push_back({0.0, init});
  const double h = dt / kSubsteps;
  for (std::size_t s = 1; s <= n; ++s) {
    for (int j = 0; j < kSubsteps; ++j) y = rk4(y, h, rhs);
    if (!(y[2] > 0.0)) throw DegenerateInputError("moment flow: variance collapsed");
    out.push_back({static_cast<double>(s) * dt, {y[0], y[1], y[2], y[3], y[4]}});
  }
  return out;
}

CoherentState coherent_state(const Grid1D& grid, double k_ext, double x0_init, double t,
                             const PhysParams& phys) {
  if (!(k_ext > 0.0)) throw ConfigError("coherent_state requires k_ext > 0");
  const double m = phys.mass;
  const double hbar = phys.hbar;
  const double w = std::sqrt(k_ext / m);
  const double q = x0_init * std::cos(w * t);
  const double p = -m * w * x0_init * std::sin(w * t);
  const double norm = std::pow(m * w / (std::numbers::pi * hbar), 0.25) * std::sqrt(phys.norm_sq);
  std::vector<Complex> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x(i);
    const double amp = -m * w * (x - q) * (x - q) / (2.0 * hbar);
    const double phase = p * (x - 0.5 * q) / hbar - 0.5 * w * t;
    v[i] = norm * std::exp(Complex(amp, phase));
  }
  const double variance = hbar / (2.0 * m * w);
  return {WaveField(grid, std::move(v)), pure_gaussian_moments(q, p, variance, 0.0, hbar)};
}

ExternalPotential harmonic_potential(double k_ext) {
  return {[k_ext](double x) { return 0.5 * k_ext * x * x; },
          [k_ext](double x) { return k_ext * x; }};
}

ExternalPotential free_potential() {
  return {[](double) { return 0.0; }, [](double) { return 0.0; }};
}

std::vector<ClassicalSample> classical_trajectory(const ClassicalState& init,
                                                  const ExternalPotential& potential, double dt,
                                                  double t_end, double mass) {
  if (!std::isfinite(init.position) || !std::isfinite(init.velocity)) {
    throw DegenerateInputError("classical_trajectory: non-finite initial state");
  }
  if (!(mass > 0.0)) throw ConfigError("mass must be > 0");
  const auto n = sample_count(dt, t_end);
  auto rhs = [&](const std::array<double, 2>& y) {
    return std::array<double, 2>{y[1], -potential.gradient(y[0]) / mass};
  };
  std::array<double, 2> y{init.position, init.velocity};
  std::vector<ClassicalSample> out;
  out.reserve(n + 1);
  out.push_back({0.0, init});
  const double h = dt / kSubsteps;
  for (std::size_t s = 1; s <= n; ++s) {
    for (int j = 0; j < kSubsteps; ++j) y = rk4(y, h, rhs);
    out.push_back({static_cast<double>(s) * dt, {y[0], y[1]}});
  }
  return out;
}

double classical_energy(const ClassicalState& s, const ExternalPotential& potential, double mass) {
  return 0.5 * mass * s.velocity * s.velocity + potential.value(s.position);
}

}  // namespace sng
