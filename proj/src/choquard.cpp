#include "sng/choquard.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>

#include "sng/errors.hpp"

namespace sng {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

struct Tridiagonal {
  RealField lower, diag, upper;
};

// Thomas algorithm; the system is diagonally dominant for the step sizes used.
RealField solve_tridiagonal(const Tridiagonal& m, RealField rhs) {
  const auto n = rhs.size();
  RealField c(n);
  double denom = m.diag[0];
  c[0] = m.upper[0] / denom;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = m.diag[i] - m.lower[i] * c[i - 1];
    c[i] = i + 1 < n ? m.upper[i] / denom : 0.0;
    rhs[i] = (rhs[i] - m.lower[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
  return rhs;
}

double kinetic_sum(const RadialGrid& grid, const RealField& u) {
  const auto n = u.size();
  const double dr = grid.dr();
  double s = 0.5 * std::pow(2.0 * u[0] / dr, 2) + 0.5 * std::pow(2.0 * u[n - 1] / dr, 2);
  for (std::size_t i = 0; i + 1 < n; ++i) s += std::pow((u[i + 1] - u[i]) / dr, 2);
  return kFourPi * s * dr;
}

RealField to_u(const RadialGrid& grid, const RealField& phi) {
  RealField u(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) u[i] = grid.r(i) * phi[i];
  return u;
}

RealField to_phi(const RadialGrid& grid, const RealField& u) {
  RealField phi(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) phi[i] = u[i] / grid.r(i);
  return phi;
}

double u_norm_sq(const RadialGrid& grid, const RealField& u) {
  double s = 0.0;
  for (double v : u) s += v * v;
  return kFourPi * s * grid.dr();
}

}  // namespace

RadialGrid::RadialGrid(std::size_t n_points, double r_max) : n_(n_points), r_max_(r_max), dr_(0.0) {
  if (n_points < 3) throw ConfigError("radial grid needs at least 3 points");
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw ConfigError("r_max must be > 0");
  dr_ = r_max / static_cast<double>(n_points);
}

double radial_norm_sq(const RadialGrid& grid, const RealField& profile) {
  return u_norm_sq(grid, to_u(grid, profile));
}

RealField radial_newton_potential(const RadialGrid& grid, const RealField& profile, double G,
                                  double M) {
  const auto n = grid.size();
  if (profile.size() != n) throw ConfigError("profile size does not match the radial grid");
  const double dr = grid.dr();
  RealField shell_mass(n), shell_pot(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = grid.r(i);
    const double rho = profile[i] * profile[i];
    shell_mass[i] = kFourPi * r * r * rho * dr;
    shell_pot[i] = kFourPi * r * rho * dr;
  }
  RealField inner(n), outer(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    inner[i] = acc + 0.5 * shell_mass[i];
    acc += shell_mass[i];
  }
  acc = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    outer[i] = acc + 0.5 * shell_pot[i];
    acc += shell_pot[i];
  }
  RealField phi(n);
  for (std::size_t i = 0; i < n; ++i) phi[i] = -G * M * (inner[i] / grid.r(i) + outer[i]);
  return phi;
}

double energy_functional(const RadialGrid& grid, const RealField& profile, const PhysParams& phys) {
  const auto u = to_u(grid, profile);
  const auto pot = radial_newton_potential(grid, profile, phys.G, phys.mass);
  double w = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) w += pot[i] * u[i] * u[i];
  w *= kFourPi * grid.dr();
  return phys.hbar * phys.hbar / (2.0 * phys.mass) * kinetic_sum(grid, u) + 0.5 * phys.mass * w;
}

GroundStateResult solve_ground_state(const PhysParams& phys, double target_norm_sq, double tol,
                                     const ChoquardOptions& options) {
  if (!(target_norm_sq > 0.0)) throw ConfigError("target_norm_sq must be > 0");
  if (!(tol > 0.0)) throw ConfigError("tol must be > 0");
  const double r_max = options.r_max > 0.0 ? options.r_max : 60.0 / target_norm_sq;
  const RadialGrid grid(options.n_points, r_max);
  const auto n = grid.size();
  const double dr = grid.dr();
  const double M = phys.mass;
  const double t_coef = phys.hbar * phys.hbar / (2.0 * M * dr * dr);

  // Gaussian seed on the natural length scale of the scaled problem.
  const double sigma = 2.0 * phys.hbar * phys.hbar / (phys.G * M * M * M * target_norm_sq);
  RealField u(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = grid.r(i);
    u[i] = r * std::exp(-0.5 * r * r / (sigma * sigma));
  }
  auto renorm = [&](RealField& v) {
    const double s = std::sqrt(target_norm_sq / u_norm_sq(grid, v));
    for (auto& x : v) x *= s;
  };
  renorm(u);

  auto energy_of = [&](const RealField& v) { return energy_functional(grid, to_phi(grid, v), phys); };
  std::vector<double> history{energy_of(u)};
  double dtau = std::numeric_limits<double>::infinity();
  std::size_t iters = 0;
  bool converged = false;

  Tridiagonal h{RealField(n, -t_coef), RealField(n), RealField(n, -t_coef)};
  while (iters < options.max_iters) {
    const auto pot = radial_newton_potential(grid, to_phi(grid, u), phys.G, M);
    const double v_min = *std::min_element(pot.begin(), pot.end()) * M;
    dtau = std::min(dtau, 0.5 / std::max(std::abs(v_min), 1e-300));
    Tridiagonal a = h;
    for (std::size_t i = 0; i < n; ++i) {
      const double kin = (i == 0 || i + 1 == n) ? 3.0 * t_coef : 2.0 * t_coef;
      a.diag[i] = 1.0 + dtau * (kin + M * pot[i]);
      a.lower[i] *= dtau;
      a.upper[i] *= dtau;
    }
    auto next = solve_tridiagonal(a, u);
    renorm(next);
    const double e_new = energy_of(next);
    const double e_old = history.back();
    ++iters;
    if (e_new > e_old + tol * std::abs(e_old)) {
      dtau *= 0.5;
      if (dtau < 1e-14) throw ConvergenceError("Choquard relaxation step underflow", history);
      continue;
    }
    u = std::move(next);
    history.push_back(e_new);
    if (std::abs(e_old - e_new) < tol * std::abs(e_new) && iters > 5) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("Choquard relaxation did not converge in " +
                               std::to_string(options.max_iters) + " sweeps",
                           history);
  }

  auto phi = to_phi(grid, u);
  double peak = 0.0;
  for (double v : phi) peak = std::max(peak, std::abs(v));
  if (std::abs(phi.back()) > options.tail_tolerance * peak) {
    throw ConfigError("r_max too small: boundary/peak ratio " +
                      std::to_string(std::abs(phi.back()) / peak));
  }

  const auto pot = radial_newton_potential(grid, phi, phys.G, M);
  double w = 0.0;
  double r2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w += M * pot[i] * u[i] * u[i];
    r2 += grid.r(i) * grid.r(i) * u[i] * u[i];
  }
  w *= kFourPi * dr;
  r2 *= kFourPi * dr;
  const double norm = u_norm_sq(grid, u);

  GroundStateResult res;
  res.grid = grid;
  res.profile = std::move(phi);
  res.norm_sq = norm;
  res.eigenvalue = (phys.hbar * phys.hbar / (2.0 * M) * kinetic_sum(grid, u) + w) / norm;
  res.functional_energy = history.back();
  res.extent = std::sqrt(r2 / norm);
  res.iters = iters;
  res.energy_history = std::move(history);
  return res;
}

double spectrum_value(int n, const SpectrumFit& fit) {
  if (n < 0) throw ConfigError("spectrum index must be >= 0");
  return fit.a / std::pow(static_cast<double>(n) + fit.b, fit.c);
}

void append_choquard_result(const std::filesystem::path& path, const GroundStateResult& r) {
  const bool fresh = !std::filesystem::exists(path);
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot write " + path.string());
  if (fresh) out << "N_sq\tE0\tE_functional\textent\titers\n";
  out << std::setprecision(17) << r.norm_sq << '\t' << r.eigenvalue << '\t' << r.functional_energy
      << '\t' << r.extent << '\t' << r.iters << '\n';
}

}  // namespace sng
