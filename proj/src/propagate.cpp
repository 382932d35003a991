#include "sng/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "sng/errors.hpp"
#include "sng/fft.hpp"

namespace sng {

namespace {

constexpr double kStepCountTolerance = 1e-9;

double mean_x(std::span<const Complex> psi, const Grid1D& grid) {
  double w = 0.0;
  double wx = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double rho = std::norm(psi[i]);
    w += rho;
    wx += rho * grid.x(i);
  }
  if (!(w > 0.0)) throw DegenerateInputError("zero-norm wave");
  return wx / w;
}

// Largest |V''| by central differences; 0 for an empty or flat potential.
double curvature_bound(const RealField& v, double dx) {
  double k = 0.0;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    k = std::max(k, std::abs(v[i + 1] - 2.0 * v[i] + v[i - 1]) / (dx * dx));
  }
  return k;
}

}  // namespace

std::size_t EvolutionSpec::step_count() const {
  validate();
  const double ratio = t_end / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > kStepCountTolerance * std::max(1.0, ratio)) {
    throw ConfigError("t_end/dt = " + std::to_string(ratio) + " is not an integer step count");
  }
  return static_cast<std::size_t>(rounded);
}

void EvolutionSpec::validate() const {
  std::vector<std::string> problems;
  if (!(dt > 0.0) || !std::isfinite(dt)) problems.push_back("dt must be > 0");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) problems.push_back("t_end must be > 0");
  if (output_stride < 1) problems.push_back("output_stride must be >= 1");
  if (boundary_tolerance && !(*boundary_tolerance > 0.0)) {
    problems.push_back("boundary tolerance must be > 0");
  }
  if (!problems.empty()) throw ConfigError(problems);
}

double strang_dt_max(double total_stiffness, double mass) {
  if (!(total_stiffness > 0.0)) return std::numeric_limits<double>::infinity();
  return 2.0 / std::sqrt(total_stiffness / mass);
}

double default_dt(double total_stiffness, double mass) {
  if (!(total_stiffness > 0.0)) throw ConfigError("default_dt needs a positive stiffness");
  return 2.0 * std::numbers::pi / (50.0 * std::sqrt(total_stiffness / mass));
}

SelfInteraction no_self_interaction() { return {}; }

SelfInteraction harmonic_self_interaction(const Grid1D& grid, double k_self) {
  if (!(k_self >= 0.0)) throw ConfigError("k_self must be >= 0");
  SelfInteraction s;
  s.stiffness = k_self;
  s.potential = [grid, k_self](std::span<const Complex> psi, std::span<double> out) {
    const double m = mean_x(psi, grid);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double d = grid.x(i) - m;
      out[i] = 0.5 * k_self * d * d;
    }
  };
  s.energy = [grid, k_self](std::span<const Complex> psi) {
    const double m = mean_x(psi, grid);
    double e = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const double d = grid.x(i) - m;
      e += std::norm(psi[i]) * d * d;
    }
    return 0.5 * k_self * e * grid.dx();
  };
  return s;
}

SelfInteraction kernel_self_interaction(const Grid1D& grid, const ConvolutionKernel& kernel) {
  auto conv = std::make_shared<KernelConvolver>(grid, kernel);
  SelfInteraction s;
  s.potential = [conv, grid](std::span<const Complex> psi, std::span<double> out) {
    const auto v = conv->potential(WaveField(grid, {psi.begin(), psi.end()}));
    std::copy(v.begin(), v.end(), out.begin());
  };
  s.energy = [conv, grid](std::span<const Complex> psi) {
    const auto v = conv->potential(WaveField(grid, {psi.begin(), psi.end()}));
    double e = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) e += std::norm(psi[i]) * v[i];
    return 0.5 * e * grid.dx();
  };
  // Effective stiffness from the kernel's curvature at the origin.
  const double h = 1e-4 * grid.length();
  const double f0 = kernel.shape(0.0);
  const double f1 = kernel.shape(h);
  const double f2 = kernel.shape(2.0 * h);
  s.stiffness = std::abs(kernel.coupling * (f2 - 2.0 * f1 + f0) / (h * h));
  return s;
}

SplitStepPropagator::SplitStepPropagator(const WaveField& psi0, RealField v_ext, SelfInteraction self,
                                         PhysParams phys, SelfConsistency mode)
    : grid_(psi0.grid()),
      psi_(psi0.to_vector()),
      v_ext_(std::move(v_ext)),
      v_self_(psi0.size(), 0.0),
      k_(psi0.grid().wavenumbers()),
      self_(std::move(self)),
      phys_(phys),
      mode_(mode) {
  phys_.validate();
  if (v_ext_.empty()) v_ext_.assign(psi_.size(), 0.0);
  if (v_ext_.size() != psi_.size()) throw ConfigError("V_ext size does not match the grid");
  if (!(psi0.values().size() > 0) || !(sng::squared_norm(psi0) > 0.0)) {
    throw DegenerateInputError("initial wave has zero norm");
  }
  fill_self_potential();
}

void SplitStepPropagator::fill_self_potential() {
  if (self_.potential) self_.potential(psi_, v_self_);
}

void SplitStepPropagator::refresh_factors(double dt, Complex unit) {
  if (dt == factor_dt_ && unit == factor_unit_ && !drift_factor_.empty()) return;
  const std::size_t n = psi_.size();
  drift_factor_.resize(n);
  ext_factor_.resize(n);
  const double c = phys_.hbar * dt / (2.0 * phys_.mass);
  const double half = 0.5 * dt / phys_.hbar;
  for (std::size_t i = 0; i < n; ++i) {
    drift_factor_[i] = std::exp(unit * (c * k_[i] * k_[i]));
    ext_factor_[i] = std::exp(unit * (v_ext_[i] * half));
  }
  factor_dt_ = dt;
  factor_unit_ = unit;
}

// Half kick: cached external factor times the current self factor.
void SplitStepPropagator::kick(double dt, Complex unit) {
  refresh_factors(dt, unit);
  const double half = 0.5 * dt / phys_.hbar;
  if (!self_.potential) {
    for (std::size_t i = 0; i < psi_.size(); ++i) psi_[i] *= ext_factor_[i];
  } else if (unit.real() == 0.0) {
    for (std::size_t i = 0; i < psi_.size(); ++i) {
      psi_[i] *= ext_factor_[i] * std::polar(1.0, -v_self_[i] * half);
    }
  } else {
    for (std::size_t i = 0; i < psi_.size(); ++i) {
      psi_[i] *= ext_factor_[i] * std::exp(-v_self_[i] * half);
    }
  }
}

void SplitStepPropagator::drift(double dt, Complex unit) {
  refresh_factors(dt, unit);
  const auto& plan = cached_plan(psi_.size());
  plan.forward(psi_);
  for (std::size_t i = 0; i < psi_.size(); ++i) psi_[i] *= drift_factor_[i];
  plan.inverse(psi_);
}

void SplitStepPropagator::step(double dt) {
  const Complex unit(0.0, -1.0);
  fill_self_potential();
  kick(dt, unit);
  drift(dt, unit);
  if (mode_ == SelfConsistency::midpoint_predictor) fill_self_potential();
  kick(dt, unit);
  time_ += dt;
  if (perturbation_) perturbation_(time_, psi_);
}

void SplitStepPropagator::imaginary_step(double dtau) {
  const Complex unit(-1.0, 0.0);
  fill_self_potential();
  kick(dtau, unit);
  drift(dtau, unit);
  if (mode_ == SelfConsistency::midpoint_predictor) fill_self_potential();
  kick(dtau, unit);
}

void SplitStepPropagator::renormalize(double norm_sq) {
  const double current = squared_norm();
  if (!(current > 0.0)) throw DegenerateInputError("cannot renormalize a zero-norm wave");
  const double f = std::sqrt(norm_sq / current);
  for (auto& z : psi_) z *= f;
}

void SplitStepPropagator::reset(std::span<const Complex> values) {
  if (values.size() != psi_.size()) throw ConfigError("reset: size mismatch");
  std::copy(values.begin(), values.end(), psi_.begin());
  fill_self_potential();
}

WaveField SplitStepPropagator::state() const { return WaveField(grid_, psi_); }

double SplitStepPropagator::squared_norm() const {
  double s = 0.0;
  for (const auto& z : psi_) s += std::norm(z);
  return s * grid_.dx();
}

double SplitStepPropagator::mean_position() const { return mean_x(psi_, grid_); }

double SplitStepPropagator::kinetic_energy() const {
  std::vector<Complex> buf = psi_;
  cached_plan(buf.size()).forward(buf);
  double t = 0.0;
  for (std::size_t i = 0; i < buf.size(); ++i) t += std::norm(buf[i]) * k_[i] * k_[i];
  const double n = static_cast<double>(buf.size());
  return t * grid_.dx() / n * phys_.hbar * phys_.hbar / (2.0 * phys_.mass);
}

double SplitStepPropagator::energy() const {
  double e = kinetic_energy();
  double v = 0.0;
  for (std::size_t i = 0; i < psi_.size(); ++i) v += std::norm(psi_[i]) * v_ext_[i];
  e += v * grid_.dx();
  if (self_.energy) e += self_.energy(psi_);
  return e / squared_norm();
}

double SplitStepPropagator::eigenvalue() const {
  RealField vs(psi_.size(), 0.0);
  if (self_.potential) self_.potential(psi_, vs);
  double v = 0.0;
  for (std::size_t i = 0; i < psi_.size(); ++i) v += std::norm(psi_[i]) * (v_ext_[i] + vs[i]);
  return (kinetic_energy() + v * grid_.dx()) / squared_norm();
}

EvolutionResult evolve(const WaveField& psi0, const RealField& v_ext, const SelfInteraction& self,
                       const EvolutionSpec& spec, const PhysParams& phys) {
  if (spec.scheme != Scheme::strang_split) {
    throw ConfigError("real-time evolution requires scheme = strang_split");
  }
  const auto steps = spec.step_count();
  const RealField vx = v_ext.empty() ? RealField(psi0.size(), 0.0) : v_ext;
  const double stiffness = curvature_bound(vx, psi0.grid().dx()) + self.stiffness;
  const double dt_max = strang_dt_max(stiffness, phys.mass);
  if (!(spec.dt < dt_max)) {
    throw ConfigError("dt = " + std::to_string(spec.dt) + " exceeds the stability bound " +
                      std::to_string(dt_max));
  }

  SplitStepPropagator prop(psi0, vx, self, phys, spec.self_consistency);
  const double signed_dt = spec.direction == TimeDirection::forward ? spec.dt : -spec.dt;
  const auto n = psi0.size();

  EvolutionResult result{TrajectoryLog{}, psi0, dt_max};
  auto& log = result.log;
  auto record = [&](std::size_t s) {
    const auto psi = prop.values();
    const auto& grid = psi0.grid();
    double w = 0.0, wx = 0.0, wxx = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double rho = std::norm(psi[i]);
      w += rho;
      wx += rho * grid.x(i);
      wxx += rho * grid.x(i) * grid.x(i);
      peak = std::max(peak, rho);
    }
    const double t = static_cast<double>(s) * spec.dt;
    if (spec.boundary_tolerance) {
      const double edge = std::max(std::norm(psi[0]), std::norm(psi[n - 1]));
      const double ratio = edge / peak;
      if (ratio > *spec.boundary_tolerance) {
        throw BoundaryLeakError(t, ratio, *spec.boundary_tolerance);
      }
    }
    log.times.push_back(t);
    log.mean_x.push_back(wx / w);
    log.mean_x2.push_back(wxx / w);
    log.norm_sq.push_back(w * grid.dx());
    log.energy.push_back(prop.energy());
    if (spec.keep_snapshots) log.snapshots.push_back(prop.state());
  };

  record(0);
  for (std::size_t s = 1; s <= steps; ++s) {
    prop.step(signed_dt);
    if (s % static_cast<std::size_t>(spec.output_stride) == 0 || s == steps) record(s);
  }
  result.final_state = prop.state();
  return result;
}

EvolutionResult evolve_linear(const WaveField& psi0, const RealField& v_ext,
                              const EvolutionSpec& spec, const PhysParams& phys) {
  return evolve(psi0, v_ext, no_self_interaction(), spec, phys);
}

EvolutionResult evolve_self_trap(const WaveField& psi0, const HarmonicModelParams& params,
                              const EvolutionSpec& spec, const PhysParams& phys) {
  params.validate();
  return evolve(psi0, harmonic_external(psi0.grid(), params.k_ext),
                harmonic_self_interaction(psi0.grid(), params.k_self), spec, phys);
}

EvolutionResult evolve_kernel(const WaveField& psi0, const ConvolutionKernel& kernel,
                              const RealField& v_ext, const EvolutionSpec& spec,
                              const PhysParams& phys) {
  return evolve(psi0, v_ext, kernel_self_interaction(psi0.grid(), kernel), spec, phys);
}

RelaxResult imaginary_time_relax(const WaveField& psi0, const RelaxModel& model,
                                 double target_norm_sq, double tol, const RelaxOptions& options,
                                 const PhysParams& phys) {
  if (!(target_norm_sq > 0.0)) throw ConfigError("target_norm_sq must be > 0");
  if (!(tol > 0.0)) throw ConfigError("tol must be > 0");
  if (!(options.initial_step > 0.0)) throw ConfigError("initial_step must be > 0");

  SplitStepPropagator prop(psi0, model.v_ext, model.self, phys, SelfConsistency::midpoint_predictor);
  prop.renormalize(target_norm_sq);

  std::vector<double> history{prop.energy()};
  std::vector<Complex> previous(prop.values().begin(), prop.values().end());
  double dtau = options.initial_step;
  std::size_t accepted = 0;

  for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
    prop.imaginary_step(dtau);
    prop.renormalize(target_norm_sq);
    const double e_prev = history.back();
    const double e_new = prop.energy();
    const double scale = std::max(std::abs(e_prev), std::numeric_limits<double>::min());

    if (!std::isfinite(e_new)) throw ConvergenceError("relaxation produced a non-finite energy", history);
    if (e_new > e_prev) {
      prop.reset(previous);
      if (e_new - e_prev <= tol * scale) {
        return {prop.state(), prop.eigenvalue(), history.back(), accepted, history};
      }
      dtau *= 0.5;
      if (dtau < options.min_step) {
        throw ConvergenceError("relaxation step underflow", history);
      }
      continue;
    }
    ++accepted;
    history.push_back(e_new);
    previous.assign(prop.values().begin(), prop.values().end());
    if ((e_prev - e_new) < tol * scale && accepted >= options.min_iters) {
      return {prop.state(), prop.eigenvalue(), e_new, accepted, history};
    }
  }
  throw ConvergenceError("relaxation did not converge within " + std::to_string(options.max_iters) +
                             " iterations",
                         history);
}

void write_snapshot(const std::filesystem::path& path, double t, const WaveField& field) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  out << "# t=" << t << '\n';
  const auto& grid = field.grid();
  for (std::size_t i = 0; i < field.size(); ++i) {
    out << grid.x(i) << ' ' << field[i].real() << ' ' << field[i].imag() << '\n';
  }
}

std::pair<double, WaveField> read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  double t = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> xs;
  std::vector<Complex> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# t=", 0) == 0) t = std::stod(line.substr(4));
      continue;
    }
    std::istringstream row(line);
    double x = 0.0, re = 0.0, im = 0.0;
    if (!(row >> x >> re >> im)) throw Error("malformed snapshot row in " + path.string());
    xs.push_back(x);
    values.emplace_back(re, im);
  }
  if (xs.size() < 2) throw Error("snapshot " + path.string() + " has fewer than two nodes");
  const double dx = xs[1] - xs[0];
  const Grid1D grid(xs.size(), xs.front(), xs.front() + dx * static_cast<double>(xs.size()));
  return {t, WaveField(grid, std::move(values))};
}

std::vector<std::filesystem::path> write_snapshots(const std::filesystem::path& dir,
                                                   const TrajectoryLog& log) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (std::size_t i = 0; i < log.snapshots.size(); ++i) {
    auto p = dir / ("snap_" + std::to_string(i) + ".dat");
    write_snapshot(p, log.times[i], log.snapshots[i]);
    paths.push_back(std::move(p));
  }
  return paths;
}

}  // namespace sng
