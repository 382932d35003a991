#include "sng/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sng/errors.hpp"
#include "sng/fft.hpp"

namespace sng {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void PhysParams::validate() const {
  std::vector<std::string> problems;
  if (!positive_finite(hbar)) problems.emplace_back("hbar must be > 0");
  if (!positive_finite(mass)) problems.emplace_back("mass must be > 0");
  if (!positive_finite(G)) problems.emplace_back("G must be > 0");
  if (!positive_finite(norm_sq)) problems.emplace_back("norm_sq must be > 0");
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

void HarmonicModelParams::validate() const {
  std::vector<std::string> problems;
  if (!std::isfinite(k_ext) || k_ext < 0.0) problems.emplace_back("k_ext must be >= 0");
  if (!std::isfinite(k_self) || k_self < 0.0) problems.emplace_back("k_self must be >= 0");
  if (sphere_mass && !positive_finite(*sphere_mass)) problems.emplace_back("sphere_mass must be > 0");
  if (sphere_radius && !positive_finite(*sphere_radius)) {
    problems.emplace_back("sphere_radius must be > 0");
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

double sphere_k_self(double G, double sphere_mass, double sphere_radius, double norm_sq) {
  return G * sphere_mass * sphere_mass * norm_sq / (2.0 * std::pow(sphere_radius, 3));
}

void check_consistency(const HarmonicModelParams& model, const PhysParams& phys) {
  if (!model.sphere_mass || !model.sphere_radius) return;
  const double derived = sphere_k_self(phys.G, *model.sphere_mass, *model.sphere_radius, phys.norm_sq);
  const double scale = std::max(std::abs(derived), std::abs(model.k_self));
  if (std::abs(derived - model.k_self) > 1e-12 * scale) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "k_self = " << model.k_self << " disagrees with G*M^2*N^2/(2R^3) = " << derived;
    throw ConfigError(msg.str());
  }
}

RealField harmonic_external(const Grid1D& grid, double k_ext) {
  if (!std::isfinite(k_ext) || k_ext < 0.0) throw ConfigError("k_ext must be >= 0");
  RealField v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = grid.x(i);
    v[i] = 0.5 * k_ext * x * x;
  }
  return v;
}

RealField self_harmonic(const WaveField& f, const HarmonicModelParams& params) {
  const double center = mean_position(f);
  const auto& grid = f.grid();
  RealField v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = grid.x(i) - center;
    v[i] = 0.5 * params.k_self * d * d;
  }
  return v;
}

ConvolutionKernel zero_kernel() {
  return {"zero", [](double) { return 0.0; }, 0.0};
}

ConvolutionKernel sphere_quadratic_kernel(double k_self, double norm_sq, double radius) {
  if (!positive_finite(radius)) throw ConfigError("sphere radius must be > 0");
  if (!positive_finite(norm_sq)) throw ConfigError("norm_sq must be > 0");
  if (!std::isfinite(k_self) || k_self < 0.0) throw ConfigError("k_self must be >= 0");
  // -coupling * (-N^2/(2 R^3)) (x - x')^2 averaged gives (k_self/2)(x-<x>)^2.
  const double coupling = k_self * std::pow(radius, 3) / norm_sq;
  return {"sphere-quadratic",
          [radius](double u) { return (1.2 - 0.5 * (u / radius) * (u / radius)) / radius; },
          coupling};
}

ConvolutionKernel tabulated_kernel(std::vector<double> u, std::vector<double> f, double coupling) {
  if (u.size() != f.size() || u.size() < 2) {
    throw ConfigError("kernel table needs at least two (u, F) rows");
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]) || !std::isfinite(f[i])) throw ConfigError("kernel table has non-finite entries");
    if (i > 0 && !(u[i] > u[i - 1])) throw ConfigError("kernel table u column must be strictly increasing");
  }
  auto shape = [u = std::move(u), f = std::move(f)](double x) {
    if (x < u.front() || x > u.back()) {
      std::ostringstream msg;
      msg << "kernel table covers [" << u.front() << ", " << u.back() << "], distance " << x
          << " requested";
      throw ConfigError(msg.str());
    }
    auto it = std::upper_bound(u.begin(), u.end(), x);
    if (it == u.end()) return f.back();
    const auto j = static_cast<std::size_t>(it - u.begin());
    const double t = (x - u[j - 1]) / (u[j] - u[j - 1]);
    return (1.0 - t) * f[j - 1] + t * f[j];
  };
  return {"custom-table", std::move(shape), coupling};
}

ConvolutionKernel load_kernel_table(const std::filesystem::path& path, double coupling) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open kernel table " + path.string());
  std::vector<double> u;
  std::vector<double> f;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double a = 0.0;
    double b = 0.0;
    if (!(row >> a)) continue;
    if (!(row >> b)) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected two columns");
    }
    u.push_back(a);
    f.push_back(b);
  }
  return tabulated_kernel(std::move(u), std::move(f), coupling);
}

KernelConvolver::KernelConvolver(const Grid1D& grid, const ConvolutionKernel& kernel)
    : grid_(grid), spectrum_(2 * grid.size()), coupling_(kernel.coupling) {
  const auto n = grid.size();
  const double dx = grid.dx();
  // Wrap-around layout for a linear convolution of length-n sequences.
  for (std::size_t j = 0; j < n; ++j) {
    const double value = kernel.shape(static_cast<double>(j) * dx);
    if (!std::isfinite(value)) throw ConfigError("kernel " + kernel.name + " is not finite on the grid");
    spectrum_[j] = value;
    if (j > 0) spectrum_[2 * n - j] = value;
  }
  spectrum_[n] = 0.0;
  cached_plan(2 * n).forward(spectrum_);
}

RealField KernelConvolver::potential(const WaveField& f) const {
  if (!(f.grid() == grid_)) throw ConfigError("KernelConvolver: grid mismatch");
  const auto n = grid_.size();
  std::vector<Complex> buf(2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) buf[i] = std::norm(f[i]);
  const auto& plan = cached_plan(2 * n);
  plan.forward(buf);
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= spectrum_[i];
  plan.inverse(buf);
  RealField v(n);
  const double scale = -coupling_ * grid_.dx();
  for (std::size_t i = 0; i < n; ++i) v[i] = scale * buf[i].real();
  return v;
}

RealField convolution_self_potential(const WaveField& f, const ConvolutionKernel& kernel) {
  return KernelConvolver(f.grid(), kernel).potential(f);
}

double scaling_check(const WaveField& f, Complex lambda, const ConvolutionKernel& kernel) {
  const KernelConvolver conv(f.grid(), kernel);
  const auto base = conv.potential(f);
  const auto scaled = conv.potential(f.scaled(lambda));
  const double factor = std::norm(lambda);
  double worst = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    worst = std::max(worst, std::abs(scaled[i] - factor * base[i]));
  }
  return worst;
}

}  // namespace sng
