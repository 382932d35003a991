#include "sng/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>

#include "sng/errors.hpp"

namespace sng {

double SolitonState::extent() const { return std::numbers::sqrt2 * width; }

SolitonState extract_soliton(const WaveField& psi_nl, const WaveField& psi_l) {
  if (!(psi_nl.grid() == psi_l.grid())) throw ConfigError("extract_soliton: grid mismatch");
  const auto& grid = psi_l.grid();
  const auto n = grid.size();
  const double threshold = kMaskRelative * max_abs(psi_l);
  if (!(threshold > 0.0)) throw ExtractionError("pilot wave vanishes identically");

  const auto d_nl = spectral_gradient(psi_nl);
  const auto d_l = spectral_gradient(psi_l);
  std::vector<Complex> phi(n, 0.0);
  std::vector<Complex> dphi(n, 0.0);
  std::vector<std::uint8_t> mask(n, 0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(std::abs(psi_l[i]) > threshold)) continue;
    mask[i] = 1;
    ++count;
    phi[i] = psi_nl[i] / psi_l[i];
    dphi[i] = (d_nl[i] - phi[i] * d_l[i]) / psi_l[i];
  }
  const double fraction = static_cast<double>(count) / static_cast<double>(n);
  if (fraction < kMinValidFraction) {
    throw ExtractionError("pilot wave resolvable on only " + std::to_string(fraction) +
                          " of the domain");
  }

  double w = 0.0;
  double wx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double rho = std::norm(phi[i]);
    w += rho;
    wx += rho * grid.x(i);
  }
  if (!(w > 0.0) || !std::isfinite(w)) throw ExtractionError("soliton has zero or infinite norm");
  const double x0 = wx / w;
  double wxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = grid.x(i) - x0;
    wxx += std::norm(phi[i]) * d * d;
  }

  const double s = (x0 - grid.x_min()) / grid.dx();
  const auto i0 = static_cast<std::size_t>(std::clamp(std::floor(s), 0.0, static_cast<double>(n - 2)));
  if (!mask[i0] || !mask[i0 + 1]) throw ExtractionError("barycentre lies outside the pilot mask");

  return SolitonState{WaveField(grid, std::move(phi)),
                      WaveField(grid, std::move(dphi)),
                      std::move(mask),
                      x0,
                      w * grid.dx(),
                      std::sqrt(wxx / w),
                      fraction};
}

namespace {

double at_x0(const Grid1D& grid, const RealField& field, double x0, const char* what) {
  const double v = interpolate(grid, field, x0);
  if (!std::isfinite(v)) throw ExtractionError(std::string(what) + " undefined at the barycentre");
  return v;
}

}  // namespace

double v_dbb(const WaveField& psi_l, double x0, const PhysParams& phys) {
  const auto pa = phase_amplitude(psi_l);
  return phys.hbar / phys.mass * at_x0(psi_l.grid(), pa.phase_gradient, x0, "pilot phase gradient");
}

InternalVelocity internal_velocity(const SolitonState& phi, const PhysParams& phys) {
  if (!(phi.norm_sq > 0.0)) throw DegenerateInputError("v_int: zero-norm soliton");
  // <phi| -i d/dx |phi> = sum conj(phi) (-i) phi'
  Complex s = 0.0;
  for (std::size_t i = 0; i < phi.phi.size(); ++i) {
    s += std::conj(phi.phi[i]) * Complex(0.0, -1.0) * phi.phi_gradient[i];
  }
  s *= phi.phi.grid().dx() * phys.hbar / (phys.mass * phi.norm_sq);
  return {s.real(), s.imag()};
}

double v_int(const SolitonState& phi, const PhysParams& phys) {
  return internal_velocity(phi, phys).value;
}

std::vector<double> time_derivative(const std::vector<double>& t, const std::vector<double>& f) {
  const auto n = t.size();
  if (n != f.size()) throw ConfigError("time_derivative: size mismatch");
  if (n < 3) throw DegenerateInputError("time_derivative needs at least 3 samples");
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h1 = t[i] - t[i - 1];
    const double h2 = t[i + 1] - t[i];
    d[i] = -h2 / (h1 * (h1 + h2)) * f[i - 1] + (h2 - h1) / (h1 * h2) * f[i] +
           h1 / (h2 * (h1 + h2)) * f[i + 1];
  }
  {
    const double h1 = t[1] - t[0];
    const double h2 = t[2] - t[1];
    d[0] = -(2 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1] -
           h1 / (h2 * (h1 + h2)) * f[2];
  }
  {
    const double h1 = t[n - 2] - t[n - 3];
    const double h2 = t[n - 1] - t[n - 2];
    d[n - 1] = h2 / (h1 * (h1 + h2)) * f[n - 3] - (h1 + h2) / (h1 * h2) * f[n - 2] +
               (2 * h2 + h1) / (h2 * (h1 + h2)) * f[n - 1];
  }
  return d;
}

std::vector<double> v_drift(const std::vector<double>& times, const std::vector<SolitonState>& states) {
  std::vector<double> x0(states.size());
  std::transform(states.begin(), states.end(), x0.begin(), [](const auto& s) { return s.x0; });
  return time_derivative(times, x0);
}

GuidanceSample sample_guidance(const WaveField& psi_nl, const WaveField& psi_l, double t,
                               const PhysParams& phys) {
  const auto st = extract_soliton(psi_nl, psi_l);
  const auto pa = phase_amplitude(psi_l);
  const auto& grid = psi_l.grid();
  const double c = phys.hbar / phys.mass;

  GuidanceSample g;
  g.t = t;
  g.x0 = st.x0;
  g.v_dbb = c * at_x0(grid, pa.phase_gradient, st.x0, "pilot phase gradient");
  const auto vi = internal_velocity(st, phys);
  g.v_int = vi.value;
  g.v_int_imag = vi.imaginary;
  g.norm_sq_phi = st.norm_sq;
  const double a = at_x0(grid, pa.amplitude, st.x0, "pilot amplitude");
  g.a_l_sq_at_x0 = a * a;
  g.log_amp_grad_at_x0 = at_x0(grid, pa.log_amplitude_gradient, st.x0, "pilot amplitude gradient");
  g.phase_lap_at_x0 = at_x0(grid, pa.phase_laplacian, st.x0, "pilot phase curvature");
  g.width = st.width;
  g.valid_fraction = st.valid_fraction;

  // Exact barycentre velocity minus (v_dbb + v_int):
  // <v_L> - v_L(x0) + <(x-x0) v_L'> - 2 <(x-x0) a_L u>, weights |phi|^2/n.
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!st.mask[i]) continue;
    const double rho = std::norm(st.phi[i]);
    if (rho == 0.0) continue;
    const double dx = grid.x(i) - st.x0;
    const double flux = c * (std::conj(st.phi[i]) * st.phi_gradient[i]).imag();
    sum += rho * c * (pa.phase_gradient[i] + dx * pa.phase_laplacian[i]) -
           2.0 * dx * pa.log_amplitude_gradient[i] * flux;
  }
  g.discarded = sum * grid.dx() / st.norm_sq - g.v_dbb;
  return g;
}

double norm_rate_prediction(double phase_lap_at_x0, double log_amp_grad_at_x0, double norm_sq,
                            double v_int, const PhysParams& phys) {
  return phys.hbar / phys.mass * phase_lap_at_x0 * norm_sq -
         2.0 * log_amp_grad_at_x0 * norm_sq * v_int;
}

double relative_residual(double measured, double predicted) {
  const double scale = std::max({std::abs(measured), std::abs(predicted), kResidualFloor});
  return (measured - predicted) / scale;
}

double norm_rate_residual(const WaveField& psi_l, const SolitonState& phi, double measured_rate,
                          const PhysParams& phys) {
  const auto pa = phase_amplitude(psi_l);
  const auto& grid = psi_l.grid();
  const double lap = at_x0(grid, pa.phase_laplacian, phi.x0, "pilot phase curvature");
  const double ag = at_x0(grid, pa.log_amplitude_gradient, phi.x0, "pilot amplitude gradient");
  return relative_residual(measured_rate,
                           norm_rate_prediction(lap, ag, phi.norm_sq, v_int(phi, phys), phys));
}

std::vector<VelocityDecomposition> decompose(const std::vector<GuidanceSample>& samples,
                                             const PhysParams& phys) {
  const auto n = samples.size();
  if (n < 3) throw DegenerateInputError("decompose needs at least 3 samples");
  std::vector<double> t(n), x0(n), norm(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = samples[i].t;
    x0[i] = samples[i].x0;
    norm[i] = samples[i].norm_sq_phi;
  }
  const auto vd = time_derivative(t, x0);
  const auto nd = time_derivative(t, norm);
  const double p2_ref = samples[0].norm_sq_phi * samples[0].a_l_sq_at_x0;

  std::vector<VelocityDecomposition> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = samples[i];
    auto& r = out[i];
    r.t = s.t;
    r.x0 = s.x0;
    r.v_drift = vd[i];
    r.v_dbb = s.v_dbb;
    r.v_int = s.v_int;
    r.residual_p1 = vd[i] - (s.v_dbb + s.v_int);
    r.norm_sq_phi = s.norm_sq_phi;
    r.a_l_sq_at_x0 = s.a_l_sq_at_x0;
    r.p2_product = s.norm_sq_phi * s.a_l_sq_at_x0 / p2_ref;
    r.norm_rate_lhs = nd[i];
    r.norm_rate_rhs =
        norm_rate_prediction(s.phase_lap_at_x0, s.log_amp_grad_at_x0, s.norm_sq_phi, s.v_int, phys);
    r.norm_rate_residual = relative_residual(r.norm_rate_lhs, r.norm_rate_rhs);
    r.width = s.width;
    r.valid_fraction = s.valid_fraction;
    r.discarded = s.discarded;
    r.v_int_imag = s.v_int_imag;
  }
  return out;
}

namespace {

double max_abs_drift(const std::vector<VelocityDecomposition>& log) {
  double m = 0.0;
  for (const auto& r : log) m = std::max(m, std::abs(r.v_drift));
  return std::max(m, kResidualFloor);
}

template <class F>
SeriesReport series_report(const std::vector<VelocityDecomposition>& log, F&& f) {
  SeriesReport rep;
  rep.series.reserve(log.size());
  for (const auto& r : log) {
    const double v = f(r);
    rep.series.push_back(v);
    rep.max_value = std::max(rep.max_value, std::abs(v));
  }
  return rep;
}

}  // namespace

SeriesReport property1_residual(const std::vector<VelocityDecomposition>& log) {
  const double scale = max_abs_drift(log);
  return series_report(log, [scale](const auto& r) { return r.residual_p1 / scale; });
}

SeriesReport property2_check(const std::vector<VelocityDecomposition>& log) {
  return series_report(log, [](const auto& r) { return r.p2_product - 1.0; });
}

SeriesReport norm_rate_report(const std::vector<VelocityDecomposition>& log) {
  return series_report(log, [](const auto& r) { return r.norm_rate_residual; });
}

SeriesReport discarded_terms_report(const std::vector<VelocityDecomposition>& log) {
  const double scale = max_abs_drift(log);
  return series_report(log, [scale](const auto& r) { return r.discarded / scale; });
}

StabilityReport soliton_stability(const std::vector<VelocityDecomposition>& log) {
  StabilityReport rep;
  if (log.empty()) return rep;
  const double w0 = log.front().width;
  for (const auto& r : log) {
    rep.min_valid_fraction = std::min(rep.min_valid_fraction, r.valid_fraction);
    rep.max_width_ratio = std::max(rep.max_width_ratio, r.width / w0);
  }
  rep.stable = rep.min_valid_fraction >= kMinValidFraction && rep.max_width_ratio <= 3.0;
  return rep;
}

void write_guidance_csv(std::ostream& out, const std::vector<VelocityDecomposition>& log) {
  out << kGuidanceCsvHeader << '\n';
  out << std::setprecision(17);
  for (const auto& r : log) {
    out << r.t << ',' << r.x0 << ',' << r.v_drift << ',' << r.v_dbb << ',' << r.v_int << ','
        << r.residual_p1 << ',' << r.norm_sq_phi << ',' << r.a_l_sq_at_x0 << ',' << r.p2_product
        << ',' << r.norm_rate_residual << ',' << r.width << ',' << r.valid_fraction << '\n';
  }
}

void write_guidance_csv(const std::filesystem::path& path,
                        const std::vector<VelocityDecomposition>& log) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_guidance_csv(out, log);
}

}  // namespace sng
