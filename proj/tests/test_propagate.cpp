#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "sng/errors.hpp"
#include "sng/oracles.hpp"
#include "sng/propagate.hpp"
#include "sng/scenario.hpp"

using namespace sng;

namespace {

constexpr double kPi = std::numbers::pi;

EvolutionSpec make_spec(double dt, double t_end, int stride = 1) {
  EvolutionSpec s;
  s.dt = dt;
  s.t_end = t_end;
  s.output_stride = stride;
  return s;
}

double relative_norm_drift(const TrajectoryLog& log) {
  double d = 0.0;
  for (double n : log.norm_sq) d = std::max(d, std::abs(n / log.norm_sq.front() - 1.0));
  return d;
}

// Removes the global phase of b relative to a.
double aligned_difference(const WaveField& a, const WaveField& b) {
  const Complex o = inner_product(b, a);
  return max_abs_difference(a, b.scaled(o / std::abs(o)));
}

WaveField shifted_modulus(const WaveField& f, double d) {
  const auto s = fourier_shift(f, d);
  std::vector<Complex> v(s.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(s[i]);
  return WaveField(f.grid(), v);
}

WaveField modulus(const WaveField& f) {
  std::vector<Complex> v(f.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(f[i]);
  return WaveField(f.grid(), v);
}

}  // namespace

TEST_CASE("evolution spec validation") {
  CHECK_THROWS_AS(make_spec(0.0, 1.0).validate(), ConfigError);
  CHECK_THROWS_AS(make_spec(0.3, 1.0).step_count(), ConfigError);
  CHECK(make_spec(0.1, 1.0).step_count() == 10);
  auto s = make_spec(0.1, 1.0);
  s.output_stride = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("default step and stability bound") {
  CHECK(default_dt(4.0, 1.0) == doctest::Approx(2.0 * kPi / 100.0));
  CHECK(strang_dt_max(4.0, 1.0) == doctest::Approx(1.0));
  CHECK(std::isinf(strang_dt_max(0.0, 1.0)));
  const Grid1D g(256, -10.0, 10.0);
  const auto psi = gaussian_packet(g, 0.0, 1.0, 0.0, 1.0);
  CHECK_THROWS_AS(evolve_linear(psi, harmonic_external(g, 100.0), make_spec(0.25, 1.0)), ConfigError);
}

TEST_CASE("free plane wave advances its phase") {
  const Grid1D g(128, 0.0, 2.0 * kPi);
  const double k = 3.0;
  std::vector<Complex> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::polar(1.0, k * g.x(i));
  const WaveField psi0(g, v);
  auto spec = make_spec(0.01, 1.0, 100);
  spec.boundary_tolerance.reset();
  const auto r = evolve_linear(psi0, {}, spec);
  const Complex phase = std::polar(1.0, -k * k / 2.0);
  CHECK(max_abs_difference(r.final_state, psi0.scaled(phase)) <= 1e-10);
}

TEST_CASE("coherent state oscillates classically") {
  const Grid1D g(1024, -20.0, 20.0);
  const double x0 = 2.0;
  const auto psi0 = coherent_state(g, 1.0, x0, 0.0).field;
  const double period = 2.0 * kPi;
  const auto r = evolve_linear(psi0, harmonic_external(g, 1.0), make_spec(period / 4000.0, period, 40));
  double err = 0.0;
  for (std::size_t i = 0; i < r.log.times.size(); ++i) {
    err = std::max(err, std::abs(r.log.mean_x[i] - x0 * std::cos(r.log.times[i])));
  }
  CHECK(err <= 1e-6);
  CHECK(relative_norm_drift(r.log) <= 1e-10);
}

TEST_CASE("trap ground state is stationary") {
  const Grid1D g(512, -15.0, 15.0);
  const auto psi0 = coherent_state(g, 1.0, 0.0, 0.0).field;
  // the split-step stationary state differs from the exact one at O(dt^2)
  const double period = 2.0 * kPi;
  const auto r = evolve_linear(psi0, harmonic_external(g, 1.0), make_spec(period / 30000.0, period, 300));
  const double w0 = std::sqrt(r.log.mean_x2.front());
  for (std::size_t i = 0; i < r.log.times.size(); ++i) {
    CHECK(std::abs(r.log.mean_x[i]) <= 1e-8);
    CHECK(std::abs(std::sqrt(r.log.mean_x2[i] - r.log.mean_x[i] * r.log.mean_x[i]) - w0) <= 1e-8);
  }
}

TEST_CASE("self-trap model without self term is the linear solver") {
  const Grid1D g(512, -15.0, 15.0);
  const auto psi0 = gaussian_packet(g, 1.0, 1.2, 0.5, 1.0);
  HarmonicModelParams p;
  p.k_ext = 1.0;
  const auto spec = make_spec(0.01, 2.0, 20);
  const auto a = evolve_linear(psi0, harmonic_external(g, 1.0), spec);
  const auto b = evolve_self_trap(psi0, p, spec);
  CHECK(max_abs_difference(a.final_state, b.final_state) <= 1e-12);
}

TEST_CASE("zero kernel is the linear solver") {
  const Grid1D g(512, -15.0, 15.0);
  const auto psi0 = gaussian_packet(g, 1.0, 1.2, 0.5, 1.0);
  const auto spec = make_spec(0.01, 2.0, 20);
  const auto v = harmonic_external(g, 1.0);
  const auto a = evolve_linear(psi0, v, spec);
  const auto b = evolve_kernel(psi0, zero_kernel(), v, spec);
  CHECK(max_abs_difference(a.final_state, b.final_state) <= 1e-12);
}

TEST_CASE("sphere kernel and self-trap model agree up to a global phase") {
  const Grid1D g(1024, -12.0, 12.0);
  const double k_self = 50.0;
  const auto psi0 = gaussian_packet(g, 0.5, 0.5, 1.0, 1.0);
  HarmonicModelParams p;
  p.k_ext = 1.0;
  p.k_self = k_self;
  const auto spec = make_spec(0.002, 1.0, 50);
  const auto a = evolve_self_trap(psi0, p, spec);
  const auto b = evolve_kernel(psi0, sphere_quadratic_kernel(k_self, 1.0, 1.3),
                               harmonic_external(g, 1.0), spec);
  CHECK(aligned_difference(a.final_state, b.final_state) <= 1e-8);
}

TEST_CASE("free-particle ehrenfest with a kernel") {
  const Grid1D g(1024, -20.0, 20.0);
  const auto psi0 = gaussian_packet(g, -1.0, 0.8, 1.0, 1.0);
  const auto kernel = tabulated_kernel({0.0, 1.0, 3.0, 50.0}, {1.0, 0.6, 0.1, 0.0}, 2.0);
  const double dt = 0.005;
  const auto r = evolve_kernel(psi0, kernel, {}, make_spec(dt, 2.0));
  CHECK(ehrenfest_residual(r.log.mean_x, dt, 0.0, 1.0) <= 5e-6);
}

TEST_CASE("ehrenfest holds for any self stiffness") {
  const Grid1D g(1024, -12.0, 12.0);
  for (double k_self : {0.0, 10.0, 200.0}) {
    CAPTURE(k_self);
    HarmonicModelParams p;
    p.k_ext = 1.0;
    p.k_self = k_self;
    const double dt = default_dt(1.0 + k_self, 1.0) / 4.0;
    const double t_end = dt * 800.0;
    const auto psi0 = gaussian_packet(g, 1.5, 0.6, 0.3, 1.0);
    const auto r = evolve_self_trap(psi0, p, make_spec(dt, t_end));
    CHECK(ehrenfest_residual(r.log.mean_x, dt, 1.0, 1.0) <= 1e-5);
    CHECK(relative_norm_drift(r.log) <= 1e-10);
  }
}

TEST_CASE("time reversal of the linear propagator") {
  const Grid1D g(1024, -20.0, 20.0);
  const auto psi0 = gaussian_packet(g, 2.0, 1.0, 1.5, 1.0);
  const auto v = harmonic_external(g, 1.0);
  const auto spec = make_spec(0.01, 3.0, 300);
  const auto fwd = evolve_linear(psi0, v, spec);
  auto back = spec;
  back.direction = TimeDirection::backward;
  const auto r = evolve_linear(fwd.final_state, v, back);
  CHECK(max_abs_difference(r.final_state, psi0) <= 1e-8 * max_abs(psi0));
}

TEST_CASE("strang splitting is second order") {
  const Grid1D g(1024, -10.0, 10.0);
  HarmonicModelParams p;
  p.k_ext = 1.0;
  p.k_self = 10.0;
  const auto psi0 = gaussian_packet(g, 1.0, 0.45, 0.5, 1.0);
  auto end = [&](double dt) { return evolve_self_trap(psi0, p, make_spec(dt, 1.0, 1000)).final_state; };
  const auto ref = end(0.02 / 8.0);
  const double ratio = max_abs_difference(end(0.02), ref) / max_abs_difference(end(0.01), ref);
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("frozen and midpoint modes converge to each other") {
  const Grid1D g(512, -10.0, 10.0);
  HarmonicModelParams p;
  p.k_ext = 1.0;
  p.k_self = 10.0;
  const auto psi0 = gaussian_packet(g, 1.0, 0.45, 0.5, 1.0);
  auto diff = [&](double dt) {
    auto a = make_spec(dt, 0.5, 1000);
    auto b = a;
    b.self_consistency = SelfConsistency::frozen;
    return max_abs_difference(evolve_self_trap(psi0, p, a).final_state,
                              evolve_self_trap(psi0, p, b).final_state);
  };
  CHECK(diff(0.0025) < diff(0.005));
}

TEST_CASE("boundary leak aborts the run") {
  const Grid1D g(256, -5.0, 5.0);
  const auto psi0 = gaussian_packet(g, 0.0, 0.5, 8.0, 1.0);
  try {
    evolve_linear(psi0, {}, make_spec(0.01, 2.0, 10));
    FAIL("expected a boundary leak");
  } catch (const BoundaryLeakError& e) {
    CHECK(e.time() > 0.0);
  }
}

TEST_CASE("boosted self-trapped ground state keeps its shape") {
  const Grid1D g(2048, -20.0, 20.0);
  const double k_self = 100.0;
  const double omega = std::sqrt(k_self);
  const double dt = (kPi / omega) / 400.0;
  SelfInteraction self = harmonic_self_interaction(g, k_self);
  const auto seed = gaussian_packet(g, 0.0, 0.5, 0.0, 1.0);
  RelaxOptions o;
  o.initial_step = dt;
  const auto gs = imaginary_time_relax(seed, RelaxModel{{}, self}, 1.0, 1e-13, o);
  const double v = 1.0;
  auto values = gs.field.to_vector();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] *= std::polar(1.0, v * g.x(i));
  const WaveField boosted(g, values);
  auto spec = make_spec(dt, 3.0 * kPi / omega, 40);
  spec.keep_snapshots = true;
  const auto r = evolve(boosted, {}, self, spec);
  const auto ref = modulus(boosted);
  double worst = 0.0;
  for (std::size_t i = 0; i < r.log.times.size(); ++i) {
    const auto expected = shifted_modulus(ref, v * r.log.times[i]);
    worst = std::max(worst, max_abs_difference(modulus(r.log.snapshots[i]), expected));
  }
  CHECK(worst <= 1e-5 * max_abs(ref));
}

TEST_CASE("imaginary time: harmonic oscillator") {
  const Grid1D g(512, -12.0, 12.0);
  const auto seed = gaussian_packet(g, 0.3, 1.6, 0.0, 1.0);
  const auto r = imaginary_time_relax(seed, RelaxModel{harmonic_external(g, 1.0), {}}, 1.0, 1e-13);
  CHECK(std::abs(r.eigenvalue - 0.5) <= 1e-6);
  CHECK(std::abs(squared_norm(r.field) - 1.0) <= 1e-10);
  // Amplitude e-fold length 1.
  CHECK(std::abs(std::sqrt(2.0 * position_variance(r.field)) - 1.0) <= 1e-4);
  for (std::size_t i = 1; i < r.energy_history.size(); ++i) {
    CHECK(r.energy_history[i] <= r.energy_history[i - 1]);
  }
}

TEST_CASE("imaginary time: self-trap extent") {
  const Grid1D g(1024, -6.0, 6.0);
  const double k = 30.0;
  const auto seed = gaussian_packet(g, 0.4, 0.8, 0.0, 2.0);
  RelaxOptions o;
  o.initial_step = 0.01 / std::sqrt(k);
  const auto r = imaginary_time_relax(seed, RelaxModel{{}, harmonic_self_interaction(g, k)}, 2.0,
                                      1e-13, o);
  const double extent = std::sqrt(1.0 / std::sqrt(k));
  CHECK(std::abs(std::sqrt(2.0 * position_variance(r.field)) / extent - 1.0) <= 1e-4);
  CHECK(std::abs(squared_norm(r.field) - 2.0) <= 1e-10 * 2.0);
}

TEST_CASE("imaginary time gives up with a history") {
  const Grid1D g(256, -10.0, 10.0);
  RelaxOptions o;
  o.max_iters = 5;
  o.min_iters = 1;
  try {
    imaginary_time_relax(gaussian_packet(g, 2.0, 3.0, 0.0, 1.0),
                         RelaxModel{harmonic_external(g, 1.0), {}}, 1.0, 1e-14, o);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK_FALSE(e.energy_history().empty());
  }
}

TEST_CASE("perturbation hook") {
  const Grid1D g(256, -10.0, 10.0);
  const auto psi0 = gaussian_packet(g, 0.0, 1.0, 0.0, 1.0);
  SplitStepPropagator a(psi0, harmonic_external(g, 1.0), no_self_interaction(), PhysParams{});
  SplitStepPropagator b(psi0, harmonic_external(g, 1.0), no_self_interaction(), PhysParams{});
  int calls = 0;
  b.set_perturbation([&](double, std::span<Complex> psi) {
    ++calls;
    for (auto& z : psi) z *= Complex(0.0, 1.0);
  });
  a.step(0.01);
  b.step(0.01);
  CHECK(calls == 1);
  CHECK(max_abs_difference(a.state().scaled(Complex(0.0, 1.0)), b.state()) <= 1e-15);
}

TEST_CASE("snapshot files round-trip") {
  const Grid1D g(64, -3.0, 3.0);
  const auto f = gaussian_packet(g, 0.1, 0.9, 1.1, 1.0);
  const auto dir = std::filesystem::temp_directory_path() / "sng_snapshots";
  std::filesystem::remove_all(dir);
  TrajectoryLog log;
  log.times = {0.0, 0.25};
  log.snapshots = {f, f.scaled(2.0)};
  const auto paths = write_snapshots(dir, log);
  REQUIRE(paths.size() == 2);
  CHECK(paths[1].filename() == "snap_1.dat");
  const auto [t, back] = read_snapshot(paths[1]);
  CHECK(t == 0.25);
  CHECK(back.grid().size() == g.size());
  CHECK(max_abs_difference(back, f.scaled(2.0)) == 0.0);
  std::filesystem::remove_all(dir);
}
