#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "sng/errors.hpp"
#include "sng/potentials.hpp"

using namespace sng;

namespace {

double max_abs(const RealField& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("harmonic external") {
  const Grid1D g(64, -4.0, 4.0);
  CHECK(max_abs(harmonic_external(g, 0.0)) == 0.0);
  const auto v = harmonic_external(g, 2.0);
  // x = 1 is node 40
  CHECK(g.x(40) == doctest::Approx(1.0));
  CHECK(v[40] == doctest::Approx(1.0));
  const auto it = std::min_element(v.begin(), v.end());
  CHECK(std::abs(g.x(static_cast<std::size_t>(it - v.begin()))) <= g.dx() / 2.0);
  CHECK_THROWS_WITH_AS(harmonic_external(g, -1.0), "k_ext must be >= 0", ConfigError);
}

TEST_CASE("self harmonic follows the packet") {
  const Grid1D g(1024, -20.0, 20.0);
  HarmonicModelParams p;
  p.k_self = 3.0;
  const auto centred = self_harmonic(gaussian_packet(g, 0.0, 1.0, 0.0, 1.0), p);
  for (std::size_t i = 0; i < g.size(); i += 37) {
    CHECK(centred[i] == doctest::Approx(1.5 * g.x(i) * g.x(i)).epsilon(1e-12));
  }
  const double d = 1.25;
  const auto moved = self_harmonic(gaussian_packet(g, d, 1.0, 0.0, 1.0), p);
  for (std::size_t i = 0; i < g.size(); i += 37) {
    const double x = g.x(i) - d;
    CHECK(moved[i] == doctest::Approx(1.5 * x * x).epsilon(1e-10));
  }
  CHECK_THROWS_AS(self_harmonic(WaveField(g, std::vector<Complex>(g.size())), p),
                  DegenerateInputError);
}

TEST_CASE("self harmonic exerts no mean force") {
  const Grid1D g(1024, -20.0, 20.0);
  HarmonicModelParams p;
  p.k_self = 50.0;
  // An asymmetric two-packet superposition.
  const auto a = gaussian_packet(g, -2.0, 0.7, 1.0, 1.0);
  const auto b = gaussian_packet(g, 3.0, 1.4, -0.5, 2.5);
  std::vector<Complex> sum(g.size());
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = a[i] + b[i];
  const WaveField f(g, sum);
  const auto v = self_harmonic(f, p);
  double force = 0.0;
  double scale = 0.0;
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    const double grad = (v[i + 1] - v[i - 1]) / (2.0 * g.dx());
    force += std::norm(f[i]) * grad;
    scale += std::norm(f[i]) * std::abs(grad);
  }
  CHECK(std::abs(force) <= 1e-10 * scale);
}

TEST_CASE("sphere stiffness and the consistency check") {
  PhysParams phys;
  phys.G = 2.0;
  phys.norm_sq = 3.0;
  HarmonicModelParams m;
  m.sphere_mass = 1.5;
  m.sphere_radius = 0.5;
  const double k = 2.0 * 1.5 * 1.5 * 3.0 / (2.0 * 0.125);
  CHECK(sphere_k_self(phys.G, 1.5, 0.5, phys.norm_sq) == doctest::Approx(k).epsilon(1e-15));
  m.k_self = k;
  CHECK_NOTHROW(check_consistency(m, phys));
  m.k_self = k * (1.0 + 1e-10);
  CHECK_THROWS_AS(check_consistency(m, phys), ConfigError);
}

TEST_CASE("zero kernel gives zero potential") {
  const Grid1D g(256, -10.0, 10.0);
  CHECK(max_abs(convolution_self_potential(gaussian_packet(g, 0.0, 1.0, 0.0, 1.0), zero_kernel())) ==
        0.0);
}

TEST_CASE("quadratic kernel expands analytically") {
  const Grid1D g(1024, -12.0, 12.0);
  const double c = 0.7;
  const ConvolutionKernel square{"square", [](double u) { return u * u; }, c};
  const auto f = gaussian_packet(g, 0.8, 1.1, 0.3, 2.0);
  const double n2 = squared_norm(f);
  const double m1 = mean_position(f);
  const double m2 = position_variance(f) + m1 * m1;
  const auto v = convolution_self_potential(f, square);
  double err = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.x(i);
    const double expected = -c * n2 * (m2 - 2.0 * x * m1 + x * x);
    err = std::max(err, std::abs(v[i] - expected));
    scale = std::max(scale, std::abs(expected));
  }
  CHECK(err <= 1e-8 * scale);
}

TEST_CASE("symmetric density gives a symmetric potential") {
  const Grid1D g(512, -10.0, 10.0);
  const auto kernel = tabulated_kernel({0.0, 1.0, 5.0, 30.0}, {2.0, 1.0, 0.3, 0.0}, 1.0);
  const auto v = convolution_self_potential(gaussian_packet(g, 0.0, 1.3, 0.0, 1.0), kernel);
  // Node i and n - i are mirror images about x = 0.
  double err = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) err = std::max(err, std::abs(v[i] - v[g.size() - i]));
  CHECK(err <= 1e-10 * max_abs(v));
}

TEST_CASE("scaling law") {
  const Grid1D g(512, -10.0, 10.0);
  const auto f = gaussian_packet(g, 0.5, 1.0, 0.4, 1.0);
  const auto kernel = sphere_quadratic_kernel(100.0, 1.0, 2.0);
  CHECK(scaling_check(f, 1.0, kernel) == 0.0);
  const double scale = max_abs(convolution_self_potential(f, kernel));
  CHECK(scaling_check(f, Complex(0.0, 1.0), kernel) <= 1e-12 * scale);
  const auto v1 = convolution_self_potential(f, kernel);
  const auto v3 = convolution_self_potential(f.scaled(3.0), kernel);
  for (std::size_t i = 0; i < g.size(); i += 17) CHECK(v3[i] / v1[i] == doctest::Approx(9.0).epsilon(1e-10));
  CHECK(scaling_check(f, Complex(0.3, -2.0), kernel) <= 1e-10 * 4.09 * scale);
}

TEST_CASE("sphere kernel matches self harmonic up to a constant") {
  const Grid1D g(2048, -15.0, 15.0);
  const double k_self = 40.0;
  const double norm_sq = 2.5;
  const double radius = 1.7;
  const auto f = gaussian_packet(g, 0.9, 0.8, 1.2, norm_sq);
  HarmonicModelParams p;
  p.k_self = k_self;
  const auto harmonic = self_harmonic(f, p);
  const auto kernel = convolution_self_potential(f, sphere_quadratic_kernel(k_self, norm_sq, radius));
  const double offset = kernel[g.size() / 2] - harmonic[g.size() / 2];
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    err = std::max(err, std::abs(kernel[i] - harmonic[i] - offset));
  }
  CHECK(err <= 1e-8 * max_abs(harmonic));
}

TEST_CASE("kernel tables") {
  CHECK_THROWS_AS(tabulated_kernel({0.0, 1.0, 1.0}, {1.0, 2.0, 3.0}, 1.0), ConfigError);
  CHECK_THROWS_AS(tabulated_kernel({0.0}, {1.0}, 1.0), ConfigError);
  const auto path = std::filesystem::temp_directory_path() / "sng_kernel_table.txt";
  {
    std::ofstream out(path);
    out << "# u F\n0 1\n2 0.5\n4 0\n";
  }
  const auto k = load_kernel_table(path, 2.0);
  CHECK(k.shape(1.0) == doctest::Approx(0.75));
  CHECK(k.coupling == 2.0);
  std::filesystem::remove(path);
  CHECK_THROWS(load_kernel_table(path, 1.0));
}
