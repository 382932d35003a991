#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sng/errors.hpp"
#include "sng/fft.hpp"
#include "sng/fields.hpp"

using namespace sng;

namespace {

WaveField from_function(const Grid1D& grid, auto fn) {
  std::vector<Complex> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.x(i));
  return WaveField(grid, std::move(v));
}

}  // namespace

TEST_CASE("grid rejects bad shapes") {
  CHECK_THROWS_AS(Grid1D(1000, -1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(Grid1D(1024, 1.0, -1.0), ConfigError);
  const Grid1D g(8, 0.0, 8.0);
  CHECK(g.dx() == doctest::Approx(1.0));
  CHECK(g.x(3) == doctest::Approx(3.0));
}

TEST_CASE("wave field rejects non-finite samples") {
  const Grid1D g(4, 0.0, 1.0);
  std::vector<Complex> v(4, 1.0);
  v[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(WaveField(g, v), DegenerateInputError);
  CHECK_THROWS_AS(WaveField(g, std::vector<Complex>(3)), DegenerateInputError);
}

TEST_CASE("squared norm") {
  const Grid1D g(2048, -20.0, 20.0);
  CHECK(std::abs(squared_norm(gaussian_packet(g, 0.3, 1.2, 0.7, 1.0)) - 1.0) <= 1e-10);
  CHECK(squared_norm(WaveField(g, std::vector<Complex>(g.size()))) == 0.0);
  // 9 * integral of exp(-x^2)/sqrt(pi)
  const auto f = from_function(g, [](double x) {
    return 3.0 * std::exp(-0.5 * x * x) / std::pow(std::numbers::pi, 0.25);
  });
  CHECK(std::abs(squared_norm(f) - 9.0) <= 1e-8);
}

TEST_CASE("inner product") {
  const Grid1D g(2048, -20.0, 20.0);
  const auto a = gaussian_packet(g, 0.0, 1.0, 0.0, 1.0);
  const Complex self = inner_product(a, a);
  CHECK(std::abs(self - Complex(1.0, 0.0)) <= 1e-12);
  const auto odd = from_function(g, [](double x) { return x * std::exp(-x * x / 2.0); });
  CHECK(std::abs(inner_product(a, odd)) <= 1e-10);
  // Unit Gaussians exp(-x^2/2) offset by d overlap as exp(-d^2/4).
  const auto b = gaussian_packet(g, 1.0, 1.0, 0.0, 1.0);
  CHECK(std::abs(inner_product(a, b).real() - std::exp(-0.25)) <= 1e-6);
  CHECK_THROWS_AS(inner_product(a, gaussian_packet(Grid1D(1024, -20.0, 20.0), 0.0, 1.0, 0.0, 1.0)),
                  ConfigError);
}

TEST_CASE("spectral gradient") {
  const Grid1D g(256, 0.0, 2.0 * std::numbers::pi);
  const auto c = WaveField(g, std::vector<Complex>(g.size(), Complex(2.0, -1.0)));
  CHECK(max_abs(spectral_gradient(c)) <= 1e-12);

  const double k = 5.0;
  const auto plane = from_function(g, [k](double x) { return std::polar(1.0, k * x); });
  const auto d = spectral_gradient(plane);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    err = std::max(err, std::abs(d[i] - Complex(0.0, k) * plane[i]));
  }
  CHECK(err <= 1e-10);
}

TEST_CASE("spectral gradient matches fourth-order differences on a narrow gaussian") {
  const Grid1D g(4096, -10.0, 10.0);
  const auto f = gaussian_packet(g, 0.0, 0.3, 0.0, 1.0);
  const auto d = spectral_gradient(f);
  const double h = g.dx();
  double err = 0.0;
  double scale = 0.0;
  for (std::size_t i = 2; i + 2 < g.size(); ++i) {
    const Complex fd = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h);
    err = std::max(err, std::abs(fd - d[i]));
    scale = std::max(scale, std::abs(d[i]));
  }
  CHECK(err / scale <= 1e-6);
}

TEST_CASE("spectral gradient is linear") {
  const Grid1D g(512, -10.0, 10.0);
  const auto f = gaussian_packet(g, 1.0, 1.0, 0.5, 1.0);
  const auto h = gaussian_packet(g, -2.0, 0.7, -1.0, 2.0);
  const Complex a(1.5, -0.2);
  const Complex b(-0.3, 2.0);
  std::vector<Complex> mix(g.size());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * f[i] + b * h[i];
  const auto lhs = spectral_gradient(WaveField(g, mix));
  const auto df = spectral_gradient(f);
  const auto dh = spectral_gradient(h);
  double err = 0.0;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    err = std::max(err, std::abs(lhs[i] - a * df[i] - b * dh[i]));
  }
  CHECK(err <= 1e-12 * max_abs(lhs));
}

TEST_CASE("parseval for random fields") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  const Grid1D g(1024, -3.0, 5.0);
  std::vector<Complex> v(g.size());
  for (auto& z : v) z = Complex(n(rng), n(rng));
  const WaveField f(g, v);
  auto spec = v;
  cached_plan(spec.size()).forward(spec);
  double s = 0.0;
  for (const auto& z : spec) s += std::norm(z);
  s *= g.dx() / static_cast<double>(g.size());
  CHECK(std::abs(s / squared_norm(f) - 1.0) <= 1e-10);
}

TEST_CASE("phase amplitude") {
  const Grid1D g(1024, -15.0, 15.0);
  const auto f = gaussian_packet(g, 0.0, 1.5, 2.0, 1.0);
  const auto pa = phase_amplitude(f);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(pa.amplitude[i] >= 0.0);
    if (pa.valid[i]) err = std::max(err, std::abs(pa.phase_gradient[i] - 2.0));
  }
  CHECK(err <= 1e-8);

  const auto real = phase_amplitude(gaussian_packet(g, 0.0, 1.5, 0.0, 1.0));
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (real.valid[i]) worst = std::max(worst, std::abs(real.phase_gradient[i]));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("phase amplitude masks the tails") {
  const Grid1D g(1024, -30.0, 30.0);
  const auto pa = phase_amplitude(gaussian_packet(g, 0.0, 1.0, 0.0, 1.0));
  CHECK(pa.threshold == doctest::Approx(kMaskRelative * *std::max_element(pa.amplitude.begin(),
                                                                           pa.amplitude.end())));
  CHECK_FALSE(pa.valid.front());
  CHECK(std::isnan(pa.phase_gradient.front()));
  CHECK(pa.valid[g.size() / 2]);
}

TEST_CASE("phase amplitude under a global phase") {
  const Grid1D g(1024, -15.0, 15.0);
  const auto f = gaussian_packet(g, 0.5, 1.0, -1.3, 1.0);
  const auto a = phase_amplitude(f);
  const auto b = phase_amplitude(f.scaled(std::polar(1.0, 2.1)));
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(std::abs(a.amplitude[i] - b.amplitude[i]) <= 1e-15);
    REQUIRE(a.valid[i] == b.valid[i]);
    if (a.valid[i]) CHECK(std::abs(a.phase_gradient[i] - b.phase_gradient[i]) <= 1e-8);
  }
}

TEST_CASE("moments of a gaussian packet") {
  const Grid1D g(2048, -20.0, 20.0);
  const double w = 1.3;
  const auto f = gaussian_packet(g, 1.5, w, 0.0, 2.0);
  CHECK(mean_position(f) == doctest::Approx(1.5).epsilon(1e-12));
  // Amplitude e-fold width w gives position variance w^2/2.
  CHECK(position_variance(f) == doctest::Approx(w * w / 2.0).epsilon(1e-10));
  CHECK_THROWS_AS(mean_position(WaveField(g, std::vector<Complex>(g.size()))), DegenerateInputError);
}

TEST_CASE("fourier shift translates band-limited fields") {
  const Grid1D g(1024, -20.0, 20.0);
  const auto f = gaussian_packet(g, -1.0, 1.0, 0.8, 1.0);
  const auto shifted = fourier_shift(f, 2.5);
  const auto expected = gaussian_packet(g, 1.5, 1.0, 0.8, 1.0);
  // The packet momentum gives a constant phase e^{-i k d} relative to the
  // directly built packet.
  CHECK(max_abs_difference(shifted.scaled(std::polar(1.0, 0.8 * 2.5)), expected) <= 1e-10);
}

TEST_CASE("interpolate") {
  const Grid1D g(8, 0.0, 8.0);
  const std::vector<double> v{0, 1, 4, 9, 16, 25, 36, 49};
  CHECK(interpolate(g, v, 2.5) == doctest::Approx(6.5));
  CHECK(std::isnan(interpolate(g, v, 7.5)));
  auto holes = v;
  holes[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK(std::isnan(interpolate(g, holes, 3.2)));
}
