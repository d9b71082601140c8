#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "sokl/common.hpp"
#include "sokl/grids.hpp"
#include "sokl/quadrature.hpp"
#include "sokl/spectral.hpp"

using namespace sokl;

TEST_CASE("angular grid nodes, weights, and validation") {
  const AngularGrid g(16);
  CHECK(g.n == 16);
  CHECK(g.node(0) == doctest::Approx(0.0));
  CHECK(g.node(4) == doctest::Approx(kPi / 2));
  CHECK(g.weight() * g.n == doctest::Approx(kTwoPi).epsilon(1e-15));
  const auto w = g.omega(4);
  CHECK(w[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(1.0));
  CHECK(g.nodes().size() == 16);
  CHECK_THROWS_AS(AngularGrid(7), ContractError);
  CHECK_THROWS_AS(AngularGrid(2), ContractError);
}

TEST_CASE("torus grid geometry") {
  const TorusGrid g = TorusGrid::line(32, 2.0);
  CHECK(g.dim == 1);
  CHECK(g.total_cells() == 32);
  CHECK(g.spacing(0) == doctest::Approx(2.0 / 32));
  CHECK(g.node(0, 0) == doctest::Approx(2.0 / 64));
  CHECK(g.cell_volume() == doctest::Approx(2.0 / 32));
  CHECK(g.min_spacing() == doctest::Approx(2.0 / 32));
  const TorusGrid g2(2, {16, 8}, {1.0, 0.5});
  CHECK(g2.total_cells() == 128);
  CHECK(g2.cell_volume() == doctest::Approx((1.0 / 16) * (0.5 / 8)));
  CHECK(g2.min_spacing() == doctest::Approx(0.5 / 8));
  CHECK_THROWS_AS(TorusGrid::line(9, 1.0), ContractError);
  CHECK_THROWS_AS(TorusGrid::line(4, 1.0), ContractError);
  CHECK_THROWS_AS(TorusGrid::line(16, -1.0), ContractError);
  CHECK_NOTHROW(TorusGrid::line(1, 1.0));  // homogeneous axis
}

TEST_CASE("spectral derivative reproduces trigonometric derivatives") {
  const AngularGrid g(64);
  std::vector<double> s(g.n), c(g.n);
  for (int j = 0; j < g.n; ++j) {
    s[j] = std::sin(g.node(j));
    c[j] = std::cos(g.node(j));
  }
  const std::vector<double> ds = spectral_derivative(s, 1);
  double err = 0.0;
  for (int j = 0; j < g.n; ++j) err = std::max(err, std::abs(ds[j] - c[j]));
  CHECK(err < 1e-12);

  // Smooth non-polynomial profile: second derivative of exp(cos a).
  std::vector<double> f(g.n), d2_exact(g.n);
  for (int j = 0; j < g.n; ++j) {
    const double a = g.node(j);
    f[j] = std::exp(std::cos(a));
    d2_exact[j] = (std::sin(a) * std::sin(a) - std::cos(a)) * f[j];
  }
  const std::vector<double> d2 = spectral_derivative(f, 2);
  err = 0.0;
  for (int j = 0; j < g.n; ++j) err = std::max(err, std::abs(d2[j] - d2_exact[j]));
  CHECK(err < 1e-10);
}

TEST_CASE("spectral derivative edge cases and validation") {
  // Constant: derivative is identically zero.
  std::vector<double> ones(16, 3.5);
  for (double v : spectral_derivative(ones, 1)) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
  // Alternating (Nyquist) mode: the interpolant is a pure cosine whose
  // derivative vanishes at the nodes.
  std::vector<double> alt(16);
  for (int j = 0; j < 16; ++j) alt[j] = (j % 2 == 0) ? 1.0 : -1.0;
  for (double v : spectral_derivative(alt, 1)) CHECK(std::abs(v) < 1e-13);

  CHECK_THROWS_AS(spectral_derivative(std::vector<double>(15, 0.0), 1), ContractError);
  CHECK_THROWS_AS(spectral_derivative(std::vector<double>(4, 0.0), 1), ContractError);
  CHECK_THROWS_AS(spectral_derivative(ones, 3), ContractError);
  std::vector<double> bad(16, 0.0);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(spectral_derivative(bad, 1), ContractError);
}

TEST_CASE("spectral shift is exact on trigonometric data and invertible") {
  const AngularGrid g(32);
  std::vector<double> f(g.n);
  for (int j = 0; j < g.n; ++j) f[j] = std::sin(g.node(j)) + 0.25 * std::cos(3 * g.node(j));
  const double delta = 0.37;
  const std::vector<double> shifted = spectral_shift(f, delta);
  double err = 0.0;
  for (int j = 0; j < g.n; ++j) {
    const double a = g.node(j) + delta;
    err = std::max(err, std::abs(shifted[j] - (std::sin(a) + 0.25 * std::cos(3 * a))));
  }
  CHECK(err < 1e-12);

  // Mean (mode 0) is preserved exactly and the roundtrip returns the input.
  double mean_before = 0.0, mean_after = 0.0;
  for (int j = 0; j < g.n; ++j) {
    mean_before += f[j];
    mean_after += shifted[j];
  }
  CHECK(mean_after == doctest::Approx(mean_before).epsilon(1e-14));
  const std::vector<double> back = spectral_shift(shifted, -delta);
  err = 0.0;
  for (int j = 0; j < g.n; ++j) err = std::max(err, std::abs(back[j] - f[j]));
  CHECK(err < 1e-12);
}

TEST_CASE("two-thirds dealiasing zeroes only the retained band's complement") {
  const int n = 24;  // retain |k| <= 8
  const AngularGrid g(n);
  std::vector<double> low(n), high(n);
  for (int j = 0; j < n; ++j) {
    low[j] = std::cos(5 * g.node(j));
    high[j] = std::cos(10 * g.node(j));
  }
  std::vector<double> lc = low, hc = high;
  dealias_two_thirds_inplace(lc);
  dealias_two_thirds_inplace(hc);
  for (int j = 0; j < n; ++j) {
    CHECK(std::abs(lc[j] - low[j]) < 1e-13);
    CHECK(std::abs(hc[j]) < 1e-13);
  }
}

TEST_CASE("angular moments of cos(alpha)") {
  const AngularGrid g(64);
  std::vector<double> f(g.n);
  for (int j = 0; j < g.n; ++j) f[j] = std::cos(g.node(j));
  const Moments m = moment_integrals(g, f);
  CHECK(m.mass == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(m.current[0] == doctest::Approx(kPi).epsilon(1e-13));
  CHECK(std::abs(m.current[1]) < 1e-13);
}

TEST_CASE("projected divergence identity holds to roundoff") {
  const AngularGrid g(64);
  CHECK(sphere_divergence_identity_check(g, {1.0, 0.0}) < 1e-12);
  CHECK(sphere_divergence_identity_check(g, {0.3, -1.1}) < 1e-12);
  CHECK(sphere_divergence_identity_check(AngularGrid(32), {2.0, 0.5}) < 1e-12);
}

TEST_CASE("polar quadrature integrates sin(theta) over (0, pi)") {
  const ThetaGrid gg = ThetaGrid::gauss(64);
  std::vector<double> s(gg.n);
  for (int q = 0; q < gg.n; ++q) s[q] = std::sin(gg.theta[q]);
  CHECK(gg.integrate(s) == doctest::Approx(2.0).epsilon(1e-10));

  const ThetaGrid gm = ThetaGrid::uniform_midpoint(256);
  std::vector<double> sm(gm.n);
  for (int q = 0; q < gm.n; ++q) sm[q] = std::sin(gm.theta[q]);
  CHECK(gm.integrate(sm) == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("Gauss-Legendre rule is exact through degree 2n-1") {
  std::vector<double> x, w;
  gauss_legendre(8, x, w);
  REQUIRE(x.size() == 8);
  // Nodes ascend and are symmetric.
  for (int i = 1; i < 8; ++i) CHECK(x[i] > x[i - 1]);
  for (int i = 0; i < 8; ++i) CHECK(x[i] == doctest::Approx(-x[7 - i]).epsilon(1e-14));
  // Integral of x^14 over [-1, 1] is 2/15 (degree 14 < 2*8 - 1).
  double v = 0.0, mass = 0.0;
  for (int i = 0; i < 8; ++i) {
    v += w[i] * std::pow(x[i], 14);
    mass += w[i];
  }
  CHECK(mass == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(v == doctest::Approx(2.0 / 15).epsilon(1e-13));
}

TEST_CASE("adaptive quadrature meets requested tolerances") {
  const QuadratureResult r1 =
      adaptive_gauss_kronrod([](double t) { return std::sin(t); }, 0.0, kPi, 1e-12);
  CHECK(r1.converged);
  CHECK(std::abs(r1.value - 2.0) < 1e-11);
  CHECK(r1.error < 1e-12);

  const double ex = integrate_to_tol([](double t) { return std::exp(t); }, 0.0, 1.0, 1e-13);
  CHECK(ex == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));

  // Integrable endpoint blow-up forces adaptivity toward 0.
  const QuadratureResult r2 = adaptive_gauss_kronrod(
      [](double t) { return 1.0 / std::sqrt(t); }, 1e-12, 1.0, 1e-8, 20000);
  CHECK(std::abs(r2.value - (2.0 - 2e-6)) < 1e-6);
  CHECK(r2.intervals > 4);
}
