#include <cmath>
#include <random>

#include "doctest.h"
#include "renewal/error.hpp"
#include "renewal/spectral.hpp"

using namespace renewal;

namespace {

// Plain bisection on 2 (1 - e^{-l}) / l - 1, independent of the library.
double indicator_root() {
  auto F = [](double l) { return 2.0 * (1.0 - std::exp(-l)) / l - 1.0; };
  double lo = 1e-6, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (F(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("constant birth law") {
  for (double beta : {1.0, 2.5}) {
    const BirthLaw law = BirthLaw::constant(beta);
    const SpectralData s = solve_spectral(law);
    CHECK(std::abs(s.lambda0() - beta) <= 1e-10);
    CHECK(std::abs(s.phi0() - 1.0) <= 1e-8);
    for (double x : {0.0, 0.3, 1.0, 5.0, 30.0}) CHECK(std::abs(s.phi(x) - 1.0) <= 1e-8);
    CHECK(std::abs(s.residual_euler_lotka()) <= 1e-10);
    CHECK(std::abs(s.residual_normalization()) <= 1e-8);
    CHECK(s.residual_ode() <= 1e-6);
  }
  CHECK_THROWS_WITH_AS(BirthLaw::constant(0.5), doctest::Contains("net reproduction below one"),
                       ConfigError);
  CHECK_THROWS_AS(BirthLaw::constant(-1.0), ConfigError);
}

TEST_CASE("indicator birth law") {
  const BirthLaw law = BirthLaw::indicator(2.0, 0.0, 1.0);
  const double lambda = solve_lambda0(law);
  const double root = indicator_root();
  CHECK(std::abs(lambda - root) <= 1e-10);

  const SpectralData s = eigen_phi(law, lambda);
  CHECK(std::abs(s.residual_euler_lotka()) <= 1e-10);
  CHECK(std::abs(s.residual_normalization()) <= 1e-8);
  CHECK(s.residual_ode() <= 1e-6);
  // Closed form: phi = phi0 * 2 (1 - e^{-l (1 - x)}) / l on [0, 1], zero beyond.
  const double l = root;
  const double m1 = 2.0 * (1.0 - std::exp(-l) * (1.0 + l)) / (l * l);
  const double phi0 = 1.0 / (l * m1);
  CHECK(s.phi0() == doctest::Approx(phi0).epsilon(1e-9));
  for (double x : {0.0, 0.25, 0.5, 0.999}) {
    const double expected = phi0 * 2.0 * (1.0 - std::exp(-l * (1.0 - x))) / l;
    CHECK(std::abs(s.phi(x) - expected) <= 1e-9);
  }
  for (double x : {1.0, 1.5, 10.0}) CHECK(s.phi(x) == 0.0);
  CHECK_THROWS_AS(BirthLaw::indicator(0.8, 0.0, 1.0), ConfigError);
  CHECK_NOTHROW(BirthLaw::indicator(BirthLaw::Unchecked{}, 0.8, 0.0, 1.0));
}

TEST_CASE("stable profile") {
  const SpectralData s = solve_spectral(BirthLaw::indicator(2.0, 0.0, 1.0));
  const double l = s.lambda0();
  CHECK(s.N(0.0) == l);
  const ScalarFn N = eigen_N(l);
  // Composite Simpson of N on [0, 20] against 1 - e^{-l 20}.
  const int n = 20000;
  const double h = 20.0 / n;
  double sum = N(0.0) + N(20.0);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * N(i * h);
  CHECK(std::abs(sum * h / 3.0 - (1.0 - std::exp(-l * 20.0))) <= 1e-10);
  // Boundary identity N(0) = int B N.
  const double bn = l * s.birth_law().laplace_moment(0, l);
  CHECK(std::abs(bn - N(0.0)) <= 1e-8);
}

TEST_CASE("table and custom laws normalize") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> value(0.5, 3.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> xs{0.0, 0.5, 1.0, 1.5, 2.0};
    std::vector<double> vs;
    for (std::size_t i = 0; i < xs.size(); ++i) vs.push_back(value(rng));
    const SpectralData s = solve_spectral(BirthLaw::table(xs, vs, 2.5));
    CHECK(std::abs(s.residual_normalization()) <= 1e-8);
    CHECK(std::abs(s.residual_euler_lotka()) <= 1e-10);
    CHECK(s.residual_ode() <= 1e-6);
    for (double x = 0.0; x <= 3.0; x += 0.01) CHECK(s.phi(x) >= 0.0);
  }
  const BirthLaw smooth = BirthLaw::custom(
      [](double x) { return x < 3.0 ? 1.5 * std::sin(M_PI * x / 3.0) : 0.0; }, 1.5, 3.0, {});
  const SpectralData s = solve_spectral(smooth);
  CHECK(std::abs(s.residual_normalization()) <= 1e-8);
  CHECK(s.residual_ode() <= 1e-6);
}

TEST_CASE("quadrature convergence of lambda0") {
  const BirthLaw law = BirthLaw::table({0.0, 1.0, 2.0}, {0.0, 2.0, 0.5}, 2.0);
  const double coarse = solve_lambda0(law);
  const double fine = solve_lambda0(law.with_panels(2 * law.quadrature_panels()));
  CHECK(std::abs(coarse - fine) <= 1e-9);
}

TEST_CASE("birth law validation") {
  CHECK_THROWS_AS(BirthLaw::table({0.0, 1.0}, {1.0, -1.0}, 1.0), ConfigError);
  CHECK_THROWS_AS(BirthLaw::table({0.5, 1.0}, {2.0, 2.0}, 1.0), ConfigError);
  CHECK_THROWS_AS(BirthLaw::indicator(2.0, 1.0, 0.5), ConfigError);
  CHECK_THROWS_AS(
      BirthLaw::custom([](double) { return 3.0; }, 1.0, 2.0, {}), ConfigError);
  const BirthLaw law = BirthLaw::indicator(2.0, 0.5, 2.0);
  CHECK(law(0.5) == 2.0);
  CHECK(law.left_value(0.5) == 0.0);
  CHECK(law(2.0) == 0.0);
  CHECK(law.left_value(2.0) == 2.0);
}
