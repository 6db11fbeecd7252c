#include <cmath>
#include <random>

#include "doctest.h"
#include "renewal/entropy.hpp"
#include "renewal/error.hpp"

using namespace renewal;

namespace {

const SpectralData& unit_spectral() {
  static const SpectralData s = solve_spectral(BirthLaw::constant(1.0));
  return s;
}

const SpectralData& indicator_spectral() {
  static const SpectralData s = solve_spectral(BirthLaw::indicator(2.0, 0.0, 1.0));
  return s;
}

HybridMeasure atoms_on(double h, double x_max, std::vector<Atom> atoms) {
  return HybridMeasure::sampled(h, x_max, [](double) { return 0.0; }, std::move(atoms));
}

}  // namespace

TEST_CASE("recession") {
  CHECK(recession([](double u) { return std::abs(u); }, 1.0) == 1.0);
  CHECK(std::abs(recession([](double u) { return std::hypot(1.0, u); }, -1.0) - 1.0) <= 1e-9);
  CHECK(recession([](double u) { return 2.5 * u; }, 1.0) == 2.5);
  CHECK(recession([](double u) { return 2.5 * u; }, -1.0) == -2.5);
  CHECK_THROWS_WITH_AS(recession([](double u) { return u * u; }, 1.0),
                       doctest::Contains("not admissible"), ConfigError);
  CHECK_THROWS_AS(recession([](double u) { return u; }, 0.5), ConfigError);

  // f_inf(alpha z) = alpha f_inf(z).
  for (const char* name : {"abs", "sqrt1p", "pospart", "id", "abs_shift:0.5"}) {
    const EntropyIntegrand H = EntropyIntegrand::by_name(name);
    for (double alpha : {0.5, 2.0, 7.0})
      for (double z : {1.0, -1.0}) {
        const double scaled = recession([&](double u) { return H(alpha * u); }, z);
        CHECK(std::abs(scaled - alpha * recession([&](double u) { return H(u); }, z)) <= 1e-9);
      }
  }
}

TEST_CASE("built-in integrands") {
  const auto abs = EntropyIntegrand::abs();
  CHECK(abs.recession_plus() == 1.0);
  CHECK(abs.recession_minus() == 1.0);
  const auto pos = EntropyIntegrand::pospart();
  CHECK(pos.recession_plus() == 1.0);
  CHECK(pos.recession_minus() == 0.0);
  const auto id = EntropyIntegrand::identity();
  CHECK(id.recession_plus() == 1.0);
  CHECK(id.recession_minus() == -1.0);
  CHECK(id.singular(-2.0) == -2.0);
  CHECK(EntropyIntegrand::sqrt1p().strictly_convex());
  CHECK_FALSE(id.strictly_convex());
  CHECK(EntropyIntegrand::abs_shift(2.0)(0.5) == 1.5);
  CHECK(EntropyIntegrand::by_name("abs_shift:2")(3.0) == 1.0);
  CHECK_THROWS_AS(EntropyIntegrand::by_name("square"), ConfigError);
  CHECK_THROWS_WITH_AS(EntropyIntegrand("neg_abs", [](double u) { return -std::abs(u); }, false),
                       doctest::Contains("not convex"), ConfigError);
  CHECK_THROWS_AS(EntropyIntegrand("square", [](double u) { return u * u; }, true), ConfigError);
}

TEST_CASE("gre_functional") {
  const SpectralData& s = indicator_spectral();
  for (const char* name : {"abs", "sqrt1p", "pospart", "id"}) {
    const EntropyIntegrand H = EntropyIntegrand::by_name(name);
    const double m = 0.7;
    const HybridMeasure mu = HybridMeasure::sampled(0.01, 12.0, [&](double x) { return m * s.N(x); });
    CHECK(std::abs(gre_functional(mu, s, H) - H(m)) <= 1e-8);
  }
  const HybridMeasure delta = atoms_on(0.01, 12.0, {{0.4, 1.0}});
  CHECK(gre_functional(delta, s, EntropyIntegrand::abs()) == doctest::Approx(s.phi(0.4)));
  CHECK(gre_functional(HybridMeasure::zero(0.01, 12.0), s, EntropyIntegrand::abs()) == 0.0);

  // H = id reduces to int phi dmu; the density is interpolated through the
  // ratio to N, so agreement with direct quadrature is O(h^2).
  const HybridMeasure mixed = HybridMeasure::sampled(
      0.001, 12.0, [](double x) { return std::sin(3.0 * x) * std::exp(-x); }, {{0.3, -0.4}});
  const double direct = integrate_piecewise(
      mixed, [&](double x) { return s.phi(x); }, s.birth_law().breakpoints());
  CHECK(std::abs(gre_functional(mixed, s, EntropyIntegrand::identity()) - direct) <= 1e-6);

  // Negative atoms see H_inf(-1).
  const HybridMeasure neg = atoms_on(0.01, 12.0, {{0.4, -2.0}});
  CHECK(gre_functional(neg, s, EntropyIntegrand::pospart()) == 0.0);

  const HybridMeasure huge = HybridMeasure::sampled(
      1.0, 800.0, [](double x) { return x == 800.0 ? 1.0 : 0.0; });
  CHECK_THROWS_AS(gre_functional(huge, unit_spectral(), EntropyIntegrand::abs()), NumericalError);
}

TEST_CASE("dissipation_J") {
  const SpectralData& s = unit_spectral();
  const EntropyIntegrand H = EntropyIntegrand::sqrt1p();
  const double c = 1.3;
  const HybridMeasure profile = HybridMeasure::sampled(0.01, 40.0, [&](double x) { return c * s.N(x); });
  CHECK(std::abs(dissipation_J(profile, s, H)) <= 1e-8);

  // delta_{x0}, B = 1: int H(0) dm + H_inf(1) - H(1) = 2 - sqrt 2.
  const HybridMeasure delta = atoms_on(0.01, 40.0, {{0.5, 1.0}});
  CHECK(dissipation_J(delta, s, H) == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-10));
  CHECK(dissipation_J(HybridMeasure::zero(0.01, 40.0), s, EntropyIntegrand::abs()) == 0.0);

  // Window too short for the reference probability.
  CHECK_THROWS_AS(dissipation_J(HybridMeasure::zero(0.01, 5.0), s, H), NumericalError);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const SpectralData& ind = indicator_spectral();
  for (int trial = 0; trial < 20; ++trial) {
    const double a = u(rng), b = u(rng), w = u(rng);
    const HybridMeasure mu = HybridMeasure::sampled(
        0.01, 12.0, [&](double x) { return a * std::exp(-x) + b * std::sin(5.0 * x); },
        {{0.3 + 0.5 * std::abs(u(rng)), w}});
    for (const char* name : {"abs", "sqrt1p", "pospart", "id"})
      CHECK(dissipation_J(mu, ind, EntropyIntegrand::by_name(name)) >= -1e-10);
  }
}

TEST_CASE("jensen_defect") {
  const auto psi = [](double x) { return x < 2.0 ? 0.5 : 0.0; };
  const std::vector<double> breaks{2.0};
  const EntropyIntegrand f = EntropyIntegrand::sqrt1p();
  for (double C : {0.3, 1.0, 7.0}) {
    const HybridMeasure mu = HybridMeasure::sampled(0.01, 4.0, [C](double) { return C; });
    CHECK(std::abs(jensen_defect(mu, psi, f, breaks)) <= 1e-10);
  }
  const HybridMeasure delta = atoms_on(0.01, 4.0, {{1.0, 1.0}});
  const double p = 0.5;
  CHECK(jensen_defect(delta, psi, f, breaks) ==
        doctest::Approx(1.0 + p - std::sqrt(1.0 + p * p)).epsilon(1e-12));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = u(rng), b = u(rng);
    const HybridMeasure mu = HybridMeasure::sampled(
        0.01, 4.0, [&](double x) { return a + b * std::cos(x); }, {{1.5, u(rng)}});
    CHECK(std::abs(jensen_defect(mu, psi, EntropyIntegrand::identity(), breaks)) <= 1e-12);
    CHECK(jensen_defect(mu, psi, f, breaks) >= -1e-10);
  }
  CHECK_THROWS_AS(jensen_defect(delta, [](double) { return 1.0; }, f), ConfigError);
}

TEST_CASE("verify_B_dominates_phi") {
  const Domination unit = verify_B_dominates_phi(unit_spectral());
  CHECK(unit.holds);
  CHECK(unit.C == doctest::Approx(1.0).epsilon(1e-8));

  const SpectralData& s = indicator_spectral();
  const Domination ind = verify_B_dominates_phi(s);
  CHECK(ind.holds);
  CHECK(ind.C == doctest::Approx(2.0 / s.phi(0.0)).epsilon(1e-12));

  // B vanishes on [1, 2) where phi is still positive.
  const SpectralData gap = solve_spectral(BirthLaw::custom(
      [](double x) { return (x >= 1.0 && x < 2.0) ? 0.0 : 2.0; }, 2.0, 3.0, {1.0, 2.0}));
  const Domination none = verify_B_dominates_phi(gap);
  CHECK_FALSE(none.holds);
  CHECK(none.C == 0.0);
}
