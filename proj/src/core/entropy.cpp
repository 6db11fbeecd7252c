#include "renewal/entropy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>

#include "renewal/error.hpp"
#include "renewal/quadrature.hpp"

namespace renewal {

namespace {

constexpr double kRatioLimit = 1e300;

double checked_ratio(double value, double N, double x) {
  const double r = value / N;
  if (!std::isfinite(r) || std::abs(r) > kRatioLimit)
    throw NumericalError("density / N overflows at x = " + format_real(x));
  return r;
}

// Sum over density segments of int w(x) F(r(x)) dx, where r interpolates
// density / N linearly between the segment's nodes.
template <class W, class F>
double ratio_integral(const HybridMeasure& mu, const SpectralData& spectral, W&& weight, F&& F_of_r) {
  const auto nodes = mu.nodes();
  const auto values = mu.density();
  const auto breaks = spectral.birth_law().breakpoints();
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double a = nodes[i];
    const double b = nodes[i + 1];
    if (!(b > a)) continue;
    const double ra = checked_ratio(values[i], spectral.N(a), a);
    const double rb = checked_ratio(values[i + 1], spectral.N(b), b);
    const double slope = (rb - ra) / (b - a);
    sum += quad::gauss_split(
        [&](double x) { return weight(x) * F_of_r(ra + slope * (x - a)); }, a, b, breaks);
  }
  return sum;
}

}  // namespace

double recession(const ScalarFn& H, double z) {
  if (z != 1.0 && z != -1.0) throw ConfigError("recession: direction must be +1 or -1");
  // Runs to s = 2^40 once settled: stopping at the first small step leaves an
  // O(1/s) bias that is visible at the 1e-9 level for shifted integrands.
  double previous = std::nan("");
  bool settled = false;
  for (int k = 10; k <= 40; ++k) {
    const double s = std::ldexp(1.0, k);
    const double q = H(s * z) / s;
    if (!std::isfinite(q)) break;
    settled = std::abs(q - previous) <= 1e-9;
    previous = q;
  }
  if (!settled)
    throw ConfigError("recession: integrand is not admissible (H(s z)/s does not converge)");
  return previous;
}

EntropyIntegrand::EntropyIntegrand(std::string name, ScalarFn H, bool strictly_convex)
    : name_(std::move(name)), H_(std::move(H)), strictly_convex_(strictly_convex) {
  if (!H_) throw ConfigError("integrand '" + name_ + "' has no function");
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> uni(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = uni(rng);
    const double b = uni(rng);
    const double mid = H_(0.5 * (a + b));
    const double avg = 0.5 * (H_(a) + H_(b));
    if (mid > avg + 1e-12 * std::max(1.0, std::abs(avg)))
      throw ConfigError("integrand '" + name_ + "' is not convex");
  }
  for (int k = 0; k <= 6; ++k) {
    const double z = std::pow(10.0, k);
    for (double s : {z, -z}) {
      const double v = H_(s);
      if (!std::isfinite(v)) throw ConfigError("integrand '" + name_ + "' is not finite");
      growth_ = std::max(growth_, std::abs(v) / (1.0 + z));
    }
  }
  growth_ = std::max(growth_, std::abs(H_(0.0)));
  recession_plus_ = recession(H_, 1.0);
  recession_minus_ = recession(H_, -1.0);
}

EntropyIntegrand EntropyIntegrand::abs() {
  return {"abs", [](double u) { return std::abs(u); }, false};
}

EntropyIntegrand EntropyIntegrand::sqrt1p() {
  return {"sqrt1p", [](double u) { return std::hypot(1.0, u); }, true};
}

EntropyIntegrand EntropyIntegrand::pospart() {
  return {"pospart", [](double u) { return std::max(u, 0.0); }, false};
}

EntropyIntegrand EntropyIntegrand::identity() {
  return {"id", [](double u) { return u; }, false};
}

EntropyIntegrand EntropyIntegrand::abs_shift(double k) {
  return {"abs_shift:" + format_real(k), [k](double u) { return std::abs(u - k); }, false};
}

EntropyIntegrand EntropyIntegrand::by_name(const std::string& name) {
  if (name == "abs") return abs();
  if (name == "sqrt1p") return sqrt1p();
  if (name == "pospart") return pospart();
  if (name == "id") return identity();
  const std::string prefix = "abs_shift:";
  if (name.rfind(prefix, 0) == 0) {
    const char* first = name.data() + prefix.size();
    const char* last = name.data() + name.size();
    double k = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, k);
    if (ec == std::errc() && ptr == last && first != last) return abs_shift(k);
  }
  throw ConfigError("unknown integrand '" + name + "'");
}

double gre_functional(const HybridMeasure& mu, const SpectralData& spectral,
                      const EntropyIntegrand& H) {
  double sum = ratio_integral(
      mu, spectral, [&](double x) { return spectral.phi(x) * spectral.N(x); },
      [&](double r) { return H(r); });
  for (const Atom& a : mu.atoms()) sum += spectral.phi(a.location) * H.singular(a.weight);
  return sum;
}

namespace {

struct BirthReference {
  double mass;        // int B N / N(0) dx over the window
  double projection;  // int (B / N(0)) dmu, normalized
};

BirthReference birth_reference(const HybridMeasure& mu, const SpectralData& spectral) {
  const BirthLaw& law = spectral.birth_law();
  const double lambda = spectral.lambda0();
  const auto w = [&](double x) { return law(x) * std::exp(-lambda * x); };
  const double mass = ratio_integral(mu, spectral, w, [](double) { return 1.0; });
  if (!(std::abs(mass - 1.0) <= 1e-8))
    throw NumericalError("reference measure B N / N(0) has mass " + format_real(mass) +
                         " on the window; enlarge x_max");
  double projection = ratio_integral(mu, spectral, w, [](double r) { return r; }) / mass;
  for (const Atom& a : mu.atoms()) projection += law(a.location) / lambda * a.weight;
  return {mass, projection};
}

}  // namespace

double birth_projection(const HybridMeasure& mu, const SpectralData& spectral) {
  return birth_reference(mu, spectral).projection;
}

double dissipation_J(const HybridMeasure& mu, const SpectralData& spectral,
                     const EntropyIntegrand& H) {
  const BirthLaw& law = spectral.birth_law();
  const double lambda = spectral.lambda0();
  const BirthReference ref = birth_reference(mu, spectral);
  double first = ratio_integral(
                     mu, spectral, [&](double x) { return law(x) * std::exp(-lambda * x); },
                     [&](double r) { return H(r); }) /
                 ref.mass;
  for (const Atom& a : mu.atoms()) first += law(a.location) / lambda * H.singular(a.weight);
  return first - H(ref.projection);
}

double jensen_defect(const HybridMeasure& mu, const ScalarFn& psi, const EntropyIntegrand& f,
                     std::span<const double> breaks) {
  const auto nodes = mu.nodes();
  const auto values = mu.density();
  double mass = 0.0;
  double lhs = 0.0;
  double inner = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double a = nodes[i];
    const double b = nodes[i + 1];
    if (!(b > a)) continue;
    const double va = values[i];
    const double slope = (values[i + 1] - va) / (b - a);
    mass += quad::gauss_split(psi, a, b, breaks);
    lhs += quad::gauss_split([&](double x) { return psi(x) * f(va + slope * (x - a)); }, a, b,
                             breaks);
    inner += quad::gauss_split([&](double x) { return psi(x) * (va + slope * (x - a)); }, a, b,
                               breaks);
  }
  if (!(std::abs(mass - 1.0) <= 1e-8))
    throw ConfigError("jensen_defect: psi integrates to " + format_real(mass) + ", not 1");
  lhs /= mass;
  inner /= mass;
  for (const Atom& a : mu.atoms()) {
    const double p = psi(a.location) / mass;
    lhs += p * f.singular(a.weight);
    inner += p * a.weight;
  }
  return lhs - f(inner);
}

Domination verify_B_dominates_phi(const SpectralData& spectral, std::span<const double> nodes) {
  const BirthLaw& law = spectral.birth_law();
  double C = std::numeric_limits<double>::infinity();
  for (double x : nodes) {
    const double p = spectral.phi(x);
    if (p > 1e-14) C = std::min(C, law(x) / p);
  }
  if (!std::isfinite(C)) return {false, 0.0};
  return {C > 0.0, C};
}

Domination verify_B_dominates_phi(const SpectralData& spectral) {
  return verify_B_dominates_phi(spectral, spectral.birth_law().panel_nodes());
}

}  // namespace renewal
