#include "renewal/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "renewal/error.hpp"
#include "renewal/quadrature.hpp"

namespace renewal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError("birth law: " + message);
}

}  // namespace

BirthLaw BirthLaw::constant(double beta, int panels) {
  require(std::isfinite(beta) && beta > 0.0, "constant rate must be positive");
  BirthLaw law;
  law.kind_ = Kind::constant;
  law.beta_ = beta;
  law.sup_bound_ = beta;
  law.panels_ = panels;
  law.finish(true);
  return law;
}

BirthLaw BirthLaw::indicator(double beta, double a, double b, int panels) {
  BirthLaw law = indicator(Unchecked{}, beta, a, b, panels);
  law.finish(true);
  return law;
}

BirthLaw BirthLaw::indicator(Unchecked, double beta, double a, double b, int panels) {
  require(std::isfinite(beta) && beta > 0.0, "indicator height must be positive");
  require(std::isfinite(a) && std::isfinite(b) && 0.0 <= a && a < b,
          "indicator needs 0 <= a < b");
  BirthLaw law;
  law.kind_ = Kind::indicator;
  law.beta_ = beta;
  law.a_ = a;
  law.b_ = b;
  law.sup_bound_ = beta;
  law.support_end_ = b;
  law.panels_ = panels;
  if (a > 0.0) law.breakpoints_.push_back(a);
  law.breakpoints_.push_back(b);
  law.discontinuities_ = law.breakpoints_;
  law.finish(false);
  return law;
}

BirthLaw BirthLaw::table(std::vector<double> xs, std::vector<double> values,
                         double support_end, int panels) {
  require(xs.size() >= 2 && xs.size() == values.size(),
          "table needs at least two (x, B) pairs");
  require(xs.front() == 0.0, "table must start at x = 0");
  for (std::size_t i = 1; i < xs.size(); ++i)
    require(xs[i] > xs[i - 1], "table abscissae must increase");
  require(std::isfinite(support_end) && support_end >= xs.back(),
          "table support_end must be finite and >= the last abscissa");
  BirthLaw law;
  law.kind_ = Kind::table;
  law.sup_bound_ = *std::max_element(values.begin(), values.end());
  law.support_end_ = support_end;
  law.panels_ = panels;
  for (std::size_t i = 1; i < xs.size(); ++i) law.breakpoints_.push_back(xs[i]);
  if (support_end > xs.back()) law.breakpoints_.push_back(support_end);
  if (values.back() != 0.0) law.discontinuities_.push_back(support_end);
  law.table_x_ = std::move(xs);
  law.table_v_ = std::move(values);
  law.finish(true);
  return law;
}

BirthLaw BirthLaw::custom(ScalarFn rate, double sup_bound, double support_end,
                          std::vector<double> breakpoints, int panels) {
  require(static_cast<bool>(rate), "custom law needs a rate function");
  require(std::isfinite(support_end) && support_end > 0.0,
          "custom law needs a finite support_end");
  require(std::isfinite(sup_bound) && sup_bound > 0.0, "sup_bound must be positive");
  BirthLaw law;
  law.kind_ = Kind::custom;
  law.custom_ = std::move(rate);
  law.sup_bound_ = sup_bound;
  law.support_end_ = support_end;
  law.panels_ = panels;
  std::erase_if(breakpoints, [&](double x) { return !(x > 0.0 && x < support_end); });
  breakpoints.push_back(support_end);
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  law.breakpoints_ = breakpoints;
  law.discontinuities_ = std::move(breakpoints);
  law.finish(true);
  return law;
}

void BirthLaw::finish(bool check_reproduction) {
  require(panels_ >= 1, "quadrature_panels must be positive");
  quad_end_ = has_finite_support() ? support_end_ : 1.0;

  std::vector<double> ends{0.0};
  for (double x : breakpoints_)
    if (x > 0.0 && x < quad_end_) ends.push_back(x);
  ends.push_back(quad_end_);
  panel_nodes_.clear();
  panel_nodes_.push_back(0.0);
  for (std::size_t s = 0; s + 1 < ends.size(); ++s) {
    const double len = ends[s + 1] - ends[s];
    const auto count = std::max<long>(
        1, std::lround(static_cast<double>(panels_) * len / quad_end_));
    for (long k = 1; k < count; ++k)
      panel_nodes_.push_back(ends[s] + len * static_cast<double>(k) / static_cast<double>(count));
    panel_nodes_.push_back(ends[s + 1]);
  }

  for (std::size_t i = 0; i + 1 < panel_nodes_.size(); ++i) {
    const double a = panel_nodes_[i];
    const double b = panel_nodes_[i + 1];
    for (double v : {(*this)(a), (*this)(0.5 * (a + b)), left_value(b)}) {
      require(std::isfinite(v) && v >= 0.0, "rate must be nonnegative");
      require(v <= sup_bound_ * (1.0 + 1e-12), "rate exceeds its declared sup_bound");
    }
  }

  if (!check_reproduction) return;
  if (kind_ == Kind::constant) {
    // The integral over [0, inf) is infinite for every beta > 0; the check is
    // applied on the unit age window instead.
    require(beta_ * 1.0 >= 1.0 - 1e-12, "net reproduction below one");
  } else {
    require(net_reproduction() > 1.0 + 1e-8, "net reproduction below one");
  }
}

double BirthLaw::operator()(double x) const {
  switch (kind_) {
    case Kind::constant:
      return x >= 0.0 ? beta_ : 0.0;
    case Kind::indicator:
      return (x >= a_ && x < b_) ? beta_ : 0.0;
    case Kind::table: {
      if (x < 0.0 || x >= support_end_) return 0.0;
      if (x >= table_x_.back()) return table_v_.back();
      auto it = std::upper_bound(table_x_.begin(), table_x_.end(), x);
      const auto i = static_cast<std::size_t>(it - table_x_.begin()) - 1;
      const double s = (x - table_x_[i]) / (table_x_[i + 1] - table_x_[i]);
      return table_v_[i] + s * (table_v_[i + 1] - table_v_[i]);
    }
    case Kind::custom:
      return (x < 0.0 || x >= support_end_) ? 0.0 : custom_(x);
  }
  return 0.0;
}

double BirthLaw::left_value(double x) const {
  switch (kind_) {
    case Kind::constant:
      return x > 0.0 ? beta_ : 0.0;
    case Kind::indicator:
      return (x > a_ && x <= b_) ? beta_ : 0.0;
    case Kind::table:
      if (x <= 0.0 || x > support_end_) return 0.0;
      return x == support_end_ ? table_v_.back() : (*this)(x);
    case Kind::custom:
      if (x <= 0.0 || x > support_end_) return 0.0;
      return custom_(std::nextafter(x, -kInf));
  }
  return 0.0;
}

double BirthLaw::constant_value() const { return kind_ == Kind::constant ? beta_ : kNaN; }

BirthLaw BirthLaw::with_panels(int panels) const {
  BirthLaw copy = *this;
  copy.panels_ = panels;
  copy.finish(false);
  return copy;
}

double BirthLaw::tail_moment(int k, double lambda) const {
  if (has_finite_support()) return 0.0;
  if (!(lambda > 0.0)) return kInf;
  const double c = quad_end_;
  const double e = beta_ * std::exp(-lambda * c);
  switch (k) {
    case 0:
      return e / lambda;
    case 1:
      return e * (c / lambda + 1.0 / (lambda * lambda));
    case 2:
      return e * (c * c / lambda + 2.0 * c / (lambda * lambda) + 2.0 / (lambda * lambda * lambda));
    default:
      throw NumericalError("tail_moment: order must be 0, 1 or 2");
  }
}

double BirthLaw::laplace_moment(int k, double lambda) const {
  auto g = [&](double y, double b) { return b * std::pow(y, k) * std::exp(-lambda * y); };
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < panel_nodes_.size(); ++i) {
    const double a = panel_nodes_[i];
    const double b = panel_nodes_[i + 1];
    const double m = 0.5 * (a + b);
    sum += (b - a) / 6.0 *
           (g(a, (*this)(a)) + 4.0 * g(m, (*this)(m)) + g(b, left_value(b)));
  }
  return sum + tail_moment(k, lambda);
}

double BirthLaw::net_reproduction() const {
  return has_finite_support() ? laplace_moment(0, 0.0) : kInf;
}

double BirthLaw::integrate_shifted(const HybridMeasure& mu, double shift,
                                   bool left_limit) const {
  double sum = 0.0;
  for (const Atom& atom : mu.atoms()) {
    const double y = atom.location + shift;
    sum += (left_limit ? left_value(y) : (*this)(y)) * atom.weight;
  }
  const auto x = mu.nodes();
  const auto v = mu.density();
  if (kind_ == Kind::constant) {
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) mass += 0.5 * (x[i + 1] - x[i]) * (v[i] + v[i + 1]);
    return sum + beta_ * mass;
  }
  const double window = support_end_ - shift;
  if (window <= 0.0) return sum;
  std::vector<double> breaks;
  for (double bp : breakpoints_)
    if (bp - shift > 0.0 && bp - shift < window) breaks.push_back(bp - shift);
  auto B = [&](double y) { return (*this)(y + shift); };
  for (std::size_t i = 0; i + 1 < x.size() && x[i] < window; ++i) {
    const double a = x[i];
    const double b = x[i + 1];
    if (!(b > a) || (v[i] == 0.0 && v[i + 1] == 0.0)) continue;
    const double slope = (v[i + 1] - v[i]) / (b - a);
    sum += quad::gauss_split([&](double y) { return B(y) * (v[i] + slope * (y - a)); }, a,
                             std::min(b, window), breaks);
  }
  return sum;
}

double solve_lambda0(const BirthLaw& law) {
  auto F = [&](double lambda) { return law.laplace_moment(0, lambda) - 1.0; };
  if (law.has_finite_support() && !(F(0.0) > 1e-12))
    throw NumericalError("solve_lambda0: net reproduction does not exceed one");

  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (F(hi) >= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 60) throw NumericalError("solve_lambda0: bracketing failed");
  }
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    (F(mid) > 0.0 ? lo : hi) = mid;
  }

  // Newton polish with bisection fallback; F is decreasing with F' = -M1.
  double lambda = 0.5 * (lo + hi);
  for (int iter = 0; iter < 30; ++iter) {
    const double f = F(lambda);
    if (f == 0.0) break;
    (f > 0.0 ? lo : hi) = lambda;
    const double slope = -law.laplace_moment(1, lambda);
    double next = lambda - f / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - lambda);
    lambda = next;
    if (step <= 1e-14 * lambda) break;
  }
  const double residual = std::abs(F(lambda));
  if (!(residual <= 1e-10))
    throw NumericalError("solve_lambda0: residual " + std::to_string(residual) +
                         " above tolerance");
  return lambda;
}

ScalarFn eigen_N(double lambda0) {
  return [lambda0](double x) { return stable_profile(lambda0, x); };
}

double SpectralData::scaled_tail(double x) const {
  if (law_.kind() == BirthLaw::Kind::constant) return law_.constant_value() / lambda0_;
  if (x < 0.0) x = 0.0;
  const auto nodes = law_.panel_nodes();
  if (x >= nodes.back()) return 0.0;
  auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  const auto i = static_cast<std::size_t>(it - nodes.begin());
  const double right = nodes[i];
  const double lam = lambda0_;
  return std::exp(-lam * (right - x)) * scaled_tail_[i] +
         quad::gauss([&](double y) { return law_(y) * std::exp(-lam * (y - x)); }, x, right);
}

double SpectralData::phi(double x) const { return phi0_ * scaled_tail(x); }

ScalarFn SpectralData::phi_fn() const {
  return [self = *this](double x) { return self.phi(x); };
}

SpectralData eigen_phi(const BirthLaw& law, double lambda0) {
  if (!(lambda0 > 0.0)) throw NumericalError("eigen_phi: lambda0 must be positive");
  SpectralData s(law);
  s.lambda0_ = lambda0;
  const auto nodes = law.panel_nodes();
  const std::size_t n = nodes.size();

  // Backward cumulative quadrature of exp(lambda0 x) int_x^inf B exp(-lambda0 y) dy.
  s.scaled_tail_.assign(n, 0.0);
  s.scaled_tail_[n - 1] = std::exp(lambda0 * nodes[n - 1]) * law.tail_moment(0, lambda0);
  for (std::size_t i = n - 1; i-- > 0;) {
    const double a = nodes[i];
    const double b = nodes[i + 1];
    s.scaled_tail_[i] =
        std::exp(-lambda0 * (b - a)) * s.scaled_tail_[i + 1] +
        quad::gauss([&](double y) { return law(y) * std::exp(-lambda0 * (y - a)); }, a, b);
  }

  const double first_moment = law.laplace_moment(1, lambda0);
  const double norm = lambda0 * first_moment;
  if (!(norm > 1e-12)) throw NumericalError("eigen_phi: degenerate normalization integral");
  s.phi0_ = 1.0 / norm;
  s.residual_euler_lotka_ = std::abs(law.laplace_moment(0, lambda0) - 1.0);

  // Independent check of int N phi dx = 1 by Simpson on the evaluated product.
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = nodes[i];
    const double b = nodes[i + 1];
    integral += quad::simpson([&](double x) { return s.N(x) * s.phi(x); }, a, b);
  }
  const double c = nodes[n - 1];
  integral += s.phi0_ * lambda0 *
              (law.tail_moment(1, lambda0) - c * law.tail_moment(0, lambda0));
  s.residual_normalization_ = std::abs(integral - 1.0);

  double worst = 0.0;
  // Central differences straddling a jump or kink of B are not meaningful.
  std::vector<double> jumps(law.breakpoints().begin(), law.breakpoints().end());
  jumps.insert(jumps.end(), law.discontinuities().begin(), law.discontinuities().end());
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double x = nodes[i];
    const double delta =
        std::min(1e-4, 0.25 * std::min(nodes[i + 1] - x, x - nodes[i - 1]));
    const bool near_jump = std::any_of(jumps.begin(), jumps.end(), [&](double j) {
      return std::abs(j - x) <= 2.0 * delta;
    });
    if (near_jump) continue;
    const double derivative = (s.phi(x + delta) - s.phi(x - delta)) / (2.0 * delta);
    const double r = std::abs(-derivative + lambda0 * s.phi(x) - s.phi0_ * law(x));
    worst = std::max(worst, r / (law.sup_bound() * s.phi0_));
  }
  s.residual_ode_ = worst;
  return s;
}

SpectralData solve_spectral(const BirthLaw& law) { return eigen_phi(law, solve_lambda0(law)); }

}  // namespace renewal
