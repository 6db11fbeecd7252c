#include "renewal/transport.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "renewal/error.hpp"
#include "renewal/quadrature.hpp"

namespace renewal {

namespace {

bool same_position(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a));
}

// Index k with |t - k dt| tiny, or -1.
long grid_index(double t, double dt) {
  const double u = t / dt;
  const double k = std::round(u);
  return std::abs(u - k) <= 1e-9 * std::max(1.0, k) ? static_cast<long>(k) : -1;
}

// The datum's density is read as N times a ratio that is linear between
// nodes. The phi-weighted functionals use the same reading, and both the
// shift and the newborn region preserve it, so the equilibrium is exact.
struct RatioSegment {
  double a, b, ra, slope;
  std::array<double, 4> y;  // Gauss points
  std::array<double, 4> f;  // weight * N(y) * ratio(y)
};

double ratio_at(double value, double N, double x) {
  const double r = value / N;
  if (!std::isfinite(r) || std::abs(r) > 1e300)
    throw NumericalError("density / N overflows at x = " + format_real(x));
  return r;
}

std::vector<RatioSegment> ratio_segments(const HybridMeasure& mu, const SpectralData& spectral) {
  const auto x = mu.nodes();
  const auto v = mu.density();
  std::vector<RatioSegment> out;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i];
    const double b = x[i + 1];
    if (!(b > a) || (v[i] == 0.0 && v[i + 1] == 0.0)) continue;
    RatioSegment seg{a, b, ratio_at(v[i], spectral.N(a), a), 0.0, {}, {}};
    seg.slope = (ratio_at(v[i + 1], spectral.N(b), b) - seg.ra) / (b - a);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (std::size_t q = 0; q < 4; ++q) {
      const double y = mid + half * quad::kGaussNodes[q];
      seg.y[q] = y;
      seg.f[q] = half * quad::kGaussWeights[q] * spectral.N(y) * (seg.ra + seg.slope * (y - a));
    }
    out.push_back(seg);
  }
  return out;
}

// int B(x + shift) dmu(x) with the ratio reading of the density.
class SourceIntegral {
 public:
  SourceIntegral(const HybridMeasure& mu, const SpectralData& spectral)
      : mu_(mu), spectral_(spectral), law_(spectral.birth_law()),
        segments_(ratio_segments(mu, spectral)) {
    for (const RatioSegment& s : segments_)
      for (double f : s.f) mass_ += f;
  }

  double operator()(double shift, bool left_limit = false) const {
    double sum = 0.0;
    for (const Atom& atom : mu_.atoms()) {
      const double y = atom.location + shift;
      sum += (left_limit ? law_.left_value(y) : law_(y)) * atom.weight;
    }
    if (law_.kind() == BirthLaw::Kind::constant) return sum + law_(0.0) * mass_;
    const double window = law_.support_end() - shift;
    if (window <= 0.0) return sum;
    std::vector<double> breaks;
    for (double bp : law_.breakpoints())
      if (bp - shift > 0.0 && bp - shift < window) breaks.push_back(bp - shift);
    std::size_t next = 0;
    for (const RatioSegment& s : segments_) {
      if (s.a >= window) break;
      while (next < breaks.size() && breaks[next] <= s.a) ++next;
      const bool split = (next < breaks.size() && breaks[next] < s.b) || s.b > window;
      if (!split) {
        for (std::size_t q = 0; q < 4; ++q) sum += law_(s.y[q] + shift) * s.f[q];
        continue;
      }
      sum += quad::gauss_split(
          [&](double y) {
            return law_(y + shift) * spectral_.N(y) * (s.ra + s.slope * (y - s.a));
          },
          s.a, std::min(s.b, window), breaks);
    }
    return sum;
  }

 private:
  const HybridMeasure& mu_;
  const SpectralData& spectral_;
  const BirthLaw& law_;
  std::vector<RatioSegment> segments_;
  double mass_ = 0.0;
};

// Inserts nodes at xs, valued by the ratio reading.
HybridMeasure refine_ratio(const HybridMeasure& mu, const SpectralData& spectral,
                           std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const auto x = mu.nodes();
  const auto v = mu.density();
  std::vector<double> nodes;
  std::vector<double> values;
  std::size_t j = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    while (j < xs.size() && xs[j] <= x[i]) {
      const double p = xs[j++];
      if (p <= 0.0 || p >= mu.x_max() || p == x[i] || i == 0) continue;
      if (!nodes.empty() && nodes.back() == p) continue;
      const double a = x[i - 1];
      const double ra = ratio_at(v[i - 1], spectral.N(a), a);
      const double rb = ratio_at(v[i], spectral.N(x[i]), x[i]);
      nodes.push_back(p);
      values.push_back(spectral.N(p) * (ra + (rb - ra) * (p - a) / (x[i] - a)));
    }
    nodes.push_back(x[i]);
    values.push_back(v[i]);
  }
  return HybridMeasure(mu.grid_spacing(), std::move(nodes), std::move(values),
                       {mu.atoms().begin(), mu.atoms().end()});
}

}  // namespace

double birth_source(const HybridMeasure& mu, const SpectralData& spectral, double shift,
                    bool left_limit) {
  return SourceIntegral(mu, spectral)(shift, left_limit);
}

double Trajectory::birth(double t, bool left) const {
  const std::size_t last = steps();
  if (t <= 0.0) return births_[0];
  if (t >= horizon_) return left ? births_left_[last] : births_[last];
  const long exact = grid_index(t, dt_);
  if (exact >= 0) {
    const auto k = static_cast<std::size_t>(std::min<long>(exact, static_cast<long>(last)));
    return left ? births_left_[k] : births_[k];
  }
  const double u = t / dt_;
  const auto k = std::min(static_cast<std::size_t>(std::floor(u)), last - 1);
  const double s = u - static_cast<double>(k);
  return (1.0 - s) * births_[k] + s * births_left_[k + 1];
}

Trajectory birth_series(HybridMeasure n0, const SpectralData& spectral, double dt,
                        double horizon) {
  const BirthLaw& law = spectral.birth_law();
  const double lambda = spectral.lambda0();
  if (!(dt > 0.0) || !(horizon > 0.0))
    throw ConfigError("birth_series: dt and T must be positive");
  if (dt > n0.grid_spacing() * (1.0 + 1e-12))
    throw ConfigError("birth_series: time step exceeds grid spacing");
  const long steps = grid_index(horizon, dt);
  if (steps < 1) throw ConfigError("birth_series: T must be a multiple of dt");
  if (!(horizon < n0.x_max())) throw ConfigError("birth_series: T must be below x_max");
  if (law.has_finite_support() &&
      law.support_end() > n0.x_max() - horizon + 1e-12 * n0.x_max())
    throw ConfigError("birth_series: truncation certificate fails (support_end + T > x_max)");

  Trajectory traj(std::move(n0), spectral);
  traj.dt_ = dt;
  traj.horizon_ = static_cast<double>(steps) * dt;
  const auto K = static_cast<std::size_t>(steps);
  const HybridMeasure& datum = traj.initial_;

  // Kernel moments on [j dt, (j+1) dt] against the two hat functions.
  std::size_t lags = K;
  if (law.has_finite_support())
    lags = std::min<std::size_t>(K, static_cast<std::size_t>(std::ceil(law.support_end() / dt)));
  std::vector<double> upper(lags);  // weight of b(t - x_j)
  std::vector<double> lower(lags);  // weight of b(t - x_{j+1})
  const auto breaks = law.breakpoints();
  for (std::size_t j = 0; j < lags; ++j) {
    const double a = static_cast<double>(j) * dt;
    const double b = a + dt;
    upper[j] = quad::gauss_split(
        [&](double x) { return law(x) * std::exp(-lambda * x) * (b - x) / dt; }, a, b, breaks);
    lower[j] = quad::gauss_split(
        [&](double x) { return law(x) * std::exp(-lambda * x) * (x - a) / dt; }, a, b, breaks);
  }
  traj.self_weight_ = upper[0];
  const double pivot = 1.0 - upper[0];
  if (!(pivot > 0.0) || !(0.5 * dt * law(0.0) < 1.0))
    throw NumericalError("birth_series: implicit weight 1 - (dt/2) B(0) is not positive");

  // Steps where an atom crosses a jump of B.
  std::vector<char> is_jump(K + 1, 0);
  for (const Atom& atom : datum.atoms())
    for (double d : law.discontinuities()) {
      const long k = grid_index(d - atom.location, dt);
      if (k >= 1 && k <= steps) is_jump[static_cast<std::size_t>(k)] = 1;
    }

  auto& right = traj.births_;
  auto& left = traj.births_left_;
  right.assign(K + 1, 0.0);
  left.assign(K + 1, 0.0);
  const SourceIntegral source(datum, spectral);
  right[0] = left[0] = source(0.0);
  for (std::size_t k = 1; k <= K; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double decay = std::exp(-lambda * t);
    const double g_right = decay * source(t);
    const double g_left = is_jump[k] ? decay * source(t, true) : g_right;
    double conv = 0.0;
    const std::size_t top = std::min(k, lags);
    for (std::size_t j = 1; j < top; ++j) conv += upper[j] * left[k - j];
    for (std::size_t j = 0; j < top; ++j) conv += lower[j] * right[k - j - 1];
    left[k] = (g_left + conv) / pivot;
    right[k] = left[k] + (g_right - g_left);
    if (is_jump[k] && g_right != g_left) traj.jump_steps_.push_back(k);
  }
  return traj;
}

Snapshot snapshot(const Trajectory& traj, double t) {
  const double T = traj.horizon();
  if (!(t >= 0.0) || t > T * (1.0 + 1e-12))
    throw ConfigError("evolve: time " + std::to_string(t) + " outside [0, T]");
  const double dt = traj.dt();
  const auto k = static_cast<std::size_t>(std::min(std::llround(t / dt),
                                                   static_cast<long long>(traj.steps())));
  const double ts = static_cast<double>(k) * dt;
  const double snap_residual = std::abs(t - ts);
  const HybridMeasure& n0 = traj.initial();
  if (k == 0) return Snapshot{n0, ts, snap_residual, 0.0};

  const double lambda = traj.lambda0();
  const double scale = std::exp(-lambda * ts);
  const double h = n0.grid_spacing();
  const double x_max = n0.x_max();
  const BirthLaw& law = traj.birth_law();
  const SpectralData& sp = traj.spectral();

  // Newborn region (0, ts): candidates ranked so jumps win over plain nodes.
  struct Candidate {
    double x;
    int rank;  // 0 grid, 1 breakpoint, 2 jump
    std::size_t step;
  };
  std::vector<Candidate> cand;
  for (std::size_t j = 0;; ++j) {
    const double x = static_cast<double>(j) * h;
    if (x >= ts || same_position(x, ts)) break;
    cand.push_back({x, 0, 0});
  }
  for (double bp : law.breakpoints())
    if (bp > 0.0 && bp < ts && !same_position(bp, ts)) cand.push_back({bp, 1, 0});
  for (std::size_t js : traj.jump_steps())
    if (js < k) cand.push_back({ts - traj.time(js), 2, js});
  std::stable_sort(cand.begin(), cand.end(),
                   [](const Candidate& a, const Candidate& b) { return a.x < b.x; });

  std::vector<DensityKnot> knots;
  knots.reserve(cand.size() + n0.node_count() + 4);
  int last_rank = -1;
  for (const Candidate& c : cand) {
    const double decay = std::exp(-lambda * c.x);
    DensityKnot knot{c.x, 0.0, 0.0};
    if (c.rank == 2) {
      // Increasing x is decreasing birth time: the left limit in x is the
      // right limit in time.
      knot.left = traj.births()[c.step] * decay;
      knot.right = traj.births_left()[c.step] * decay;
    } else {
      const bool at_origin = c.x == 0.0;
      knot.left = knot.right = traj.birth(ts - c.x, at_origin) * decay;
    }
    if (!knots.empty() && same_position(knots.back().x, c.x)) {
      if (c.rank > last_rank) {
        knots.back() = knot;
        last_rank = c.rank;
      }
      continue;
    }
    knots.push_back(knot);
    last_rank = c.rank;
  }
  const double oldest = traj.births()[0] * scale;

  // Transported datum on [ts, x_max].
  std::vector<double> extra;
  for (double bp : law.breakpoints())
    if (bp > ts && bp < x_max) extra.push_back(bp - ts);
  extra.push_back(x_max - ts);
  const HybridMeasure refined = refine_ratio(n0, sp, extra);
  const auto nodes = refined.nodes();
  const auto values = refined.density();
  knots.push_back({ts, oldest, scale * values[0]});
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double x = nodes[i] + ts;
    if (x > x_max && !same_position(x, x_max)) break;
    const double v = scale * values[i];
    if (same_position(knots.back().x, x))
      knots.back().right = v;
    else
      knots.push_back({x, v, v});
  }
  knots.back().x = x_max;

  double tail_phi_mass = 0.0;
  std::vector<Atom> atoms;
  for (const Atom& a : n0.atoms()) {
    const double x = a.location + ts;
    if (x <= x_max)
      atoms.push_back({x, a.weight * scale});
    else
      tail_phi_mass += sp.phi(x) * a.weight * scale;
  }
  for (const RatioSegment& seg : ratio_segments(refined, sp)) {
    if (seg.a + ts < x_max && !same_position(seg.a + ts, x_max)) continue;
    for (std::size_t q = 0; q < 4; ++q) tail_phi_mass += scale * sp.phi(seg.y[q] + ts) * seg.f[q];
  }

  return Snapshot{HybridMeasure::from_knots(h, knots, std::move(atoms)), ts, snap_residual,
                  tail_phi_mass};
}

HybridMeasure evolve(const Trajectory& traj, double t) { return snapshot(traj, t).measure; }

HybridMeasure unrenormalize(const HybridMeasure& mu, double t, double lambda0) {
  if (lambda0 * t > 700.0)
    throw NumericalError("unrenormalize: growth factor exp(lambda0 t) would overflow");
  return mu.scaled(std::exp(lambda0 * t));
}

}  // namespace renewal
