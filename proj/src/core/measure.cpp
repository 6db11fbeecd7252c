#include "renewal/measure.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "renewal/error.hpp"
#include "renewal/quadrature.hpp"

namespace renewal {

namespace {

bool same_position(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a));
}

std::vector<Atom> canonical_atoms(std::vector<Atom> atoms) {
  std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
    return a.location < b.location;
  });
  std::vector<Atom> merged;
  merged.reserve(atoms.size());
  for (const Atom& a : atoms) {
    if (!merged.empty() && merged.back().location == a.location)
      merged.back().weight += a.weight;
    else
      merged.push_back(a);
  }
  std::erase_if(merged, [](const Atom& a) { return a.weight == 0.0; });
  return merged;
}

// Calls fn(a, b, va, vb) for every segment of positive length.
template <class Fn>
void for_each_segment(const HybridMeasure& mu, Fn&& fn) {
  const auto x = mu.nodes();
  const auto v = mu.density();
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    if (x[i + 1] > x[i]) fn(x[i], x[i + 1], v[i], v[i + 1]);
}

}  // namespace

HybridMeasure::HybridMeasure(double grid_spacing, std::vector<double> nodes,
                             std::vector<double> density, std::vector<Atom> atoms)
    : h_(grid_spacing), nodes_(std::move(nodes)), density_(std::move(density)) {
  if (!(h_ > 0.0) || !std::isfinite(h_))
    throw ConfigError("measure: grid spacing must be positive");
  if (nodes_.size() < 2 || nodes_.size() != density_.size())
    throw ConfigError("measure: need at least two nodes with one density value each");
  if (nodes_.front() != 0.0) throw ConfigError("measure: first node must be 0");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!std::isfinite(nodes_[i]) || !std::isfinite(density_[i]))
      throw ConfigError("measure: non-finite node or density value");
    if (i > 0 && nodes_[i] < nodes_[i - 1])
      throw ConfigError("measure: nodes must be nondecreasing");
    if (i > 1 && nodes_[i] == nodes_[i - 2])
      throw ConfigError("measure: a position may appear at most twice");
  }
  if (!(nodes_.back() > 0.0)) throw ConfigError("measure: x_max must be positive");
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.location) || !std::isfinite(a.weight))
      throw ConfigError("measure: non-finite atom");
    if (a.location < 0.0 || a.location > nodes_.back())
      throw ConfigError("measure: atom location outside [0, x_max]");
  }
  atoms_ = canonical_atoms(std::move(atoms));
}

HybridMeasure HybridMeasure::on_grid(double h, std::vector<double> density,
                                     std::vector<Atom> atoms) {
  std::vector<double> nodes(density.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = static_cast<double>(i) * h;
  return HybridMeasure(h, std::move(nodes), std::move(density), std::move(atoms));
}

HybridMeasure HybridMeasure::zero(double h, double x_max) {
  return sampled(h, x_max, [](double) { return 0.0; });
}

HybridMeasure HybridMeasure::sampled(double h, double x_max, const ScalarFn& f,
                                     std::vector<Atom> atoms) {
  if (!(h > 0.0) || !(x_max > 0.0))
    throw ConfigError("measure: grid spacing and x_max must be positive");
  const double cells = x_max / h;
  const auto n = static_cast<std::size_t>(std::llround(cells));
  if (n < 1 || std::abs(cells - static_cast<double>(n)) > 1e-9 * cells)
    throw ConfigError("measure: x_max must be an integer multiple of the grid spacing");
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) values[i] = f(static_cast<double>(i) * h);
  return on_grid(h, std::move(values), std::move(atoms));
}

HybridMeasure HybridMeasure::from_knots(double h, std::span<const DensityKnot> knots,
                                        std::vector<Atom> atoms) {
  if (knots.empty()) throw ConfigError("measure: no knots");
  std::vector<DensityKnot> merged;
  merged.reserve(knots.size());
  for (const DensityKnot& k : knots) {
    if (!merged.empty() && k.x < merged.back().x && !same_position(k.x, merged.back().x))
      throw ConfigError("measure: knots must be sorted");
    if (!merged.empty() && same_position(k.x, merged.back().x))
      merged.back().right = k.right;
    else
      merged.push_back(k);
  }
  std::vector<double> nodes;
  std::vector<double> values;
  nodes.reserve(2 * merged.size());
  values.reserve(2 * merged.size());
  for (std::size_t i = 0; i < merged.size(); ++i) {
    const DensityKnot& k = merged[i];
    const bool first = i == 0;
    const bool last = i + 1 == merged.size();
    if (first) {
      nodes.push_back(k.x);
      values.push_back(k.right);
    } else if (last) {
      nodes.push_back(k.x);
      values.push_back(k.left);
    } else {
      nodes.push_back(k.x);
      values.push_back(k.left);
      if (k.right != k.left) {
        nodes.push_back(k.x);
        values.push_back(k.right);
      }
    }
  }
  return HybridMeasure(h, std::move(nodes), std::move(values), std::move(atoms));
}

double HybridMeasure::density_right(double x) const {
  if (x < 0.0 || x >= x_max()) return 0.0;
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
  const auto i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  if (nodes_[i] == x) return density_[i];
  const double s = (x - nodes_[i]) / (nodes_[i + 1] - nodes_[i]);
  return density_[i] + s * (density_[i + 1] - density_[i]);
}

double HybridMeasure::density_left(double x) const {
  if (x <= 0.0 || x > x_max()) return 0.0;
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), x);
  const auto i = static_cast<std::size_t>(it - nodes_.begin());
  if (nodes_[i] == x) return density_[i];
  const double s = (x - nodes_[i - 1]) / (nodes_[i] - nodes_[i - 1]);
  return density_[i - 1] + s * (density_[i] - density_[i - 1]);
}

bool HybridMeasure::is_nonnegative(double tol) const {
  return std::all_of(density_.begin(), density_.end(), [&](double v) { return v >= -tol; }) &&
         std::all_of(atoms_.begin(), atoms_.end(),
                     [&](const Atom& a) { return a.weight >= -tol; });
}

HybridMeasure HybridMeasure::with_nodes(std::span<const double> xs) const {
  std::vector<double> extra(xs.begin(), xs.end());
  std::sort(extra.begin(), extra.end());
  std::vector<double> nodes;
  std::vector<double> values;
  nodes.reserve(nodes_.size() + extra.size());
  values.reserve(nodes_.size() + extra.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    while (j < extra.size() && extra[j] <= nodes_[i]) {
      const double x = extra[j++];
      if (x <= 0.0 || x >= x_max() || x == nodes_[i]) continue;
      if (!nodes.empty() && nodes.back() == x) continue;
      nodes.push_back(x);
      values.push_back(density_right(x));
    }
    nodes.push_back(nodes_[i]);
    values.push_back(density_[i]);
  }
  return HybridMeasure(h_, std::move(nodes), std::move(values), atoms_);
}

HybridMeasure HybridMeasure::absolutely_continuous_part() const {
  return HybridMeasure(h_, nodes_, density_, {});
}

HybridMeasure HybridMeasure::scaled(double factor) const {
  std::vector<double> values = density_;
  for (double& v : values) v *= factor;
  std::vector<Atom> atoms = atoms_;
  for (Atom& a : atoms) a.weight *= factor;
  return HybridMeasure(h_, nodes_, std::move(values), std::move(atoms));
}

double total_variation(const HybridMeasure& mu) {
  return weighted_variation(mu, [](double) { return 1.0; });
}

double integrate(const HybridMeasure& mu, const ScalarFn& f) {
  double sum = 0.0;
  for_each_segment(mu, [&](double a, double b, double va, double vb) {
    sum += 0.5 * (b - a) * (f(a) * va + f(b) * vb);
  });
  for (const Atom& atom : mu.atoms()) sum += f(atom.location) * atom.weight;
  return sum;
}

double integrate_piecewise(const HybridMeasure& mu, const ScalarFn& f,
                           std::span<const double> breaks) {
  double sum = 0.0;
  for_each_segment(mu, [&](double a, double b, double va, double vb) {
    if (va == 0.0 && vb == 0.0) return;
    const double slope = (vb - va) / (b - a);
    sum += quad::gauss_split([&](double x) { return f(x) * (va + slope * (x - a)); }, a, b,
                             breaks);
  });
  for (const Atom& atom : mu.atoms()) sum += f(atom.location) * atom.weight;
  return sum;
}

double weighted_variation(const HybridMeasure& mu, const ScalarFn& w,
                          std::span<const double> breaks) {
  const HybridMeasure& refined = breaks.empty() ? mu : mu.with_nodes(breaks);
  double sum = 0.0;
  for_each_segment(refined, [&](double a, double b, double va, double vb) {
    if (va == 0.0 && vb == 0.0) return;
    if ((va < 0.0 && vb > 0.0) || (va > 0.0 && vb < 0.0)) {
      const double r = a + (b - a) * va / (va - vb);
      sum += 0.5 * (r - a) * w(a) * std::abs(va) + 0.5 * (b - r) * w(b) * std::abs(vb);
    } else {
      sum += 0.5 * (b - a) * (w(a) * std::abs(va) + w(b) * std::abs(vb));
    }
  });
  for (const Atom& atom : refined.atoms()) sum += w(atom.location) * std::abs(atom.weight);
  return sum;
}

double angle_bracket(const HybridMeasure& mu) {
  double sum = 0.0;
  // Segments of zero length contribute nothing, so iterate every pair.
  const auto x = mu.nodes();
  const auto v = mu.density();
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    sum += 0.5 * (x[i + 1] - x[i]) * (std::hypot(1.0, v[i]) + std::hypot(1.0, v[i + 1]));
  for (const Atom& atom : mu.atoms()) sum += std::abs(atom.weight);
  return sum;
}

HybridMeasure mollify(const HybridMeasure& mu, double eps) {
  if (!mu.has_atoms()) return mu;
  if (!(eps >= mu.grid_spacing()))
    throw ConfigError("mollify: kernel half-width below the grid spacing");
  std::vector<double> kinks;
  for (const Atom& a : mu.atoms()) {
    if (a.location + eps > mu.x_max())
      throw ConfigError("mollify: kernel support extends past x_max");
    kinks.insert(kinks.end(), {a.location - eps, a.location, a.location + eps});
    if (eps - a.location > 0.0) kinks.push_back(eps - a.location);
  }
  HybridMeasure base = mu.with_nodes(kinks);
  const double inv_eps2 = 1.0 / (eps * eps);
  auto kernel = [&](double x) {
    double sum = 0.0;
    for (const Atom& a : mu.atoms()) {
      sum += a.weight * std::max(0.0, eps - std::abs(x - a.location)) * inv_eps2;
      sum += a.weight * std::max(0.0, eps - (x + a.location)) * inv_eps2;  // reflection
    }
    return sum;
  };
  std::vector<double> values(base.density().begin(), base.density().end());
  const auto nodes = base.nodes();
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += kernel(nodes[i]);
  return HybridMeasure(mu.grid_spacing(), std::vector<double>(nodes.begin(), nodes.end()),
                       std::move(values), {});
}

HybridMeasure shift_pushforward(const HybridMeasure& mu, double t, double scale) {
  if (!(t >= 0.0)) throw ConfigError("shift_pushforward: negative shift");
  if (t == 0.0) return scale == 1.0 ? mu : mu.scaled(scale);
  const double h = mu.grid_spacing();
  std::vector<DensityKnot> knots;
  for (double x = 0.0; x < t && !same_position(x, t);) {
    knots.push_back({x, 0.0, 0.0});
    x = static_cast<double>(knots.size()) * h;
  }
  const auto nodes = mu.nodes();
  const auto values = mu.density();
  knots.push_back({t, 0.0, scale * values[0]});
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double x = nodes[i] + t;
    const double v = scale * values[i];
    if (knots.back().x == x)
      knots.back().right = v;
    else
      knots.push_back({x, v, v});
  }
  std::vector<Atom> atoms;
  for (const Atom& a : mu.atoms()) atoms.push_back({a.location + t, a.weight * scale});
  return HybridMeasure::from_knots(h, knots, std::move(atoms));
}

HybridMeasure linear_combination(double a, const HybridMeasure& mu, double b,
                                 const HybridMeasure& nu) {
  const double h = std::min(mu.grid_spacing(), nu.grid_spacing());
  std::vector<Atom> atoms;
  for (const Atom& x : mu.atoms()) atoms.push_back({x.location, a * x.weight});
  for (const Atom& x : nu.atoms()) atoms.push_back({x.location, b * x.weight});

  if (std::ranges::equal(mu.nodes(), nu.nodes())) {
    std::vector<double> values(mu.node_count());
    for (std::size_t i = 0; i < values.size(); ++i)
      values[i] = a * mu.density()[i] + b * nu.density()[i];
    return HybridMeasure(h, std::vector<double>(mu.nodes().begin(), mu.nodes().end()),
                         std::move(values), std::move(atoms));
  }

  std::vector<double> positions;
  positions.reserve(mu.node_count() + nu.node_count());
  std::ranges::merge(mu.nodes(), nu.nodes(), std::back_inserter(positions));
  positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
  std::vector<DensityKnot> knots;
  knots.reserve(positions.size());
  for (double x : positions) {
    knots.push_back({x, a * mu.density_left(x) + b * nu.density_left(x),
                     a * mu.density_right(x) + b * nu.density_right(x)});
  }
  return HybridMeasure::from_knots(h, knots, std::move(atoms));
}

std::vector<Atom> discretize_to_atoms(const HybridMeasure& mu, int refine) {
  if (refine < 1) throw ConfigError("flat_distance: refinement must be >= 1");
  std::vector<Atom> points;
  const auto x = mu.nodes();
  const auto v = mu.density();
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double a = x[i];
    const double b = x[i + 1];
    if (!(b > a) || (v[i] == 0.0 && v[i + 1] == 0.0)) continue;
    const double len = (b - a) / refine;
    for (int k = 0; k < refine; ++k) {
      const double s0 = static_cast<double>(k) / refine;
      const double s1 = static_cast<double>(k + 1) / refine;
      const double left = v[i] + s0 * (v[i + 1] - v[i]);
      const double right = v[i] + s1 * (v[i + 1] - v[i]);
      points.push_back({a + s0 * (b - a), 0.5 * len * left});
      points.push_back({k + 1 == refine ? b : a + s1 * (b - a), 0.5 * len * right});
    }
  }
  points.insert(points.end(), mu.atoms().begin(), mu.atoms().end());
  return canonical_atoms(std::move(points));
}

namespace {

// Concave piecewise-linear function on [-1, 1] given by its vertices.
struct Vertex {
  double x;
  double value;
};

double eval_at(const std::vector<Vertex>& vs, double x) {
  auto it = std::lower_bound(vs.begin(), vs.end(), x,
                             [](const Vertex& v, double y) { return v.x < y; });
  if (it == vs.begin()) return it->value;
  if (it == vs.end()) return vs.back().value;
  if (it->x == x) return it->value;
  const Vertex& r = *it;
  const Vertex& l = *(it - 1);
  return l.value + (x - l.x) / (r.x - l.x) * (r.value - l.value);
}

std::size_t argmax(const std::vector<Vertex>& vs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < vs.size(); ++i)
    if (vs[i].value > vs[best].value) best = i;
  return best;
}

void push_vertex(std::vector<Vertex>& out, Vertex v) {
  if (!out.empty() && v.x - out.back().x <= 1e-15) {
    out.back().value = std::max(out.back().value, v.value);
    return;
  }
  // Drop the previous vertex when it is collinear with its neighbours.
  if (out.size() >= 2) {
    const Vertex& a = out[out.size() - 2];
    const Vertex& b = out.back();
    const double s1 = (b.value - a.value) / (b.x - a.x);
    const double s2 = (v.value - b.value) / (v.x - b.x);
    if (std::abs(s1 - s2) <= 1e-13 * (1.0 + std::abs(s1))) out.pop_back();
  }
  out.push_back(v);
}

// x -> max_{|y - x| <= d} V(y), restricted to [-1, 1].
std::vector<Vertex> dilate(const std::vector<Vertex>& vs, double d) {
  const std::size_t m = argmax(vs);
  const double g = vs[m].x;
  const double top = vs[m].value;
  std::vector<Vertex> out;
  out.reserve(vs.size() + 2);
  if (g - d > -1.0) {
    push_vertex(out, {-1.0, eval_at(vs, -1.0 + d)});
    for (std::size_t i = 0; i < m; ++i)
      if (vs[i].x > -1.0 + d) push_vertex(out, {vs[i].x - d, vs[i].value});
    push_vertex(out, {g - d, top});
  } else {
    push_vertex(out, {-1.0, top});
  }
  if (g + d < 1.0) {
    push_vertex(out, {g + d, top});
    for (std::size_t i = m + 1; i < vs.size(); ++i)
      if (vs[i].x < 1.0 - d) push_vertex(out, {vs[i].x + d, vs[i].value});
    push_vertex(out, {1.0, eval_at(vs, 1.0 - d)});
  } else {
    push_vertex(out, {1.0, top});
  }
  return out;
}

}  // namespace

FlatSolution flat_norm_on_line(std::span<const double> locations,
                               std::span<const double> weights) {
  if (locations.size() != weights.size())
    throw ConfigError("flat_norm_on_line: size mismatch");
  const std::size_t n = locations.size();
  FlatSolution sol;
  if (n == 0) return sol;
  for (std::size_t i = 1; i < n; ++i)
    if (!(locations[i] > locations[i - 1]))
      throw ConfigError("flat_norm_on_line: locations must be strictly increasing");

  // Forward pass: value function of the last free variable, and its maximizer.
  std::vector<Vertex> value{{-1.0, 0.0}, {1.0, 0.0}};
  std::vector<double> best(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const double gap = locations[i] - locations[i - 1];
      if (gap >= 2.0) {
        const double top = value[argmax(value)].value;
        value = {{-1.0, top}, {1.0, top}};
      } else {
        value = dilate(value, gap);
      }
    }
    for (Vertex& v : value) v.value += weights[i] * v.x;
    best[i] = value[argmax(value)].x;
  }
  sol.value = value[argmax(value)].value;

  // Backward pass: clamp each maximizer into the window allowed by its successor.
  sol.test_function.resize(n);
  sol.test_function[n - 1] = best[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    const double gap = locations[i + 1] - locations[i];
    const double next = sol.test_function[i + 1];
    sol.test_function[i] = std::clamp(best[i], next - gap, next + gap);
  }
  return sol;
}

double flat_distance(const HybridMeasure& mu, const HybridMeasure& nu,
                     const FlatOptions& options) {
  const HybridMeasure diff = linear_combination(1.0, mu, -1.0, nu);
  std::size_t estimate = diff.atoms().size() +
                         2 * static_cast<std::size_t>(options.refine) * diff.node_count();
  if (estimate > options.max_support_points)
    throw NumericalError("flat_distance: discretization exceeds the support-point cap");
  const std::vector<Atom> points = discretize_to_atoms(diff, options.refine);
  std::vector<double> locs;
  std::vector<double> weights;
  locs.reserve(points.size());
  weights.reserve(points.size());
  for (const Atom& p : points) {
    locs.push_back(p.location);
    weights.push_back(p.weight);
  }
  return std::max(0.0, flat_norm_on_line(locs, weights).value);
}

std::string format_real(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_measure_csv(std::ostream& out, const HybridMeasure& mu) {
  out << "kind,x,value\n";
  const auto x = mu.nodes();
  const auto v = mu.density();
  for (std::size_t i = 0; i < x.size(); ++i)
    out << "density," << format_real(x[i]) << ',' << format_real(v[i]) << '\n';
  for (const Atom& a : mu.atoms())
    out << "atom," << format_real(a.location) << ',' << format_real(a.weight) << '\n';
}

namespace {

double parse_real(std::string_view text, std::size_t line) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last)
    throw ConfigError("snapshot line " + std::to_string(line) + ": bad number '" +
                      std::string(text) + "'");
  return value;
}

}  // namespace

HybridMeasure read_measure_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ConfigError("snapshot: empty input");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "kind,x,value") throw ConfigError("snapshot line 1: expected header kind,x,value");
  std::vector<double> nodes;
  std::vector<double> values;
  std::vector<Atom> atoms;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos)
      throw ConfigError("snapshot line " + std::to_string(line_no) + ": expected 3 fields");
    const std::string_view view(line);
    const auto kind = view.substr(0, c1);
    const double x = parse_real(view.substr(c1 + 1, c2 - c1 - 1), line_no);
    const double value = parse_real(view.substr(c2 + 1), line_no);
    if (kind == "density") {
      if (!atoms.empty())
        throw ConfigError("snapshot line " + std::to_string(line_no) +
                          ": density rows must precede atom rows");
      nodes.push_back(x);
      values.push_back(value);
    } else if (kind == "atom") {
      atoms.push_back({x, value});
    } else {
      throw ConfigError("snapshot line " + std::to_string(line_no) + ": unknown kind '" +
                        std::string(kind) + "'");
    }
  }
  double h = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) h = std::max(h, nodes[i] - nodes[i - 1]);
  return HybridMeasure(h, std::move(nodes), std::move(values), std::move(atoms));
}

void write_measure_csv(const std::string& path, const HybridMeasure& mu) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write_measure_csv(out, mu);
}

HybridMeasure read_measure_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_measure_csv(in);
}

}  // namespace renewal
