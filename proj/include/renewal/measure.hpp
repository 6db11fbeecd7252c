#pragma once

// Finite signed measures on [0, x_max] held as a piecewise-linear density
// plus a list of exact Dirac atoms.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace renewal {

using ScalarFn = std::function<double(double)>;

struct Atom {
  double location = 0.0;
  double weight = 0.0;

  bool operator==(const Atom&) const = default;
};

/// A point of a piecewise-linear density with separate one-sided limits.
/// `left != right` encodes a jump at `x`.
struct DensityKnot {
  double x = 0.0;
  double left = 0.0;
  double right = 0.0;
};

/// gamma = density(x) dx + sum_i weight_i delta_{location_i}.
///
/// The density is linear between consecutive nodes. Nodes are nondecreasing;
/// a jump is a node repeated twice (left value first, right value second).
/// The first node is 0 and the last is x_max. Atoms are kept sorted by
/// location, with colliding locations summed and exact zeros dropped.
class HybridMeasure {
 public:
  HybridMeasure(double grid_spacing, std::vector<double> nodes,
                std::vector<double> density, std::vector<Atom> atoms = {});

  /// Uniform grid 0, h, ..., (n-1)h carrying `density`.
  static HybridMeasure on_grid(double h, std::vector<double> density,
                               std::vector<Atom> atoms = {});
  static HybridMeasure zero(double h, double x_max);
  /// Samples `f` on the uniform grid of spacing h covering [0, x_max].
  static HybridMeasure sampled(double h, double x_max, const ScalarFn& f,
                               std::vector<Atom> atoms = {});
  /// Builds the density from knots sorted by x. Knots closer than a relative
  /// 1e-12 are merged. The first knot must sit at 0.
  static HybridMeasure from_knots(double h, std::span<const DensityKnot> knots,
                                  std::vector<Atom> atoms = {});

  double x_max() const { return nodes_.back(); }
  double grid_spacing() const { return h_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> density() const { return density_; }
  std::span<const Atom> atoms() const { return atoms_; }
  bool has_atoms() const { return !atoms_.empty(); }

  double density_left(double x) const;
  double density_right(double x) const;

  /// True when every density value and atom weight is >= -tol.
  bool is_nonnegative(double tol = 0.0) const;

  /// Same measure with additional (continuous) nodes inserted at `xs`.
  HybridMeasure with_nodes(std::span<const double> xs) const;
  /// Drops the atoms, keeping the density.
  HybridMeasure absolutely_continuous_part() const;
  HybridMeasure scaled(double factor) const;

  bool operator==(const HybridMeasure&) const = default;

 private:
  double h_;
  std::vector<double> nodes_;
  std::vector<double> density_;
  std::vector<Atom> atoms_;
};

double total_variation(const HybridMeasure& mu);

/// Trapezoid integral of f * density plus f evaluated at the atoms.
double integrate(const HybridMeasure& mu, const ScalarFn& f);

/// Integral of f * density with Gauss-Legendre on every segment, split at
/// `breaks` (sorted). Exact for f piecewise polynomial of degree <= 6 with
/// kinks only at nodes or `breaks`. Atoms contribute f(location) * weight.
double integrate_piecewise(const HybridMeasure& mu, const ScalarFn& f,
                           std::span<const double> breaks = {});

/// Trapezoid integral of w * |density| plus sum of w(location) * |weight|.
/// Segments are split at sign changes of the density and at `breaks`.
double weighted_variation(const HybridMeasure& mu, const ScalarFn& w,
                          std::span<const double> breaks = {});

/// <gamma> = int sqrt(1 + density^2) dx + sum |weight|.
double angle_bracket(const HybridMeasure& mu);

/// Replaces every atom by a triangular bump of half-width eps. Mass falling
/// below x = 0 is reflected back. Throws ConfigError if eps < grid spacing or
/// a bump would extend past x_max.
HybridMeasure mollify(const HybridMeasure& mu, double eps);

/// Push-forward under x -> x + t, multiplied by `scale`. The domain grows to
/// [0, x_max + t]; the density vanishes on [0, t).
HybridMeasure shift_pushforward(const HybridMeasure& mu, double t, double scale);

/// a*mu + b*nu on the union of both node sets. Measures on different domains
/// are extended by zero to the longer one.
HybridMeasure linear_combination(double a, const HybridMeasure& mu, double b,
                                 const HybridMeasure& nu);

struct FlatOptions {
  /// Each density segment is subdivided this many times when discretized.
  int refine = 1;
  /// Upper bound on the number of support points of the discretization.
  std::size_t max_support_points = std::size_t{1} << 22;
};

/// Bounded-Lipschitz distance sup { int f d(mu - nu) : |f| <= 1, Lip f <= 1 }.
double flat_distance(const HybridMeasure& mu, const HybridMeasure& nu,
                     const FlatOptions& options = {});

/// Optimal value and maximizer of sum_i f_i w_i subject to |f_i| <= 1 and
/// |f_i - f_{i+1}| <= locations[i+1] - locations[i].
struct FlatSolution {
  double value = 0.0;
  std::vector<double> test_function;
};

/// `locations` must be strictly increasing.
FlatSolution flat_norm_on_line(std::span<const double> locations,
                               std::span<const double> weights);

/// Point-mass discretization of `mu` used by flat_distance: node masses from
/// the trapezoid rule plus the atoms, merged by location and sorted.
std::vector<Atom> discretize_to_atoms(const HybridMeasure& mu, int refine = 1);

// Snapshot files: header `kind,x,value`, then `density,<x>,<value>` per node
// and `atom,<loc>,<weight>` per atom, 17 significant digits.
void write_measure_csv(std::ostream& out, const HybridMeasure& mu);
HybridMeasure read_measure_csv(std::istream& in);
void write_measure_csv(const std::string& path, const HybridMeasure& mu);
HybridMeasure read_measure_csv(const std::string& path);

/// Real number printed with 17 significant digits; used by every CSV writer.
std::string format_real(double value);

}  // namespace renewal
