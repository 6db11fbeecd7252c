#pragma once

// Birth laws and the primal/dual eigenpairs of the renewal operator:
// the Malthusian rate lambda0, the stable profile N and the dual weight phi.

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "renewal/measure.hpp"

namespace renewal {

/// Nonnegative bounded birth rate B with the metadata needed to integrate it.
///
/// Finite-support laws are integrated by composite Simpson on
/// [0, support_end]; the constant law is integrated on [0, 1] and its tail
/// on [1, inf) is added in closed form. Panel boundaries always include the
/// law's breakpoints.
class BirthLaw {
 public:
  enum class Kind { constant, indicator, table, custom };
  /// Skips the net-reproduction check; only useful to exercise error paths.
  struct Unchecked {};

  static constexpr int kDefaultPanels = 4000;

  static BirthLaw constant(double beta, int panels = kDefaultPanels);
  /// beta on [a, b), zero elsewhere.
  static BirthLaw indicator(double beta, double a, double b, int panels = kDefaultPanels);
  /// Linear interpolation of (xs, values); xs[0] must be 0. Held at the last
  /// value up to support_end, zero beyond.
  static BirthLaw table(std::vector<double> xs, std::vector<double> values,
                        double support_end, int panels = kDefaultPanels);
  /// Arbitrary B vanishing beyond support_end. `breakpoints` lists every point
  /// where B is discontinuous or not smooth.
  static BirthLaw custom(ScalarFn rate, double sup_bound, double support_end,
                         std::vector<double> breakpoints, int panels = kDefaultPanels);
  static BirthLaw indicator(Unchecked, double beta, double a, double b,
                            int panels = kDefaultPanels);

  /// Right-continuous value B(x).
  double operator()(double x) const;
  /// lim_{y -> x-} B(y).
  double left_value(double x) const;

  Kind kind() const { return kind_; }
  double sup_bound() const { return sup_bound_; }
  double support_end() const { return support_end_; }
  bool has_finite_support() const { return support_end_ < kInf; }
  /// Right end of the quadrature window; beyond it the law is handled in closed form.
  double quadrature_end() const { return quad_end_; }
  int quadrature_panels() const { return panels_; }
  /// Sorted points in (0, quadrature_end] where B jumps or has a kink.
  std::span<const double> breakpoints() const { return breakpoints_; }
  /// Sorted points where B jumps.
  std::span<const double> discontinuities() const { return discontinuities_; }
  /// Panel boundaries of the composite rule, from 0 to quadrature_end.
  std::span<const double> panel_nodes() const { return panel_nodes_; }
  /// Constant value on [0, inf) for the constant law; NaN otherwise.
  double constant_value() const;

  BirthLaw with_panels(int panels) const;

  /// int_0^inf B(y) y^k exp(-lambda y) dy for k in {0, 1, 2}; Simpson on the
  /// panels plus the closed-form tail.
  double laplace_moment(int k, double lambda) const;
  /// Closed-form int_{quadrature_end}^inf B(y) y^k exp(-lambda y) dy.
  double tail_moment(int k, double lambda) const;
  /// int_0^inf B dx (infinite for the constant law).
  double net_reproduction() const;

  /// int B(x + shift) mu(dx), exact for the piecewise-linear density when B
  /// is piecewise polynomial. With `left_limit` the atoms see B(y-) instead
  /// of B(y), which gives the left limit in `shift`.
  double integrate_shifted(const HybridMeasure& mu, double shift,
                           bool left_limit = false) const;

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  BirthLaw() = default;
  void finish(bool check_reproduction);

  Kind kind_ = Kind::constant;
  ScalarFn custom_;
  double beta_ = 0.0;
  double a_ = 0.0;
  double b_ = 0.0;
  std::vector<double> table_x_;
  std::vector<double> table_v_;
  double sup_bound_ = 0.0;
  double support_end_ = kInf;
  double quad_end_ = 1.0;
  int panels_ = kDefaultPanels;
  std::vector<double> breakpoints_;
  std::vector<double> discontinuities_;
  std::vector<double> panel_nodes_;
};

/// Malthusian parameter: the root of int B exp(-lambda x) dx = 1.
double solve_lambda0(const BirthLaw& law);

/// N(x) = lambda0 exp(-lambda0 x).
inline double stable_profile(double lambda0, double x) {
  return x < 0.0 ? 0.0 : lambda0 * std::exp(-lambda0 * x);
}
ScalarFn eigen_N(double lambda0);

/// lambda0 together with N and the dual eigenfunction
///   phi(x) = phi0 exp(lambda0 x) int_x^inf B(y) exp(-lambda0 y) dy,
/// normalized so that int N phi dx = 1.
class SpectralData {
 public:
  double lambda0() const { return lambda0_; }
  double phi0() const { return phi0_; }
  double N(double x) const { return stable_profile(lambda0_, x); }
  double phi(double x) const;
  ScalarFn phi_fn() const;

  double residual_euler_lotka() const { return residual_euler_lotka_; }
  double residual_normalization() const { return residual_normalization_; }
  /// max |-phi' + lambda0 phi - phi0 B| / (sup B * phi0) over interior panel
  /// nodes away from jumps of B, with phi' by central differences.
  double residual_ode() const { return residual_ode_; }

  const BirthLaw& birth_law() const { return law_; }

  friend SpectralData eigen_phi(const BirthLaw& law, double lambda0);

 private:
  explicit SpectralData(BirthLaw law) : law_(std::move(law)) {}
  // exp(lambda0 x) int_x^inf B exp(-lambda0 y) dy
  double scaled_tail(double x) const;

  BirthLaw law_;
  double lambda0_ = 0.0;
  double phi0_ = 0.0;
  double residual_euler_lotka_ = 0.0;
  double residual_normalization_ = 0.0;
  double residual_ode_ = 0.0;
  std::vector<double> scaled_tail_;  // at the law's panel nodes
};

SpectralData eigen_phi(const BirthLaw& law, double lambda0);
SpectralData solve_spectral(const BirthLaw& law);

}  // namespace renewal
