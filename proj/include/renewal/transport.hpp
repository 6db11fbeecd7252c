#pragma once

// Renormalized renewal equation
//   d/dt n + d/dx n + lambda0 n = 0,   n(t, 0) = int B(y) n(t, dy),
// solved exactly along characteristics. The only unknown is the birth trace
// b(t) = n(t, 0), which satisfies the Volterra equation
//   b(t) = g(t) + int_0^t B(x) exp(-lambda0 x) b(t - x) dx,
//   g(t) = exp(-lambda0 t) int B(x + t) n0(dx).

#include <cstddef>
#include <span>
#include <vector>

#include "renewal/measure.hpp"
#include "renewal/spectral.hpp"

namespace renewal {

/// A solution stored as its initial datum plus the birth series on the time
/// grid t_k = k dt; snapshots are materialized on demand.
///
/// Where an atom of the datum crosses a jump of B at a grid time, the birth
/// series jumps too; both one-sided values are kept. Crossings between grid
/// times are resolved only to first order in dt.
class Trajectory {
 public:
  const HybridMeasure& initial() const { return initial_; }
  const SpectralData& spectral() const { return spectral_; }
  const BirthLaw& birth_law() const { return spectral_.birth_law(); }
  double lambda0() const { return spectral_.lambda0(); }
  double dt() const { return dt_; }
  double horizon() const { return horizon_; }
  std::size_t steps() const { return births_.size() - 1; }
  double time(std::size_t k) const { return static_cast<double>(k) * dt_; }

  /// b(t_k), right-continuous.
  std::span<const double> births() const { return births_; }
  /// lim_{t -> t_k-} b(t); equal to births() except at jump steps.
  std::span<const double> births_left() const { return births_left_; }
  /// Grid indices where the birth series jumps.
  std::span<const std::size_t> jump_steps() const { return jump_steps_; }

  /// Piecewise-linear birth trace; `left` selects the left limit at jumps.
  double birth(double t, bool left = false) const;

  /// Implicit diagonal weight of the product-integration rule.
  double self_weight() const { return self_weight_; }

  friend Trajectory birth_series(HybridMeasure n0, const SpectralData& spectral, double dt,
                                 double horizon);

 private:
  Trajectory(HybridMeasure n0, SpectralData spectral)
      : initial_(std::move(n0)), spectral_(std::move(spectral)) {}

  HybridMeasure initial_;
  SpectralData spectral_;
  double dt_ = 0.0;
  double horizon_ = 0.0;
  double self_weight_ = 0.0;
  std::vector<double> births_;
  std::vector<double> births_left_;
  std::vector<std::size_t> jump_steps_;
};

/// int B(x + shift) dmu(x). Between nodes the density is read as N times a
/// linearly interpolated ratio, which makes N dx exact; `left_limit` takes
/// the left value of B at atoms.
double birth_source(const HybridMeasure& mu, const SpectralData& spectral, double shift,
                    bool left_limit = false);

/// Solves the birth trace by trapezoid product integration: b is linear
/// between grid times and the kernel moments on each step are integrated
/// exactly (Gauss-Legendre, split at the breakpoints of B).
///
/// Throws ConfigError when dt exceeds the datum's grid spacing, when T is not
/// a multiple of dt or when the truncation certificate fails (B must vanish
/// on [x_max - T, inf) unless it is the constant law); NumericalError when the
/// implicit weight makes the step singular.
Trajectory birth_series(HybridMeasure n0, const SpectralData& spectral, double dt,
                        double horizon);

struct Snapshot {
  HybridMeasure measure;
  /// Time actually used (t snapped to the nearest multiple of dt).
  double time = 0.0;
  double snap_residual = 0.0;
  /// int phi d(tilde n(t)) over (x_max, inf): the part that left the window.
  double tail_phi_mass = 0.0;
};

/// Renormalized solution at time t: the shifted datum, scaled by
/// exp(-lambda0 t), on (t, x_max] and the newborn density
/// b(t - x) exp(-lambda0 x) on (0, t). A node sits exactly at x = t and at
/// every jump of the newborn density. Throws ConfigError if t lies outside [0, T].
Snapshot snapshot(const Trajectory& traj, double t);
HybridMeasure evolve(const Trajectory& traj, double t);

/// n = tilde n exp(lambda0 t). Throws NumericalError if lambda0 t > 700.
HybridMeasure unrenormalize(const HybridMeasure& mu, double t, double lambda0);

}  // namespace renewal
