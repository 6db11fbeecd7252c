#pragma once

// Long-time diagnostics: distance to the equilibrium m0 N dx, exponential
// decay fits, the mollification harness and the birth-projection sequence.

#include <span>
#include <string>
#include <vector>

#include "renewal/entropy.hpp"
#include "renewal/measure.hpp"
#include "renewal/spectral.hpp"
#include "renewal/transport.hpp"

namespace renewal {

/// m0 = int phi dn0.
double conserved_mass(const HybridMeasure& n0, const SpectralData& spectral);

/// int phi dmu, evaluated with the quadrature of gre_functional (H = id).
double phi_mass(const HybridMeasure& mu, const SpectralData& spectral);

/// int eta d|mu - m0 N dx|. N is sampled on mu's own nodes.
double distance_to_equilibrium(const HybridMeasure& mu, const SpectralData& spectral, double m0,
                               const ScalarFn& eta);
/// Same for the snapshot of `traj` at t, with m0 taken from the initial datum.
double distance_to_equilibrium(const Trajectory& traj, double t, const ScalarFn& eta);

struct DecaySample {
  double t = 0.0;
  double D = 0.0;
};

struct DecayFit {
  std::string eta_name;
  std::vector<DecaySample> samples;
  double sigma_hat = 0.0;
  double y0_hat = 0.0;
  double r_squared = 0.0;
  double m0 = 0.0;
  /// Samples above the floating floor that entered the fit.
  std::size_t used = 0;
};

/// Least-squares line through (t, ln D) over samples with D > 1e-13:
/// ln D = -sigma (t - y0). Throws NumericalError with fewer than 5 usable
/// samples, ConfigError if t is not strictly increasing or D < 0.
DecayFit fit_decay_rate(std::vector<DecaySample> samples, std::string eta_name = "one",
                        double m0 = 0.0);

struct ReshetnyakRow {
  double eps = 0.0;
  double gre = 0.0;
  double gre_gap = 0.0;
  double angle = 0.0;
  double angle_gap = 0.0;
  double flat = 0.0;
};

struct ReshetnyakReport {
  double gre_reference = 0.0;
  double angle_reference = 0.0;
  std::vector<ReshetnyakRow> rows;
  bool passed = false;
};

/// Mollifies n0 at each eps (strictly decreasing, each >= the grid spacing)
/// and tabulates the entropy gap, the <.> gap and the flat distance to n0.
/// Passes when the last entropy gap is below the first one (or already at the
/// quadrature floor, max(1e-6, h^2) relative) and below `tolerance`.
ReshetnyakReport reshetnyak_harness(const HybridMeasure& n0, const SpectralData& spectral,
                                    const EntropyIntegrand& H, std::span<const double> eps_list,
                                    double tolerance = 1e-2);

struct MkRow {
  double t = 0.0;
  double m = 0.0;
  double D = 0.0;
};

struct MkReport {
  double m0 = 0.0;
  std::vector<MkRow> rows;
  double final_deviation = 0.0;
  /// |m_k - m0| non-increasing (slack 1e-10) after D first drops below 0.1 D(0).
  bool monotone = false;
  bool passed = false;
};

/// m_k = int B dn(t_k) / N(0) at the given increasing times.
MkReport mk_sequence_check(const Trajectory& traj, std::span<const double> times,
                           double final_tolerance = 1e-4);

}  // namespace renewal
