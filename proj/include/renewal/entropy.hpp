#pragma once

// Convex integrands with linear growth, the entropy functional
//   H[mu] = int phi N H(mu^a / N) dx + int phi H_inf(sign) d|mu^s|,
// the dissipation integrand J and the Jensen defect.

#include <span>
#include <string>
#include <vector>

#include "renewal/measure.hpp"
#include "renewal/spectral.hpp"

namespace renewal {

/// lim_{s -> inf} H(s z) / s for z = +1 or -1, evaluated at s = 2^10 .. 2^40.
/// Throws ConfigError ("not admissible") if the quotient does not settle.
double recession(const ScalarFn& H, double z);

/// Convex H with at most linear growth, together with H_inf(+1), H_inf(-1).
///
/// The constructor checks midpoint convexity on 1000 pseudo-random pairs,
/// linear growth up to |z| = 1e6 and computes the recession values; any
/// failure is a ConfigError.
class EntropyIntegrand {
 public:
  EntropyIntegrand(std::string name, ScalarFn H, bool strictly_convex);

  static EntropyIntegrand abs();
  static EntropyIntegrand sqrt1p();
  static EntropyIntegrand pospart();
  static EntropyIntegrand identity();
  /// u -> |u - k|
  static EntropyIntegrand abs_shift(double k);
  /// One of "abs", "sqrt1p", "pospart", "id", "abs_shift:<k>".
  static EntropyIntegrand by_name(const std::string& name);

  double operator()(double u) const { return H_(u); }
  /// H_inf(sign(w)) |w|, the contribution of an atom of weight w.
  double singular(double w) const {
    return w >= 0.0 ? recession_plus_ * w : -recession_minus_ * w;
  }
  double recession_plus() const { return recession_plus_; }
  double recession_minus() const { return recession_minus_; }
  bool strictly_convex() const { return strictly_convex_; }
  const std::string& name() const { return name_; }
  /// sup |H(z)| / (1 + |z|) over the sampled points.
  double growth_constant() const { return growth_; }

 private:
  std::string name_;
  ScalarFn H_;
  bool strictly_convex_ = false;
  double recession_plus_ = 0.0;
  double recession_minus_ = 0.0;
  double growth_ = 0.0;
};

/// Entropy functional of mu relative to N, weighted by phi. The ratio
/// density / N is interpolated linearly between nodes and integrated against
/// phi N with Gauss-Legendre, split at the breakpoints of B. Throws
/// NumericalError if |density / N| exceeds 1e300 at a node.
double gre_functional(const HybridMeasure& mu, const SpectralData& spectral,
                      const EntropyIntegrand& H);

/// J = int H(mu^a / N) dm + int (B / N(0)) H_inf d|mu^s| - H(int (B / N(0)) dmu)
/// with the reference probability m = B N / N(0) dx restricted to [0, x_max].
/// Throws NumericalError if m has mass farther than 1e-8 from one.
double dissipation_J(const HybridMeasure& mu, const SpectralData& spectral,
                     const EntropyIntegrand& H);

/// int (B / N(0)) dmu, the birth projection; same quadrature as dissipation_J.
double birth_projection(const HybridMeasure& mu, const SpectralData& spectral);

/// int psi H(mu^a) dx + int psi H_inf d|mu^s| - H(int psi dmu).
/// psi must integrate to 1 within 1e-8 over [0, x_max] (ConfigError otherwise).
/// `breaks` lists points where psi is not smooth.
double jensen_defect(const HybridMeasure& mu, const ScalarFn& psi, const EntropyIntegrand& f,
                     std::span<const double> breaks = {});

struct Domination {
  bool holds = false;
  double C = 0.0;
};

/// Largest C with B >= C phi at every node where phi > 1e-14.
Domination verify_B_dominates_phi(const SpectralData& spectral, std::span<const double> nodes);
/// Same on the quadrature panel nodes of the birth law.
Domination verify_B_dominates_phi(const SpectralData& spectral);

}  // namespace renewal
