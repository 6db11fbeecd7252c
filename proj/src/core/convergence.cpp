#include "renewal/convergence.hpp"

#include <algorithm>
#include <cmath>

#include "renewal/error.hpp"

namespace renewal {

double phi_mass(const HybridMeasure& mu, const SpectralData& spectral) {
  static const EntropyIntegrand id = EntropyIntegrand::identity();
  return gre_functional(mu, spectral, id);
}

double conserved_mass(const HybridMeasure& n0, const SpectralData& spectral) {
  return phi_mass(n0, spectral);
}

double distance_to_equilibrium(const HybridMeasure& mu, const SpectralData& spectral, double m0,
                               const ScalarFn& eta) {
  const auto nodes = mu.nodes();
  std::vector<double> n_values(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) n_values[i] = spectral.N(nodes[i]);
  const HybridMeasure profile(mu.grid_spacing(), {nodes.begin(), nodes.end()},
                              std::move(n_values));
  return weighted_variation(linear_combination(1.0, mu, -m0, profile), eta);
}

double distance_to_equilibrium(const Trajectory& traj, double t, const ScalarFn& eta) {
  const double m0 = conserved_mass(traj.initial(), traj.spectral());
  return distance_to_equilibrium(evolve(traj, t), traj.spectral(), m0, eta);
}

DecayFit fit_decay_rate(std::vector<DecaySample> samples, std::string eta_name, double m0) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i].D >= 0.0)) throw ConfigError("fit_decay_rate: negative or NaN distance");
    if (i > 0 && !(samples[i].t > samples[i - 1].t))
      throw ConfigError("fit_decay_rate: sample times must be strictly increasing");
  }
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0, syy = 0.0;
  std::size_t n = 0;
  for (const DecaySample& s : samples) {
    if (!(s.D > 1e-13)) continue;
    const double y = std::log(s.D);
    st += s.t;
    sy += y;
    stt += s.t * s.t;
    sty += s.t * y;
    syy += y * y;
    ++n;
  }
  if (n < 5)
    throw NumericalError("fit_decay_rate: " + std::to_string(n) +
                         " usable samples (need at least 5 with D > 1e-13)");
  const double dn = static_cast<double>(n);
  const double ctt = stt - st * st / dn;
  const double cty = sty - st * sy / dn;
  const double cyy = syy - sy * sy / dn;
  if (!(ctt > 0.0)) throw NumericalError("fit_decay_rate: degenerate sample times");
  const double slope = cty / ctt;
  const double intercept = (sy - slope * st) / dn;

  DecayFit fit;
  fit.eta_name = std::move(eta_name);
  fit.samples = std::move(samples);
  fit.sigma_hat = -slope;
  fit.y0_hat = fit.sigma_hat != 0.0 ? intercept / fit.sigma_hat : 0.0;
  fit.r_squared = cyy > 0.0 ? std::min(1.0, cty * cty / (ctt * cyy)) : 1.0;
  fit.m0 = m0;
  fit.used = n;
  return fit;
}

ReshetnyakReport reshetnyak_harness(const HybridMeasure& n0, const SpectralData& spectral,
                                    const EntropyIntegrand& H, std::span<const double> eps_list,
                                    double tolerance) {
  if (eps_list.empty()) throw ConfigError("reshetnyak_harness: empty eps list");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1]))
      throw ConfigError("reshetnyak_harness: eps list must be strictly decreasing");

  ReshetnyakReport report;
  report.gre_reference = gre_functional(n0, spectral, H);
  report.angle_reference = angle_bracket(n0);
  for (double eps : eps_list) {
    const HybridMeasure smooth = mollify(n0, eps);
    ReshetnyakRow row;
    row.eps = eps;
    row.gre = gre_functional(smooth, spectral, H);
    row.gre_gap = std::abs(row.gre - report.gre_reference);
    row.angle = angle_bracket(smooth);
    row.angle_gap = std::abs(row.angle - report.angle_reference);
    row.flat = flat_distance(smooth, n0);
    report.rows.push_back(row);
  }
  const double first = report.rows.front().gre_gap;
  const double last = report.rows.back().gre_gap;
  // Gaps at the quadrature floor carry no ordering information. Reading a
  // linear bump through density / N costs O(h^2) whatever eps is.
  const double h = n0.grid_spacing();
  const double floor = std::max(1e-6, h * h) * std::max(1.0, std::abs(report.gre_reference));
  const bool shrinks = last < first || last <= floor;
  report.passed = shrinks && last <= tolerance;
  return report;
}

MkReport mk_sequence_check(const Trajectory& traj, std::span<const double> times,
                           double final_tolerance) {
  const SpectralData& spectral = traj.spectral();
  MkReport report;
  report.m0 = conserved_mass(traj.initial(), spectral);
  const ScalarFn one = [](double) { return 1.0; };
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && !(times[i] > times[i - 1]))
      throw ConfigError("mk_sequence_check: times must be increasing");
    const HybridMeasure snap = evolve(traj, times[i]);
    report.rows.push_back({times[i], birth_projection(snap, spectral),
                           distance_to_equilibrium(snap, spectral, report.m0, one)});
  }
  report.monotone = true;
  if (!report.rows.empty()) {
    const double threshold = 0.1 * report.rows.front().D;
    bool crossed = false;
    double previous = 0.0;
    for (const MkRow& row : report.rows) {
      const double dev = std::abs(row.m - report.m0);
      if (crossed && dev > previous + 1e-10) report.monotone = false;
      if (!crossed && row.D < threshold) crossed = true;
      previous = dev;
    }
    report.final_deviation = std::abs(report.rows.back().m - report.m0);
  }
  report.passed = report.monotone && report.final_deviation <= final_tolerance;
  return report;
}

}  // namespace renewal
