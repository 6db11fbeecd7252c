#pragma once

// The four front-end commands, shared by the C API and the command line.

#include <iosfwd>
#include <string>
#include <vector>

#include "renewal/convergence.hpp"
#include "renewal/scenario.hpp"

namespace renewal {

/// Worker count from RENEWAL_THREADS: unset means the hardware concurrency,
/// 0 or 1 means sequential.
unsigned thread_budget();

struct DiagnosticRow {
  double t = 0.0;
  double D_phi = 0.0;
  double D_one = 0.0;
  double m_k = 0.0;
  /// Window phi-mass plus the part that left through x_max.
  double conserved_phi_mass = 0.0;
  std::vector<double> gre;  // one per configured integrand
  std::vector<double> J;
};

struct Simulation {
  Scenario scenario;
  Trajectory trajectory;
  double m0 = 0.0;
};

Simulation simulate(const Scenario& scenario);

/// One row per sample time; rows are evaluated on up to `threads` workers
/// and returned in time order.
std::vector<DiagnosticRow> diagnostic_rows(const Simulation& sim, unsigned threads);

/// Decay fit over rows with t in [0.2 T, T], using D_phi or D_one per the
/// scenario's eta.
DecayFit decay_fit(const Simulation& sim, const std::vector<DiagnosticRow>& rows);

struct RunResult {
  std::size_t diagnostic_rows = 0;
  std::vector<std::string> files;
  /// Empty when the fit succeeded.
  std::string fit_error;
  DecayFit fit;
};

/// Writes births.csv, diagnostics.csv, decayfit.json and one snapshot file
/// per requested time into `out_dir`. Progress goes to `log` when non-null.
RunResult cmd_run(const Scenario& scenario, const std::string& out_dir, std::ostream* log);

/// lambda0, phi0 and the residuals as `name = value` lines, then the CSV
/// table `x,N,phi` on the scenario grid.
void cmd_spectral(const Scenario& scenario, std::ostream& out);

/// Flat distance between two snapshot files.
double cmd_distance(const std::string& path_a, const std::string& path_b);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
};

/// Conservation, entropy monotonicity, Jensen positivity of J, the
/// dissipation budget, the mollification harness and B >= C phi.
VerifyReport cmd_verify(const Scenario& scenario);

}  // namespace renewal
