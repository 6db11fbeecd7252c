#pragma once

// Declarative run description parsed from a flat INI-style text.
//
//   # comment                     ; also a comment
//   [birth_law]
//   kind = constant | indicator | table
//   beta = 1                      (constant, indicator)
//   a = 0                         (indicator)
//   b = 1
//   x = 0, 0.5, 1                 (table; first entry 0)
//   values = 1, 3, 2
//   support_end = 1.5
//
//   [initial]
//   atoms = 0.5:1, 1.3:0.4        location:weight pairs
//   density = none | exponential | gaussian | uniform | file
//   amplitude = 1                 exponential, gaussian; `lambda0` allowed
//   rate = lambda0                exponential
//   center = 0.6                  gaussian, with width = standard deviation
//   width = 0.15
//   lo = 0.2                      uniform: `value` on [lo, hi)
//   hi = 0.8
//   value = 1
//   path = n0.csv                 file, relative to the scenario file
//
//   [numerics]
//   h, dt, T, x_max, quadrature_panels,
//   conservation_tol, monotone_slack, dissipation_floor, reshetnyak_tol
//
//   [diagnostics]
//   integrands = abs, sqrt1p, pospart
//   eta = phi | one               weight of the decay fit
//   sample_dt = 0.05
//   snapshot_times = 1, 5, 10
//   eps_list = 0.4, 0.2, 0.1, 0.05
//
//   [output]
//   dir = out

#include <string>
#include <string_view>
#include <vector>

#include "renewal/error.hpp"
#include "renewal/measure.hpp"
#include "renewal/spectral.hpp"

namespace renewal {

/// Every problem found in a scenario, one message per entry.
class ScenarioError : public ConfigError {
 public:
  explicit ScenarioError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct LawSpec {
  std::string kind = "constant";
  double beta = 1.0;
  double a = 0.0;
  double b = 1.0;
  std::vector<double> xs;
  std::vector<double> values;
  double support_end = 0.0;
};

struct DensitySpec {
  std::string kind = "none";
  double amplitude = 1.0;
  bool amplitude_is_lambda0 = false;
  double rate = 1.0;
  bool rate_is_lambda0 = false;
  double center = 0.0;
  double width = 1.0;
  double lo = 0.0;
  double hi = 1.0;
  double value = 1.0;
  std::string path;
};

struct Numerics {
  double h = 0.005;
  double dt = 0.001;
  double T = 10.0;
  double x_max = 40.0;
  int quadrature_panels = BirthLaw::kDefaultPanels;
  double conservation_tol = 1e-6;
  double monotone_slack = 1e-8;
  double dissipation_floor = 1e-10;
  double reshetnyak_tol = 1e-2;
};

struct Diagnostics {
  std::vector<std::string> integrands{"abs", "sqrt1p", "pospart"};
  std::string eta = "phi";
  double sample_dt = 0.05;
  std::vector<double> snapshot_times;
  std::vector<double> eps_list{0.4, 0.2, 0.1, 0.05};
};

struct Scenario {
  LawSpec law;
  std::vector<Atom> atoms;
  DensitySpec density;
  Numerics numerics;
  Diagnostics diagnostics;
  std::string output_dir = "out";
  /// Directory that relative paths are resolved against.
  std::string base_dir = ".";

  BirthLaw birth_law() const;
  /// The initial datum on the scenario grid; `lambda0` feeds the density
  /// parameters written as `lambda0`.
  HybridMeasure initial_measure(double lambda0) const;
  /// Sample times 0, sample_dt, ..., floor(T / sample_dt) sample_dt.
  std::vector<double> sample_times() const;
};

/// Parses and validates. Throws ScenarioError listing every problem found,
/// each prefixed with its line number when it comes from a specific line.
Scenario parse_scenario(std::string_view text, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);

}  // namespace renewal
