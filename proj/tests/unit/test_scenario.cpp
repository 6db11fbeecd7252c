#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "renewal/commands.hpp"
#include "renewal/scenario.hpp"

using namespace renewal;

namespace {

const char* kMinimal = R"(
[birth_law]
kind = constant
beta = 1

[initial]
atoms = 0.5:1

[numerics]
h = 0.005
dt = 0.001
T = 10
x_max = 40
)";

std::vector<std::string> problems_of(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ScenarioError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
  for (const std::string& p : problems)
    if (p.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("minimal scenario") {
  const Scenario sc = parse_scenario(kMinimal);
  CHECK(sc.law.kind == "constant");
  REQUIRE(sc.atoms.size() == 1);
  CHECK(sc.atoms[0] == Atom{0.5, 1.0});
  const SpectralData s = solve_spectral(sc.birth_law());
  CHECK(std::abs(s.lambda0() - 1.0) <= 1e-10);
  const HybridMeasure n0 = sc.initial_measure(s.lambda0());
  CHECK(n0.x_max() == 40.0);
  CHECK(n0.grid_spacing() == 0.005);
  CHECK(sc.sample_times().size() == 201);
  CHECK(sc.diagnostics.integrands == std::vector<std::string>{"abs", "sqrt1p", "pospart"});
}

TEST_CASE("validation errors") {
  std::string text = kMinimal;
  text.replace(text.find("beta = 1"), 8, "beta = 0.8");
  auto problems = problems_of(text);
  REQUIRE(problems.size() == 1);
  CHECK(mentions(problems, "net reproduction below one"));

  const std::string indicator = R"(
[birth_law]
kind = indicator
beta = 0.8
b = 1
[numerics]
h = 0.01
dt = 0.02
T = 4
x_max = 12
[initial]
atoms = 0.5:1, 9:1
)";
  problems = problems_of(indicator);
  // All problems, not just the first.
  CHECK(mentions(problems, "net reproduction below one"));
  CHECK(mentions(problems, "time step exceeds grid spacing"));
  CHECK(mentions(problems, "atom location 9"));
  // The default sample_dt = 0.05 is off the dt = 0.02 grid.
  CHECK(mentions(problems, "sample_dt must be a multiple of dt"));
  CHECK(problems.size() == 4);

  text = kMinimal;
  text.replace(text.find("T = 10"), 6, "T = 10.0005");
  CHECK(mentions(problems_of(text), "T must be a multiple of dt"));

  const std::string truncation = R"(
[birth_law]
kind = indicator
beta = 2
b = 3
[numerics]
h = 0.01
dt = 0.01
T = 10
x_max = 12
)";
  CHECK(mentions(problems_of(truncation), "truncation certificate"));
}

TEST_CASE("syntax errors carry line numbers") {
  const std::string text = "[birth_law]\nkind = constant\nbeta = one\n[numerics]\nfoo = 1\nnot a pair\n"
                           "[extra]\nbeta = 2\n";
  const auto problems = problems_of(text);
  CHECK(mentions(problems, "line 3: beta"));
  CHECK(mentions(problems, "line 5: unknown key 'foo'"));
  CHECK(mentions(problems, "line 6: expected key = value"));
  CHECK(mentions(problems, "line 7: unknown section [extra]"));
  CHECK(mentions(problems_of("beta = 1\n"), "outside any section"));
  CHECK(mentions(problems_of("[birth_law]\nbeta = 1\nbeta = 2\n"), "line 3: duplicate key"));
  CHECK(mentions(problems_of(std::string(kMinimal) + "[diagnostics]\nintegrands = abs, square\n"),
                 "unknown integrand 'square'"));
}

TEST_CASE("density catalog") {
  std::string base = kMinimal;
  base.replace(base.find("atoms = 0.5:1"), 13, "");
  base += "[initial]\n";

  const Scenario stable =
      parse_scenario(base + "density = exponential\namplitude = lambda0\nrate = lambda0\n");
  const SpectralData s = solve_spectral(stable.birth_law());
  const HybridMeasure n = stable.initial_measure(s.lambda0());
  for (std::size_t i = 0; i < n.node_count(); i += 997)
    CHECK(n.density()[i] == doctest::Approx(s.N(n.nodes()[i])).epsilon(1e-14));

  const Scenario bump =
      parse_scenario(base + "density = gaussian\ncenter = 2\nwidth = 0.5\namplitude = 3\n");
  const HybridMeasure g = bump.initial_measure(1.0);
  CHECK(g.density_right(2.0) == doctest::Approx(3.0));
  CHECK(g.density_right(2.5) == doctest::Approx(3.0 * std::exp(-0.5)));

  // Uniform carries exact jumps at off-grid edges.
  const Scenario box = parse_scenario(base + "density = uniform\nlo = 0.2021\nhi = 1.3\nvalue = 2\n");
  const HybridMeasure u = box.initial_measure(1.0);
  CHECK(u.density_left(0.2021) == 0.0);
  CHECK(u.density_right(0.2021) == 2.0);
  CHECK(u.density_left(1.3) == 2.0);
  CHECK(u.density_right(1.3) == 0.0);
  CHECK(total_variation(u) == doctest::Approx(2.0 * (1.3 - 0.2021)).epsilon(1e-12));

  CHECK(mentions(problems_of(base + "density = triangle\n"), "unknown density"));
  CHECK(mentions(problems_of(base + "density = file\n"), "needs a path"));
}

TEST_CASE("density from file, relative to the scenario") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "renewal_scenario_test";
  fs::create_directories(dir);
  const HybridMeasure datum =
      HybridMeasure::sampled(0.005, 40.0, [](double x) { return x < 1.0 ? 1.0 : 0.0; }, {{2.0, 0.5}});
  write_measure_csv((dir / "n0.csv").string(), datum);
  std::string text = kMinimal;
  text += "[initial]\ndensity = file\npath = n0.csv\n";
  {
    std::ofstream out(dir / "s.ini");
    out << text;
  }
  const Scenario sc = load_scenario((dir / "s.ini").string());
  const HybridMeasure n0 = sc.initial_measure(1.0);
  CHECK(n0.atoms().size() == 2);
  CHECK(n0.density_right(0.5) == 1.0);

  std::string wrong = kMinimal;
  wrong.replace(wrong.find("x_max = 40"), 10, "x_max = 20");
  wrong += "[initial]\ndensity = file\npath = n0.csv\n";
  CHECK_THROWS_WITH_AS(parse_scenario(wrong, dir.string()), doctest::Contains("not at x_max"),
                       ScenarioError);
  fs::remove_all(dir);
}

TEST_CASE("diagnostic rows do not depend on the worker count") {
  std::string text = kMinimal;
  text.replace(text.find("T = 10"), 6, "T = 2");
  text.replace(text.find("x_max = 40"), 10, "x_max = 20");
  text += "[diagnostics]\nsample_dt = 0.25\n";
  const Simulation sim = simulate(parse_scenario(text));
  const auto one = diagnostic_rows(sim, 1);
  const auto four = diagnostic_rows(sim, 4);
  REQUIRE(one.size() == 9);
  REQUIRE(four.size() == 9);
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].t == four[i].t);
    CHECK(one[i].D_phi == four[i].D_phi);
    CHECK(one[i].m_k == four[i].m_k);
    CHECK(one[i].gre == four[i].gre);
    CHECK(one[i].J == four[i].J);
  }
}
