#include "renewal/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "renewal/entropy.hpp"

namespace renewal {

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string out = "invalid scenario:";
  for (const std::string& p : problems) out += "\n  " + p;
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> to_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  if (trim(s).empty()) return parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

bool is_multiple(double value, double step) {
  const double q = value / step;
  return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, std::round(q));
}

struct Entry {
  std::string value;
  std::size_t line = 0;
  bool used = false;
};

using Section = std::map<std::string, Entry>;

const std::map<std::string, std::vector<std::string>>& known_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"birth_law", {"kind", "beta", "a", "b", "x", "values", "support_end"}},
      {"initial",
       {"atoms", "density", "amplitude", "rate", "center", "width", "lo", "hi", "value", "path"}},
      {"numerics",
       {"h", "dt", "T", "x_max", "quadrature_panels", "conservation_tol", "monotone_slack",
        "dissipation_floor", "reshetnyak_tol"}},
      {"diagnostics", {"integrands", "eta", "sample_dt", "snapshot_times", "eps_list"}},
      {"output", {"dir"}},
  };
  return keys;
}

class Reader {
 public:
  explicit Reader(std::map<std::string, Section>& sections, std::vector<std::string>& problems)
      : sections_(sections), problems_(problems) {}

  const Entry* find(const std::string& section, const std::string& key) {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto e = s->second.find(key);
    if (e == s->second.end()) return nullptr;
    e->second.used = true;
    return &e->second;
  }

  void real(const std::string& section, const std::string& key, double& out) {
    if (const Entry* e = find(section, key)) {
      if (auto v = to_real(e->value))
        out = *v;
      else
        fail(*e, key + ": expected a real number, got '" + e->value + "'");
    }
  }

  // Accepts the literal `lambda0` in place of a number.
  void real_or_lambda0(const std::string& section, const std::string& key, double& out,
                       bool& is_lambda0) {
    if (const Entry* e = find(section, key)) {
      if (trim(e->value) == "lambda0") {
        is_lambda0 = true;
      } else if (auto v = to_real(e->value)) {
        out = *v;
        is_lambda0 = false;
      } else {
        fail(*e, key + ": expected a real number or lambda0, got '" + e->value + "'");
      }
    }
  }

  void reals(const std::string& section, const std::string& key, std::vector<double>& out) {
    if (const Entry* e = find(section, key)) {
      std::vector<double> values;
      for (std::string_view part : split(e->value, ',')) {
        if (auto v = to_real(part)) {
          values.push_back(*v);
        } else {
          fail(*e, key + ": '" + std::string(part) + "' is not a real number");
          return;
        }
      }
      out = std::move(values);
    }
  }

  void word(const std::string& section, const std::string& key, std::string& out) {
    if (const Entry* e = find(section, key)) out = std::string(trim(e->value));
  }

  void words(const std::string& section, const std::string& key, std::vector<std::string>& out) {
    if (const Entry* e = find(section, key)) {
      out.clear();
      for (std::string_view part : split(e->value, ',')) out.emplace_back(part);
    }
  }

  void fail(const Entry& e, const std::string& message) {
    problems_.push_back("line " + std::to_string(e.line) + ": " + message);
  }

 private:
  std::map<std::string, Section>& sections_;
  std::vector<std::string>& problems_;
};

void validate(const Scenario& sc, std::vector<std::string>& problems) {
  const Numerics& nu = sc.numerics;
  auto problem = [&](std::string m) { problems.push_back(std::move(m)); };

  try {
    (void)sc.birth_law();
  } catch (const ConfigError& e) {
    problem(e.what());
  }

  bool grid_ok = true;
  for (auto [value, name] : {std::pair{nu.h, "h"}, std::pair{nu.dt, "dt"}, std::pair{nu.T, "T"},
                             std::pair{nu.x_max, "x_max"}})
    if (!(value > 0.0)) {
      problem(std::string("numerics: ") + name + " must be positive");
      grid_ok = false;
    }
  if (nu.quadrature_panels < 1) problem("numerics: quadrature_panels must be at least 1");
  if (grid_ok) {
    if (nu.dt > nu.h * (1.0 + 1e-12))
      problem("numerics: time step exceeds grid spacing (dt = " + format_real(nu.dt) +
              ", h = " + format_real(nu.h) + ")");
    if (!is_multiple(nu.T, nu.dt)) problem("numerics: T must be a multiple of dt");
    if (!is_multiple(nu.x_max, nu.h)) problem("numerics: x_max must be a multiple of h");
    if (!(nu.T < nu.x_max)) problem("numerics: T must be below x_max");
    if (sc.law.kind == "indicator" || sc.law.kind == "table") {
      const double end = sc.law.kind == "indicator" ? sc.law.b : sc.law.support_end;
      if (end + nu.T > nu.x_max * (1.0 + 1e-12))
        problem("truncation certificate fails: support_end + T = " + format_real(end + nu.T) +
                " exceeds x_max = " + format_real(nu.x_max));
    }
    for (const Atom& a : sc.atoms)
      if (!(a.location > 0.0 && a.location < nu.x_max - nu.T))
        problem("initial: atom location " + format_real(a.location) +
                " must lie in (0, x_max - T)");
  }
  for (double v : {nu.conservation_tol, nu.monotone_slack, nu.dissipation_floor, nu.reshetnyak_tol})
    if (!(v >= 0.0)) {
      problem("numerics: tolerances must be nonnegative");
      break;
    }

  const DensitySpec& d = sc.density;
  if (d.kind == "gaussian" && !(d.width > 0.0)) problem("initial: gaussian width must be positive");
  if (d.kind == "uniform" && !(d.lo >= 0.0 && d.lo < d.hi))
    problem("initial: uniform density needs 0 <= lo < hi");
  if (d.kind == "exponential" && !d.rate_is_lambda0 && !(d.rate >= 0.0))
    problem("initial: exponential rate must be nonnegative");
  if (d.kind == "file") {
    if (d.path.empty()) {
      problem("initial: density = file needs a path");
    } else {
      try {
        const HybridMeasure m = sc.initial_measure(1.0);
        (void)m;
      } catch (const ConfigError& e) {
        problem(std::string("initial: ") + e.what());
      }
    }
  }
  if (d.kind != "none" && d.kind != "exponential" && d.kind != "gaussian" &&
      d.kind != "uniform" && d.kind != "file")
    problem("initial: unknown density '" + d.kind + "'");

  const Diagnostics& dg = sc.diagnostics;
  for (const std::string& name : dg.integrands) {
    try {
      (void)EntropyIntegrand::by_name(name);
    } catch (const ConfigError& e) {
      problem(std::string("diagnostics: ") + e.what());
    }
  }
  if (dg.eta != "phi" && dg.eta != "one") problem("diagnostics: eta must be phi or one");
  if (!(dg.sample_dt > 0.0))
    problem("diagnostics: sample_dt must be positive");
  else if (nu.dt > 0.0 && !is_multiple(dg.sample_dt, nu.dt))
    problem("diagnostics: sample_dt must be a multiple of dt");
  for (double t : dg.snapshot_times)
    if (!(t >= 0.0 && t <= nu.T)) problem("diagnostics: snapshot time " + format_real(t) + " outside [0, T]");
  for (std::size_t i = 0; i < dg.eps_list.size(); ++i) {
    if (i > 0 && !(dg.eps_list[i] < dg.eps_list[i - 1])) {
      problem("diagnostics: eps_list must be strictly decreasing");
      break;
    }
  }
  for (double e : dg.eps_list)
    if (!(e >= nu.h * (1.0 - 1e-12))) {
      problem("diagnostics: every eps must be at least h");
      break;
    }
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> problems)
    : ConfigError(join_problems(problems)), problems_(std::move(problems)) {}

BirthLaw Scenario::birth_law() const {
  const int panels = numerics.quadrature_panels;
  if (law.kind == "constant") return BirthLaw::constant(law.beta, panels);
  if (law.kind == "indicator") return BirthLaw::indicator(law.beta, law.a, law.b, panels);
  if (law.kind == "table") return BirthLaw::table(law.xs, law.values, law.support_end, panels);
  throw ConfigError("birth law: unknown kind '" + law.kind + "'");
}

HybridMeasure Scenario::initial_measure(double lambda0) const {
  const double h = numerics.h;
  const double x_max = numerics.x_max;
  const DensitySpec& d = density;
  const double amplitude = d.amplitude_is_lambda0 ? lambda0 : d.amplitude;
  const double rate = d.rate_is_lambda0 ? lambda0 : d.rate;
  if (d.kind == "file") {
    std::filesystem::path p(d.path);
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    const HybridMeasure m = read_measure_csv(p.string());
    if (std::abs(m.x_max() - x_max) > 1e-9 * x_max)
      throw ConfigError("density file '" + d.path + "' ends at " + format_real(m.x_max()) +
                        ", not at x_max");
    std::vector<Atom> all(m.atoms().begin(), m.atoms().end());
    all.insert(all.end(), atoms.begin(), atoms.end());
    return HybridMeasure(h, {m.nodes().begin(), m.nodes().end()},
                         {m.density().begin(), m.density().end()}, std::move(all));
  }
  if (d.kind == "uniform") {
    // Exact jumps at lo and hi.
    std::vector<DensityKnot> knots;
    auto inside = [&](double x) { return x >= d.lo && x < d.hi ? d.value : 0.0; };
    const auto n = static_cast<std::size_t>(std::llround(x_max / h));
    for (std::size_t i = 0; i <= n; ++i) {
      const double x = i == n ? x_max : static_cast<double>(i) * h;
      knots.push_back({x, inside(x), inside(x)});
    }
    for (double edge : {d.lo, d.hi}) {
      if (!(edge > 0.0 && edge < x_max)) continue;
      const double left = edge == d.lo ? 0.0 : d.value;
      const double right = edge == d.lo ? d.value : 0.0;
      auto it = std::lower_bound(knots.begin(), knots.end(), edge,
                                 [](const DensityKnot& k, double x) { return k.x < x; });
      knots.insert(it, {edge, left, right});
    }
    return HybridMeasure::from_knots(h, knots, atoms);
  }
  ScalarFn f = [](double) { return 0.0; };
  if (d.kind == "exponential")
    f = [=](double x) { return amplitude * std::exp(-rate * x); };
  else if (d.kind == "gaussian")
    f = [=, c = d.center, w = d.width](double x) {
      const double u = (x - c) / w;
      return amplitude * std::exp(-0.5 * u * u);
    };
  return HybridMeasure::sampled(h, x_max, f, atoms);
}

std::vector<double> Scenario::sample_times() const {
  const double step = diagnostics.sample_dt;
  const auto n = static_cast<std::size_t>(std::floor(numerics.T / step + 1e-9));
  std::vector<double> times;
  for (std::size_t i = 0; i <= n; ++i) times.push_back(std::min(static_cast<double>(i) * step, numerics.T));
  return times;
}

Scenario parse_scenario(std::string_view text, const std::string& base_dir) {
  std::vector<std::string> problems;
  std::map<std::string, Section> sections;
  std::string current;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        problems.push_back(where + "unterminated section header");
        continue;
      }
      current = std::string(trim(line.substr(1, line.size() - 2)));
      if (!known_keys().count(current)) problems.push_back(where + "unknown section [" + current + "]");
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      problems.push_back(where + "expected key = value");
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (current.empty()) {
      problems.push_back(where + "key '" + key + "' outside any section");
      continue;
    }
    const auto known = known_keys().find(current);
    if (known == known_keys().end()) continue;
    if (std::find(known->second.begin(), known->second.end(), key) == known->second.end()) {
      problems.push_back(where + "unknown key '" + key + "' in [" + current + "]");
      continue;
    }
    auto [it, inserted] = sections[current].try_emplace(key, Entry{value, line_no});
    if (!inserted) problems.push_back(where + "duplicate key '" + key + "'");
  }

  Scenario sc;
  sc.base_dir = base_dir;
  Reader r(sections, problems);
  r.word("birth_law", "kind", sc.law.kind);
  r.real("birth_law", "beta", sc.law.beta);
  r.real("birth_law", "a", sc.law.a);
  r.real("birth_law", "b", sc.law.b);
  r.reals("birth_law", "x", sc.law.xs);
  r.reals("birth_law", "values", sc.law.values);
  r.real("birth_law", "support_end", sc.law.support_end);

  if (const Entry* e = r.find("initial", "atoms")) {
    for (std::string_view pair : split(e->value, ',')) {
      const auto colon = pair.find(':');
      std::optional<double> loc, weight;
      if (colon != std::string_view::npos) {
        loc = to_real(pair.substr(0, colon));
        weight = to_real(pair.substr(colon + 1));
      }
      if (loc && weight)
        sc.atoms.push_back({*loc, *weight});
      else
        r.fail(*e, "atoms: expected location:weight, got '" + std::string(pair) + "'");
    }
  }
  r.word("initial", "density", sc.density.kind);
  r.real_or_lambda0("initial", "amplitude", sc.density.amplitude, sc.density.amplitude_is_lambda0);
  r.real_or_lambda0("initial", "rate", sc.density.rate, sc.density.rate_is_lambda0);
  r.real("initial", "center", sc.density.center);
  r.real("initial", "width", sc.density.width);
  r.real("initial", "lo", sc.density.lo);
  r.real("initial", "hi", sc.density.hi);
  r.real("initial", "value", sc.density.value);
  r.word("initial", "path", sc.density.path);

  Numerics& nu = sc.numerics;
  r.real("numerics", "h", nu.h);
  r.real("numerics", "dt", nu.dt);
  r.real("numerics", "T", nu.T);
  r.real("numerics", "x_max", nu.x_max);
  double panels = nu.quadrature_panels;
  r.real("numerics", "quadrature_panels", panels);
  if (panels != std::floor(panels) || panels > 1e7) {
    if (const Entry* e = r.find("numerics", "quadrature_panels"))
      r.fail(*e, "quadrature_panels must be an integer up to 1e7");
  } else {
    nu.quadrature_panels = static_cast<int>(panels);
  }
  r.real("numerics", "conservation_tol", nu.conservation_tol);
  r.real("numerics", "monotone_slack", nu.monotone_slack);
  r.real("numerics", "dissipation_floor", nu.dissipation_floor);
  r.real("numerics", "reshetnyak_tol", nu.reshetnyak_tol);

  Diagnostics& dg = sc.diagnostics;
  r.words("diagnostics", "integrands", dg.integrands);
  r.word("diagnostics", "eta", dg.eta);
  r.real("diagnostics", "sample_dt", dg.sample_dt);
  r.reals("diagnostics", "snapshot_times", dg.snapshot_times);
  r.reals("diagnostics", "eps_list", dg.eps_list);
  r.word("output", "dir", sc.output_dir);

  if (problems.empty()) validate(sc, problems);
  if (!problems.empty()) throw ScenarioError(std::move(problems));
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  const auto parent = std::filesystem::path(path).parent_path();
  return parse_scenario(text.str(), parent.empty() ? "." : parent.string());
}

}  // namespace renewal
