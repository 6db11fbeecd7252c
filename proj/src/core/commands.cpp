#include "renewal/commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "json.hpp"
#include "renewal/error.hpp"

namespace renewal {

namespace {

// Shortest round-trip spelling, for file names.
std::string short_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, ptr) : format_real(v);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_lock;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_lock);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<EntropyIntegrand> integrands(const Scenario& sc) {
  std::vector<EntropyIntegrand> out;
  for (const std::string& name : sc.diagnostics.integrands)
    out.push_back(EntropyIntegrand::by_name(name));
  return out;
}

}  // namespace

unsigned thread_budget() {
  const char* env = std::getenv("RENEWAL_THREADS");
  if (env == nullptr || *env == '\0') return std::max(1u, std::thread::hardware_concurrency());
  unsigned n = 0;
  const char* end = env + std::char_traits<char>::length(env);
  const auto [ptr, ec] = std::from_chars(env, end, n);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("RENEWAL_THREADS must be a nonnegative integer");
  return std::max(1u, n);
}

Simulation simulate(const Scenario& scenario) {
  const SpectralData spectral = solve_spectral(scenario.birth_law());
  HybridMeasure n0 = scenario.initial_measure(spectral.lambda0());
  const double m0 = conserved_mass(n0, spectral);
  Trajectory traj = birth_series(std::move(n0), spectral, scenario.numerics.dt, scenario.numerics.T);
  return Simulation{scenario, std::move(traj), m0};
}

std::vector<DiagnosticRow> diagnostic_rows(const Simulation& sim, unsigned threads) {
  const SpectralData& spectral = sim.trajectory.spectral();
  const std::vector<EntropyIntegrand> Hs = integrands(sim.scenario);
  const std::vector<double> times = sim.scenario.sample_times();
  const ScalarFn one = [](double) { return 1.0; };
  const ScalarFn phi = spectral.phi_fn();
  std::vector<DiagnosticRow> rows(times.size());
  parallel_for(times.size(), threads, [&](std::size_t i) {
    const Snapshot snap = snapshot(sim.trajectory, times[i]);
    DiagnosticRow& row = rows[i];
    row.t = times[i];
    row.D_phi = distance_to_equilibrium(snap.measure, spectral, sim.m0, phi);
    row.D_one = distance_to_equilibrium(snap.measure, spectral, sim.m0, one);
    row.m_k = birth_projection(snap.measure, spectral);
    row.conserved_phi_mass = phi_mass(snap.measure, spectral) + snap.tail_phi_mass;
    for (const EntropyIntegrand& H : Hs) {
      row.gre.push_back(gre_functional(snap.measure, spectral, H));
      row.J.push_back(dissipation_J(snap.measure, spectral, H));
    }
  });
  return rows;
}

DecayFit decay_fit(const Simulation& sim, const std::vector<DiagnosticRow>& rows) {
  const double T = sim.scenario.numerics.T;
  const bool use_phi = sim.scenario.diagnostics.eta == "phi";
  std::vector<DecaySample> samples;
  for (const DiagnosticRow& row : rows)
    if (row.t >= 0.2 * T - 1e-12) samples.push_back({row.t, use_phi ? row.D_phi : row.D_one});
  return fit_decay_rate(std::move(samples), sim.scenario.diagnostics.eta, sim.m0);
}

RunResult cmd_run(const Scenario& scenario, const std::string& out_dir, std::ostream* log) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out_dir + "': " + ec.message());

  const Simulation sim = simulate(scenario);
  const Trajectory& traj = sim.trajectory;
  if (log)
    *log << "lambda0 = " << format_real(traj.lambda0()) << "\nm0 = " << format_real(sim.m0)
         << "\nsteps = " << traj.steps() << "\n";

  RunResult result;
  {
    const fs::path path = dir / "births.csv";
    std::ofstream out = open_output(path);
    out << "t,b\n";
    const auto b = traj.births();
    for (std::size_t k = 0; k < b.size(); ++k)
      out << format_real(traj.time(k)) << ',' << format_real(b[k]) << '\n';
    result.files.push_back(path.string());
  }

  const std::vector<DiagnosticRow> rows = diagnostic_rows(sim, thread_budget());
  {
    const fs::path path = dir / "diagnostics.csv";
    std::ofstream out = open_output(path);
    out << "t,D_phi,D_one,m_k,conserved_phi_mass";
    for (const std::string& name : scenario.diagnostics.integrands) out << ",gre_" << name;
    for (const std::string& name : scenario.diagnostics.integrands) out << ",J_" << name;
    out << '\n';
    for (const DiagnosticRow& row : rows) {
      out << format_real(row.t) << ',' << format_real(row.D_phi) << ',' << format_real(row.D_one)
          << ',' << format_real(row.m_k) << ',' << format_real(row.conserved_phi_mass);
      for (double v : row.gre) out << ',' << format_real(v);
      for (double v : row.J) out << ',' << format_real(v);
      out << '\n';
    }
    result.diagnostic_rows = rows.size();
    result.files.push_back(path.string());
  }

  {
    nlohmann::ordered_json j;
    j["eta_name"] = scenario.diagnostics.eta;
    try {
      result.fit = decay_fit(sim, rows);
      j["sigma_hat"] = result.fit.sigma_hat;
      j["y0_hat"] = result.fit.y0_hat;
      j["r_squared"] = result.fit.r_squared;
      j["m0"] = sim.m0;
      j["sample_count"] = result.fit.used;
    } catch (const NumericalError& e) {
      // Nothing to fit once D sits at the floating floor (stationary data).
      result.fit_error = e.what();
      j["sigma_hat"] = nullptr;
      j["y0_hat"] = nullptr;
      j["r_squared"] = nullptr;
      j["m0"] = sim.m0;
      j["sample_count"] = 0;
      j["error"] = result.fit_error;
    }
    const fs::path path = dir / "decayfit.json";
    std::ofstream out = open_output(path);
    out << j.dump(2) << '\n';
    result.files.push_back(path.string());
  }

  for (double t : scenario.diagnostics.snapshot_times) {
    const fs::path path = dir / ("snapshot_t" + short_real(t) + ".csv");
    std::ofstream out = open_output(path);
    write_measure_csv(out, evolve(traj, t));
    result.files.push_back(path.string());
  }

  if (log) {
    if (result.fit_error.empty())
      *log << "sigma_hat = " << format_real(result.fit.sigma_hat)
           << " (r^2 = " << format_real(result.fit.r_squared) << ")\n";
    else
      *log << "decay fit skipped: " << result.fit_error << "\n";
    for (const std::string& f : result.files) *log << "wrote " << f << "\n";
  }
  return result;
}

void cmd_spectral(const Scenario& scenario, std::ostream& out) {
  const SpectralData s = solve_spectral(scenario.birth_law());
  out << "lambda0 = " << format_real(s.lambda0()) << '\n'
      << "phi0 = " << format_real(s.phi0()) << '\n'
      << "residual_euler_lotka = " << format_real(s.residual_euler_lotka()) << '\n'
      << "residual_ode = " << format_real(s.residual_ode()) << '\n'
      << "residual_normalization = " << format_real(s.residual_normalization()) << '\n'
      << "x,N,phi\n";
  const double h = scenario.numerics.h;
  const auto n = static_cast<std::size_t>(std::llround(scenario.numerics.x_max / h));
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = i == n ? scenario.numerics.x_max : static_cast<double>(i) * h;
    out << format_real(x) << ',' << format_real(s.N(x)) << ',' << format_real(s.phi(x)) << '\n';
  }
}

double cmd_distance(const std::string& path_a, const std::string& path_b) {
  return flat_distance(read_measure_csv(path_a), read_measure_csv(path_b));
}

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

VerifyReport cmd_verify(const Scenario& scenario) {
  const Numerics& nu = scenario.numerics;
  const Simulation sim = simulate(scenario);
  const SpectralData& spectral = sim.trajectory.spectral();
  const std::vector<DiagnosticRow> rows = diagnostic_rows(sim, thread_budget());
  const std::vector<EntropyIntegrand> Hs = integrands(scenario);
  VerifyReport report;

  {
    double worst = 0.0;
    const double scale = std::abs(sim.m0) > 0.0 ? std::abs(sim.m0) : 1.0;
    for (const DiagnosticRow& row : rows)
      worst = std::max(worst, std::abs(row.conserved_phi_mass - sim.m0) / scale);
    report.checks.push_back({"conservation", worst <= nu.conservation_tol,
                             "max relative drift " + format_real(worst)});
  }

  for (std::size_t h = 0; h < Hs.size(); ++h) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < rows.size(); ++i)
      worst = std::max(worst, rows[i].gre[h] - rows[i - 1].gre[h]);
    const bool ok = rows.size() < 2 || worst <= nu.monotone_slack;
    report.checks.push_back({"gre_monotonicity:" + Hs[h].name(), ok,
                             "max increase " + format_real(rows.size() < 2 ? 0.0 : worst)});
  }

  for (std::size_t h = 0; h < Hs.size(); ++h) {
    double lowest = std::numeric_limits<double>::infinity();
    double integral = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      lowest = std::min(lowest, rows[i].J[h]);
      if (i > 0) integral += 0.5 * (rows[i].J[h] + rows[i - 1].J[h]) * (rows[i].t - rows[i - 1].t);
    }
    report.checks.push_back({"jensen_positivity:" + Hs[h].name(), lowest >= -nu.dissipation_floor,
                             "min J " + format_real(lowest)});
    const double budget = rows.front().gre[h] + 1e-6;
    report.checks.push_back({"dissipation_budget:" + Hs[h].name(), integral <= budget,
                             "int J dt " + format_real(integral) + " vs H(0) " +
                                 format_real(rows.front().gre[h])});
  }

  {
    const ReshetnyakReport r =
        reshetnyak_harness(sim.trajectory.initial(), spectral, EntropyIntegrand::abs(),
                           scenario.diagnostics.eps_list, nu.reshetnyak_tol);
    report.checks.push_back({"reshetnyak", r.passed,
                             "gap " + format_real(r.rows.front().gre_gap) + " -> " +
                                 format_real(r.rows.back().gre_gap)});
  }

  {
    const Domination d = verify_B_dominates_phi(spectral);
    report.checks.push_back({"B_dominates_phi", d.holds, "C = " + format_real(d.C)});
  }
  return report;
}

}  // namespace renewal
