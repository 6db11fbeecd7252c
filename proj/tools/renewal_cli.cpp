// Command-line front end. Talks to the library only through renewal.h.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "renewal/renewal.h"

namespace {

// 1 config, 2 numerical, 3 verification.
int exit_code(rn_status s) {
  switch (s) {
    case RN_OK:
      return 0;
    case RN_ERR_NUMERICAL:
    case RN_ERR_INTERNAL:
      return 2;
    case RN_ERR_VERIFICATION:
      return 3;
    default:
      return 1;
  }
}

int report(rn_status s) {
  if (s != RN_OK) std::cerr << "error: " << rn_last_error() << "\n";
  return exit_code(s);
}

struct ScenarioHandle {
  rn_scenario* ptr = nullptr;
  ~ScenarioHandle() { rn_scenario_free(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Renormalized renewal equation: simulation and diagnostics"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("--quiet,-q", quiet, "Only errors and requested output");
  app.set_version_flag("--version", rn_version());

  std::string scenario_path;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "Simulate a scenario and write CSV artifacts");
  run->add_option("--scenario,-s", scenario_path, "Scenario file")->required();
  run->add_option("--out,-o", out_dir, "Output directory (default: the scenario's [output] dir)");

  auto* spectral = app.add_subcommand("spectral", "Print lambda0, residuals and the x,N,phi table");
  spectral->add_option("--scenario,-s", scenario_path, "Scenario file")->required();
  spectral->add_option("--out,-o", out_dir, "Also write spectral.csv into this directory");

  std::string file_a, file_b;
  auto* distance = app.add_subcommand("distance", "Flat distance between two snapshot files");
  distance->add_option("first", file_a, "Snapshot CSV")->required();
  distance->add_option("second", file_b, "Snapshot CSV")->required();

  auto* verify = app.add_subcommand("verify", "Run the invariant checks on a scenario");
  verify->add_option("--scenario,-s", scenario_path, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (*distance) {
    double d = 0.0;
    if (rn_status s = rn_flat_distance_files(file_a.c_str(), file_b.c_str(), &d); s != RN_OK)
      return report(s);
    std::printf("%.17g\n", d);
    return 0;
  }

  ScenarioHandle sc;
  if (rn_status s = rn_scenario_load(scenario_path.c_str(), &sc.ptr); s != RN_OK) return report(s);

  if (*run) {
    char* log = nullptr;
    const rn_status s = rn_run(sc.ptr, out_dir.empty() ? nullptr : out_dir.c_str(), quiet ? nullptr : &log);
    if (log) std::cout << log;
    rn_string_free(log);
    return report(s);
  }

  if (*spectral) {
    char* text = nullptr;
    const rn_status s = rn_spectral(sc.ptr, &text);
    if (s == RN_OK) {
      if (!quiet) std::cout << text;
      if (!out_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        // The table starts at the CSV header.
        const std::string all(text);
        std::ofstream csv(std::filesystem::path(out_dir) / "spectral.csv", std::ios::binary);
        csv << all.substr(all.find("x,N,phi"));
        if (!csv) {
          rn_string_free(text);
          std::cerr << "error: cannot write spectral.csv in '" << out_dir << "'\n";
          return 1;
        }
      }
    }
    rn_string_free(text);
    return report(s);
  }

  rn_verify_report* rep = nullptr;
  if (rn_status s = rn_verify(sc.ptr, &rep); s != RN_OK) return report(s);
  const bool ok = rn_verify_all_passed(rep) != 0;
  for (size_t i = 0; i < rn_verify_count(rep); ++i) {
    const bool passed = rn_verify_passed(rep, i) != 0;
    if (!quiet || !passed)
      std::cout << (passed ? "PASS " : "FAIL ") << rn_verify_name(rep, i) << "  "
                << rn_verify_detail(rep, i) << "\n";
  }
  rn_verify_free(rep);
  if (!ok) std::cerr << "error: verification failed\n";
  return ok ? 0 : 3;
}
