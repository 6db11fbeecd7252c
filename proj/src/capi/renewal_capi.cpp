#include "renewal/renewal.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <sstream>
#include <string>

#include "renewal/commands.hpp"
#include "renewal/error.hpp"

struct rn_scenario {
  renewal::Scenario value;
};

struct rn_measure {
  renewal::HybridMeasure value;
};

struct rn_verify_report {
  renewal::VerifyReport value;
};

namespace {

thread_local std::string last_error;

rn_status fail(rn_status status, const char* message) {
  last_error = message;
  return status;
}

template <class F>
rn_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return RN_OK;
  } catch (const renewal::ConfigError& e) {
    return fail(RN_ERR_CONFIG, e.what());
  } catch (const renewal::NumericalError& e) {
    return fail(RN_ERR_NUMERICAL, e.what());
  } catch (const renewal::VerificationError& e) {
    return fail(RN_ERR_VERIFICATION, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(RN_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(RN_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RN_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(RN_ERR_INTERNAL, "unknown error");
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

#define RN_REQUIRE(cond, what) \
  if (!(cond)) return fail(RN_ERR_INVALID_ARGUMENT, what)

extern "C" {

const char* rn_version(void) { return "0.1.0"; }

const char* rn_last_error(void) { return last_error.c_str(); }

void rn_string_free(char* s) { std::free(s); }

rn_status rn_scenario_load(const char* path, rn_scenario** out) {
  RN_REQUIRE(path && out, "rn_scenario_load: null argument");
  *out = nullptr;
  return guarded([&] { *out = new rn_scenario{renewal::load_scenario(path)}; });
}

rn_status rn_scenario_parse(const char* text, const char* base_dir, rn_scenario** out) {
  RN_REQUIRE(text && out, "rn_scenario_parse: null argument");
  *out = nullptr;
  return guarded(
      [&] { *out = new rn_scenario{renewal::parse_scenario(text, base_dir ? base_dir : ".")}; });
}

void rn_scenario_free(rn_scenario* scenario) { delete scenario; }

const char* rn_scenario_output_dir(const rn_scenario* scenario) {
  return scenario ? scenario->value.output_dir.c_str() : nullptr;
}

rn_status rn_scenario_lambda0(const rn_scenario* scenario, double* out) {
  RN_REQUIRE(scenario && out, "rn_scenario_lambda0: null argument");
  return guarded(
      [&] { *out = renewal::solve_spectral(scenario->value.birth_law()).lambda0(); });
}

rn_status rn_run(const rn_scenario* scenario, const char* out_dir, char** log) {
  RN_REQUIRE(scenario, "rn_run: null scenario");
  if (log) *log = nullptr;
  return guarded([&] {
    std::ostringstream text;
    const std::string dir = out_dir ? out_dir : scenario->value.output_dir;
    renewal::cmd_run(scenario->value, dir, log ? &text : nullptr);
    if (log) *log = duplicate(text.str());
  });
}

rn_status rn_spectral(const rn_scenario* scenario, char** text) {
  RN_REQUIRE(scenario, "rn_spectral: null scenario");
  if (text) *text = nullptr;
  return guarded([&] {
    std::ostringstream out;
    renewal::cmd_spectral(scenario->value, out);
    if (text) *text = duplicate(out.str());
  });
}

rn_status rn_verify(const rn_scenario* scenario, rn_verify_report** out) {
  RN_REQUIRE(scenario && out, "rn_verify: null argument");
  *out = nullptr;
  return guarded([&] { *out = new rn_verify_report{renewal::cmd_verify(scenario->value)}; });
}

size_t rn_verify_count(const rn_verify_report* report) {
  return report ? report->value.checks.size() : 0;
}

const char* rn_verify_name(const rn_verify_report* report, size_t i) {
  if (!report || i >= report->value.checks.size()) return nullptr;
  return report->value.checks[i].name.c_str();
}

int rn_verify_passed(const rn_verify_report* report, size_t i) {
  if (!report || i >= report->value.checks.size()) return 0;
  return report->value.checks[i].passed ? 1 : 0;
}

const char* rn_verify_detail(const rn_verify_report* report, size_t i) {
  if (!report || i >= report->value.checks.size()) return nullptr;
  return report->value.checks[i].detail.c_str();
}

int rn_verify_all_passed(const rn_verify_report* report) {
  return report && report->value.passed() ? 1 : 0;
}

void rn_verify_free(rn_verify_report* report) { delete report; }

rn_status rn_measure_read(const char* path, rn_measure** out) {
  RN_REQUIRE(path && out, "rn_measure_read: null argument");
  *out = nullptr;
  return guarded([&] { *out = new rn_measure{renewal::read_measure_csv(std::string(path))}; });
}

rn_status rn_measure_write(const rn_measure* measure, const char* path) {
  RN_REQUIRE(measure && path, "rn_measure_write: null argument");
  return guarded([&] { renewal::write_measure_csv(std::string(path), measure->value); });
}

void rn_measure_free(rn_measure* measure) { delete measure; }

rn_status rn_measure_total_variation(const rn_measure* measure, double* out) {
  RN_REQUIRE(measure && out, "rn_measure_total_variation: null argument");
  return guarded([&] { *out = renewal::total_variation(measure->value); });
}

rn_status rn_measure_atom_count(const rn_measure* measure, size_t* out) {
  RN_REQUIRE(measure && out, "rn_measure_atom_count: null argument");
  *out = measure->value.atoms().size();
  return RN_OK;
}

rn_status rn_flat_distance(const rn_measure* a, const rn_measure* b, double* out) {
  RN_REQUIRE(a && b && out, "rn_flat_distance: null argument");
  return guarded([&] { *out = renewal::flat_distance(a->value, b->value); });
}

rn_status rn_flat_distance_files(const char* path_a, const char* path_b, double* out) {
  RN_REQUIRE(path_a && path_b && out, "rn_flat_distance_files: null argument");
  return guarded([&] { *out = renewal::cmd_distance(path_a, path_b); });
}

}  // extern "C"
