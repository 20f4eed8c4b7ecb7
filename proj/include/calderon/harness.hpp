#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "calderon/error.hpp"
#include "calderon/geometry.hpp"
#include "calderon/report.hpp"

namespace calderon::harness {

inline const std::vector<std::string> kExperiments = {"mesh",         "dtn",      "direct-stability", "boundary-recover",
                                                      "boundary-stability", "cgo-decay", "domain-stability"};

/// Flat `key = value` configuration. Conductivity expressions may use the
/// parameter `t`, bound to each entry of the `t` list.
struct ExperimentConfig {
  std::string experiment;
  std::string domain = "koch:2:1";
  double h = 0.03;
  std::string gamma = "1";
  std::string gamma1 = "1";
  std::string gamma2 = "1";
  std::vector<double> t;
  std::vector<double> tau;
  std::optional<Point> x0;
  std::optional<Point> x0_far;
  int k_min = 0;
  int k_max = 40;
  std::uint64_t seed = 7;
  double angle = 0.0;
  std::string out;
  int threads = 0;
  std::vector<std::pair<std::string, std::string>> entries;  // as given, for the report echo
};

/// Unknown keys, duplicates and malformed numbers are config errors.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig parse_config_text(const std::string& text);
/// Sets one key; used by the parser and by command line overrides.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);
/// Checks the domain spec, expressions and numeric ranges before any solve.
void validate_config(const ExperimentConfig& config);
/// FNV-1a over the canonical `key=value` echo.
std::string config_hash(const ExperimentConfig& config);

/// Exit code for a library error: 1 input, 2 invariant, 3 solver.
int exit_code(ErrorKind kind);

/// Runs one experiment and checks its invariants; a violated invariant raises
/// an invariant error. `artifact`, when given, receives the mesh file or the
/// dense DtN matrix.
report::ExperimentReport run_experiment(const ExperimentConfig& config, std::ostream* artifact = nullptr);

struct GoldenEntry {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool relative = true;
};

struct GoldenRecord {
  std::string config_hash;
  std::vector<GoldenEntry> entries;
};

/// Summary values of the report; exponent-like names (slope, delta, r2)
/// get 0.2 absolute, everything else 1e-6 relative.
GoldenRecord make_golden(const report::ExperimentReport& report, const ExperimentConfig& config);
void write_golden(std::ostream& os, const GoldenRecord& record);
GoldenRecord read_golden(std::istream& is);
/// Human-readable mismatches; empty when the report matches.
std::vector<std::string> compare_golden(const GoldenRecord& record, const report::ExperimentReport& report);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Invariant and property battery over small built-in meshes.
std::vector<CheckResult> validate_suite(const std::function<void(const CheckResult&)>& on_result = {});

}  // namespace calderon::harness
