// Command line front end: one subcommand per experiment plus `validate`.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "calderon/harness.hpp"
#include "calderon/parallel.hpp"
#include "calderon/trace.hpp"

namespace {

using namespace calderon;

struct Common {
  std::string config_path;
  std::string domain;
  std::optional<double> h;
  std::string gamma, gamma1, gamma2, t, tau, x0, x0_far, out;
  std::string golden, write_golden;
  std::string mutate;
  int threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "key = value configuration file");
  cmd->add_option("--domain", c.domain, "koch:<level>:<scale>, antikoch:<level>:<scale> or square");
  cmd->add_option("--hmax", c.h, "maximum mesh edge length");
  cmd->add_option("--gamma", c.gamma, "conductivity expression in x, y");
  cmd->add_option("--gamma1", c.gamma1, "first conductivity (may use t)");
  cmd->add_option("--gamma2", c.gamma2, "second conductivity (may use t)");
  cmd->add_option("--t", c.t, "comma-separated pair parameters");
  cmd->add_option("--tau", c.tau, "comma-separated CGO frequencies");
  cmd->add_option("--x0", c.x0, "boundary point x,y");
  cmd->add_option("--x0-far", c.x0_far, "second boundary point for the localization estimate");
  cmd->add_option("--out", c.out, "output path (report CSV, mesh file or DtN matrix)");
  cmd->add_option("--golden", c.golden, "compare summary values with a golden record");
  cmd->add_option("--write-golden", c.write_golden, "store summary values as a golden record");
  cmd->add_option("--mutate", c.mutate, "inject a deliberate defect (dtn-sign)")->check(CLI::IsMember({"dtn-sign"}));
  cmd->add_option("--threads", c.threads, "worker threads (default: CALDERON_THREADS or all)")
      ->check(CLI::NonNegativeNumber);
}

harness::ExperimentConfig build_config(const std::string& experiment, const Common& c) {
  harness::ExperimentConfig cfg;
  if (!c.config_path.empty()) {
    std::ifstream is(c.config_path);
    if (!is) fail(ErrorKind::config, "cannot open configuration file " + c.config_path);
    cfg = harness::parse_config(is);
  }
  if (!cfg.experiment.empty() && cfg.experiment != experiment)
    fail(ErrorKind::config, "configuration is for '" + cfg.experiment + "', not '" + experiment + "'");
  harness::set_config_value(cfg, "experiment", experiment);
  const std::map<std::string, std::string> overrides = {
      {"domain", c.domain}, {"gamma", c.gamma}, {"gamma1", c.gamma1}, {"gamma2", c.gamma2}, {"t", c.t},
      {"tau", c.tau},       {"x0", c.x0},       {"x0_far", c.x0_far}, {"out", c.out}};
  for (const auto& [k, v] : overrides)
    if (!v.empty()) harness::set_config_value(cfg, k, v);
  if (c.h) harness::set_config_value(cfg, "h", report::format_double(*c.h));
  if (c.threads > 0) harness::set_config_value(cfg, "threads", std::to_string(c.threads));
  harness::validate_config(cfg);
  return cfg;
}

int run_experiment(const std::string& experiment, const Common& c) {
  const auto cfg = build_config(experiment, c);
  if (cfg.threads > 0) parallel::set_num_threads(cfg.threads);
  if (c.mutate == "dtn-sign") trace::inject_fault(trace::Fault::dtn_sign);

  const bool artifact_command = experiment == "mesh" || experiment == "dtn";
  std::ofstream artifact;
  if (artifact_command && !cfg.out.empty()) {
    artifact.open(cfg.out);
    if (!artifact) fail(ErrorKind::config, "cannot write " + cfg.out);
  }
  const auto rep = harness::run_experiment(cfg, artifact.is_open() ? &artifact : nullptr);

  if (artifact_command || cfg.out.empty()) {
    rep.write_csv(std::cout);
  } else {
    std::ofstream os(cfg.out);
    if (!os) fail(ErrorKind::config, "cannot write " + cfg.out);
    rep.write_csv(os);
    std::cerr << "wrote " << cfg.out << '\n';
  }
  if (!c.write_golden.empty()) {
    std::ofstream os(c.write_golden);
    if (!os) fail(ErrorKind::config, "cannot write " + c.write_golden);
    harness::write_golden(os, harness::make_golden(rep, cfg));
  }
  if (!c.golden.empty()) {
    std::ifstream is(c.golden);
    if (!is) fail(ErrorKind::config, "cannot open golden record " + c.golden);
    const auto mismatches = harness::compare_golden(harness::read_golden(is), rep);
    for (const auto& m : mismatches) std::cerr << "golden mismatch: " << m << '\n';
    if (!mismatches.empty()) return 2;
    std::cerr << "golden record matched\n";
  }
  return 0;
}

int run_validate(const std::string& mutate, int threads) {
  if (threads > 0) parallel::set_num_threads(threads);
  if (mutate == "dtn-sign") trace::inject_fault(trace::Fault::dtn_sign);
  int failed = 0;
  harness::validate_suite([&](const harness::CheckResult& r) {
    failed += !r.passed;
    std::printf("%-4s %-36s %7.2fs  %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.seconds, r.detail.c_str());
    std::fflush(stdout);
  });
  std::printf("%s: %d check(s) failed\n", failed ? "FAILED" : "OK", failed);
  return failed ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  calderon::parallel::configure_from_environment();
  CLI::App app{"Calderon problem experiments on prefractal domains"};
  app.require_subcommand(1);

  Common common;
  std::map<std::string, CLI::App*> commands;
  for (const auto& name : harness::kExperiments) {
    auto* cmd = app.add_subcommand(name, "run the " + name + " experiment");
    add_common(cmd, common);
    commands[name] = cmd;
  }
  std::string validate_mutate;
  int validate_threads = 0;
  auto* validate = app.add_subcommand("validate", "run the invariant and property battery");
  validate->add_option("--mutate", validate_mutate, "inject a deliberate defect (dtn-sign)")
      ->check(CLI::IsMember({"dtn-sign"}));
  validate->add_option("--threads", validate_threads, "worker threads")->check(CLI::NonNegativeNumber);

  CLI11_PARSE(app, argc, argv);
  try {
    if (validate->parsed()) return run_validate(validate_mutate, validate_threads);
    for (const auto& [name, cmd] : commands)
      if (cmd->parsed()) return run_experiment(name, common);
  } catch (const calderon::Error& e) {
    std::cerr << "calderon: " << e.what() << '\n';
    return harness::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "calderon: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
