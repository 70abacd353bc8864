// Command-line front end: run, certify and compare experiment configs.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "pdflow/error.hpp"
#include "pdflow/experiment.hpp"

namespace fs = std::filesystem;
using namespace pdflow;

namespace {

struct Flags {
  std::string out;
  bool quiet = false;
};

fs::path output_dir(const Flags& flags, const ExperimentConfig& cfg) {
  if (!flags.out.empty()) return fs::path(flags.out) / cfg.name;
  if (const char* env = std::getenv("PDFLOW_OUT_DIR"); env && *env) return fs::path(env) / cfg.name;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  return fs::path("out") / cfg.name;
}

std::string g17(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << text;
}

int run_lti_config(const ExperimentConfig& cfg, const LtiExperiment& exp, const fs::path& dir,
                   bool quiet) {
  const LtiRunResult res = run_lti(exp);
  write_csv(res.log, (dir / "trajectory.csv").string());
  write_text(dir / "certificate.json", certificate_json(res.certificate) + "\n");
  const auto& tr = res.tracking;
  std::string report = "{\n";
  report += "  \"scenario\": \"" + cfg.name + "\",\n";
  report += "  \"envelope_violations\": " + std::to_string(res.envelope_violations) + ",\n";
  report += "  \"max_violation\": " + g17(tr.max_violation) + ",\n";
  report += "  \"asymptotic_error\": " + g17(tr.asymptotic_error) + ",\n";
  report += "  \"decay_slope\": " + g17(tr.decay_slope) + ",\n";
  report += "  \"empty_fit\": " + std::string(tr.empty_fit ? "true" : "false") + ",\n";
  report += "  \"initial_error\": " + g17(tr.initial_error) + ",\n";
  report += "  \"final_error\": " + g17(tr.final_error) + ",\n";
  report += "  \"envelope_floor\": " + g17(tr.envelope_floor) + ",\n";
  report += "  \"sup_zstar_rate\": " + g17(res.log.sup_zstar_rate) + ",\n";
  report += "  \"sup_w_rate\": " + g17(res.log.sup_w_rate) + ",\n";
  report += "  \"lyapunov_flagged\": " + std::to_string(res.lyapunov.flagged_count) + ",\n";
  report += "  \"max_exit_distance\": " + g17(res.log.max_exit_distance) + "\n}\n";
  write_text(dir / "tracking.json", report);
  if (!quiet) {
    std::cout << certificate_text(res.certificate);
    std::cout << "tracking: envelope violations " << res.envelope_violations
              << ", final error " << g17(tr.final_error) << ", asymptotic error "
              << g17(tr.asymptotic_error) << ", Lyapunov increases flagged "
              << res.lyapunov.flagged_count << "\n"
              << "wrote " << dir.string() << "/{trajectory.csv,certificate.json,tracking.json}\n";
  }
  return 0;
}

int run_traffic_config(const ExperimentConfig& cfg, const TrafficExperiment& exp,
                       const fs::path& dir, bool quiet) {
  const MeteringRun run = run_metering(exp.network, exp.scenario);
  write_metering_csv(exp.network, run, (dir / "trajectory.csv").string());
  const CompareRow row = summarize(cfg.name, exp.scenario, run);
  std::string report = "{\n";
  report += "  \"scenario\": \"" + cfg.name + "\",\n";
  report += "  \"controller\": \"" + row.controller + "\",\n";
  report += "  \"mean_throughput\": " + g17(row.mean_throughput) + ",\n";
  report += "  \"max_violation\": " + g17(row.max_violation) + ",\n";
  report += "  \"max_violation_post_transient\": " + g17(row.max_violation_post_transient) + ",\n";
  report += "  \"violation_integral\": " + g17(row.violation_integral) + ",\n";
  report += "  \"softened_plans\": " + std::to_string(run.softened_plans) + ",\n";
  report += "  \"min_input\": " + g17(run.min_input) + "\n}\n";
  write_text(dir / "metrics.json", report);
  if (!quiet) {
    std::printf("%s (%s): mean throughput %.6g, max violation %.6g, violation integral %.6g\n",
                cfg.name.c_str(), row.controller.c_str(), row.mean_throughput, row.max_violation,
                row.violation_integral);
    std::cout << "wrote " << dir.string() << "/{trajectory.csv,metrics.json}\n";
  }
  return 0;
}

int cmd_run(const std::string& path, const Flags& flags) {
  const ExperimentConfig cfg = load_config(path);
  const fs::path dir = output_dir(flags, cfg);
  fs::create_directories(dir);
  if (cfg.is_traffic())
    return run_traffic_config(cfg, std::get<TrafficExperiment>(cfg.body), dir, flags.quiet);
  return run_lti_config(cfg, std::get<LtiExperiment>(cfg.body), dir, flags.quiet);
}

int cmd_certify(const std::string& path, const Flags& flags) {
  const ExperimentConfig cfg = load_config(path);
  if (cfg.is_traffic())
    throw Error(ErrorCode::ConfigInvalid, "certify applies to LTI experiments only");
  const AnyCertificate cert = certify_experiment(std::get<LtiExperiment>(cfg.body));
  if (!flags.quiet) std::cout << certificate_text(cert);
  std::cout << certificate_json(cert) << "\n";
  return 0;
}

int cmd_compare(const std::vector<std::string>& paths, const Flags& flags) {
  std::vector<ExperimentConfig> configs;
  for (const auto& p : paths) configs.push_back(load_config(p));
  const auto rows = compare_traffic(configs);
  std::string csv = "scenario,controller,mean_throughput,max_violation,"
                    "max_violation_post_transient,violation_integral,compute_seconds\n";
  std::printf("%-28s %-13s %16s %14s %16s %12s\n", "scenario", "controller", "mean throughput",
              "max violation", "violation integ.", "compute [s]");
  for (const auto& r : rows) {
    std::printf("%-28s %-13s %16.6g %14.6g %16.6g %12.4g\n", r.scenario.c_str(),
                r.controller.c_str(), r.mean_throughput, r.max_violation, r.violation_integral,
                r.compute_seconds);
    csv += r.scenario + "," + r.controller + "," + g17(r.mean_throughput) + "," +
           g17(r.max_violation) + "," + g17(r.max_violation_post_transient) + "," +
           g17(r.violation_integral) + "," + g17(r.compute_seconds) + "\n";
  }
  fs::path dir = !flags.out.empty() ? fs::path(flags.out) : fs::path();
  if (dir.empty())
    if (const char* env = std::getenv("PDFLOW_OUT_DIR"); env && *env) dir = env;
  if (!dir.empty()) {
    fs::create_directories(dir);
    write_text(dir / "compare.csv", csv);
    if (!flags.quiet) std::cout << "wrote " << (dir / "compare.csv").string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online primal-dual feedback controllers: run, certify, compare"};
  app.require_subcommand(1);
  Flags flags;
  app.add_option("--out", flags.out, "output directory (overrides PDFLOW_OUT_DIR)");
  app.add_flag("--quiet", flags.quiet, "suppress human-readable output");

  std::string run_path, cert_path;
  std::vector<std::string> compare_paths;
  auto* run = app.add_subcommand("run", "simulate one experiment and write CSV and reports");
  run->add_option("config", run_path, "experiment config (JSON)")->required();
  auto* cert = app.add_subcommand("certify", "print gain certificates for an LTI experiment");
  cert->add_option("config", cert_path, "experiment config (JSON)")->required();
  auto* cmp = app.add_subcommand("compare", "run traffic scenarios and tabulate metrics");
  cmp->add_option("configs", compare_paths, "traffic scenario configs")->required();
  for (auto* sub : {run, cert, cmp}) {
    sub->add_option("--out", flags.out, "output directory (overrides PDFLOW_OUT_DIR)");
    sub->add_flag("--quiet", flags.quiet, "suppress human-readable output");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) return cmd_run(run_path, flags);
    if (*cert) return cmd_certify(cert_path, flags);
    if (*cmp) return cmd_compare(compare_paths, flags);
  } catch (const Error& e) {
    std::cerr << "pdflow: " << e.what() << "\n";
    return e.code() == ErrorCode::ConfigInvalid ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "pdflow: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
