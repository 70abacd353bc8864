#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pdflow/certificates.hpp"
#include "pdflow/simulator.hpp"
#include "pdflow/traffic.hpp"

namespace pdflow {

/// An LTI plant in closed loop with one of the primal-dual controllers.
struct LtiExperiment {
  CertifiedPlant plant;
  TimeVaryingProblem problem;
  SimulationOptions sim;
  Vector x0;  ///< resolved; "rest" becomes -A^{-1}(B u0 + E w_t0)
  ControllerState z0;
};

/// A ramp-metering scenario on a traffic network.
struct TrafficExperiment {
  TrafficNetwork network;
  MeteringScenario scenario;
};

struct ExperimentConfig {
  std::string name;
  std::string source;       ///< path the config was read from
  std::string output_dir;   ///< may be empty
  std::uint64_t seed = 0;
  std::variant<LtiExperiment, TrafficExperiment> body;

  bool is_traffic() const { return std::holds_alternative<TrafficExperiment>(body); }
};

/// Reads and validates a JSON experiment file. Any I/O, syntax or schema
/// problem is reported as ConfigInvalid; module errors raised while
/// building the plant/problem propagate unchanged.
ExperimentConfig load_config(const std::string& path);
/// Same, from text. Relative file references resolve against base_dir.
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = ".");

/// Network block as a standalone file: {"links": [...], "edges": [...],
/// "controllable": [...]}.
TrafficNetwork load_network(const std::string& path);

/// Either certificate, depending on the constraint kind.
using AnyCertificate = std::variant<CertificateReport, EqualityCertificate>;

AnyCertificate certify_experiment(const LtiExperiment& exp);

/// Machine-readable certificate record (JSON text).
std::string certificate_json(const AnyCertificate& cert);
/// Human-readable certificate summary.
std::string certificate_text(const AnyCertificate& cert);

struct LtiRunResult {
  AnyCertificate certificate;
  TrajectoryLog log;
  TrackingReport tracking;
  LyapunovReport lyapunov;
  int envelope_violations = 0;  ///< samples with err > envelope
};

/// Certifies, integrates and evaluates an LTI experiment.
LtiRunResult run_lti(const LtiExperiment& exp);

struct CompareRow {
  std::string scenario;
  std::string controller;
  double mean_throughput = 0.0;
  double max_violation = 0.0;
  double max_violation_post_transient = 0.0;
  double violation_integral = 0.0;
  double compute_seconds = 0.0;
};

/// Runs every traffic scenario; they must share the network and horizon
/// (IncompatibleScenarios otherwise).
std::vector<CompareRow> compare_traffic(const std::vector<ExperimentConfig>& configs);

CompareRow summarize(const std::string& scenario, const MeteringScenario& sc,
                     const MeteringRun& run);

/// Writes a metering run as CSV: t, x_i, u_i, throughput, violation.
void write_metering_csv(const TrafficNetwork& net, const MeteringRun& run,
                        const std::string& path);

}  // namespace pdflow
