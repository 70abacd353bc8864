#include <gtest/gtest.h>

#include <string>

#include "common.hpp"
#include "pdflow/experiment.hpp"

using namespace pdflow;
using pdflow::test::code_of;

namespace {

const std::string kConfigs = PDFLOW_CONFIG_DIR;

const char* kScalar = R"({
  // comments are allowed
  "scenario": "s",
  "plant": {"A": [[-1]], "B": [[1]], "C": [[1]], "D": [[0]], "E": [[1]]},
  "problem": {
    "cost": {"Q_u": [[2]], "r_u": [1]},
    "constraint": {"kind": "inequality", "K": [[1]], "e": [0]},
    "nu": 1.0
  },
  "controller": {"type": "projected_pd", "eta": 0.11, "eps": 0.04},
  "simulation": {"t1": 5, "dt": 0.004, "initial": {"u": [2]}}
})";

const char* kTinyNetwork = R"({
  "links": [
    {"id": "on", "kind": "on_ramp", "phi": 0.5, "beta": 0.25, "d_max": 10, "s_max": 10, "x_jam": 60},
    {"id": "off", "kind": "off_ramp", "phi": 0.5, "beta": 0.25, "d_max": 10, "s_max": 10, "x_jam": 60}
  ],
  "edges": [{"from": "on", "to": "off", "ratio": 1}],
  "controllable": ["on"]
})";

std::string traffic_config(const std::string& network, const std::string& controller) {
  return R"({"scenario": "t", "kind": "traffic", "network": )" + network +
         R"(, "metering": {"u_ref": [4], "Q_u": [[4]], "nu": 0.02},
            "controller": )" + controller +
         R"(, "simulation": {"t1": 10, "dt": 0.01}})";
}

}  // namespace

TEST(Config, ParsesLtiWithDefaults) {
  const ExperimentConfig cfg = parse_config(kScalar);
  ASSERT_FALSE(cfg.is_traffic());
  const auto& exp = std::get<LtiExperiment>(cfg.body);
  EXPECT_EQ(exp.z0.u(0), 2.0);
  EXPECT_EQ(exp.z0.lambda(0), 0.0);
  EXPECT_NEAR(exp.x0(0), 2.0, 1e-12);
  EXPECT_EQ(exp.sim.log_every, 10);
}

TEST(Config, SchemaErrorsAreConfigInvalid) {
  EXPECT_EQ(code_of([] { parse_config("{"); }), ErrorCode::ConfigInvalid);
  EXPECT_EQ(code_of([] { parse_config("[]"); }), ErrorCode::ConfigInvalid);
  EXPECT_EQ(code_of([] { parse_config(R"({"scenario": "x", "kind": "lti"})"); }),
            ErrorCode::ConfigInvalid);
  std::string big_dt = kScalar;
  big_dt.replace(big_dt.find("0.004"), 5, "0.04");
  EXPECT_EQ(code_of([&] { parse_config(big_dt); }), ErrorCode::ConfigInvalid);
  EXPECT_EQ(code_of([] { load_config("/nonexistent/config.json"); }), ErrorCode::ConfigInvalid);
}

TEST(Config, ModuleErrorsPropagate) {
  std::string unstable = kScalar;
  unstable.replace(unstable.find("[[-1]]"), 6, "[[1]]");
  EXPECT_EQ(code_of([&] { parse_config(unstable); }), ErrorCode::NotHurwitz);
}

TEST(Config, ParsesTrafficInlineNetwork) {
  const auto cfg = parse_config(traffic_config(kTinyNetwork, R"({"type": "projected_pd", "eta": 0.5, "eps": 0.2})"));
  ASSERT_TRUE(cfg.is_traffic());
  const auto& t = std::get<TrafficExperiment>(cfg.body);
  EXPECT_EQ(t.network.size(), 2);
  EXPECT_EQ(t.scenario.controller, MeteringController::ProjectedPD);
  EXPECT_NEAR(t.scenario.transient, 2.5, 1e-12);
}

TEST(Config, ShippedConfigsLoad) {
  for (const char* name : {"static_scalar", "two_link", "equality_benchmark", "iss_sinusoid",
                           "iss_sinusoid_slow"})
    EXPECT_NO_THROW(load_config(kConfigs + "/" + name + ".json")) << name;
  for (const char* name : {"projected_pd", "alinea", "mpc", "projected_pd_noisy", "mpc_noisy"}) {
    const auto cfg = load_config(kConfigs + "/traffic/" + name + ".json");
    EXPECT_TRUE(cfg.is_traffic()) << name;
    EXPECT_EQ(std::get<TrafficExperiment>(cfg.body).network.size(), 7);
  }
}

TEST(Certify, SelectsTrackByConstraintKind) {
  const auto ineq = load_config(kConfigs + "/static_scalar.json");
  EXPECT_TRUE(std::holds_alternative<CertificateReport>(
      certify_experiment(std::get<LtiExperiment>(ineq.body))));
  const auto eq = load_config(kConfigs + "/equality_benchmark.json");
  const AnyCertificate cert = certify_experiment(std::get<LtiExperiment>(eq.body));
  ASSERT_TRUE(std::holds_alternative<EqualityCertificate>(cert));
  EXPECT_NE(certificate_json(cert).find("\"pass\""), std::string::npos);
  EXPECT_NE(certificate_text(cert).find("PASS"), std::string::npos);
}

TEST(Compare, RejectsMismatchedNetworks) {
  const char* other = R"({
    "links": [
      {"id": "on", "kind": "on_ramp", "phi": 0.5, "beta": 0.25, "d_max": 9, "s_max": 10, "x_jam": 60},
      {"id": "off", "kind": "off_ramp", "phi": 0.5, "beta": 0.25, "d_max": 10, "s_max": 10, "x_jam": 60}
    ],
    "edges": [{"from": "on", "to": "off", "ratio": 1}],
    "controllable": ["on"]
  })";
  const std::string pd = R"({"type": "projected_pd", "eta": 0.5, "eps": 0.2})";
  std::vector<ExperimentConfig> cfgs{parse_config(traffic_config(kTinyNetwork, pd)),
                                     parse_config(traffic_config(other, pd))};
  EXPECT_EQ(code_of([&] { compare_traffic(cfgs); }), ErrorCode::IncompatibleScenarios);
  cfgs.pop_back();
  cfgs.push_back(parse_config(kScalar));
  EXPECT_EQ(code_of([&] { compare_traffic(cfgs); }), ErrorCode::IncompatibleScenarios);
}

TEST(Compare, RowsPerScenario) {
  const std::string pd = R"({"type": "projected_pd", "eta": 0.5, "eps": 0.2})";
  const std::string mpc = R"({"type": "mpc", "horizon": 4, "replan": 2, "dt": 1})";
  const auto rows = compare_traffic({parse_config(traffic_config(kTinyNetwork, pd)),
                                     parse_config(traffic_config(kTinyNetwork, mpc))});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].controller, "projected_pd");
  EXPECT_EQ(rows[1].controller, "mpc");
}
