#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "pdflow/controllers.hpp"
#include "pdflow/linalg.hpp"
#include "pdflow/plant.hpp"
#include "pdflow/problem.hpp"
#include "pdflow/signal.hpp"

namespace pdflow {

enum class LinkKind { OnRamp, OffRamp, Internal };

LinkKind parse_link_kind(const std::string& name);
std::string to_string(LinkKind kind);

struct TrafficLink {
  std::string id;
  LinkKind kind = LinkKind::Internal;
  double phi = 0.0;    ///< free-flow speed, 1/time
  double beta = 0.0;   ///< congestion wave speed, 1/time
  double d_max = 0.0;  ///< demand saturation, veh/time
  double s_max = 0.0;  ///< supply saturation, veh/time
  double x_jam = 0.0;  ///< jam density, veh
  /// Fixed arrival flow for an on-ramp that is not metered.
  double inflow = 0.0;

  double x_crit_demand() const { return d_max / phi; }
  double x_crit_supply() const { return x_jam - s_max / beta; }
  double ceiling() const { return std::min(x_crit_demand(), x_crit_supply()); }
  double demand(double x) const { return std::min(phi * x, d_max); }
  double supply(double x) const { return std::min(beta * (x_jam - x), s_max); }
};

struct RoutingEdge {
  std::string from;
  std::string to;
  double ratio = 0.0;
};

/// Directed-graph cell-transmission network. Construction validates the
/// whole description and reports every problem at once (InvalidNetwork).
class TrafficNetwork {
 public:
  TrafficNetwork(std::vector<TrafficLink> links, std::vector<RoutingEdge> edges,
                 std::vector<std::string> controllable);

  Eigen::Index size() const { return static_cast<Eigen::Index>(links_.size()); }
  Eigen::Index ramps() const { return static_cast<Eigen::Index>(controllable_.size()); }
  const std::vector<TrafficLink>& links() const { return links_; }
  const std::vector<RoutingEdge>& edges() const { return edges_; }
  const TrafficLink& link(Eigen::Index i) const { return links_[static_cast<std::size_t>(i)]; }
  /// Throws UnknownLink.
  Eigen::Index index_of(const std::string& id) const;
  /// Link indices of the metered on-ramps, in input order.
  const std::vector<Eigen::Index>& controllable() const { return controllable_; }
  const std::vector<Eigen::Index>& successors(Eigen::Index i) const;
  const std::vector<Eigen::Index>& predecessors(Eigen::Index i) const;
  std::vector<Eigen::Index> off_ramps() const;

  /// Routing matrix, R(i, j) = r_ij.
  const Matrix& routing() const { return routing_; }
  /// min{x_crit_demand, x_crit_supply} per link.
  Vector ceilings() const;
  /// phi_i on off-ramps, zero elsewhere: the throughput gradient in free flow.
  Vector throughput_weights() const;

  /// True when d_max_i <= s_max_j / r_ij on every edge, which makes the CTM
  /// coincide with the linear model everywhere below the ceilings.
  bool free_flow_consistent() const;

  /// Structural equality of parameters, edges and ramp list.
  bool same_as(const TrafficNetwork& other) const;

 private:
  std::vector<TrafficLink> links_;
  std::vector<RoutingEdge> edges_;
  std::vector<Eigen::Index> controllable_;
  std::vector<std::vector<Eigen::Index>> succ_, pred_;
  Matrix routing_;
};

/// Outflow of every link at densities x (FIFO allocation).
Vector ctm_outflows(const TrafficNetwork& net, const Vector& x);

/// dx/dt of the CTM. u holds the metered on-ramp flows in controllable()
/// order. Throws NegativeDensity when some x_i < -1e-9.
Vector ctm_field(const TrafficNetwork& net, const Vector& x, const Vector& u);

/// Sum of off-ramp exit flows.
double throughput(const TrafficNetwork& net, const Vector& x);

/// dx/dt = (R^T - I) F x + B u,  y = x + w. Throws NotHurwitz.
LtiPlant freeflow_linearization(const TrafficNetwork& net);

struct MeteringSpec {
  Vector u_ref;
  Matrix Q_u;
  double nu = 0.05;
  double delta = 1e-3;
  /// Measurement noise w_t added to every link density; zero when empty.
  Signal noise;
};

/// phi(u) = (u - u_ref)^T Q_u (u - u_ref),
/// psi(y) = -sum_{off} phi_i y_i + delta ||y||^2,  y <= ceilings,  u >= 0.
TimeVaryingProblem build_metering_problem(const TrafficNetwork& net, const CertifiedPlant& plant,
                                          const MeteringSpec& spec);

/// Bounded piecewise-linear noise with knots every knot_dt on [0, t1],
/// values uniform in [-amplitude, amplitude] from a seeded generator.
Signal piecewise_linear_noise(Eigen::Index size, double amplitude, double knot_dt, double t1,
                              std::uint64_t seed);

enum class MeteringController { ProjectedPD, Alinea, Mpc };

MeteringController parse_metering_controller(const std::string& name);
std::string to_string(MeteringController kind);

struct MeteringScenario {
  std::string name;
  MeteringController controller = MeteringController::ProjectedPD;
  MeteringSpec spec;
  Vector x0;
  Vector u0;
  double t1 = 120.0;
  double dt = 0.01;
  int log_every = 10;
  /// Start of the post-transient window for the violation metric.
  double transient = 30.0;

  // projected primal-dual
  double eta = 0.1;
  /// Ratio of controller to plant time scale; the controller runs at
  /// dz/dt = eps (P(z - eta L) - z) in plant time.
  double eps = 0.1;

  // ALINEA: gain per link (zero for links nobody meters against) and the
  // downstream link ids of each metered ramp. Setpoints default to ceilings.
  Vector alinea_gains;
  std::vector<std::vector<std::string>> alinea_downstream;
  Vector alinea_setpoints;

  MpcOptions mpc;
};

struct MeteringRun {
  std::vector<double> t;
  std::vector<Vector> x;
  std::vector<Vector> u;
  std::vector<double> throughput;
  std::vector<double> violation;  ///< ||max(0, x - ceiling)||
  double mean_throughput = 0.0;
  double max_violation = 0.0;
  double max_violation_post_transient = 0.0;
  double violation_integral = 0.0;
  double compute_seconds = 0.0;  ///< time spent inside the controller
  double min_input = 0.0;
  int softened_plans = 0;
};

/// Closed loop of the CTM with the chosen metering controller, RK4 at dt.
MeteringRun run_metering(const TrafficNetwork& net, const MeteringScenario& scenario);

}  // namespace pdflow
