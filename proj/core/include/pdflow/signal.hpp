#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "pdflow/linalg.hpp"

namespace pdflow {

/// A deterministic vector-valued signal t -> s(t).
///
/// The closed forms (constant, sinusoid, piecewise-linear table) know their
/// own derivative and its supremum; callback signals fall back to central
/// finite differences on a grid.
class Signal {
 public:
  struct Constant {
    Vector value;
  };
  /// offset + amplitude * sin(2*pi*frequency*t + phase), elementwise.
  struct Sinusoid {
    Vector amplitude;
    double frequency = 0.0;
    double phase = 0.0;
    Vector offset;
  };
  /// Linear interpolation between knots, held constant outside the range.
  struct Table {
    std::vector<double> times;
    std::vector<Vector> values;
  };
  struct Callback {
    std::function<Vector(double)> value;
    Eigen::Index size = 0;
    std::optional<double> rate_bound;
  };

  Signal() : Signal(Constant{Vector()}) {}

  static Signal constant(Vector value);
  static Signal zero(Eigen::Index size) { return constant(Vector::Zero(size)); }
  static Signal sinusoid(Vector amplitude, double frequency, double phase, Vector offset);
  static Signal table(std::vector<double> times, std::vector<Vector> values);
  static Signal callback(std::function<Vector(double)> value, Eigen::Index size,
                         std::optional<double> rate_bound = std::nullopt);

  Eigen::Index size() const;
  Vector operator()(double t) const;
  Vector derivative(double t, double fd_step = 1e-6) const;

  bool is_constant() const;

  /// Supremum of ||ds/dt|| over [t0, t1]. Exact for the closed forms; the
  /// callback kind uses its declared bound or the max central difference on
  /// a grid of spacing grid_dt.
  double sup_rate(double t0, double t1, double grid_dt = 1e-3) const;

 private:
  using Repr = std::variant<Constant, Sinusoid, Table, Callback>;
  explicit Signal(Repr repr) : repr_(std::move(repr)) {}
  Repr repr_;
};

/// Max over a grid of ||(f(t+h) - f(t-h)) / 2h||, for any vector function.
double estimate_sup_rate(const std::function<Vector(double)>& f, double t0, double t1,
                         double grid_dt);

}  // namespace pdflow
