#include "pdflow/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pdflow/error.hpp"

namespace pdflow {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;
}  // namespace

Signal Signal::constant(Vector value) { return Signal(Constant{std::move(value)}); }

Signal Signal::sinusoid(Vector amplitude, double frequency, double phase, Vector offset) {
  if (amplitude.size() != offset.size())
    throw Error(ErrorCode::DimensionMismatch, "sinusoid amplitude and offset sizes differ");
  return Signal(Sinusoid{std::move(amplitude), frequency, phase, std::move(offset)});
}

Signal Signal::table(std::vector<double> times, std::vector<Vector> values) {
  if (times.empty() || times.size() != values.size())
    throw Error(ErrorCode::InvalidArgument, "table needs matching, non-empty times and values");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1]))
      throw Error(ErrorCode::InvalidArgument, "table times must be strictly increasing");
    if (values[i].size() != values[0].size())
      throw Error(ErrorCode::DimensionMismatch, "table rows have different sizes");
  }
  return Signal(Table{std::move(times), std::move(values)});
}

Signal Signal::callback(std::function<Vector(double)> value, Eigen::Index size,
                        std::optional<double> rate_bound) {
  return Signal(Callback{std::move(value), size, rate_bound});
}

Eigen::Index Signal::size() const {
  return std::visit(Overloaded{
                        [](const Constant& c) { return c.value.size(); },
                        [](const Sinusoid& s) { return s.offset.size(); },
                        [](const Table& tb) { return tb.values.front().size(); },
                        [](const Callback& cb) { return cb.size; },
                    },
                    repr_);
}

bool Signal::is_constant() const {
  if (std::holds_alternative<Constant>(repr_)) return true;
  if (const auto* s = std::get_if<Sinusoid>(&repr_))
    return s->amplitude.isZero(0.0) || s->frequency == 0.0;
  if (const auto* tb = std::get_if<Table>(&repr_)) {
    for (const auto& v : tb->values)
      if (v != tb->values.front()) return false;
    return true;
  }
  return false;
}

Vector Signal::operator()(double t) const {
  return std::visit(
      Overloaded{
          [](const Constant& c) -> Vector { return c.value; },
          [t](const Sinusoid& s) -> Vector {
            return s.offset + s.amplitude * std::sin(kTwoPi * s.frequency * t + s.phase);
          },
          [t](const Table& tb) -> Vector {
            if (t <= tb.times.front()) return tb.values.front();
            if (t >= tb.times.back()) return tb.values.back();
            auto it = std::upper_bound(tb.times.begin(), tb.times.end(), t);
            std::size_t k = static_cast<std::size_t>(it - tb.times.begin());
            double a = (t - tb.times[k - 1]) / (tb.times[k] - tb.times[k - 1]);
            return (1.0 - a) * tb.values[k - 1] + a * tb.values[k];
          },
          [t](const Callback& cb) -> Vector { return cb.value(t); },
      },
      repr_);
}

Vector Signal::derivative(double t, double fd_step) const {
  return std::visit(
      Overloaded{
          [](const Constant& c) -> Vector { return Vector::Zero(c.value.size()); },
          [t](const Sinusoid& s) -> Vector {
            return s.amplitude * (kTwoPi * s.frequency) *
                   std::cos(kTwoPi * s.frequency * t + s.phase);
          },
          [t](const Table& tb) -> Vector {
            // Right derivative; zero outside the knot range.
            if (t < tb.times.front() || t >= tb.times.back())
              return Vector::Zero(tb.values.front().size());
            auto it = std::upper_bound(tb.times.begin(), tb.times.end(), t);
            std::size_t k = static_cast<std::size_t>(it - tb.times.begin());
            return (tb.values[k] - tb.values[k - 1]) / (tb.times[k] - tb.times[k - 1]);
          },
          [t, fd_step](const Callback& cb) -> Vector {
            return (cb.value(t + fd_step) - cb.value(t - fd_step)) / (2.0 * fd_step);
          },
      },
      repr_);
}

double Signal::sup_rate(double t0, double t1, double grid_dt) const {
  return std::visit(
      Overloaded{
          [](const Constant&) { return 0.0; },
          [t0, t1](const Sinusoid& s) {
            double w = kTwoPi * std::abs(s.frequency);
            double peak = s.amplitude.norm() * w;
            // Bound is attained within one period (all channels share phase).
            if (w == 0.0 || (t1 - t0) * w >= kTwoPi) return peak;
            double best = 0.0;
            const int steps = 2000;
            for (int i = 0; i <= steps; ++i) {
              double t = t0 + (t1 - t0) * i / steps;
              best = std::max(best, peak * std::abs(std::cos(w * t + s.phase)));
            }
            return best;
          },
          [t0, t1](const Table& tb) {
            double best = 0.0;
            for (std::size_t k = 1; k < tb.times.size(); ++k) {
              if (tb.times[k] <= t0 || tb.times[k - 1] >= t1) continue;
              double slope = (tb.values[k] - tb.values[k - 1]).norm() /
                             (tb.times[k] - tb.times[k - 1]);
              best = std::max(best, slope);
            }
            return best;
          },
          [t0, t1, grid_dt](const Callback& cb) {
            if (cb.rate_bound) return *cb.rate_bound;
            return estimate_sup_rate(cb.value, t0, t1, grid_dt);
          },
      },
      repr_);
}

double estimate_sup_rate(const std::function<Vector(double)>& f, double t0, double t1,
                         double grid_dt) {
  if (!(grid_dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid_dt must be positive");
  const double h = 0.5 * grid_dt;
  double best = 0.0;
  const auto steps = static_cast<long>(std::ceil((t1 - t0) / grid_dt));
  for (long i = 0; i <= steps; ++i) {
    double t = std::min(t0 + i * grid_dt, t1);
    best = std::max(best, ((f(t + h) - f(t - h)) / (2.0 * h)).norm());
  }
  return best;
}

}  // namespace pdflow
