#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pdflow/signal.hpp"

using namespace pdflow;

TEST(Signal, ConstantHasZeroRate) {
  const Signal s = Signal::constant(Vector::Constant(2, 3.0));
  EXPECT_EQ(s.size(), 2);
  EXPECT_TRUE(s.is_constant());
  EXPECT_EQ(s(7.0)(1), 3.0);
  EXPECT_EQ(s.sup_rate(0.0, 10.0), 0.0);
}

TEST(Signal, SinusoidValueDerivativeAndRate) {
  const Signal s = Signal::sinusoid(Vector::Constant(1, 2.0), 0.25, 0.0, Vector::Constant(1, 1.0));
  const double w = 2.0 * std::numbers::pi * 0.25;
  EXPECT_NEAR(s(1.0)(0), 1.0 + 2.0 * std::sin(w), 1e-12);
  EXPECT_NEAR(s.derivative(0.3)(0), 2.0 * w * std::cos(w * 0.3), 1e-6);
  EXPECT_NEAR(s.sup_rate(0.0, 10.0), 2.0 * w, 1e-12);
  EXPECT_FALSE(s.is_constant());
}

TEST(Signal, TableInterpolatesAndHolds) {
  const Signal s = Signal::table({0.0, 1.0, 3.0}, {Vector::Constant(1, 0.0), Vector::Constant(1, 2.0),
                                                   Vector::Constant(1, 1.0)});
  EXPECT_NEAR(s(0.5)(0), 1.0, 1e-12);
  EXPECT_NEAR(s(2.0)(0), 1.5, 1e-12);
  EXPECT_NEAR(s(-1.0)(0), 0.0, 1e-12);
  EXPECT_NEAR(s(9.0)(0), 1.0, 1e-12);
  EXPECT_NEAR(s.sup_rate(0.0, 3.0), 2.0, 1e-12);
}

TEST(Signal, CallbackRateFromGridOrDeclaredBound) {
  const auto f = [](double t) { return Vector::Constant(1, std::sin(3.0 * t)); };
  const Signal grid = Signal::callback(f, 1);
  EXPECT_NEAR(grid.sup_rate(0.0, 5.0, 1e-3), 3.0, 1e-4);
  const Signal declared = Signal::callback(f, 1, 7.0);
  EXPECT_EQ(declared.sup_rate(0.0, 5.0), 7.0);
  EXPECT_NEAR(estimate_sup_rate(f, 0.0, 5.0, 1e-3), 3.0, 1e-4);
}
