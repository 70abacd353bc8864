#pragma once

#include <gtest/gtest.h>

#include "pdflow/error.hpp"
#include "pdflow/plant.hpp"
#include "pdflow/problem.hpp"

namespace pdflow::test {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no pdflow::Error thrown";
  return ErrorCode::InvalidArgument;
}

inline Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

/// eps dx/dt = -x + u + w, y = x; phi = (u - 1)^2, y <= 0.
inline CertifiedPlant scalar_plant() {
  return certify_plant(LtiPlant(scalar(-1), scalar(1), scalar(1), scalar(0), scalar(1)));
}

inline TimeVaryingProblem scalar_problem(const CertifiedPlant& plant, double nu,
                                         Signal disturbance = Signal::zero(1),
                                         InputSet set = InputSet::full(1)) {
  QuadraticCostSpec cs;
  cs.Q_u = scalar(2);
  cs.r_u = Signal::constant(Vector::Ones(1));
  cs.Q_y = scalar(0);
  cs.r_y = Signal::zero(1);
  cs.c = Signal::zero(1);
  return TimeVaryingProblem(quadratic_cost(cs),
                            OutputConstraint::fixed(ConstraintKind::Inequality, scalar(1),
                                                    Signal::zero(1)),
                            std::move(set), nu, plant.map, std::move(disturbance));
}

}  // namespace pdflow::test
