#pragma once

#include <functional>
#include <string>

#include "ftwist/metric.hpp"

namespace ftwist {

/// Positive scalar f(x, u) on the product of two chart boxes, with analytic
/// first partials in both factors.
struct TwistFunction {
  std::string id;
  std::function<double(const Vec& x, const Vec& u)> value;
  std::function<Vec(const Vec& x, const Vec& u)> grad_x;
  std::function<Vec(const Vec& x, const Vec& u)> grad_u;
};

/// Construction-time check: analytic partials agree with finite-difference
/// gradients at probe points (relative error < rel_tol) and f stays positive
/// on a grid over the boxes. Throws ConstructionError on violation.
void validate_twist(const TwistFunction& f, const Box& box1, const Box& box2,
                    int probes = 6, double rel_tol = 1e-7);

}  // namespace ftwist
