#pragma once

#include <functional>
#include <string>

#include "ftwist/linalg.hpp"

namespace ftwist {

/// Axis-aligned chart box used for sampling base points.
struct Box {
  Vec lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }

  bool contains(const Vec& x) const {
    for (int i = 0; i < x.size(); ++i) {
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    }
    return true;
  }

  static Box centered(int n, double half) {
    Box b;
    b.lo = Vec::Constant(n, -half);
    b.hi = Vec::Constant(n, half);
    return b;
  }
};

/// Fiber derivatives of F^2 at fixed (x, y): d^k F^2 / dy^k, k = 0..order.
struct FiberJet {
  int order = 0;
  double f2 = 0.0;
  Vec d1;
  Mat d2;
  Tensor d3, d4, d5;
};

/// A Finsler metric as a black-box scalar F(x, y) on the slit tangent
/// domain, plus an optional smoothness predicate. Analytic accelerator
/// callbacks may be attached; every consumer falls back to finite
/// differences of `value` when they are absent.
struct MetricEvaluator {
  int dim = 0;
  std::string id;
  std::function<double(const Vec& x, const Vec& y)> value;
  std::function<bool(const Vec& x, const Vec& y)> domain;
  Box chart_box;
  double y_min = 0.1;

  // Optional analytic accelerators.
  std::function<FiberJet(const Vec& x, const Vec& y, int order)> fiber_jet;
  std::function<Vec(const Vec& x, const Vec& y)> f2_dx;    // dF^2/dx^i
  std::function<Mat(const Vec& x, const Vec& y)> f2_dxdy;  // (i,j) = d^2F^2/dx^i dy^j

  double f2(const Vec& x, const Vec& y) const {
    const double f = value(x, y);
    return f * f;
  }

  bool in_domain(const Vec& x, const Vec& y) const {
    if (y.norm() < y_min) return false;
    if (domain && !domain(x, y)) return false;
    return true;
  }
};

struct TangentSample {
  Vec x, y;
};

/// Flag plane span{y, u} with flagpole y.
struct FlagPlane {
  Vec y, u;
};

}  // namespace ftwist
