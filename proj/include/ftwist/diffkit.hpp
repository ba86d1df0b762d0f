#pragma once

#include <functional>
#include <span>

#include "ftwist/linalg.hpp"

namespace ftwist::diff {

using ScalarFn = std::function<double(const Vec&)>;

/// Central finite differences with Richardson extrapolation.
///
/// base_step == 0 selects the per-order default eps^(1/(k+2)) for a total
/// derivative order k; steps are additionally scaled per coordinate by
/// max(1, |x_i|). Identical inputs always produce bit-identical outputs.
struct DiffConfig {
  double base_step = 0.0;
  int richardson_levels = 1;  // 0, 1 or 2
  int max_order = 4;
};

struct MultiIndex {
  std::vector<int> orders;  // per-variable derivative order

  MultiIndex() = default;
  MultiIndex(std::initializer_list<int> o) : orders(o) {}
  explicit MultiIndex(std::vector<int> o) : orders(std::move(o)) {}

  int total() const {
    int t = 0;
    for (int k : orders) t += k;
    return t;
  }
};

/// Default step for a total derivative order k: eps^(1/(k+2)).
double recommended_step(int total_order);

/// Mixed partial of `fn` at `point` for the given multi-index.
/// Exact (up to rounding) for polynomials of degree <= total order + 1.
double partial(const ScalarFn& fn, const Vec& point, const MultiIndex& idx,
               const DiffConfig& cfg = {});

Vec gradient(const ScalarFn& fn, const Vec& point, const DiffConfig& cfg = {});
Mat hessian(const ScalarFn& fn, const Vec& point, const DiffConfig& cfg = {});
Tensor third(const ScalarFn& fn, const Vec& point, const DiffConfig& cfg = {});

namespace detail {

/// Raw tensor-product central-difference engine. `orders[v]` is the
/// derivative order in variable v, `steps[v]` the absolute step. No order
/// cap; callers outside this module go through partial() which enforces one.
double stencil_partial(const ScalarFn& fn, const Vec& point,
                       std::span<const int> orders,
                       std::span<const double> steps);

/// Same, with `levels` Richardson halving steps (O(h^2) -> O(h^(2+2L))).
double richardson_partial(const ScalarFn& fn, const Vec& point,
                          std::span<const int> orders,
                          std::span<const double> steps, int levels);

}  // namespace detail

}  // namespace ftwist::diff
