#include "ftwist/diffkit.hpp"

#include <cmath>
#include <limits>

#include "ftwist/errors.hpp"

namespace ftwist::diff {

namespace {

struct Stencil1D {
  std::vector<int> offsets;
  std::vector<double> weights;  // divide by h^k after the product
};

// Central stencils of accuracy O(h^2) for derivative orders 0..5.
const Stencil1D& central_stencil(int order) {
  static const std::vector<Stencil1D> table = {
      {{0}, {1.0}},
      {{-1, 1}, {-0.5, 0.5}},
      {{-1, 0, 1}, {1.0, -2.0, 1.0}},
      {{-2, -1, 1, 2}, {-0.5, 1.0, -1.0, 0.5}},
      {{-2, -1, 0, 1, 2}, {1.0, -4.0, 6.0, -4.0, 1.0}},
      {{-3, -2, -1, 1, 2, 3}, {-0.5, 2.0, -2.5, 2.5, -2.0, 0.5}},
  };
  if (order < 0 || order >= static_cast<int>(table.size())) {
    throw DiffError("stencil order out of range: " + std::to_string(order));
  }
  return table[static_cast<std::size_t>(order)];
}

}  // namespace

double recommended_step(int total_order) {
  const double eps = std::numeric_limits<double>::epsilon();
  return std::pow(eps, 1.0 / static_cast<double>(total_order + 2));
}

namespace detail {

double stencil_partial(const ScalarFn& fn, const Vec& point,
                       std::span<const int> orders,
                       std::span<const double> steps) {
  const int n = static_cast<int>(point.size());
  std::vector<int> active;
  for (int v = 0; v < n; ++v) {
    if (orders[static_cast<std::size_t>(v)] > 0) active.push_back(v);
  }
  if (active.empty()) return fn(point);

  double denom = 1.0;
  for (int v : active) {
    denom *= std::pow(steps[static_cast<std::size_t>(v)],
                      orders[static_cast<std::size_t>(v)]);
  }

  // Iterate the Cartesian product of the per-variable stencils.
  const std::size_t m = active.size();
  std::vector<std::size_t> cursor(m, 0);
  Vec p = point;
  double acc = 0.0;
  while (true) {
    double w = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      const int v = active[j];
      const auto& st = central_stencil(orders[static_cast<std::size_t>(v)]);
      w *= st.weights[cursor[j]];
      p[v] = point[v] + st.offsets[cursor[j]] * steps[static_cast<std::size_t>(v)];
    }
    const double val = fn(p);
    if (!std::isfinite(val)) {
      throw EvalDomainError("non-finite function value inside difference stencil");
    }
    acc += w * val;

    std::size_t j = 0;
    for (; j < m; ++j) {
      const int v = active[j];
      const auto& st = central_stencil(orders[static_cast<std::size_t>(v)]);
      if (++cursor[j] < st.offsets.size()) break;
      cursor[j] = 0;
    }
    if (j == m) break;
  }
  for (int v : active) p[v] = point[v];
  return acc / denom;
}

double richardson_partial(const ScalarFn& fn, const Vec& point,
                          std::span<const int> orders,
                          std::span<const double> steps, int levels) {
  if (levels <= 0) return stencil_partial(fn, point, orders, steps);

  // Neville tableau in h^2: entries at steps h, h/2, ..., h/2^L.
  std::vector<double> row(static_cast<std::size_t>(levels) + 1);
  std::vector<double> scaled(steps.begin(), steps.end());
  for (int j = 0; j <= levels; ++j) {
    row[static_cast<std::size_t>(j)] = stencil_partial(fn, point, orders, scaled);
    for (double& s : scaled) s *= 0.5;
  }
  for (int m = 1; m <= levels; ++m) {
    const double f = std::pow(4.0, m);
    for (int j = levels; j >= m; --j) {
      row[static_cast<std::size_t>(j)] =
          (f * row[static_cast<std::size_t>(j)] - row[static_cast<std::size_t>(j - 1)]) /
          (f - 1.0);
    }
  }
  return row[static_cast<std::size_t>(levels)];
}

}  // namespace detail

namespace {

void validate(const DiffConfig& cfg, const MultiIndex& idx, const Vec& point) {
  if (cfg.base_step < 0.0) throw DiffError("base_step must be positive");
  if (cfg.richardson_levels < 0 || cfg.richardson_levels > 2) {
    throw DiffError("richardson_levels must be 0, 1 or 2");
  }
  if (cfg.max_order < 1 || cfg.max_order > 4) {
    throw DiffError("max_order must lie in 1..4");
  }
  if (static_cast<int>(idx.orders.size()) != static_cast<int>(point.size())) {
    throw DiffError("multi-index length does not match point dimension");
  }
  for (int k : idx.orders) {
    if (k < 0) throw DiffError("multi-index entries must be non-negative");
  }
  if (idx.total() > cfg.max_order) {
    throw DiffError("derivative order overflow: total " + std::to_string(idx.total()) +
                    " exceeds max_order " + std::to_string(cfg.max_order));
  }
}

}  // namespace

double partial(const ScalarFn& fn, const Vec& point, const MultiIndex& idx,
               const DiffConfig& cfg) {
  validate(cfg, idx, point);
  const int total = idx.total();
  if (total == 0) return fn(point);

  const double h = cfg.base_step > 0.0 ? cfg.base_step : recommended_step(total);
  std::vector<double> steps(static_cast<std::size_t>(point.size()));
  for (int v = 0; v < point.size(); ++v) {
    steps[static_cast<std::size_t>(v)] = h * std::max(1.0, std::abs(point[v]));
  }
  return detail::richardson_partial(fn, point, idx.orders, steps,
                                    cfg.richardson_levels);
}

Vec gradient(const ScalarFn& fn, const Vec& point, const DiffConfig& cfg) {
  const int n = static_cast<int>(point.size());
  Vec g(n);
  MultiIndex idx(std::vector<int>(static_cast<std::size_t>(n), 0));
  for (int i = 0; i < n; ++i) {
    idx.orders[static_cast<std::size_t>(i)] = 1;
    g[i] = partial(fn, point, idx, cfg);
    idx.orders[static_cast<std::size_t>(i)] = 0;
  }
  return g;
}

Mat hessian(const ScalarFn& fn, const Vec& point, const DiffConfig& cfg) {
  const int n = static_cast<int>(point.size());
  Mat h(n, n);
  MultiIndex idx(std::vector<int>(static_cast<std::size_t>(n), 0));
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      idx.orders[static_cast<std::size_t>(i)] += 1;
      idx.orders[static_cast<std::size_t>(j)] += 1;
      const double v = partial(fn, point, idx, cfg);
      h(i, j) = v;
      h(j, i) = v;
      idx.orders[static_cast<std::size_t>(i)] = 0;
      idx.orders[static_cast<std::size_t>(j)] = 0;
    }
  }
  return h;
}

Tensor third(const ScalarFn& fn, const Vec& point, const DiffConfig& cfg) {
  const int n = static_cast<int>(point.size());
  Tensor t = Tensor::cube(3, n);
  MultiIndex idx(std::vector<int>(static_cast<std::size_t>(n), 0));
  for_each_sym_index(n, 3, [&](std::span<const int> s) {
    for (int k : s) idx.orders[static_cast<std::size_t>(k)] += 1;
    const double v = partial(fn, point, idx, cfg);
    sym_spread(t, s, v);
    for (int k : s) idx.orders[static_cast<std::size_t>(k)] = 0;
  });
  return t;
}

}  // namespace ftwist::diff
