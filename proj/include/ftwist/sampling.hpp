#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ftwist/errors.hpp"
#include "ftwist/metric.hpp"

namespace ftwist {

/// Halton low-discrepancy point in (0,1), dimension `dim`, index `i` (>= 1).
inline double halton(std::uint64_t i, int dim) {
  static constexpr int primes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                                   23, 29, 31, 37, 41, 43, 47, 53};
  const double b = primes[dim % 16];
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= b;
    r += f * static_cast<double>(i % static_cast<std::uint64_t>(b));
    i /= static_cast<std::uint64_t>(b);
  }
  return r;
}

struct SampleConfig {
  int count = 100;
  unsigned seed = 42;
  double radius_lo = 0.5;
  double radius_hi = 2.0;
  int max_rejects = 10000;
};

namespace detail_sampling {

inline std::uint64_t start_index(unsigned seed) {
  return 1000 + static_cast<std::uint64_t>(seed) * 50021;
}

/// Deterministic quasi-random unit direction via Box-Muller over Halton pairs.
inline Vec unit_direction(std::uint64_t idx, int n, int dim_offset) {
  Vec z(n);
  for (int k = 0; k < n; k += 2) {
    const double u1 = halton(idx, dim_offset + k);
    const double u2 = halton(idx, dim_offset + k + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    z[k] = r * std::cos(2.0 * M_PI * u2);
    if (k + 1 < n) z[k + 1] = r * std::sin(2.0 * M_PI * u2);
  }
  const double nz = z.norm();
  return nz > 0 ? Vec(z / nz) : Vec(Vec::Unit(n, 0));
}

inline Vec box_point(std::uint64_t idx, const Box& box, int dim_offset) {
  Vec x(box.dim());
  for (int k = 0; k < box.dim(); ++k) {
    const double u = halton(idx, dim_offset + k);
    x[k] = box.lo[k] + u * (box.hi[k] - box.lo[k]);
  }
  return x;
}

}  // namespace detail_sampling

/// Quasi-random tangent samples inside the evaluator's chart box, tangent
/// directions on the unit sphere scaled by radii in [radius_lo, radius_hi];
/// samples violating the domain predicate are rejected and skipped.
inline std::vector<TangentSample> sample_tangent(const MetricEvaluator& M,
                                                 const SampleConfig& cfg) {
  std::vector<TangentSample> out;
  out.reserve(static_cast<std::size_t>(cfg.count));
  const int n = M.dim;
  std::uint64_t idx = detail_sampling::start_index(cfg.seed);
  int rejects = 0;
  while (static_cast<int>(out.size()) < cfg.count) {
    TangentSample s;
    s.x = detail_sampling::box_point(idx, M.chart_box, 0);
    const Vec dir = detail_sampling::unit_direction(idx, n, n);
    const double u = halton(idx, 2 * n + (n % 2));
    const double r = cfg.radius_lo + u * (cfg.radius_hi - cfg.radius_lo);
    s.y = r * dir;
    ++idx;
    if (!M.in_domain(s.x, s.y)) {
      if (++rejects > cfg.max_rejects) {
        throw EvalDomainError("sampling rejected too many points for metric " + M.id);
      }
      continue;
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Product-chart samples: base points in each factor box, fiber parts drawn
/// per factor so both stay clear of the zero section.
inline std::vector<TangentSample> sample_product(const MetricEvaluator& M1,
                                                 const MetricEvaluator& M2,
                                                 const MetricEvaluator& product,
                                                 const SampleConfig& cfg) {
  std::vector<TangentSample> out;
  out.reserve(static_cast<std::size_t>(cfg.count));
  const int n1 = M1.dim, n2 = M2.dim;
  std::uint64_t idx = detail_sampling::start_index(cfg.seed) + 500009;
  int rejects = 0;
  while (static_cast<int>(out.size()) < cfg.count) {
    const Vec x = detail_sampling::box_point(idx, M1.chart_box, 0);
    const Vec u = detail_sampling::box_point(idx, M2.chart_box, n1);
    int off = n1 + n2;
    const Vec d1 = detail_sampling::unit_direction(idx, n1, off);
    off += n1 + (n1 % 2);
    const Vec d2 = detail_sampling::unit_direction(idx, n2, off);
    off += n2 + (n2 % 2);
    const double r1 = cfg.radius_lo + halton(idx, off) * (cfg.radius_hi - cfg.radius_lo);
    const double r2 = cfg.radius_lo + halton(idx, off + 1) * (cfg.radius_hi - cfg.radius_lo);
    ++idx;

    TangentSample s;
    s.x = Vec(n1 + n2);
    s.x << x, u;
    s.y = Vec(n1 + n2);
    s.y << r1 * d1, r2 * d2;
    if (!M1.in_domain(x, r1 * d1) || !M2.in_domain(u, r2 * d2) ||
        (product.value && !product.in_domain(s.x, s.y))) {
      if (++rejects > cfg.max_rejects) {
        throw EvalDomainError("product sampling rejected too many points");
      }
      continue;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ftwist
