#include "ftwist/core.hpp"

#include <cmath>

#include "ftwist/errors.hpp"

namespace ftwist::core {

namespace {

double coord_scale(double c) { return std::max(1.0, std::abs(c)); }

std::pair<double, double> eig_range(const Mat& g) {
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

void note_condition(const Mat& g, double cond_warn, Diagnostics* diag,
                    const std::string& who) {
  if (!diag) return;
  const auto [lo, hi] = eig_range(g);
  if (lo <= 0.0) {
    throw DegeneracyError(who + ": fundamental tensor not positive definite", lo);
  }
  const double cond = hi / lo;
  diag->max_condition = std::max(diag->max_condition, cond);
  if (cond > cond_warn) {
    diag->warnings.push_back(who + ": metric condition number " + std::to_string(cond));
  }
}

Eigen::LLT<Mat> spd_factor(const Mat& g, double cond_warn, Diagnostics* diag,
                           const std::string& who) {
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) {
    const auto [lo, hi] = eig_range(g);
    (void)hi;
    throw DegeneracyError(who + ": fundamental tensor not positive definite", lo);
  }
  note_condition(g, cond_warn, diag, who);
  return llt;
}

}  // namespace

namespace detail {

Mat spd_inverse(const Mat& g, double cond_warn, Diagnostics* diag,
                const std::string& who) {
  auto llt = spd_factor(g, cond_warn, diag, who);
  return llt.solve(Mat::Identity(g.rows(), g.cols()));
}

Vec spd_solve(const Mat& g, const Vec& rhs, double cond_warn, Diagnostics* diag,
              const std::string& who) {
  auto llt = spd_factor(g, cond_warn, diag, who);
  return llt.solve(rhs);
}

Vec stencil_vec(const std::function<Vec(const Vec&)>& V, const Vec& z0,
                std::span<const int> orders, std::span<const double> steps,
                int levels) {
  // Mirrors diff::detail::richardson_partial for vector-valued maps.
  struct Stencil1D {
    std::vector<int> offsets;
    std::vector<double> weights;
  };
  static const std::vector<Stencil1D> table = {
      {{0}, {1.0}},
      {{-1, 1}, {-0.5, 0.5}},
      {{-1, 0, 1}, {1.0, -2.0, 1.0}},
      {{-2, -1, 1, 2}, {-0.5, 1.0, -1.0, 0.5}},
      {{-2, -1, 0, 1, 2}, {1.0, -4.0, 6.0, -4.0, 1.0}},
  };

  const int n = static_cast<int>(z0.size());
  std::vector<int> active;
  for (int v = 0; v < n; ++v) {
    if (orders[static_cast<std::size_t>(v)] > 0) active.push_back(v);
  }
  if (active.empty()) return V(z0);

  auto eval_once = [&](std::span<const double> hs) {
    double denom = 1.0;
    for (int v : active) {
      denom *= std::pow(hs[static_cast<std::size_t>(v)],
                        orders[static_cast<std::size_t>(v)]);
    }
    const std::size_t m = active.size();
    std::vector<std::size_t> cursor(m, 0);
    Vec p = z0;
    Vec acc;
    while (true) {
      double w = 1.0;
      for (std::size_t j = 0; j < m; ++j) {
        const int v = active[j];
        const auto& st = table[static_cast<std::size_t>(orders[static_cast<std::size_t>(v)])];
        w *= st.weights[cursor[j]];
        p[v] = z0[v] + st.offsets[cursor[j]] * hs[static_cast<std::size_t>(v)];
      }
      Vec val = V(p);
      if (!val.allFinite()) {
        throw EvalDomainError("non-finite field value inside difference stencil");
      }
      if (acc.size() == 0) {
        acc = w * val;
      } else {
        acc += w * val;
      }
      std::size_t j = 0;
      for (; j < m; ++j) {
        const int v = active[j];
        const auto& st = table[static_cast<std::size_t>(orders[static_cast<std::size_t>(v)])];
        if (++cursor[j] < st.offsets.size()) break;
        cursor[j] = 0;
      }
      if (j == m) break;
    }
    return Vec(acc / denom);
  };

  std::vector<double> hs(steps.begin(), steps.end());
  if (levels <= 0) return eval_once(hs);

  std::vector<Vec> row(static_cast<std::size_t>(levels) + 1);
  for (int j = 0; j <= levels; ++j) {
    row[static_cast<std::size_t>(j)] = eval_once(hs);
    for (double& h : hs) h *= 0.5;
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

FiberJet fiber_jet(const MetricEvaluator& M, const Vec& x, const Vec& y,
                   int order, const NumericsConfig& cfg) {
  if (M.fiber_jet) return M.fiber_jet(x, y, order);

  const int n = M.dim;
  FiberJet jet;
  jet.order = order;
  jet.f2 = M.f2(x, y);

  diff::ScalarFn f2 = [&](const Vec& yy) { return M.f2(x, yy); };
  std::vector<int> orders(static_cast<std::size_t>(n), 0);
  std::vector<double> steps(static_cast<std::size_t>(n), 0.0);

  auto run = [&](int k, std::span<const int> idx) {
    for (int v : idx) orders[static_cast<std::size_t>(v)] += 1;
    for (int v = 0; v < n; ++v) {
      steps[static_cast<std::size_t>(v)] = cfg.jet_step[k] * coord_scale(y[v]);
    }
    const double val =
        diff::detail::richardson_partial(f2, y, orders, steps, cfg.jet_richardson);
    for (int v : idx) orders[static_cast<std::size_t>(v)] = 0;
    return val;
  };

  if (order >= 1) {
    jet.d1 = Vec(n);
    for (int i = 0; i < n; ++i) {
      const int idx[] = {i};
      jet.d1[i] = run(1, idx);
    }
  }
  if (order >= 2) {
    jet.d2 = Mat(n, n);
    for_each_sym_index(n, 2, [&](std::span<const int> idx) {
      const double v = run(2, idx);
      jet.d2(idx[0], idx[1]) = v;
      jet.d2(idx[1], idx[0]) = v;
    });
  }
  if (order >= 3) {
    jet.d3 = Tensor::cube(3, n);
    for_each_sym_index(n, 3, [&](std::span<const int> idx) {
      sym_spread(jet.d3, idx, run(3, idx));
    });
  }
  if (order >= 4) {
    jet.d4 = Tensor::cube(4, n);
    for_each_sym_index(n, 4, [&](std::span<const int> idx) {
      sym_spread(jet.d4, idx, run(4, idx));
    });
  }
  if (order >= 5) {
    jet.d5 = Tensor::cube(5, n);
    for_each_sym_index(n, 5, [&](std::span<const int> idx) {
      sym_spread(jet.d5, idx, run(5, idx));
    });
  }
  return jet;
}

Vec f2_dx(const MetricEvaluator& M, const Vec& x, const Vec& y,
          const NumericsConfig& cfg) {
  if (M.f2_dx) return M.f2_dx(x, y);
  const int n = M.dim;
  Vec out(n);
  diff::ScalarFn f2 = [&](const Vec& xx) { return M.f2(xx, y); };
  std::vector<int> orders(static_cast<std::size_t>(n), 0);
  std::vector<double> steps(static_cast<std::size_t>(n), 0.0);
  for (int c = 0; c < n; ++c) {
    orders[static_cast<std::size_t>(c)] = 1;
    for (int v = 0; v < n; ++v) {
      steps[static_cast<std::size_t>(v)] = cfg.mixed_step * coord_scale(x[v]);
    }
    out[c] = diff::detail::richardson_partial(f2, x, orders, steps, cfg.jet_richardson);
    orders[static_cast<std::size_t>(c)] = 0;
  }
  return out;
}

Mat f2_dxdy(const MetricEvaluator& M, const Vec& x, const Vec& y,
            const NumericsConfig& cfg) {
  if (M.f2_dxdy) return M.f2_dxdy(x, y);
  const int n = M.dim;
  Mat out(n, n);
  Vec z(2 * n);
  z << x, y;
  diff::ScalarFn f2 = [&](const Vec& zz) {
    return M.f2(zz.head(n), zz.tail(n));
  };
  std::vector<int> orders(static_cast<std::size_t>(2 * n), 0);
  std::vector<double> steps(static_cast<std::size_t>(2 * n), 0.0);
  for (int v = 0; v < 2 * n; ++v) {
    steps[static_cast<std::size_t>(v)] = cfg.mixed_step * coord_scale(z[v]);
  }
  for (int c = 0; c < n; ++c) {
    for (int l = 0; l < n; ++l) {
      orders[static_cast<std::size_t>(c)] = 1;
      orders[static_cast<std::size_t>(n + l)] += 1;
      out(c, l) =
          diff::detail::richardson_partial(f2, z, orders, steps, cfg.jet_richardson);
      orders[static_cast<std::size_t>(c)] = 0;
      orders[static_cast<std::size_t>(n + l)] = 0;
    }
  }
  return out;
}

Mat fundamental_tensor(const MetricEvaluator& M, const TangentSample& s,
                       const NumericsConfig& cfg, Diagnostics* diag) {
  const FiberJet jet = fiber_jet(M, s.x, s.y, 2, cfg);
  Mat g = 0.5 * jet.d2;
  const auto [lo, hi] = eig_range(g);
  if (lo <= 0.0) {
    throw DegeneracyError("fundamental tensor not positive definite (min eigenvalue " +
                              std::to_string(lo) + ")",
                          lo);
  }
  if (diag) {
    const double cond = hi / lo;
    diag->max_condition = std::max(diag->max_condition, cond);
    if (cond > cfg.cond_warn) {
      diag->warnings.push_back("fundamental_tensor: condition number " +
                               std::to_string(cond));
    }
  }
  return g;
}

Tensor cartan_tensor(const MetricEvaluator& M, const TangentSample& s,
                     const NumericsConfig& cfg, Diagnostics* diag) {
  (void)diag;
  const FiberJet jet = fiber_jet(M, s.x, s.y, 3, cfg);
  Tensor c = jet.d3;
  c *= 0.25;
  return c;
}

Vec mean_cartan(const MetricEvaluator& M, const TangentSample& s,
                const NumericsConfig& cfg, Diagnostics* diag) {
  const int n = M.dim;
  const Mat g = fundamental_tensor(M, s, cfg, diag);
  const Tensor c = cartan_tensor(M, s, cfg, diag);
  const Mat ginv = detail::spd_inverse(g, cfg.cond_warn, diag, "mean_cartan");
  Vec I = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) acc += ginv(j, k) * c(i, j, k);
    }
    I[i] = acc;
  }
  return I;
}

double mean_cartan_sq(const MetricEvaluator& M, const TangentSample& s,
                      const NumericsConfig& cfg, Diagnostics* diag) {
  const Mat g = fundamental_tensor(M, s, cfg, diag);
  const Vec I = mean_cartan(M, s, cfg, diag);
  const Vec Iup = detail::spd_solve(g, I, cfg.cond_warn, diag, "mean_cartan_sq");
  return Iup.dot(I);
}

Mat angular_metric(const MetricEvaluator& M, const TangentSample& s,
                   const NumericsConfig& cfg, Diagnostics* diag) {
  const Mat g = fundamental_tensor(M, s, cfg, diag);
  const double f2 = M.f2(s.x, s.y);
  const Vec ylow = g * s.y;
  return g - (ylow * ylow.transpose()) / f2;
}

Tensor matsumoto_torsion(const MetricEvaluator& M, const TangentSample& s,
                         const NumericsConfig& cfg, Diagnostics* diag) {
  const int n = M.dim;
  const Tensor c = cartan_tensor(M, s, cfg, diag);
  const Vec I = mean_cartan(M, s, cfg, diag);
  const Mat h = angular_metric(M, s, cfg, diag);
  Tensor m = Tensor::cube(3, n);
  const double w = 1.0 / (n + 1.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        m(i, j, k) =
            c(i, j, k) - w * (I[i] * h(j, k) + I[j] * h(i, k) + I[k] * h(i, j));
      }
    }
  }
  return m;
}

namespace {

Vec spray_at(const MetricEvaluator& M, const Vec& x, const Vec& y,
             const NumericsConfig& cfg, Diagnostics* diag) {
  const FiberJet jet = fiber_jet(M, x, y, 2, cfg);
  const Mat g = 0.5 * jet.d2;
  const Mat mxy = f2_dxdy(M, x, y, cfg);
  const Vec dx = f2_dx(M, x, y, cfg);
  const Vec P = mxy.transpose() * y - dx;
  return 0.25 * detail::spd_solve(g, P, cfg.cond_warn, diag, "spray");
}

}  // namespace

Vec SprayField::operator()(const Vec& x, const Vec& y) const {
  return spray_at(*m_, x, y, cfg_, diag_);
}

Vec spray(const MetricEvaluator& M, const TangentSample& s,
          const NumericsConfig& cfg, Diagnostics* diag) {
  return spray_at(M, s.x, s.y, cfg, diag);
}

Mat nonlinear_connection(const MetricEvaluator& M, const TangentSample& s,
                         const NumericsConfig& cfg, Diagnostics* diag) {
  const int n = M.dim;
  spray_at(M, s.x, s.y, cfg, diag);  // conditioning report at the center point
  std::function<Vec(const Vec&)> V = [&](const Vec& yy) {
    return spray_at(M, s.x, yy, cfg, nullptr);
  };
  Mat Gb(n, n);
  std::vector<int> orders(static_cast<std::size_t>(n), 0);
  std::vector<double> steps(static_cast<std::size_t>(n), 0.0);
  for (int v = 0; v < n; ++v) {
    steps[static_cast<std::size_t>(v)] = cfg.conn_step * coord_scale(s.y[v]);
  }
  for (int j = 0; j < n; ++j) {
    orders[static_cast<std::size_t>(j)] = 1;
    const Vec col = detail::stencil_vec(V, s.y, orders, steps, cfg.outer_richardson);
    orders[static_cast<std::size_t>(j)] = 0;
    Gb.col(j) = col;
  }
  return Gb;
}

Tensor berwald_curvature(const MetricEvaluator& M, const TangentSample& s,
                         const NumericsConfig& cfg, Diagnostics* diag) {
  const int n = M.dim;
  spray_at(M, s.x, s.y, cfg, diag);
  if (diag) diag->degraded_accuracy = true;  // third fiber derivative of the spray
  std::function<Vec(const Vec&)> V = [&](const Vec& yy) {
    return spray_at(M, s.x, yy, cfg, nullptr);
  };
  Tensor B = Tensor::cube(4, n);
  std::vector<int> orders(static_cast<std::size_t>(n), 0);
  std::vector<double> steps(static_cast<std::size_t>(n), 0.0);
  for (int v = 0; v < n; ++v) {
    steps[static_cast<std::size_t>(v)] = cfg.berwald_step * coord_scale(s.y[v]);
  }
  for_each_sym_index(n, 3, [&](std::span<const int> idx) {
    for (int v : idx) orders[static_cast<std::size_t>(v)] += 1;
    const Vec D = detail::stencil_vec(V, s.y, orders, steps, cfg.outer_richardson);
    for (int v : idx) orders[static_cast<std::size_t>(v)] = 0;
    std::vector<int> p(idx.begin(), idx.end());
    std::sort(p.begin(), p.end());
    do {
      for (int i = 0; i < n; ++i) B(i, p[0], p[1], p[2]) = D[i];
    } while (std::next_permutation(p.begin(), p.end()));
  });
  return B;
}

Mat mean_berwald_of(const Tensor& B) {
  const int n = B.dim(0);
  Mat E(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int m = 0; m < n; ++m) acc += B(m, j, k, m);
      E(j, k) = 0.5 * acc;
    }
  }
  return E;
}

Mat mean_berwald(const MetricEvaluator& M, const TangentSample& s,
                 const NumericsConfig& cfg, Diagnostics* diag) {
  return mean_berwald_of(berwald_curvature(M, s, cfg, diag));
}

Mat riemann_curvature(const MetricEvaluator& M, const TangentSample& s,
                      const NumericsConfig& cfg, Diagnostics* diag) {
  const int n = M.dim;
  const Vec G = spray_at(M, s.x, s.y, cfg, diag);
  const Mat Gb = nonlinear_connection(M, s, cfg, nullptr);

  Vec z(2 * n);
  z << s.x, s.y;
  std::function<Vec(const Vec&)> W = [&](const Vec& zz) {
    return spray_at(M, zz.head(n), zz.tail(n), cfg, nullptr);
  };
  std::vector<int> orders(static_cast<std::size_t>(2 * n), 0);
  std::vector<double> steps(static_cast<std::size_t>(2 * n), 0.0);
  for (int v = 0; v < 2 * n; ++v) {
    steps[static_cast<std::size_t>(v)] = cfg.riemann_step * coord_scale(z[v]);
  }

  // dG/dx^k
  Mat dGdx(n, n);  // (k, i)
  for (int k = 0; k < n; ++k) {
    orders[static_cast<std::size_t>(k)] = 1;
    const Vec d = detail::stencil_vec(W, z, orders, steps, cfg.outer_richardson);
    orders[static_cast<std::size_t>(k)] = 0;
    dGdx.row(k) = d.transpose();
  }

  // d^2G/dx^j dy^k and d^2G/dy^j dy^k
  std::vector<Mat> d2xy(static_cast<std::size_t>(n), Mat(n, n));  // [j](k, i)
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      orders[static_cast<std::size_t>(j)] = 1;
      orders[static_cast<std::size_t>(n + k)] = 1;
      const Vec d = detail::stencil_vec(W, z, orders, steps, cfg.outer_richardson);
      orders[static_cast<std::size_t>(j)] = 0;
      orders[static_cast<std::size_t>(n + k)] = 0;
      d2xy[static_cast<std::size_t>(j)].row(k) = d.transpose();
    }
  }
  std::vector<Mat> d2yy(static_cast<std::size_t>(n), Mat(n, n));  // [j](k, i)
  for (int j = 0; j < n; ++j) {
    for (int k = j; k < n; ++k) {
      orders[static_cast<std::size_t>(n + j)] += 1;
      orders[static_cast<std::size_t>(n + k)] += 1;
      const Vec d = detail::stencil_vec(W, z, orders, steps, cfg.outer_richardson);
      orders[static_cast<std::size_t>(n + j)] = 0;
      orders[static_cast<std::size_t>(n + k)] = 0;
      d2yy[static_cast<std::size_t>(j)].row(k) = d.transpose();
      d2yy[static_cast<std::size_t>(k)].row(j) = d.transpose();
    }
  }

  Mat R(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      double acc = 2.0 * dGdx(k, i);
      for (int j = 0; j < n; ++j) {
        acc -= s.y[j] * d2xy[static_cast<std::size_t>(j)](k, i);
        acc += 2.0 * G[j] * d2yy[static_cast<std::size_t>(j)](k, i);
        acc -= Gb(i, j) * Gb(j, k);
      }
      R(i, k) = acc;
    }
  }
  return R;
}

double flag_curvature(const MetricEvaluator& M, const TangentSample& s,
                      const FlagPlane& plane, const NumericsConfig& cfg,
                      Diagnostics* diag) {
  const Vec y = plane.y.size() ? plane.y : s.y;
  const TangentSample at{s.x, y};
  const Mat g = fundamental_tensor(M, at, cfg, diag);
  const double gyy = y.dot(g * y);
  const double guu = plane.u.dot(g * plane.u);
  const double gyu = y.dot(g * plane.u);
  const double denom = gyy * guu - gyu * gyu;
  if (denom <= 1e-12 * gyy * guu) {
    throw Error("degenerate flag plane");
  }
  const Mat R = riemann_curvature(M, at, cfg, diag);
  const Vec Ru = R * plane.u;
  return plane.u.dot(g * Ru) / denom;
}

Vec ldf_residual(const MetricEvaluator& M, const TangentSample& s,
                 const NumericsConfig& cfg, Diagnostics* diag) {
  (void)diag;
  const Mat mxy = f2_dxdy(M, s.x, s.y, cfg);
  const Vec dx = f2_dx(M, s.x, s.y, cfg);
  return mxy.transpose() * s.y - 2.0 * dx;
}

}  // namespace ftwist::core
