#include "ftwist/metrics.hpp"

#include <cmath>

#include "ftwist/core.hpp"
#include "ftwist/diffkit.hpp"
#include "ftwist/errors.hpp"
#include "ftwist/sampling.hpp"

namespace ftwist::lib {

namespace {

double double_factorial(int n) {
  double r = 1.0;
  for (int k = n; k > 1; k -= 2) r *= k;
  return r;
}

// Sum over ways to choose m disjoint pairs from idx, of the product of
// a(pair) over pairs and w(single) over the rest.
double pairing_sum(const std::vector<int>& idx, int m, const Mat& a, const Vec& w) {
  if (static_cast<int>(idx.size()) < 2 * m) return 0.0;
  if (m == 0) {
    double p = 1.0;
    for (int i : idx) p *= w[i];
    return p;
  }
  const int i0 = idx.front();
  const std::vector<int> rest(idx.begin() + 1, idx.end());
  double acc = 0.0;
  if (static_cast<int>(rest.size()) >= 2 * m) {
    acc += w[i0] * pairing_sum(rest, m, a, w);
  }
  for (std::size_t j = 0; j < rest.size(); ++j) {
    std::vector<int> rem;
    rem.reserve(rest.size() - 1);
    for (std::size_t k = 0; k < rest.size(); ++k) {
      if (k != j) rem.push_back(rest[k]);
    }
    acc += a(i0, rest[j]) * pairing_sum(rem, m - 1, a, w);
  }
  return acc;
}

double alpha_partial(std::span<const int> sidx, const Mat& a, const Vec& w,
                     double alpha) {
  const int k = static_cast<int>(sidx.size());
  const std::vector<int> idx(sidx.begin(), sidx.end());
  double acc = 0.0;
  for (int m = 0; 2 * m <= k; ++m) {
    const double sign = ((k - m) % 2 == 1) ? 1.0 : -1.0;
    const double coef = double_factorial(2 * (k - m) - 3);
    const double denom = std::pow(alpha, 2 * (k - m) - 1);
    acc += sign * coef * pairing_sum(idx, m, a, w) / denom;
  }
  return acc;
}

}  // namespace

AlphaJet alpha_jet(const Mat& a, const Vec& y, int order) {
  const int n = static_cast<int>(y.size());
  AlphaJet jet;
  const Vec w = a * y;
  const double q = y.dot(w);
  jet.value = std::sqrt(q);
  const double alpha = jet.value;
  if (order >= 1) {
    jet.d1 = w / alpha;
  }
  if (order >= 2) {
    jet.d2 = a / alpha - (w * w.transpose()) / (alpha * alpha * alpha);
  }
  if (order >= 3) {
    jet.d3 = Tensor::cube(3, n);
    for_each_sym_index(n, 3, [&](std::span<const int> idx) {
      sym_spread(jet.d3, idx, alpha_partial(idx, a, w, alpha));
    });
  }
  if (order >= 4) {
    jet.d4 = Tensor::cube(4, n);
    for_each_sym_index(n, 4, [&](std::span<const int> idx) {
      sym_spread(jet.d4, idx, alpha_partial(idx, a, w, alpha));
    });
  }
  if (order >= 5) {
    jet.d5 = Tensor::cube(5, n);
    for_each_sym_index(n, 5, [&](std::span<const int> idx) {
      sym_spread(jet.d5, idx, alpha_partial(idx, a, w, alpha));
    });
  }
  return jet;
}

namespace {

// F = alpha + beta with constant alpha-matrix and b fixed at the base point.
FiberJet randers_fiber_jet(const Mat& a, const Vec& b, const Vec& y, int order) {
  const int n = static_cast<int>(y.size());
  const AlphaJet A = alpha_jet(a, y, std::min(order, 5));
  const Vec w = a * y;
  const double beta = b.dot(y);
  const double alpha = A.value;

  FiberJet j;
  j.order = order;
  j.f2 = (alpha + beta) * (alpha + beta);
  if (order >= 1) {
    j.d1 = 2.0 * w + 2.0 * (beta * A.d1 + alpha * b) + 2.0 * beta * b;
  }
  if (order >= 2) {
    j.d2 = 2.0 * a + 2.0 * beta * A.d2 + 2.0 * (A.d1 * b.transpose()) +
           2.0 * (b * A.d1.transpose()) + 2.0 * (b * b.transpose());
  }
  if (order >= 3) {
    j.d3 = Tensor::cube(3, n);
    for_each_sym_index(n, 3, [&](std::span<const int> idx) {
      const int i = idx[0], k = idx[1], l = idx[2];
      const double v = 2.0 * (beta * A.d3(i, k, l) + A.d2(k, l) * b[i] +
                              A.d2(i, l) * b[k] + A.d2(i, k) * b[l]);
      sym_spread(j.d3, idx, v);
    });
  }
  if (order >= 4) {
    j.d4 = Tensor::cube(4, n);
    for_each_sym_index(n, 4, [&](std::span<const int> idx) {
      const int i = idx[0], k = idx[1], l = idx[2], p = idx[3];
      const double v =
          2.0 * (beta * A.d4(i, k, l, p) + A.d3(k, l, p) * b[i] +
                 A.d3(i, l, p) * b[k] + A.d3(i, k, p) * b[l] + A.d3(i, k, l) * b[p]);
      sym_spread(j.d4, idx, v);
    });
  }
  if (order >= 5) {
    j.d5 = Tensor::cube(5, n);
    for_each_sym_index(n, 5, [&](std::span<const int> idx) {
      const int i = idx[0], k = idx[1], l = idx[2], p = idx[3], r = idx[4];
      const double v =
          2.0 * (beta * A.d5(i, k, l, p, r) + A.d4(k, l, p, r) * b[i] +
                 A.d4(i, l, p, r) * b[k] + A.d4(i, k, p, r) * b[l] +
                 A.d4(i, k, l, r) * b[p] + A.d4(i, k, l, p) * b[r]);
      sym_spread(j.d5, idx, v);
    });
  }
  return j;
}

FiberJet riemannian_fiber_jet(const Mat& a, const Vec& y, int order) {
  const int n = static_cast<int>(y.size());
  FiberJet j;
  j.order = order;
  const Vec w = a * y;
  j.f2 = y.dot(w);
  if (order >= 1) j.d1 = 2.0 * w;
  if (order >= 2) j.d2 = 2.0 * a;
  if (order >= 3) j.d3 = Tensor::cube(3, n);
  if (order >= 4) j.d4 = Tensor::cube(4, n);
  if (order >= 5) j.d5 = Tensor::cube(5, n);
  return j;
}

struct MatrixField {
  std::function<Mat(const Vec&)> a;
  std::function<Mat(const Vec&, int)> da;
  std::function<bool(const Vec&)> domain;  // may be empty
};

MatrixField matrix_family(const MetricSpec& spec) {
  MatrixField f;
  const int n = spec.dim;
  if (spec.matrix_family == "identity") {
    f.a = [n](const Vec&) { return Mat(Mat::Identity(n, n)); };
    f.da = [n](const Vec&, int) { return Mat(Mat::Zero(n, n)); };
  } else if (spec.matrix_family == "const") {
    const Mat a = spec.a;
    f.a = [a](const Vec&) { return a; };
    f.da = [n](const Vec&, int) { return Mat(Mat::Zero(n, n)); };
  } else if (spec.matrix_family == "diag-sq") {
    if (n != 2) throw ConstructionError("diag-sq family requires dim 2");
    f.a = [](const Vec& x) {
      Mat a = Mat::Identity(2, 2);
      a(1, 1) = x[0] * x[0];
      return a;
    };
    f.da = [](const Vec& x, int l) {
      Mat d = Mat::Zero(2, 2);
      if (l == 0) d(1, 1) = 2.0 * x[0];
      return d;
    };
    f.domain = [](const Vec& x) { return x[0] > 0.1; };
  } else if (spec.matrix_family == "sphere") {
    if (n != 2) throw ConstructionError("sphere family requires dim 2");
    f.a = [](const Vec& x) {
      const double c = 1.0 + x.squaredNorm();
      return Mat(4.0 / (c * c) * Mat::Identity(2, 2));
    };
    f.da = [](const Vec& x, int l) {
      const double c = 1.0 + x.squaredNorm();
      return Mat(-16.0 * x[l] / (c * c * c) * Mat::Identity(2, 2));
    };
  } else {
    throw ConstructionError("unknown matrix family '" + spec.matrix_family + "'");
  }
  return f;
}

MetricSpec with_defaults(MetricSpec spec) {
  if (spec.chart_box.lo.size() == 0) {
    if (spec.matrix_family == "diag-sq") {
      spec.chart_box.lo = Vec(2);
      spec.chart_box.hi = Vec(2);
      spec.chart_box.lo << 1.0, -1.0;
      spec.chart_box.hi << 2.0, 1.0;
    } else if (spec.matrix_family == "sphere") {
      spec.chart_box = Box::centered(spec.dim, 0.5);
    } else {
      spec.chart_box = Box::centered(spec.dim, 1.0);
    }
  }
  if (spec.kind == MetricKind::randers) {
    if (spec.a.size() == 0) spec.a = Mat::Identity(spec.dim, spec.dim);
    if (spec.b0.size() == 0) spec.b0 = Vec::Zero(spec.dim);
    if (spec.b_slope.size() == 0) spec.b_slope = Mat::Zero(spec.dim, spec.dim);
  }
  return spec;
}

void grid_walk(const Box& box, int steps, const std::function<void(const Vec&)>& fn) {
  const int n = box.dim();
  std::vector<int> c(static_cast<std::size_t>(n), 0);
  Vec x(n);
  while (true) {
    for (int i = 0; i < n; ++i) {
      const double t = steps > 1 ? static_cast<double>(c[static_cast<std::size_t>(i)]) /
                                       (steps - 1)
                                 : 0.5;
      x[i] = box.lo[i] + t * (box.hi[i] - box.lo[i]);
    }
    fn(x);
    int k = n - 1;
    while (k >= 0 && c[static_cast<std::size_t>(k)] == steps - 1) {
      c[static_cast<std::size_t>(k)] = 0;
      --k;
    }
    if (k < 0) break;
    ++c[static_cast<std::size_t>(k)];
  }
}

void verify_declared_properties(const MetricEvaluator& M,
                                const std::set<std::string>& props) {
  SampleConfig sc;
  sc.count = 6;
  sc.seed = 7;
  const auto samples = sample_tangent(M, sc);
  const auto cfg = core::NumericsConfig::tuned(M);
  for (const auto& s : samples) {
    // evaluator invariants: fiber 1-homogeneity and positive-definiteness
    const double f1 = M.value(s.x, s.y);
    const double f2 = M.value(s.x, 2.0 * s.y);
    if (std::abs(f2 - 2.0 * f1) > 1e-8 * std::abs(f1)) {
      throw ConstructionError("metric '" + M.id + "': F is not 1-homogeneous");
    }
    core::fundamental_tensor(M, s, cfg);  // throws DegeneracyError if not SPD

    for (const auto& p : props) {
      double residual = 0.0;
      double tol = 1e-5;
      if (p == "riemannian") {
        residual = core::cartan_tensor(M, s, cfg).max_abs();
        tol = 1e-7;
      } else if (p == "berwald") {
        residual = core::berwald_curvature(M, s, cfg).max_abs();
      } else if (p == "weakly-berwald") {
        residual = core::mean_berwald(M, s, cfg).cwiseAbs().maxCoeff();
      } else if (p == "dually-flat") {
        residual = core::ldf_residual(M, s, cfg).cwiseAbs().maxCoeff();
        tol = 1e-8;
      } else {
        throw ConstructionError("metric '" + M.id + "': unknown declared property '" +
                                p + "'");
      }
      if (residual > tol) {
        throw ConstructionError("metric '" + M.id + "': declared property '" + p +
                                "' violated (residual " + std::to_string(residual) +
                                ")");
      }
    }
  }
}

}  // namespace

MetricEvaluator instantiate(const MetricSpec& spec0) {
  const MetricSpec spec = with_defaults(spec0);
  MetricEvaluator M;
  M.dim = spec.dim;
  M.id = spec.id;
  M.chart_box = spec.chart_box;

  if (spec.kind == MetricKind::euclidean ||
      spec.kind == MetricKind::riemannian_matrix) {
    MetricSpec rspec = spec;
    if (spec.kind == MetricKind::euclidean) rspec.matrix_family = "identity";
    const MatrixField fam = matrix_family(rspec);
    M.value = [fam](const Vec& x, const Vec& y) {
      return std::sqrt(y.dot(fam.a(x) * y));
    };
    if (fam.domain) {
      auto base_ok = fam.domain;
      M.domain = [base_ok](const Vec& x, const Vec&) { return base_ok(x); };
    }
    M.fiber_jet = [fam](const Vec& x, const Vec& y, int order) {
      return riemannian_fiber_jet(fam.a(x), y, order);
    };
    M.f2_dx = [fam](const Vec& x, const Vec& y) {
      const int n = static_cast<int>(x.size());
      Vec out(n);
      for (int l = 0; l < n; ++l) out[l] = y.dot(fam.da(x, l) * y);
      return out;
    };
    M.f2_dxdy = [fam](const Vec& x, const Vec& y) {
      const int n = static_cast<int>(x.size());
      Mat out(n, n);
      for (int l = 0; l < n; ++l) out.row(l) = 2.0 * (fam.da(x, l) * y).transpose();
      return out;
    };
  } else {
    // randers
    const Mat a = spec.a;
    const Vec b0 = spec.b0;
    const Mat S = spec.b_slope;
    auto bx = [b0, S](const Vec& x) { return Vec(b0 + S * x); };

    // covector bound sup_x |b(x)|_alpha < 1, checked on a chart grid
    const Mat ainv = a.inverse();
    double worst = 0.0;
    grid_walk(spec.chart_box, 5, [&](const Vec& x) {
      const Vec b = bx(x);
      worst = std::max(worst, std::sqrt(b.dot(ainv * b)));
    });
    if (worst >= 1.0) {
      throw ConstructionError("metric '" + spec.id + "': randers covector norm " +
                              std::to_string(worst) + " reaches 1 on the chart box");
    }

    M.value = [a, bx](const Vec& x, const Vec& y) {
      return std::sqrt(y.dot(a * y)) + bx(x).dot(y);
    };
    M.fiber_jet = [a, bx](const Vec& x, const Vec& y, int order) {
      return randers_fiber_jet(a, bx(x), y, order);
    };
    M.f2_dx = [a, bx, S](const Vec& x, const Vec& y) {
      const double alpha = std::sqrt(y.dot(a * y));
      const double beta = bx(x).dot(y);
      return Vec(2.0 * (alpha + beta) * (S.transpose() * y));
    };
    M.f2_dxdy = [a, bx, S](const Vec& x, const Vec& y) {
      const int n = static_cast<int>(x.size());
      const Vec w = a * y;
      const double alpha = std::sqrt(y.dot(w));
      const Vec b = bx(x);
      const double beta = b.dot(y);
      const Vec betax = S.transpose() * y;
      Mat out(n, n);
      for (int l = 0; l < n; ++l) {
        for (int j = 0; j < n; ++j) {
          out(l, j) = 2.0 * (w[j] / alpha + b[j]) * betax[l] +
                      2.0 * (alpha + beta) * S(j, l);
        }
      }
      return out;
    };
  }

  verify_declared_properties(M, spec.declared_properties);
  return M;
}

TwistFunction instantiate_twist(const TwistSpec& spec, const Box& box1,
                                const Box& box2) {
  TwistFunction f;
  f.id = spec.id;
  const int n1 = box1.dim(), n2 = box2.dim();

  switch (spec.kind) {
    case TwistKind::constant: {
      const double c = spec.c;
      if (c <= 0.0) {
        throw ConstructionError("twist '" + spec.id + "': constant must be positive");
      }
      f.value = [c](const Vec&, const Vec&) { return c; };
      f.grad_x = [n1](const Vec&, const Vec&) { return Vec(Vec::Zero(n1)); };
      f.grad_u = [n2](const Vec&, const Vec&) { return Vec(Vec::Zero(n2)); };
      break;
    }
    case TwistKind::exp_x: {
      const Vec a = spec.a;
      if (a.size() != n1) {
        throw ConstructionError("twist '" + spec.id + "': exp-x coefficient length");
      }
      f.value = [a](const Vec& x, const Vec&) { return std::exp(a.dot(x)); };
      f.grad_x = [a](const Vec& x, const Vec&) { return Vec(a * std::exp(a.dot(x))); };
      f.grad_u = [n2](const Vec&, const Vec&) { return Vec(Vec::Zero(n2)); };
      break;
    }
    case TwistKind::exp_u: {
      const Vec b = spec.b;
      if (b.size() != n2) {
        throw ConstructionError("twist '" + spec.id + "': exp-u coefficient length");
      }
      f.value = [b](const Vec&, const Vec& u) { return std::exp(b.dot(u)); };
      f.grad_x = [n1](const Vec&, const Vec&) { return Vec(Vec::Zero(n1)); };
      f.grad_u = [b](const Vec&, const Vec& u) { return Vec(b * std::exp(b.dot(u))); };
      break;
    }
    case TwistKind::trig_mixed: {
      const double e = spec.eps;
      if (std::abs(e) > 0.2) {
        throw ConstructionError("twist '" + spec.id + "': trig-mixed amplitude above 0.2");
      }
      f.value = [e](const Vec& x, const Vec& u) {
        return 1.0 + e * std::sin(x[0]) * std::cos(u[0]);
      };
      f.grad_x = [e, n1](const Vec& x, const Vec& u) {
        Vec g = Vec::Zero(n1);
        g[0] = e * std::cos(x[0]) * std::cos(u[0]);
        return g;
      };
      f.grad_u = [e, n2](const Vec& x, const Vec& u) {
        Vec g = Vec::Zero(n2);
        g[0] = -e * std::sin(x[0]) * std::sin(u[0]);
        return g;
      };
      break;
    }
  }

  double inf_f = std::numeric_limits<double>::infinity();
  grid_walk(box1, 5, [&](const Vec& x) {
    grid_walk(box2, 5, [&](const Vec& u) { inf_f = std::min(inf_f, f.value(x, u)); });
  });
  if (!(inf_f > 0.0)) {
    throw ConstructionError("twist '" + spec.id + "': not positive on the chart box (inf " +
                            std::to_string(inf_f) + ")");
  }

  validate_twist(f, box1, box2);
  return f;
}

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = [] {
    auto euclid = [](const std::string& id, int n) {
      MetricSpec m;
      m.id = id;
      m.kind = MetricKind::euclidean;
      m.dim = n;
      m.declared_properties = {"riemannian", "berwald", "weakly-berwald", "dually-flat"};
      return m;
    };
    auto riemann = [](const std::string& id, const std::string& family) {
      MetricSpec m;
      m.id = id;
      m.kind = MetricKind::riemannian_matrix;
      m.dim = 2;
      m.matrix_family = family;
      m.declared_properties = {"riemannian", "berwald", "weakly-berwald"};
      return m;
    };
    auto randers = [](const std::string& id, double b1) {
      MetricSpec m;
      m.id = id;
      m.kind = MetricKind::randers;
      m.dim = 2;
      m.b0 = Vec::Zero(2);
      m.b0[0] = b1;
      m.declared_properties = {"berwald", "weakly-berwald", "dually-flat"};
      return m;
    };

    MetricSpec randersx;  // x-dependent covector: not Berwald
    randersx.id = "randersx2";
    randersx.kind = MetricKind::randers;
    randersx.dim = 2;
    randersx.b0 = Vec::Zero(2);
    randersx.b0[0] = 0.2;
    randersx.b_slope = Mat::Zero(2, 2);
    randersx.b_slope(0, 0) = 0.1;

    auto tconst = [](double c) {
      TwistSpec t;
      t.id = "const-" + std::to_string(c).substr(0, 4);
      t.kind = TwistKind::constant;
      t.c = c;
      return t;
    };
    auto texpx = [](std::initializer_list<double> a) {
      TwistSpec t;
      t.id = "exp-x";
      t.kind = TwistKind::exp_x;
      t.a = Vec(static_cast<int>(a.size()));
      int i = 0;
      for (double v : a) t.a[i++] = v;
      return t;
    };
    auto texpu = [](std::initializer_list<double> b) {
      TwistSpec t;
      t.id = "exp-u";
      t.kind = TwistKind::exp_u;
      t.b = Vec(static_cast<int>(b.size()));
      int i = 0;
      for (double v : b) t.b[i++] = v;
      return t;
    };
    auto ttrig = [](double eps) {
      TwistSpec t;
      t.id = "trig-mixed";
      t.kind = TwistKind::trig_mixed;
      t.eps = eps;
      return t;
    };

    std::vector<CatalogEntry> v;
    v.push_back({"trivial", euclid("euclid2", 2), euclid("euclid2", 2), tconst(1.0)});
    v.push_back({"warped-exp", euclid("euclid1", 1), euclid("euclid2", 2), texpx({1.0})});
    v.push_back({"twisted-trig", euclid("euclid2", 2), euclid("euclid2", 2), ttrig(0.2)});
    v.push_back({"randers-riem", randers("randers03", 0.3), riemann("sphere2", "sphere"),
                 texpx({0.1, 0.0})});
    v.push_back({"riem-randers", riemann("diagsq2", "diag-sq"), randers("randers03", 0.3),
                 tconst(1.5)});
    v.push_back({"randers-randers", randers("randers03", 0.3),
                 randers("randers025", 0.25), tconst(1.2)});
    v.push_back({"randersx-euclid", randersx, euclid("euclid2", 2), tconst(1.0)});
    v.push_back({"euclid-randers-expx", euclid("euclid2", 2), randers("randers03", 0.3),
                 texpx({0.1, 0.0})});
    v.push_back({"riem-riem", riemann("diagsq2", "diag-sq"), riemann("sphere2", "sphere"),
                 ttrig(0.1)});
    v.push_back({"randers-euclid-expu", randers("randers03", 0.3), euclid("euclid2", 2),
                 texpu({0.1, 0.0})});
    return v;
  }();
  return entries;
}

std::optional<CatalogEntry> find_combo(const std::string& id) {
  for (const auto& e : catalog()) {
    if (e.id == id) return e;
  }
  return std::nullopt;
}

std::optional<MetricSpec> find_metric(const std::string& id) {
  for (const auto& e : catalog()) {
    if (e.m1.id == id) return e.m1;
    if (e.m2.id == id) return e.m2;
  }
  return std::nullopt;
}

}  // namespace ftwist::lib

namespace ftwist {

void validate_twist(const TwistFunction& f, const Box& box1, const Box& box2,
                    int probes, double rel_tol) {
  const int n1 = box1.dim(), n2 = box2.dim();
  for (int p = 0; p < probes; ++p) {
    const std::uint64_t idx = 17 + 13 * static_cast<std::uint64_t>(p);
    const Vec x = detail_sampling::box_point(idx, box1, 0);
    const Vec u = detail_sampling::box_point(idx, box2, n1);

    const Vec gx = f.grad_x(x, u);
    const Vec gu = f.grad_u(x, u);
    diff::ScalarFn fx = [&](const Vec& xx) { return f.value(xx, u); };
    diff::ScalarFn fu = [&](const Vec& uu) { return f.value(x, uu); };
    const Vec gx_fd = diff::gradient(fx, x);
    const Vec gu_fd = diff::gradient(fu, u);
    const double scale = std::max(1.0, std::abs(f.value(x, u)));
    if ((gx - gx_fd).cwiseAbs().maxCoeff() > rel_tol * scale ||
        (gu - gu_fd).cwiseAbs().maxCoeff() > rel_tol * scale) {
      throw ConstructionError("twist '" + f.id +
                              "': analytic partials disagree with finite differences");
    }
  }
}

}  // namespace ftwist
