#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "ftwist/core.hpp"
#include "ftwist/diffkit.hpp"
#include "ftwist/errors.hpp"
#include "ftwist/sampling.hpp"

using namespace ftwist;
using namespace ftwist::core;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

MetricEvaluator euclidean(int n) {
  MetricEvaluator M;
  M.dim = n;
  M.id = "euclid";
  M.value = [](const Vec&, const Vec& y) { return y.norm(); };
  M.chart_box = Box::centered(n, 1.0);
  return M;
}

MetricEvaluator randers(int n, const Vec& b) {
  MetricEvaluator M;
  M.dim = n;
  M.id = "randers";
  M.value = [b](const Vec&, const Vec& y) { return y.norm() + b.dot(y); };
  M.chart_box = Box::centered(n, 1.0);
  return M;
}

// diag(1, (x1)^2) on x1 in [1, 2]
MetricEvaluator diag_sq() {
  MetricEvaluator M;
  M.dim = 2;
  M.id = "diag-sq";
  M.value = [](const Vec& x, const Vec& y) {
    return std::sqrt(y[0] * y[0] + x[0] * x[0] * y[1] * y[1]);
  };
  M.chart_box.lo = vec2(1.0, -1.0);
  M.chart_box.hi = vec2(2.0, 1.0);
  return M;
}

// round 2-sphere in stereographic coordinates: a = 4 I / (1 + |x|^2)^2
MetricEvaluator sphere2() {
  MetricEvaluator M;
  M.dim = 2;
  M.id = "sphere2";
  M.value = [](const Vec& x, const Vec& y) {
    const double c = 2.0 / (1.0 + x.squaredNorm());
    return c * y.norm();
  };
  M.chart_box = Box::centered(2, 0.5);
  return M;
}

}  // namespace

TEST_CASE("fundamental tensor: Euclidean, scaling, Randers closed form") {
  auto M = euclidean(2);
  TangentSample s{vec2(0.1, -0.2), vec2(0.8, 0.6)};
  const Mat g = fundamental_tensor(M, s);
  CHECK((g - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-9);

  // constant rescale of F scales g by the square
  MetricEvaluator M3 = M;
  M3.value = [](const Vec&, const Vec& y) { return 3.0 * y.norm(); };
  const Mat g3 = fundamental_tensor(M3, s);
  CHECK((g3 - 9.0 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);

  // Randers b = (0.5, 0) at y = (1, 0): symbolic value diag(2.25, 1.5)
  auto R = randers(2, vec2(0.5, 0.0));
  TangentSample sr{vec2(0.0, 0.0), vec2(1.0, 0.0)};
  const Mat gr = fundamental_tensor(R, sr);
  CHECK(gr(0, 0) == doctest::Approx(2.25).epsilon(1e-8));
  CHECK(gr(1, 1) == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(std::abs(gr(0, 1)) < 1e-9);
  // determinant identity det g = (F/alpha)^(n+1) det a
  CHECK(gr.determinant() == doctest::Approx(std::pow(1.5, 3)).epsilon(1e-8));
}

TEST_CASE("fundamental tensor: degeneracy is an error carrying min eigenvalue") {
  MetricEvaluator M;
  M.dim = 2;
  M.id = "indefinite";
  M.value = [](const Vec&, const Vec& y) {
    return std::sqrt(y[0] * y[0] - 0.2 * y[1] * y[1]);
  };
  M.chart_box = Box::centered(2, 1.0);
  TangentSample s{vec2(0.0, 0.0), vec2(1.0, 0.05)};
  try {
    fundamental_tensor(M, s);
    FAIL("expected DegeneracyError");
  } catch (const DegeneracyError& e) {
    CHECK(e.min_eigenvalue < 0.0);
  }
}

TEST_CASE("cartan tensor: Riemannian vanishing, y-contraction, Randers vs diffkit") {
  auto D = diag_sq();
  TangentSample s{vec2(1.4, 0.2), vec2(0.7, -0.5)};
  CHECK(cartan_tensor(D, s).max_abs() < 1e-8);

  auto R = randers(2, vec2(0.4, 0.1));
  TangentSample sr{vec2(0.0, 0.0), vec2(0.9, 0.35)};
  const Tensor C = cartan_tensor(R, sr);
  // C_ijk y^k = 0
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      double acc = 0;
      for (int k = 0; k < 2; ++k) acc += C(i, j, k) * sr.y[k];
      CHECK(std::abs(acc) < 1e-7);
    }
  }
  // against a quarter of the diffkit third derivative of F^2
  diff::ScalarFn f2 = [&](const Vec& y) { return R.f2(sr.x, y); };
  diff::DiffConfig dc3;
  dc3.base_step = 5e-3;
  const Tensor t3 = diff::third(f2, sr.y, dc3);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        CHECK(std::abs(C(i, j, k) - 0.25 * t3(i, j, k)) < 1e-6);
      }
    }
  }
  CHECK(C.max_abs() > 1e-3);  // genuinely non-Riemannian
}

TEST_CASE("angular metric: Euclidean value, annihilates y, two routes agree") {
  auto M = euclidean(2);
  TangentSample s{vec2(0.0, 0.0), vec2(1.0, 0.0)};
  const Mat h = angular_metric(M, s);
  CHECK(std::abs(h(0, 0)) < 1e-9);
  CHECK(h(1, 1) == doctest::Approx(1.0).epsilon(1e-9));

  auto R = randers(2, vec2(0.3, -0.2));
  TangentSample sr{vec2(0.0, 0.0), vec2(-0.6, 1.1)};
  const Mat hr = angular_metric(R, sr);
  const Vec hy = hr * sr.y;
  CHECK(hy.cwiseAbs().maxCoeff() < 1e-7);
  // definition route: F * hessian_y(F)
  diff::ScalarFn f = [&](const Vec& y) { return R.value(sr.x, y); };
  const Mat Fyy = diff::hessian(f, sr.y);
  const double Fv = R.value(sr.x, sr.y);
  CHECK((hr - Fv * Fyy).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("matsumoto torsion: Riemannian zero, 3d Randers zero, quartic nonzero") {
  auto D = diag_sq();
  TangentSample s{vec2(1.3, -0.4), vec2(0.8, 0.4)};
  CHECK(matsumoto_torsion(D, s).max_abs() < 1e-8);

  Vec b3 = Vec::Zero(3);
  b3[0] = 0.3;
  auto R3 = randers(3, b3);
  Vec y3(3);
  y3 << 0.9, -0.4, 0.55;
  TangentSample s3{Vec::Zero(3), y3};
  CHECK(matsumoto_torsion(R3, s3).max_abs() < 1e-6);

  // regularized quartic metric is not Randers, so its Matsumoto torsion survives
  MetricEvaluator Q;
  Q.dim = 3;
  Q.id = "quartic";
  Q.value = [](const Vec&, const Vec& y) {
    const double q4 = std::pow(y[0], 4) + std::pow(y[1], 4) + std::pow(y[2], 4);
    const double q2 = y.squaredNorm();
    return std::pow(q4 + q2 * q2, 0.25);
  };
  Q.chart_box = Box::centered(3, 1.0);
  CHECK(matsumoto_torsion(Q, s3).max_abs() > 1e-4);
}

TEST_CASE("spray: Euclidean zero, Christoffel oracle, 2-homogeneity") {
  auto M = euclidean(2);
  TangentSample s{vec2(0.2, 0.1), vec2(0.6, -0.8)};
  CHECK(spray(M, s).cwiseAbs().maxCoeff() < 1e-9);

  auto D = diag_sq();
  TangentSample sd{vec2(1.5, 0.0), vec2(0.4, 0.9)};
  const Vec G = spray(D, sd);
  // G^1 = -x1 (y2)^2 / 2, G^2 = y1 y2 / x1
  CHECK(G[0] == doctest::Approx(-0.5 * 1.5 * 0.81).epsilon(1e-7));
  CHECK(G[1] == doctest::Approx(0.4 * 0.9 / 1.5).epsilon(1e-7));

  TangentSample s2{sd.x, 2.0 * sd.y};
  const Vec G2 = spray(D, s2);
  CHECK((G2 - 4.0 * G).cwiseAbs().maxCoeff() / G.cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("nonlinear connection: Euler identity and Christoffel oracle") {
  auto D = diag_sq();
  TangentSample s{vec2(1.2, -0.3), vec2(0.5, 0.7)};
  const Mat Gb = nonlinear_connection(D, s);
  // Gamma^i_jk y^k for diag(1, (x1)^2)
  const double x1 = s.x[0];
  Mat expect(2, 2);
  expect << 0.0, -x1 * s.y[1], s.y[1] / x1, s.y[0] / x1;
  CHECK((Gb - expect).cwiseAbs().maxCoeff() < 1e-6);

  // Euler identity G^i_j y^j = 2 G^i
  const Vec G = spray(D, s);
  CHECK((Gb * s.y - 2.0 * G).cwiseAbs().maxCoeff() < 1e-6);

  auto R = randers(2, vec2(0.3, 0.0));
  TangentSample sr{vec2(0.0, 0.0), vec2(1.1, -0.6)};
  const Mat GbR = nonlinear_connection(R, sr);
  const Vec GR = spray(R, sr);
  CHECK((GbR * sr.y - 2.0 * GR).cwiseAbs().maxCoeff() < 1e-6);
}

namespace {

// x-dependent Randers used for spray/Berwald cross-checks
MetricEvaluator randers_affine() {
  MetricEvaluator M;
  M.dim = 2;
  M.id = "randers-affine";
  M.value = [](const Vec& x, const Vec& y) {
    Vec b = vec2(0.2 + 0.1 * x[0], 0.0);
    return y.norm() + b.dot(y);
  };
  M.chart_box = Box::centered(2, 1.0);
  return M;
}

}  // namespace

TEST_CASE("berwald curvature: Riemannian zero, diffkit cross-check, trace") {
  auto D = diag_sq();
  TangentSample s{vec2(1.4, 0.1), vec2(0.8, -0.5)};
  Diagnostics diag;
  const Tensor B = berwald_curvature(D, s, {}, &diag);
  CHECK(B.max_abs() < 1e-5);
  CHECK(diag.degraded_accuracy);

  auto R = randers_affine();
  TangentSample sr{vec2(0.3, -0.2), vec2(1.0, 0.45)};
  const Tensor BR = berwald_curvature(R, sr);
  CHECK(BR.max_abs() > 1e-3);

  // independent route: diffkit third derivative of each spray component
  NumericsConfig cfg;
  for (int i = 0; i < 2; ++i) {
    diff::ScalarFn gi = [&](const Vec& y) {
      SprayField G(R, cfg);
      return G(sr.x, y)[i];
    };
    diff::DiffConfig dc;
    dc.base_step = 0.05;
    const Tensor t3 = diff::third(gi, sr.y, dc);
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        for (int l = 0; l < 2; ++l) {
          CHECK(std::abs(BR(i, j, k, l) - t3(j, k, l)) < 1e-4);
        }
      }
    }
  }

  // step-size self-consistency
  NumericsConfig alt = cfg;
  alt.berwald_step *= 0.7;
  const Tensor BR2 = berwald_curvature(R, sr, alt);
  double diffmax = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          diffmax = std::max(diffmax, std::abs(BR(i, j, k, l) - BR2(i, j, k, l)));
  CHECK(diffmax < 1e-4);

  // B^i_jkl y^l = 0
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        double acc = 0;
        for (int l = 0; l < 2; ++l) acc += BR(i, j, k, l) * sr.y[l];
        CHECK(std::abs(acc) < 5e-5);
      }
    }
  }

  const Mat E = mean_berwald_of(BR);
  CHECK((E - E.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("riemann curvature: flat zero, scaling, sphere flag curvature") {
  auto M = euclidean(2);
  TangentSample s{vec2(0.1, 0.3), vec2(0.7, 0.7)};
  CHECK(riemann_curvature(M, s).cwiseAbs().maxCoeff() < 1e-8);

  auto S = sphere2();
  TangentSample ss{vec2(0.15, -0.1), vec2(0.9, 0.35)};
  const Mat R = riemann_curvature(S, ss);
  TangentSample ss2{ss.x, 2.0 * ss.y};
  const Mat R2 = riemann_curvature(S, ss2);
  CHECK((R2 - 4.0 * R).cwiseAbs().maxCoeff() / R.cwiseAbs().maxCoeff() < 1e-4);

  FlagPlane P{ss.y, vec2(-0.4, 1.0)};
  const double K = flag_curvature(S, ss, P);
  CHECK(std::abs(K - 1.0) < 1e-4);
}

TEST_CASE("flag curvature: invariance under flag reparametrization") {
  auto S = sphere2();
  TangentSample s{vec2(-0.2, 0.05), vec2(0.6, -0.8)};
  FlagPlane P{s.y, vec2(1.0, 0.9)};
  const double K = flag_curvature(S, s, P);
  FlagPlane Pshift{s.y, Vec(P.u + 3.0 * s.y)};
  CHECK(std::abs(flag_curvature(S, s, Pshift) - K) < 1e-6 * std::max(1.0, std::abs(K)));
  FlagPlane Pscale{s.y, Vec(2.5 * P.u)};
  CHECK(std::abs(flag_curvature(S, s, Pscale) - K) < 1e-6 * std::max(1.0, std::abs(K)));

  FlagPlane degenerate{s.y, Vec(2.0 * s.y)};
  CHECK_THROWS_AS(flag_curvature(S, s, degenerate), Error);
}

TEST_CASE("ldf residual: flat chart zero, conformal example, Riemannian nonzero") {
  auto M = euclidean(2);
  TangentSample s{vec2(0.4, -0.1), vec2(1.0, -0.3)};
  CHECK(ldf_residual(M, s).cwiseAbs().maxCoeff() < 1e-9);

  // F^2 = (1 + x1) |y|^2: residual_l = 2 y_l y^1 - 2 delta_l1 |y|^2
  MetricEvaluator C;
  C.dim = 2;
  C.id = "conformal";
  C.value = [](const Vec& x, const Vec& y) { return std::sqrt((1.0 + x[0]) * y.squaredNorm()); };
  C.chart_box = Box::centered(2, 0.5);
  TangentSample sc{vec2(0.0, 0.0), vec2(1.0, 2.0)};
  const Vec rho = ldf_residual(C, sc);
  CHECK(rho[0] == doctest::Approx(-8.0).epsilon(1e-7));
  CHECK(rho[1] == doctest::Approx(4.0).epsilon(1e-7));

  auto D = diag_sq();
  TangentSample sd{vec2(1.5, 0.2), vec2(0.5, 0.8)};
  CHECK(ldf_residual(D, sd).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("homogeneity suite over samples") {
  auto R = randers(2, vec2(0.3, 0.1));
  SampleConfig sc;
  sc.count = 12;
  const auto samples = sample_tangent(R, sc);
  for (const auto& s : samples) {
    for (double lam : {0.5, 2.0, 3.0}) {
      TangentSample sl{s.x, Vec(lam * s.y)};
      // F is 1-homogeneous
      const double rel_f =
          std::abs(R.value(sl.x, sl.y) - lam * R.value(s.x, s.y)) / R.value(s.x, s.y);
      CHECK(rel_f < 1e-12);
      // g is 0-homogeneous
      const Mat g0 = fundamental_tensor(R, s);
      const Mat gl = fundamental_tensor(R, sl);
      CHECK((gl - g0).cwiseAbs().maxCoeff() < 1e-6);
      // C is (-1)-homogeneous
      const Tensor c0 = cartan_tensor(R, s);
      Tensor cl = cartan_tensor(R, sl);
      cl *= lam;
      Tensor d = cl;
      d -= c0;
      CHECK(d.max_abs() < 1e-6);
    }
  }
}

TEST_CASE("geodesic: straight line, conserved norm, Christoffel oracle, domain exit") {
  auto M = euclidean(2);
  auto traj = geodesic(M, vec2(0.0, 0.0), vec2(1.0, 0.0), 1.0, 1e-2);
  CHECK(!traj.truncated);
  const auto& last = traj.points.back();
  CHECK(last.x[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(last.x[1]) < 1e-12);

  auto D = diag_sq();
  const Vec x0 = vec2(1.5, 0.0), y0 = vec2(0.2, 0.6);
  auto td = geodesic(D, x0, y0, 1.0, 1e-3);
  CHECK(!td.truncated);
  CHECK(td.f_drift() < 1e-6);

  // independent Christoffel-symbol integrator
  auto gamma_rhs = [](const Vec& x, const Vec& y, Vec& dx, Vec& dy) {
    dx = y;
    dy = vec2(x[0] * y[1] * y[1], -2.0 * y[0] * y[1] / x[0]);
  };
  Vec x = x0, y = y0;
  const double dt = 1e-3;
  Vec k1x(2), k1y(2), k2x(2), k2y(2), k3x(2), k3y(2), k4x(2), k4y(2);
  for (int i = 0; i < 1000; ++i) {
    gamma_rhs(x, y, k1x, k1y);
    gamma_rhs(x + 0.5 * dt * k1x, y + 0.5 * dt * k1y, k2x, k2y);
    gamma_rhs(x + 0.5 * dt * k2x, y + 0.5 * dt * k2y, k3x, k3y);
    gamma_rhs(x + dt * k3x, y + dt * k3y, k4x, k4y);
    x += (dt / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x);
    y += (dt / 6.0) * (k1y + 2 * k2y + 2 * k3y + k4y);
  }
  CHECK((td.points.back().x - x).cwiseAbs().maxCoeff() < 1e-6);

  // domain exit truncates with a reason
  MetricEvaluator H = euclidean(2);
  H.domain = [](const Vec& x, const Vec&) { return x[0] < 0.5; };
  auto th = geodesic(H, vec2(0.0, 0.0), vec2(1.0, 0.0), 1.0, 1e-2);
  CHECK(th.truncated);
  CHECK(!th.exit_reason.empty());
  CHECK(th.points.back().t < 1.0);
}
