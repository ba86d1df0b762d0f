#include <cmath>

#include "ftwist/core.hpp"
#include "ftwist/errors.hpp"

namespace ftwist::core {

double Trajectory::f_drift() const {
  if (points.empty()) return 0.0;
  const double f0 = points.front().F;
  double d = 0.0;
  for (const auto& p : points) d = std::max(d, std::abs(p.F - f0));
  return d;
}

Trajectory integrate_spray(const SprayFn& G, const MetricEvaluator& M,
                           const Vec& x0, const Vec& y0, double t_end, double dt) {
  if (dt <= 0.0 || t_end <= 0.0) throw Error("geodesic: dt and t_end must be positive");
  if (!M.in_domain(x0, y0)) {
    throw EvalDomainError("geodesic: initial condition outside the declared domain");
  }

  const auto n_steps = static_cast<long>(std::llround(t_end / dt));
  Trajectory traj;
  traj.points.reserve(static_cast<std::size_t>(n_steps) + 1);

  Vec x = x0, y = y0;
  traj.points.push_back({0.0, x, y, M.value(x, y)});

  auto rhs = [&](const Vec& xs, const Vec& ys, Vec& dx, Vec& dy) {
    if (!M.in_domain(xs, ys)) {
      throw EvalDomainError("geodesic: left the declared domain");
    }
    dx = ys;
    dy = -2.0 * G(xs, ys);
  };

  Vec k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y;
  for (long step = 0; step < n_steps; ++step) {
    const double t = static_cast<double>(step) * dt;
    try {
      rhs(x, y, k1x, k1y);
      rhs(x + 0.5 * dt * k1x, y + 0.5 * dt * k1y, k2x, k2y);
      rhs(x + 0.5 * dt * k2x, y + 0.5 * dt * k2y, k3x, k3y);
      rhs(x + dt * k3x, y + dt * k3y, k4x, k4y);
    } catch (const EvalDomainError& e) {
      traj.truncated = true;
      traj.exit_reason = std::string(e.what()) + " at t=" + std::to_string(t);
      return traj;
    }
    x += (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    y += (dt / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    if (!M.in_domain(x, y)) {
      traj.truncated = true;
      traj.exit_reason = "left the declared domain at t=" + std::to_string(t + dt);
      return traj;
    }
    traj.points.push_back({t + dt, x, y, M.value(x, y)});
  }
  return traj;
}

Trajectory geodesic(const MetricEvaluator& M, const Vec& x0, const Vec& y0,
                    double t_end, double dt, const NumericsConfig& cfg,
                    Diagnostics* diag) {
  SprayField G(M, cfg, nullptr);
  if (diag) {
    // one conditioning probe at the initial point
    SprayField probe(M, cfg, diag);
    probe(x0, y0);
  }
  return integrate_spray([&](const Vec& x, const Vec& y) { return G(x, y); }, M, x0,
                         y0, t_end, dt);
}

}  // namespace ftwist::core
