#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ftwist/diffkit.hpp"
#include "ftwist/metric.hpp"

namespace ftwist::core {

/// Step schedule for the finite-difference layers. Direct stencils act on
/// the exact scalar F^2; outer steps act on assembled fields (the spray and
/// friends) whose values already carry small numeric noise, so they are
/// larger. All steps are further scaled by coordinate magnitude.
struct NumericsConfig {
  double jet_step[6] = {0, 0, 5.0e-3, 8e-3, 1.2e-2, 1.8e-2};  // per fiber order
  double mixed_step = 5.0e-3;  // dF^2/dx, d^2F^2/dx dy
  int jet_richardson = 1;

  double conn_step = 1.0e-2;     // first fiber derivative of the spray
  double vert2_step = 2.5e-2;    // second fiber derivative of the spray
  double berwald_step = 5.5e-2;  // third fiber derivative of the spray
  double riemann_step = 2.0e-2;  // base/mixed derivatives of the spray
  int outer_richardson = 1;

  double cond_warn = 1e8;

  /// Steps tuned to the evaluator: analytic jets leave almost no noise in
  /// the assembled spray, so the outer stencils can afford smaller steps.
  static NumericsConfig tuned(const MetricEvaluator& M) {
    NumericsConfig c;
    if (M.fiber_jet && M.f2_dx && M.f2_dxdy) {
      c.conn_step = 4.0e-3;
      c.vert2_step = 1.0e-2;
      c.berwald_step = 2.0e-2;
      c.riemann_step = 6.0e-3;
    }
    return c;
  }
};

/// Collects conditioning reports and degraded-accuracy notes.
struct Diagnostics {
  double max_condition = 0.0;
  bool degraded_accuracy = false;
  std::vector<std::string> warnings;
};

/// F^2 fiber jet: analytic callback when present, direct stencils otherwise.
FiberJet fiber_jet(const MetricEvaluator& M, const Vec& x, const Vec& y,
                   int order, const NumericsConfig& cfg = {});

Vec f2_dx(const MetricEvaluator& M, const Vec& x, const Vec& y,
          const NumericsConfig& cfg = {});
Mat f2_dxdy(const MetricEvaluator& M, const Vec& x, const Vec& y,
            const NumericsConfig& cfg = {});

/// g_ij = half fiber hessian of F^2. Throws DegeneracyError when the result
/// is not positive definite.
Mat fundamental_tensor(const MetricEvaluator& M, const TangentSample& s,
                       const NumericsConfig& cfg = {}, Diagnostics* diag = nullptr);

/// C_ijk = quarter third fiber derivative of F^2 (fully symmetric).
Tensor cartan_tensor(const MetricEvaluator& M, const TangentSample& s,
                     const NumericsConfig& cfg = {}, Diagnostics* diag = nullptr);

/// I_i = g^{jk} C_ijk.
Vec mean_cartan(const MetricEvaluator& M, const TangentSample& s,
                const NumericsConfig& cfg = {}, Diagnostics* diag = nullptr);

/// Cartan norm squared C^2 = I^i I_i.
double mean_cartan_sq(const MetricEvaluator& M, const TangentSample& s,
                      const NumericsConfig& cfg = {}, Diagnostics* diag = nullptr);

/// h_ij = g_ij - y_i y_j / F^2; annihilates y.
Mat angular_metric(const MetricEvaluator& M, const TangentSample& s,
                   const NumericsConfig& cfg = {}, Diagnostics* diag = nullptr);

/// M_ijk = C_ijk - (I_i h_jk + I_j h_ik + I_k h_ij) / (n + 1).
Tensor matsumoto_torsion(const MetricEvaluator& M, const TangentSample& s,
                         const NumericsConfig& cfg = {}, Diagnostics* diag = nullptr);

/// Spray coefficients G^i = 1/4 g^{il} (d^2F^2/dx^k dy^l y^k - dF^2/dx^l).
Vec spray(const MetricEvaluator& M, const TangentSample& s,
          const NumericsConfig& cfg = {}, Diagnostics* diag = nullptr);

/// G^i_j = dG^i/dy^j.
Mat nonlinear_connection(const MetricEvaluator& M, const TangentSample& s,
                         const NumericsConfig& cfg = {}, Diagnostics* diag = nullptr);

/// G^a_bc = d^2 G^a / dy^b dy^c (classical vertical connection coefficients),
/// slots [a][b][c].
Tensor berwald_connection(const MetricEvaluator& M, const TangentSample& s,
                          const NumericsConfig& cfg = {}, Diagnostics* diag = nullptr);

/// B^i_jkl = d^3 G^i / dy^j dy^k dy^l, slots [i][j][k][l].
Tensor berwald_curvature(const MetricEvaluator& M, const TangentSample& s,
                         const NumericsConfig& cfg = {}, Diagnostics* diag = nullptr);

/// E_jk = half trace of the Berwald curvature.
Mat mean_berwald(const MetricEvaluator& M, const TangentSample& s,
                 const NumericsConfig& cfg = {}, Diagnostics* diag = nullptr);
Mat mean_berwald_of(const Tensor& berwald);

/// R^i_k = 2 dG^i/dx^k - y^j d^2G^i/dx^j dy^k + 2 G^j d^2G^i/dy^j dy^k
///         - dG^i/dy^j dG^j/dy^k.
Mat riemann_curvature(const MetricEvaluator& M, const TangentSample& s,
                      const NumericsConfig& cfg = {}, Diagnostics* diag = nullptr);

/// Flag curvature of the plane span{y, u} with flagpole y.
double flag_curvature(const MetricEvaluator& M, const TangentSample& s,
                      const FlagPlane& plane, const NumericsConfig& cfg = {},
                      Diagnostics* diag = nullptr);

/// Residual of the dually-flat chart condition:
/// rho_l = (F^2)_{x^k y^l} y^k - 2 (F^2)_{x^l}.
Vec ldf_residual(const MetricEvaluator& M, const TangentSample& s,
                 const NumericsConfig& cfg = {}, Diagnostics* diag = nullptr);

// --- geodesics ------------------------------------------------------------

struct TrajectoryPoint {
  double t;
  Vec x, y;
  double F;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  bool truncated = false;
  std::string exit_reason;

  double f_drift() const;
};

using SprayFn = std::function<Vec(const Vec& x, const Vec& y)>;

/// RK4 integration of xdot = y, ydot = -2 G(x, y) for an arbitrary spray.
Trajectory integrate_spray(const SprayFn& G, const MetricEvaluator& M,
                           const Vec& x0, const Vec& y0, double t_end, double dt);

Trajectory geodesic(const MetricEvaluator& M, const Vec& x0, const Vec& y0,
                    double t_end, double dt, const NumericsConfig& cfg = {},
                    Diagnostics* diag = nullptr);

/// Reusable spray evaluation bound to one metric (shares the step config).
class SprayField {
 public:
  SprayField(const MetricEvaluator& M, const NumericsConfig& cfg = {},
             Diagnostics* diag = nullptr)
      : m_(&M), cfg_(cfg), diag_(diag) {}

  Vec operator()(const Vec& x, const Vec& y) const;

 private:
  const MetricEvaluator* m_;
  NumericsConfig cfg_;
  Diagnostics* diag_;
};

namespace detail {

/// Tensor-product central stencil for a vector-valued map, with Richardson
/// extrapolation; the vector analogue of diff::detail::richardson_partial.
Vec stencil_vec(const std::function<Vec(const Vec&)>& V, const Vec& z0,
                std::span<const int> orders, std::span<const double> steps,
                int levels);

/// SPD solve with optional conditioning report; throws DegeneracyError.
Mat spd_inverse(const Mat& g, double cond_warn, Diagnostics* diag,
                const std::string& who);
Vec spd_solve(const Mat& g, const Vec& rhs, double cond_warn, Diagnostics* diag,
              const std::string& who);

}  // namespace detail

}  // namespace ftwist::core
