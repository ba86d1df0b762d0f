#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ftwist/metric.hpp"
#include "ftwist/twist.hpp"

namespace ftwist::lib {

enum class MetricKind { euclidean, riemannian_matrix, randers };

/// Serializable description of a component metric. Riemannian matrices come
/// from a named family; Randers metrics are alpha + beta with a constant
/// alpha-matrix and an affine covector b(x) = b0 + b_slope * x.
struct MetricSpec {
  std::string id;
  MetricKind kind = MetricKind::euclidean;
  int dim = 2;

  std::string matrix_family = "identity";  // identity | const | diag-sq | sphere
  Mat a;                                   // alpha matrix (const family / randers)
  Vec b0;
  Mat b_slope;  // b(x)_m = b0_m + sum_l b_slope(m, l) x_l

  Box chart_box;  // defaulted per kind when empty
  std::set<std::string> declared_properties;  // riemannian, berwald,
                                              // weakly-berwald, dually-flat
};

enum class TwistKind { constant, exp_x, exp_u, trig_mixed };

struct TwistSpec {
  std::string id;
  TwistKind kind = TwistKind::constant;
  double c = 1.0;    // constant value
  double eps = 0.1;  // trig-mixed amplitude (|eps| <= 0.2)
  Vec a;             // exp-x coefficients (length n1)
  Vec b;             // exp-u coefficients (length n2)
};

/// Builds the evaluator with exact fiber jets and analytic base derivatives;
/// validates the spec invariants (Randers covector bound, declared
/// properties) and throws ConstructionError naming the violated bound.
MetricEvaluator instantiate(const MetricSpec& spec);

/// Builds the twist function; grid-checks positivity over the two boxes and
/// cross-checks the analytic partials against finite differences.
TwistFunction instantiate_twist(const TwistSpec& spec, const Box& box1,
                                const Box& box2);

struct CatalogEntry {
  std::string id;
  MetricSpec m1, m2;
  TwistSpec twist;
};

/// Standard metric/twist combinations powering the example and acceptance
/// batteries: trivial flat, warped (f on the first factor), twisted mixed,
/// Randers x Riemannian, Riemannian x Randers, Randers x Randers, and the
/// Berwald/weakly-Berwald failure witnesses.
const std::vector<CatalogEntry>& catalog();

std::optional<CatalogEntry> find_combo(const std::string& id);
std::optional<MetricSpec> find_metric(const std::string& id);

// exact derivatives of alpha(y) = sqrt(y . a . y), orders 0..5
struct AlphaJet {
  double value = 0.0;
  Vec d1;
  Mat d2;
  Tensor d3, d4, d5;
};
AlphaJet alpha_jet(const Mat& a, const Vec& y, int order);

}  // namespace ftwist::lib
