#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace ftwist {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Dense real tensor of small order (0..5). Used for derivative
/// coefficients and curvature blocks; sizes stay tiny (dim <= ~10),
/// so storage is a flat vector with row-major strides.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> dims) : dims_(std::move(dims)) {
    std::size_t n = 1;
    for (int d : dims_) {
      assert(d >= 0);
      n *= static_cast<std::size_t>(d);
    }
    strides_.assign(dims_.size(), 1);
    for (int k = static_cast<int>(dims_.size()) - 2; k >= 0; --k) {
      strides_[k] = strides_[k + 1] * static_cast<std::size_t>(dims_[k + 1]);
    }
    data_.assign(n, 0.0);
  }

  /// Tensor with `order` slots, all of dimension n.
  static Tensor cube(int order, int n) {
    return Tensor(std::vector<int>(static_cast<std::size_t>(order), n));
  }

  int order() const { return static_cast<int>(dims_.size()); }
  int dim(int slot) const { return dims_[static_cast<std::size_t>(slot)]; }
  const std::vector<int>& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }

  double at(std::span<const int> idx) const { return data_[offset(idx)]; }
  double& at(std::span<const int> idx) { return data_[offset(idx)]; }

  template <class... I>
  double operator()(I... idx) const {
    const int buf[] = {static_cast<int>(idx)...};
    return at(std::span<const int>(buf, sizeof...(I)));
  }
  template <class... I>
  double& operator()(I... idx) {
    const int buf[] = {static_cast<int>(idx)...};
    return at(std::span<const int>(buf, sizeof...(I)));
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  Tensor& operator+=(const Tensor& o) {
    assert(dims_ == o.dims_);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    assert(dims_ == o.dims_);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Tensor& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

 private:
  std::size_t offset(std::span<const int> idx) const {
    assert(idx.size() == dims_.size());
    std::size_t off = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      assert(idx[k] >= 0 && idx[k] < dims_[k]);
      off += static_cast<std::size_t>(idx[k]) * strides_[k];
    }
    return off;
  }

  std::vector<int> dims_;
  std::vector<std::size_t> strides_;
  std::vector<double> data_;
};

/// Visits every non-decreasing multi-index of length `order` over {0..n-1}.
template <class F>
void for_each_sym_index(int n, int order, F&& fn) {
  std::vector<int> idx(static_cast<std::size_t>(order), 0);
  while (true) {
    fn(std::span<const int>(idx));
    int k = order - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == n - 1) --k;
    if (k < 0) break;
    const int v = idx[static_cast<std::size_t>(k)] + 1;
    for (int j = k; j < order; ++j) idx[static_cast<std::size_t>(j)] = v;
  }
}

/// Writes `value` at every distinct permutation of `idx` (idx need not be sorted).
inline void sym_spread(Tensor& t, std::span<const int> idx, double value) {
  std::vector<int> p(idx.begin(), idx.end());
  std::sort(p.begin(), p.end());
  do {
    t.at(p) = value;
  } while (std::next_permutation(p.begin(), p.end()));
}

inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }
inline double max_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace ftwist
