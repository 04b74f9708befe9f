#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <utility>
#include <vector>

#include "ecp/errors.hpp"

namespace ecp {

/// Dense row-major matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, fill) {}

  static DenseMatrix identity(int n) {
    DenseMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  bool operator==(const DenseMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
  }

  /// max absolute row sum
  double inf_norm() const {
    double best = 0.0;
    for (int i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (int j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
      best = std::max(best, s);
    }
    return best;
  }

  /// max absolute column sum
  double one_norm() const {
    double best = 0.0;
    for (int j = 0; j < cols_; ++j) {
      double s = 0.0;
      for (int i = 0; i < rows_; ++i) s += std::abs((*this)(i, j));
      best = std::max(best, s);
    }
    return best;
  }

  bool all_finite() const {
    for (double v : a_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

inline std::vector<double> multiply(const DenseMatrix& m, const std::vector<double>& v) {
  std::vector<double> out(m.rows(), 0.0);
  for (int i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

inline double inf_norm(const std::vector<double>& v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, std::abs(x));
  return best;
}

inline double one_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

/// LU factorization with row pivoting. Stores L (unit diagonal) and U packed
/// in one matrix plus the row permutation. Throws SingularSystem only on an
/// exactly zero pivot; small pivots are reported through pivot_ratio().
class LuFactorization {
 public:
  explicit LuFactorization(DenseMatrix a) : lu_(std::move(a)) {
    const int n = lu_.rows();
    perm_.resize(n);
    for (int i = 0; i < n; ++i) perm_[i] = i;
    pivot_min_ = std::numeric_limits<double>::infinity();
    pivot_max_ = 0.0;
    for (int col = 0; col < n; ++col) {
      int piv = col;
      double best = std::abs(lu_(col, col));
      for (int i = col + 1; i < n; ++i) {
        if (std::abs(lu_(i, col)) > best) {
          best = std::abs(lu_(i, col));
          piv = i;
        }
      }
      if (best == 0.0) throw SingularSystem("exact zero pivot in column " + std::to_string(col));
      if (piv != col) {
        for (int j = 0; j < n; ++j) std::swap(lu_(col, j), lu_(piv, j));
        std::swap(perm_[col], perm_[piv]);
      }
      pivot_min_ = std::min(pivot_min_, best);
      pivot_max_ = std::max(pivot_max_, best);
      for (int i = col + 1; i < n; ++i) {
        const double f = lu_(i, col) / lu_(col, col);
        lu_(i, col) = f;
        for (int j = col + 1; j < n; ++j) lu_(i, j) -= f * lu_(col, j);
      }
    }
  }

  int order() const { return lu_.rows(); }

  double pivot_ratio() const {
    return pivot_max_ > 0.0 ? pivot_min_ / pivot_max_ : 0.0;
  }

  /// x with A x = b
  std::vector<double> solve(const std::vector<double>& b) const {
    const int n = order();
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
    for (int i = n - 1; i >= 0; --i) {
      for (int j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
      x[i] /= lu_(i, i);
    }
    return x;
  }

  /// z with A^T z = c
  std::vector<double> solve_transpose(const std::vector<double>& c) const {
    const int n = order();
    std::vector<double> w(c);
    // U^T w = c (forward), then L^T v = w (backward), then undo permutation.
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < i; ++j) w[i] -= lu_(j, i) * w[j];
      w[i] /= lu_(i, i);
    }
    for (int i = n - 1; i >= 0; --i)
      for (int j = i + 1; j < n; ++j) w[i] -= lu_(j, i) * w[j];
    std::vector<double> z(n);
    for (int i = 0; i < n; ++i) z[perm_[i]] = w[i];
    return z;
  }

 private:
  DenseMatrix lu_;
  std::vector<int> perm_;
  double pivot_min_ = 0.0;
  double pivot_max_ = 0.0;
};

/// Hager-style 1-norm estimate of ||A^{-1}|| on an existing factorization,
/// so that the condition estimate costs O(n^2) instead of a full inverse.
inline double estimate_inverse_one_norm(const LuFactorization& lu) {
  const int n = lu.order();
  if (n == 0) return 0.0;
  std::vector<double> x(n, 1.0 / n);
  double est = 0.0;
  for (int iter = 0; iter < 5; ++iter) {
    std::vector<double> y = lu.solve(x);
    est = std::max(est, one_norm(y));
    std::vector<double> xi(n);
    for (int i = 0; i < n; ++i) xi[i] = (y[i] >= 0.0) ? 1.0 : -1.0;
    std::vector<double> z = lu.solve_transpose(xi);
    int j = 0;
    double zmax = std::abs(z[0]);
    for (int i = 1; i < n; ++i) {
      if (std::abs(z[i]) > zmax) {
        zmax = std::abs(z[i]);
        j = i;
      }
    }
    double ztx = 0.0;
    for (int i = 0; i < n; ++i) ztx += z[i] * x[i];
    if (zmax <= ztx) break;
    std::fill(x.begin(), x.end(), 0.0);
    x[j] = 1.0;
  }
  return est;
}

struct SolveReport {
  std::vector<double> x;
  double condition_estimate = 1.0;  // 1-norm based, >= 1 when defined
  double pivot_ratio = 0.0;         // |smallest pivot| / |largest pivot|
};

/// Direct solve of a square system with row pivoting plus the reliability
/// data used to decide whether the result can be trusted.
inline SolveReport solve(const DenseMatrix& a, const std::vector<double>& b) {
  if (a.rows() != a.cols() || a.rows() != static_cast<int>(b.size()))
    throw std::invalid_argument("solve: dimension mismatch");
  if (!a.all_finite()) throw std::invalid_argument("solve: non-finite matrix entry");
  LuFactorization lu(a);
  SolveReport rep;
  rep.x = lu.solve(b);
  rep.pivot_ratio = lu.pivot_ratio();
  const double inv_norm = estimate_inverse_one_norm(lu);
  rep.condition_estimate = std::max(1.0, a.one_norm() * inv_norm);
  return rep;
}

/// Guard against nearly singular or very ill-conditioned systems. Both
/// bounds are inclusive; defaults are overridable from the CLI.
inline bool is_reliable(const SolveReport& rep, double kappa_max = 1e12,
                        double pivot_floor = 1e-14) {
  return rep.condition_estimate <= kappa_max && rep.pivot_ratio >= pivot_floor;
}

}  // namespace ecp
