#pragma once

#include <utility>
#include <vector>

#include "ecp/errors.hpp"
#include "ecp/linalg.hpp"
#include "ecp/sections.hpp"

namespace ecp {

/// Strictly increasing knots t_0 < t_1 < ... < t_{q+1}. q = 0 (no interior
/// knots) is first-class so the same machinery covers plain EC-spaces.
class Partition {
 public:
  explicit Partition(std::vector<double> knots) : knots_(std::move(knots)) {
    if (knots_.size() < 2) throw std::invalid_argument("partition needs at least two knots");
    for (size_t i = 0; i + 1 < knots_.size(); ++i)
      if (!(knots_[i] < knots_[i + 1]))
        throw std::invalid_argument("knots must be strictly increasing");
  }

  int interior_count() const { return static_cast<int>(knots_.size()) - 2; }
  double knot(int k) const { return knots_[k]; }
  double a() const { return knots_.front(); }
  double b() const { return knots_.back(); }
  const std::vector<double>& knots() const { return knots_; }

 private:
  std::vector<double> knots_;
};

/// Lower-triangular connection matrix with positive diagonal, validated at
/// construction. Stored dense.
class ConnectionMatrix {
 public:
  explicit ConnectionMatrix(DenseMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw std::invalid_argument("connection matrix must be square");
    if (!m_.all_finite()) throw std::invalid_argument("connection matrix has non-finite entry");
    for (int p = 0; p < m_.rows(); ++p) {
      for (int r = p + 1; r < m_.cols(); ++r)
        if (m_(p, r) != 0.0)
          throw std::invalid_argument("connection matrix must be lower triangular");
      if (!(m_(p, p) > 0.0))
        throw std::invalid_argument("connection matrix needs positive diagonal entries");
    }
  }

  int order() const { return m_.rows(); }
  double operator()(int p, int r) const { return m_(p, r); }
  const DenseMatrix& dense() const { return m_; }

  /// Matrix with row 0 and column 0 removed.
  ConnectionMatrix truncated() const {
    DenseMatrix t(order() - 1, order() - 1);
    for (int p = 1; p < order(); ++p)
      for (int r = 1; r < order(); ++r) t(p - 1, r - 1) = m_(p, r);
    return ConnectionMatrix(std::move(t));
  }

 private:
  DenseMatrix m_;
};

/// Piecewise space: knot partition, one section-space per interval, and one
/// connection matrix per interior knot. Immutable after construction.
class PWSpace {
 public:
  PWSpace(Partition partition, std::vector<SectionSpace> sections,
          std::vector<ConnectionMatrix> matrices)
      : partition_(std::move(partition)),
        sections_(std::move(sections)),
        matrices_(std::move(matrices)) {
    const int q = partition_.interior_count();
    if (static_cast<int>(sections_.size()) != q + 1)
      throw std::invalid_argument("need one section-space per knot interval");
    if (static_cast<int>(matrices_.size()) != q)
      throw std::invalid_argument("need one connection matrix per interior knot");
    const int d = sections_.front().dim();
    for (int k = 0; k <= q; ++k) {
      if (sections_[k].dim() != d)
        throw std::invalid_argument("all section-spaces must share one dimension");
      if (sections_[k].lower() != partition_.knot(k) ||
          sections_[k].upper() != partition_.knot(k + 1))
        throw std::invalid_argument("section " + std::to_string(k) +
                                    " does not live on its knot interval");
    }
    for (const ConnectionMatrix& m : matrices_)
      if (m.order() != d)
        throw std::invalid_argument("connection matrix order must equal the space dimension");
  }

  const Partition& partition() const { return partition_; }
  int q() const { return partition_.interior_count(); }
  int dim() const { return sections_.front().dim(); }
  int n() const { return dim() - 1; }
  const SectionSpace& section(int k) const { return sections_[k]; }
  const std::vector<SectionSpace>& sections() const { return sections_; }
  /// connection matrix at interior knot t_k, k = 1..q
  const ConnectionMatrix& matrix(int k) const { return matrices_[k - 1]; }
  const std::vector<ConnectionMatrix>& matrices() const { return matrices_; }

 private:
  Partition partition_;
  std::vector<SectionSpace> sections_;
  std::vector<ConnectionMatrix> matrices_;
};

/// True iff every section starts with the constant 1 and each connection
/// matrix has exact first column (1, 0, ..., 0)^T.
inline bool contains_constants(const PWSpace& space) {
  for (const SectionSpace& s : space.sections())
    if (!s.starts_with_constant()) return false;
  for (const ConnectionMatrix& m : space.matrices()) {
    if (m(0, 0) != 1.0) return false;
    for (int p = 1; p < m.order(); ++p)
      if (m(p, 0) != 0.0) return false;
  }
  return true;
}

/// The n-dimensional piecewise space of derivatives: sections are
/// differentiated term-wise, matrices lose their first row and column.
inline PWSpace derivative_space(const PWSpace& space) {
  if (!contains_constants(space))
    throw std::invalid_argument("derivative_space: space does not contain constants");
  if (space.n() < 1) throw std::invalid_argument("derivative_space: need dimension >= 2");
  std::vector<SectionSpace> sections;
  sections.reserve(space.sections().size());
  for (const SectionSpace& s : space.sections()) sections.push_back(derivative_section(s));
  std::vector<ConnectionMatrix> matrices;
  matrices.reserve(space.matrices().size());
  for (const ConnectionMatrix& m : space.matrices()) matrices.push_back(m.truncated());
  return PWSpace(space.partition(), std::move(sections), std::move(matrices));
}

/// || right - M_k * left ||_inf for derivative vectors of orders 0..n at
/// interior knot t_k. Used by harnesses to verify candidate global bases.
inline double connection_residual(const PWSpace& space, int k,
                                  const std::vector<double>& left_derivs,
                                  const std::vector<double>& right_derivs) {
  const ConnectionMatrix& m = space.matrix(k);
  double worst = 0.0;
  for (int p = 0; p < m.order(); ++p) {
    double s = right_derivs[p];
    for (int r = 0; r <= p; ++r) s -= m(p, r) * left_derivs[r];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

}  // namespace ecp
