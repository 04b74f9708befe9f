#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ecp/ecptest.hpp"
#include "ecp/pwspace.hpp"

namespace ecp {

/// Thrown when a design operation is asked for on a space whose
/// good-for-design test came back negative; carries the failing outcome.
struct NotCertified : Error {
  explicit NotCertified(TestOutcome failed)
      : Error(std::string("space is not good for design (stage ") + stage_name(failed.stage) +
              ")"),
        outcome(std::move(failed)) {}
  TestOutcome outcome;
};

enum class Side { left, right };

/// Normalised global Bernstein basis of a certified space: B_i = alpha_i V_i
/// where (V_i) is the global Bernstein-like basis of the space itself and
/// the alpha_i expand the constant 1.
class GlobalBernsteinBasis {
 public:
  GlobalBernsteinBasis(PWSpace space, LocalBasisSet locals, GammaTensor gamma,
                       std::vector<double> alpha)
      : space_(std::move(space)),
        locals_(std::move(locals)),
        gamma_(std::move(gamma)),
        alpha_(std::move(alpha)) {}

  const PWSpace& space() const { return space_; }
  int dim() const { return space_.dim(); }
  const std::vector<double>& normalization() const { return alpha_; }
  const GammaTensor& gamma() const { return gamma_; }

  /// Interval index whose local expansion evaluates x^side.
  int locate(double x, Side side) const {
    const Partition& part = space_.partition();
    if (x < part.a() || x > part.b()) throw std::domain_error("curve parameter outside [a,b]");
    int k = 0;
    while (k < part.interior_count() && x >= part.knot(k + 1)) ++k;
    if (side == Side::left && k > 0 && x == part.knot(k)) --k;
    return k;
  }

  double eval(int i, double x, Side side = Side::right) const {
    const int k = locate(x, side);
    const SectionSpace& s = space_.section(k);
    double v = 0.0;
    for (int r = 0; r < dim(); ++r)
      v += gamma_.at(i, k, r) * local_basis_value(s, locals_.bases[k], r, x);
    return alpha_[i] * v;
  }

 private:
  PWSpace space_;
  LocalBasisSet locals_;
  GammaTensor gamma_;
  std::vector<double> alpha_;
};

/// Certify the space, build its own global Bernstein-like basis, and solve
/// the triangular expansion of the constant 1 to normalise it. The same
/// expansion solved from the right end must agree, and all normalisation
/// coefficients must be positive; anything else contradicts the certificate.
inline GlobalBernsteinBasis global_bernstein_basis(const PWSpace& space,
                                                   const TestConfig& config = {}) {
  TestOutcome certificate = good_for_design(space, config);
  if (!certificate.is_ecp()) throw NotCertified(std::move(certificate));

  LocalBasisSet locals = build_local_bases(space, config);
  GlobalBasisResult built = build_global_basis(space, locals, config);
  if (!built.gamma)
    throw InternalInconsistency(
        "global basis system unreliable although the space certified good for design");
  GammaTensor gamma = std::move(*built.gamma);

  const int n = space.n();
  const int q = space.q();

  // Taylor-match the constant 1 at the left end: the coefficient matrix
  // T(j, i) = d^j V_i(a) is lower triangular because V_i vanishes i times
  // at a. Forward substitution gives alpha.
  std::vector<double> alpha(n + 1, 0.0);
  for (int j = 0; j <= n; ++j) {
    double rhs = (j == 0) ? 1.0 : 0.0;
    for (int i = 0; i < j; ++i) {
      double t = 0.0;
      for (int r = 0; r <= n; ++r) t += gamma.at(i, 0, r) * locals.left[0](r, j);
      rhs -= t * alpha[i];
    }
    double diag = 0.0;
    for (int r = 0; r <= n; ++r) diag += gamma.at(j, 0, r) * locals.left[0](r, j);
    alpha[j] = rhs / diag;
  }

  // Same match at the right end (anti-triangular): consistency check.
  std::vector<double> alpha_b(n + 1, 0.0);
  for (int j = 0; j <= n; ++j) {
    double rhs = (j == 0) ? 1.0 : 0.0;
    for (int i = n - j + 1; i <= n; ++i) {
      double t = 0.0;
      for (int r = 0; r <= n; ++r) t += gamma.at(i, q, r) * locals.right[q](r, j);
      rhs -= t * alpha_b[i];
    }
    double diag = 0.0;
    for (int r = 0; r <= n; ++r) diag += gamma.at(n - j, q, r) * locals.right[q](r, j);
    alpha_b[n - j] = rhs / diag;
  }
  for (int i = 0; i <= n; ++i) {
    if (!(alpha[i] > 0.0))
      throw InternalInconsistency("non-positive normalisation coefficient alpha_" +
                                  std::to_string(i));
    if (std::abs(alpha[i] - alpha_b[i]) > 1e-8 * std::max(1.0, std::abs(alpha[i])))
      throw InternalInconsistency("normalisation from the two interval ends disagrees");
  }

  return GlobalBernsteinBasis(space, std::move(locals), std::move(gamma), std::move(alpha));
}

/// Parametric curve with Bezier points P_0..P_n in R^d over a certified space.
struct BezierCurve {
  GlobalBernsteinBasis basis;
  std::vector<std::vector<double>> points;

  BezierCurve(GlobalBernsteinBasis b, std::vector<std::vector<double>> control)
      : basis(std::move(b)), points(std::move(control)) {
    if (static_cast<int>(points.size()) != basis.dim())
      throw std::invalid_argument("need exactly dim control points");
    for (const auto& p : points)
      if (p.size() != points.front().size())
        throw std::invalid_argument("control points must share one dimension");
  }

  int coord_dim() const { return static_cast<int>(points.front().size()); }
};

inline std::vector<double> eval_curve(const BezierCurve& curve, double x,
                                      Side side = Side::right) {
  std::vector<double> out(curve.coord_dim(), 0.0);
  for (int i = 0; i < curve.basis.dim(); ++i) {
    const double w = curve.basis.eval(i, x, side);
    for (int c = 0; c < curve.coord_dim(); ++c) out[c] += w * curve.points[i][c];
  }
  return out;
}

struct CurveSample {
  double x = 0.0;
  Side side = Side::right;
  std::vector<double> point;
};

/// m uniform parameter samples; samples landing on an interior knot are
/// resolved to the requested side (right by default).
inline std::vector<CurveSample> sample_curve(const BezierCurve& curve, int m,
                                             Side knot_side = Side::right) {
  if (m < 2) throw std::invalid_argument("sample_curve needs m >= 2");
  const Partition& part = curve.basis.space().partition();
  std::vector<CurveSample> samples;
  samples.reserve(m);
  for (int j = 0; j < m; ++j) {
    double x = part.a() + (part.b() - part.a()) * j / (m - 1.0);
    if (j == m - 1) x = part.b();
    Side side = knot_side;
    if (x == part.a()) side = Side::right;
    if (x == part.b()) side = Side::left;
    samples.push_back({x, side, eval_curve(curve, x, side)});
  }
  return samples;
}

}  // namespace ecp
