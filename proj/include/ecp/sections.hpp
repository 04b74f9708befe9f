#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ecp/errors.hpp"
#include "ecp/linalg.hpp"

namespace ecp {

// --- closed-form basis functions ---------------------------------------

/// coeff * x^power
struct PolyTerm {
  double coeff = 0.0;
  int power = 0;
};

/// c*cos(x) + s*sin(x)
struct CircTerm {
  double c = 0.0;
  double s = 0.0;
};

/// c*cosh(x) + s*sinh(x)
struct HypTerm {
  double c = 0.0;
  double s = 0.0;
};

/// User-supplied function; deriv(x, j) must return d^j f / dx^j for
/// j = 0..max_order. No symbolic differentiation is attempted beyond that.
struct CustomTerm {
  std::function<double(double, int)> deriv;
  int max_order = 0;
};

using BasisFunction = std::variant<PolyTerm, CircTerm, HypTerm, CustomTerm>;

namespace detail {

inline double falling_factorial(int p, int j) {
  double f = 1.0;
  for (int t = 0; t < j; ++t) f *= static_cast<double>(p - t);
  return f;
}

}  // namespace detail

/// d^order f / dx^order at x.
inline double eval_deriv(const BasisFunction& f, double x, int order) {
  return std::visit(
      [&](const auto& t) -> double {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, PolyTerm>) {
          if (order > t.power) return 0.0;
          return t.coeff * detail::falling_factorial(t.power, order) *
                 std::pow(x, t.power - order);
        } else if constexpr (std::is_same_v<T, CircTerm>) {
          // one derivative maps (c, s) -> (s, -c)
          double c = t.c, s = t.s;
          for (int j = order % 4; j > 0; --j) {
            const double nc = s, ns = -c;
            c = nc;
            s = ns;
          }
          return c * std::cos(x) + s * std::sin(x);
        } else if constexpr (std::is_same_v<T, HypTerm>) {
          const double c = (order % 2 == 0) ? t.c : t.s;
          const double s = (order % 2 == 0) ? t.s : t.c;
          return c * std::cosh(x) + s * std::sinh(x);
        } else {
          if (order > t.max_order)
            throw CapabilityError("custom basis function lacks derivative order " +
                                  std::to_string(order));
          return t.deriv(x, order);
        }
      },
      f);
}

/// Term-wise derivative as a new closed-form basis function.
inline BasisFunction differentiate(const BasisFunction& f) {
  return std::visit(
      [](const auto& t) -> BasisFunction {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, PolyTerm>) {
          if (t.power == 0) return PolyTerm{0.0, 0};
          return PolyTerm{t.coeff * t.power, t.power - 1};
        } else if constexpr (std::is_same_v<T, CircTerm>) {
          return CircTerm{t.s, -t.c};
        } else if constexpr (std::is_same_v<T, HypTerm>) {
          return HypTerm{t.s, t.c};
        } else {
          if (t.max_order < 1)
            throw CapabilityError("custom basis function cannot be differentiated");
          CustomTerm d;
          d.max_order = t.max_order - 1;
          d.deriv = [inner = t.deriv](double x, int j) { return inner(x, j + 1); };
          return d;
        }
      },
      f);
}

/// True iff the function is structurally the constant 1.
inline bool is_unit_constant(const BasisFunction& f) {
  const auto* p = std::get_if<PolyTerm>(&f);
  return p != nullptr && p->power == 0 && p->coeff == 1.0;
}

enum class SectionKind { polynomial, trigonometric_n4, hyperbolic_n4, cossin, custom };

inline const char* to_string(SectionKind k) {
  switch (k) {
    case SectionKind::polynomial: return "polynomial";
    case SectionKind::trigonometric_n4: return "trigonometric_n4";
    case SectionKind::hyperbolic_n4: return "hyperbolic_n4";
    case SectionKind::cossin: return "cossin";
    case SectionKind::custom: return "custom";
  }
  return "?";
}

/// One (n+1)-dimensional function space on a single knot interval, with
/// closed-form derivatives of its spanning basis. Immutable once built.
class SectionSpace {
 public:
  static SectionSpace polynomial(int degree, double a, double b) {
    std::vector<BasisFunction> fns;
    for (int m = 0; m <= degree; ++m) fns.push_back(PolyTerm{1.0, m});
    return SectionSpace(SectionKind::polynomial, a, b, std::move(fns));
  }

  /// span{1, x, x^2, cos x, sin x}
  static SectionSpace trigonometric_n4(double a, double b) {
    std::vector<BasisFunction> fns{PolyTerm{1.0, 0}, PolyTerm{1.0, 1}, PolyTerm{1.0, 2},
                                   CircTerm{1.0, 0.0}, CircTerm{0.0, 1.0}};
    return SectionSpace(SectionKind::trigonometric_n4, a, b, std::move(fns));
  }

  /// span{1, x, x^2, cosh x, sinh x}
  static SectionSpace hyperbolic_n4(double a, double b) {
    std::vector<BasisFunction> fns{PolyTerm{1.0, 0}, PolyTerm{1.0, 1}, PolyTerm{1.0, 2},
                                   HypTerm{1.0, 0.0}, HypTerm{0.0, 1.0}};
    return SectionSpace(SectionKind::hyperbolic_n4, a, b, std::move(fns));
  }

  /// span{cos x, sin x}
  static SectionSpace cos_sin(double a, double b) {
    std::vector<BasisFunction> fns{CircTerm{1.0, 0.0}, CircTerm{0.0, 1.0}};
    return SectionSpace(SectionKind::cossin, a, b, std::move(fns));
  }

  static SectionSpace custom(std::vector<BasisFunction> fns, double a, double b) {
    return SectionSpace(SectionKind::custom, a, b, std::move(fns));
  }

  SectionKind kind() const { return kind_; }
  double lower() const { return a_; }
  double upper() const { return b_; }
  int dim() const { return static_cast<int>(basis_.size()); }
  const std::vector<BasisFunction>& basis() const { return basis_; }

  bool starts_with_constant() const { return is_unit_constant(basis_.front()); }

 private:
  SectionSpace(SectionKind kind, double a, double b, std::vector<BasisFunction> fns)
      : kind_(kind), a_(a), b_(b), basis_(std::move(fns)) {
    if (basis_.empty()) throw std::invalid_argument("section-space needs dim >= 1");
    if (!(a_ < b_)) throw std::invalid_argument("section interval must have positive length");
    const int n = dim() - 1;
    for (const BasisFunction& f : basis_) {
      if (const auto* c = std::get_if<CustomTerm>(&f); c && c->max_order < n)
        throw std::invalid_argument("custom basis functions must supply derivatives up to order n");
    }
    check_wronskian(a_);
    check_wronskian(b_);
  }

  // W-space requirement: the Wronskian of the basis must not vanish at the
  // interval ends (checked numerically through an LU of the Taylor matrix).
  void check_wronskian(double x) const {
    const int d = dim();
    DenseMatrix w(d, d);
    for (int m = 0; m < d; ++m)
      for (int j = 0; j < d; ++j) w(j, m) = eval_deriv(basis_[m], x, j);
    try {
      LuFactorization lu(w);
      if (lu.pivot_ratio() < 1e-14)
        throw std::invalid_argument("basis Wronskian numerically vanishes at x=" +
                                    std::to_string(x));
    } catch (const SingularSystem&) {
      throw std::invalid_argument("basis Wronskian vanishes at x=" + std::to_string(x));
    }
  }

  SectionKind kind_;
  double a_;
  double b_;
  std::vector<BasisFunction> basis_;
};

/// Matrix of basis derivatives at x: entry (m, j) = d^j u_m / dx^j.
inline DenseMatrix eval_basis_derivs(const SectionSpace& space, double x, int max_order) {
  if (x < space.lower() || x > space.upper())
    throw std::domain_error("evaluation point outside the section interval");
  DenseMatrix out(space.dim(), max_order + 1);
  for (int m = 0; m < space.dim(); ++m)
    for (int j = 0; j <= max_order; ++j) out(m, j) = eval_deriv(space.basis()[m], x, j);
  return out;
}

/// The n-dimensional space spanned by the derivatives of the nonconstant
/// basis functions. Requires the first basis function to be the constant 1.
inline SectionSpace derivative_section(const SectionSpace& space) {
  if (!space.starts_with_constant())
    throw std::invalid_argument("derivative_section: space does not contain constants");
  std::vector<BasisFunction> fns;
  for (int m = 1; m < space.dim(); ++m) fns.push_back(differentiate(space.basis()[m]));
  return SectionSpace::custom(std::move(fns), space.lower(), space.upper());
}

// --- local Bernstein-like basis -----------------------------------------

/// Coefficients of the interval's positive Bernstein-like basis in the
/// section basis. Row i of coeffs spans the element that vanishes exactly
/// i times at the left end and n-i times at the right end, with the unit
/// derivative condition placed at the left end for i <= n/2 (recorded in
/// unit_at_left) and at the right end otherwise.
struct LocalBernsteinBasis {
  DenseMatrix coeffs;
  std::vector<bool> unit_at_left;
};

/// Options for the local basis construction; sampling density is the
/// positivity certificate used on the open interval.
struct LocalBasisOptions {
  int positivity_samples = 200;
  double kappa_max = 1e12;
  double pivot_floor = 1e-14;
};

inline LocalBernsteinBasis local_bernstein_basis(const SectionSpace& space,
                                                 const LocalBasisOptions& opt = {}) {
  const int d = space.dim();
  const int n = d - 1;
  const DenseMatrix da = eval_basis_derivs(space, space.lower(), n);
  const DenseMatrix db = eval_basis_derivs(space, space.upper(), n);

  LocalBernsteinBasis out;
  out.coeffs = DenseMatrix(d, d);
  out.unit_at_left.resize(d);

  for (int i = 0; i <= n; ++i) {
    const bool unit_left = (i <= n / 2);
    out.unit_at_left[i] = unit_left;
    DenseMatrix sys(d, d);
    std::vector<double> rhs(d, 0.0);
    int row = 0;
    for (int j = 0; j < i; ++j, ++row)
      for (int m = 0; m < d; ++m) sys(row, m) = da(m, j);
    for (int j = 0; j < n - i; ++j, ++row)
      for (int m = 0; m < d; ++m) sys(row, m) = db(m, j);
    if (unit_left) {
      for (int m = 0; m < d; ++m) sys(row, m) = da(m, i);
      rhs[row] = 1.0;
    } else {
      for (int m = 0; m < d; ++m) sys(row, m) = db(m, n - i);
      rhs[row] = ((n - i) % 2 == 0) ? 1.0 : -1.0;
    }

    SolveReport rep;
    try {
      rep = solve(sys, rhs);
    } catch (const SingularSystem&) {
      throw NotECSection("Hermite system singular for local basis element " + std::to_string(i),
                         i);
    }
    if (!is_reliable(rep, opt.kappa_max, opt.pivot_floor))
      throw NotECSection("Hermite system unreliable for local basis element " +
                             std::to_string(i) + " (condition " +
                             std::to_string(rep.condition_estimate) + ")",
                         i);
    for (int m = 0; m < d; ++m) out.coeffs(i, m) = rep.x[m];

    // Endpoint Taylor signs of a genuinely positive element: the first
    // nonzero derivative is +1-normalised on one side; the other side must
    // carry sign (-1)^(zeros there).
    double scale = 0.0;
    for (int j = 0; j <= n; ++j) {
      double va = 0.0, vb = 0.0;
      for (int m = 0; m < d; ++m) {
        va += rep.x[m] * da(m, j);
        vb += rep.x[m] * db(m, j);
      }
      scale = std::max(scale, std::max(std::abs(va), std::abs(vb)));
    }
    double lead_a = 0.0, lead_b = 0.0;
    for (int m = 0; m < d; ++m) {
      lead_a += rep.x[m] * da(m, i);
      lead_b += rep.x[m] * db(m, n - i);
    }
    const double sgn_b = ((n - i) % 2 == 0) ? 1.0 : -1.0;
    if (lead_a <= 1e-12 * scale || sgn_b * lead_b <= 1e-12 * scale)
      throw NotECSection("local basis element " + std::to_string(i) +
                             " has wrong endpoint sign structure",
                         i);

    for (int s = 1; s <= opt.positivity_samples; ++s) {
      const double x = space.lower() + (space.upper() - space.lower()) * s /
                                           (opt.positivity_samples + 1.0);
      double v = 0.0;
      for (int m = 0; m < d; ++m) v += rep.x[m] * eval_deriv(space.basis()[m], x, 0);
      if (v <= 0.0)
        throw NotECSection("local basis element " + std::to_string(i) +
                               " non-positive at interior sample x=" + std::to_string(x),
                           i);
    }
  }
  return out;
}

/// Derivatives of the local basis elements at x: entry (r, j) = d^j V_r / dx^j.
inline DenseMatrix local_basis_derivs(const SectionSpace& space,
                                      const LocalBernsteinBasis& basis, double x,
                                      int max_order) {
  const DenseMatrix d = eval_basis_derivs(space, x, max_order);
  DenseMatrix out(space.dim(), max_order + 1);
  for (int r = 0; r < space.dim(); ++r)
    for (int j = 0; j <= max_order; ++j) {
      double s = 0.0;
      for (int m = 0; m < space.dim(); ++m) s += basis.coeffs(r, m) * d(m, j);
      out(r, j) = s;
    }
  return out;
}

/// Value of local basis element r at x.
inline double local_basis_value(const SectionSpace& space, const LocalBernsteinBasis& basis,
                                int r, double x) {
  double s = 0.0;
  for (int m = 0; m < space.dim(); ++m)
    s += basis.coeffs(r, m) * eval_deriv(space.basis()[m], x, 0);
  return s;
}

/// Two-tier zero/nonzero residual summary of the endpoint multiplicity
/// conditions, normalised by the element's largest endpoint derivative.
struct MultiplicityCheck {
  double max_zero_residual = 0.0;    // over all required zero derivatives
  double min_leading_value = 0.0;    // over the first prescribed nonzero orders
};

inline MultiplicityCheck check_multiplicities(const SectionSpace& space,
                                              const LocalBernsteinBasis& basis) {
  const int n = space.dim() - 1;
  const DenseMatrix da = local_basis_derivs(space, basis, space.lower(), n);
  const DenseMatrix db = local_basis_derivs(space, basis, space.upper(), n);
  MultiplicityCheck res;
  res.min_leading_value = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    double scale = 0.0;
    for (int j = 0; j <= n; ++j)
      scale = std::max(scale, std::max(std::abs(da(i, j)), std::abs(db(i, j))));
    if (scale == 0.0) scale = 1.0;
    for (int j = 0; j < i; ++j)
      res.max_zero_residual = std::max(res.max_zero_residual, std::abs(da(i, j)) / scale);
    for (int j = 0; j < n - i; ++j)
      res.max_zero_residual = std::max(res.max_zero_residual, std::abs(db(i, j)) / scale);
    res.min_leading_value =
        std::min(res.min_leading_value,
                 std::min(std::abs(da(i, i)), std::abs(db(i, n - i))) / scale);
  }
  return res;
}

}  // namespace ecp
