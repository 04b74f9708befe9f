#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ecp/sections.hpp"

using namespace ecp;

TEST_CASE("polynomial basis derivatives at 0") {
  SectionSpace s = SectionSpace::polynomial(3, 0.0, 1.0);
  DenseMatrix d = eval_basis_derivs(s, 0.0, 3);
  const double expected[4][4] = {
      {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 2, 0}, {0, 0, 0, 6}};
  for (int m = 0; m < 4; ++m)
    for (int j = 0; j < 4; ++j) REQUIRE(d(m, j) == expected[m][j]);
}

TEST_CASE("trigonometric values at 0") {
  SectionSpace s = SectionSpace::trigonometric_n4(0.0, 1.0);
  DenseMatrix d = eval_basis_derivs(s, 0.0, 0);
  REQUIRE(d(0, 0) == 1.0);
  REQUIRE(d(1, 0) == 0.0);
  REQUIRE(d(2, 0) == 0.0);
  REQUIRE(d(3, 0) == 1.0);
  REQUIRE(d(4, 0) == 0.0);
}

TEST_CASE("hyperbolic first derivatives at 1") {
  SectionSpace s = SectionSpace::hyperbolic_n4(0.0, 2.0);
  DenseMatrix d = eval_basis_derivs(s, 1.0, 1);
  REQUIRE(d(0, 1) == 0.0);
  REQUIRE(d(1, 1) == 1.0);
  REQUIRE(d(2, 1) == 2.0);
  REQUIRE(d(3, 1) == Catch::Approx(std::sinh(1.0)));
  REQUIRE(d(4, 1) == Catch::Approx(std::cosh(1.0)));
}

TEST_CASE("evaluation outside the interval is rejected") {
  SectionSpace s = SectionSpace::polynomial(2, 0.0, 1.0);
  REQUIRE_THROWS_AS(eval_basis_derivs(s, 1.5, 1), std::domain_error);
  REQUIRE_THROWS_AS(eval_basis_derivs(s, -0.1, 0), std::domain_error);
}

TEST_CASE("custom basis without enough derivatives") {
  CustomTerm t;
  t.max_order = 1;
  t.deriv = [](double x, int j) { return j == 0 ? x : 1.0; };
  REQUIRE_THROWS_AS(
      SectionSpace::custom({PolyTerm{1.0, 0}, PolyTerm{1.0, 1}, BasisFunction{t}}, 0.0, 1.0),
      std::invalid_argument);
}

TEST_CASE("cubic local Bernstein basis on [0,1]") {
  SectionSpace s = SectionSpace::polynomial(3, 0.0, 1.0);
  LocalBernsteinBasis basis = local_bernstein_basis(s);
  // rows expand (1-x)^3, x(1-x)^2, x^2(1-x), x^3 in the monomials
  const double expected[4][4] = {
      {1, -3, 3, -1}, {0, 1, -2, 1}, {0, 0, 1, -1}, {0, 0, 0, 1}};
  for (int i = 0; i < 4; ++i)
    for (int m = 0; m < 4; ++m)
      REQUIRE(basis.coeffs(i, m) == Catch::Approx(expected[i][m]).margin(1e-12));
  REQUIRE(basis.unit_at_left == std::vector<bool>{true, true, false, false});
}

TEST_CASE("trigonometric section beyond its critical length fails") {
  SectionSpace s = SectionSpace::trigonometric_n4(0.0, 9.0);
  REQUIRE_THROWS_AS(local_bernstein_basis(s), NotECSection);
  SectionSpace ok = SectionSpace::trigonometric_n4(0.0, 8.5);
  REQUIRE_NOTHROW(local_bernstein_basis(ok));
}

namespace {

// Second, independent dense solve of the Hermite conditions: Gauss-Jordan
// with full pivoting and reversed row order.
std::vector<double> hermite_oracle(const SectionSpace& s, int i) {
  const int d = s.dim();
  const int n = d - 1;
  DenseMatrix da = eval_basis_derivs(s, s.lower(), n);
  DenseMatrix db = eval_basis_derivs(s, s.upper(), n);
  DenseMatrix aug(d, d + 1);
  int row = 0;
  if (i <= n / 2) {
    for (int m = 0; m < d; ++m) aug(row, m) = da(m, i);
    aug(row, d) = 1.0;
  } else {
    for (int m = 0; m < d; ++m) aug(row, m) = db(m, n - i);
    aug(row, d) = ((n - i) % 2 == 0) ? 1.0 : -1.0;
  }
  ++row;
  for (int j = n - i - 1; j >= 0; --j, ++row)
    for (int m = 0; m < d; ++m) aug(row, m) = db(m, j);
  for (int j = i - 1; j >= 0; --j, ++row)
    for (int m = 0; m < d; ++m) aug(row, m) = da(m, j);

  std::vector<int> col_of(d);
  for (int c = 0; c < d; ++c) col_of[c] = c;
  for (int step = 0; step < d; ++step) {
    int pr = step, pc = step;
    double best = 0.0;
    for (int r2 = step; r2 < d; ++r2)
      for (int c2 = step; c2 < d; ++c2)
        if (std::abs(aug(r2, c2)) > best) {
          best = std::abs(aug(r2, c2));
          pr = r2;
          pc = c2;
        }
    for (int c2 = 0; c2 <= d; ++c2) std::swap(aug(step, c2), aug(pr, c2));
    for (int r2 = 0; r2 < d; ++r2) std::swap(aug(r2, step), aug(r2, pc));
    std::swap(col_of[step], col_of[pc]);
    const double piv = aug(step, step);
    for (int c2 = 0; c2 <= d; ++c2) aug(step, c2) /= piv;
    for (int r2 = 0; r2 < d; ++r2) {
      if (r2 == step) continue;
      const double f = aug(r2, step);
      for (int c2 = 0; c2 <= d; ++c2) aug(r2, c2) -= f * aug(step, c2);
    }
  }
  std::vector<double> x(d);
  for (int c = 0; c < d; ++c) x[col_of[c]] = aug(c, d);
  return x;
}

}  // namespace

TEST_CASE("trigonometric local basis cross-checked by an independent solver") {
  SectionSpace s = SectionSpace::trigonometric_n4(0.0, 1.0);
  LocalBernsteinBasis basis = local_bernstein_basis(s);
  for (int i = 0; i < s.dim(); ++i) {
    std::vector<double> oracle = hermite_oracle(s, i);
    for (int m = 0; m < s.dim(); ++m)
      REQUIRE(basis.coeffs(i, m) == Catch::Approx(oracle[m]).margin(1e-9));
  }
}

TEST_CASE("multiplicities and positivity hold for built-in kinds on random intervals") {
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> start(-2.0, 2.0);
  std::uniform_real_distribution<double> len(0.3, 3.0);
  for (int t = 0; t < 12; ++t) {
    const double a = start(rng);
    const double b = a + len(rng);
    for (int kind = 0; kind < 3; ++kind) {
      SectionSpace s = kind == 0   ? SectionSpace::polynomial(3 + t % 3, a, b)
                       : kind == 1 ? SectionSpace::trigonometric_n4(a, b)
                                   : SectionSpace::hyperbolic_n4(a, b);
      LocalBernsteinBasis basis = local_bernstein_basis(s);
      MultiplicityCheck mc = check_multiplicities(s, basis);
      REQUIRE(mc.max_zero_residual <= 1e-9);
      REQUIRE(mc.min_leading_value >= 1e-6);
      for (int i = 0; i < s.dim(); ++i)
        for (int p = 1; p <= 200; ++p) {
          const double x = a + (b - a) * p / 201.0;
          REQUIRE(local_basis_value(s, basis, i, x) > 0.0);
        }
    }
  }
}

TEST_CASE("derivative sections") {
  SectionSpace cubic = SectionSpace::polynomial(3, 0.0, 1.0);
  SectionSpace dc = derivative_section(cubic);
  REQUIRE(dc.dim() == 3);
  // basis {1, 2x, 3x^2}
  REQUIRE(eval_deriv(dc.basis()[0], 0.7, 0) == 1.0);
  REQUIRE(eval_deriv(dc.basis()[1], 0.7, 0) == Catch::Approx(1.4));
  REQUIRE(eval_deriv(dc.basis()[2], 0.7, 0) == Catch::Approx(3 * 0.49));

  SectionSpace trig = SectionSpace::trigonometric_n4(0.0, 1.0);
  SectionSpace dt = derivative_section(trig);
  // span{1, 2x, -sin x, cos x}
  REQUIRE(eval_deriv(dt.basis()[2], 0.3, 0) == Catch::Approx(-std::sin(0.3)));
  REQUIRE(eval_deriv(dt.basis()[3], 0.3, 0) == Catch::Approx(std::cos(0.3)));

  SectionSpace hyp = SectionSpace::hyperbolic_n4(0.0, 1.0);
  SectionSpace dh = derivative_section(hyp);
  // span{1, 2x, sinh x, cosh x}
  REQUIRE(eval_deriv(dh.basis()[2], 0.3, 0) == Catch::Approx(std::sinh(0.3)));
  REQUIRE(eval_deriv(dh.basis()[3], 0.3, 0) == Catch::Approx(std::cosh(0.3)));

  SectionSpace no_const = SectionSpace::cos_sin(0.0, 1.0);
  REQUIRE_THROWS_AS(derivative_section(no_const), std::invalid_argument);
}

TEST_CASE("derivatives agree with central finite differences") {
  const double h = 1e-5;
  SectionSpace spaces[] = {SectionSpace::polynomial(4, 0.2, 1.7),
                           SectionSpace::trigonometric_n4(0.2, 1.7),
                           SectionSpace::hyperbolic_n4(0.2, 1.7)};
  for (const SectionSpace& s : spaces) {
    for (double x : {0.5, 0.9, 1.3}) {
      DenseMatrix d = eval_basis_derivs(s, x, 1);
      for (int m = 0; m < s.dim(); ++m) {
        const double fd =
            (eval_deriv(s.basis()[m], x + h, 0) - eval_deriv(s.basis()[m], x - h, 0)) / (2 * h);
        REQUIRE(d(m, 1) == Catch::Approx(fd).epsilon(1e-5).margin(1e-8));
      }
    }
  }
}

TEST_CASE("derivative section matches finite differences of the parent") {
  const double h = 1e-5;
  SectionSpace parent = SectionSpace::trigonometric_n4(0.0, 2.0);
  SectionSpace derived = derivative_section(parent);
  for (double x : {0.4, 1.0, 1.6}) {
    for (int m = 0; m < derived.dim(); ++m) {
      const double fd = (eval_deriv(parent.basis()[m + 1], x + h, 0) -
                         eval_deriv(parent.basis()[m + 1], x - h, 0)) /
                        (2 * h);
      REQUIRE(eval_deriv(derived.basis()[m], x, 0) ==
              Catch::Approx(fd).epsilon(1e-5).margin(1e-8));
    }
  }
}

TEST_CASE("degenerate intervals are rejected") {
  REQUIRE_THROWS_AS(SectionSpace::polynomial(2, 1.0, 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(SectionSpace::polynomial(2, 2.0, 1.0), std::invalid_argument);
}
