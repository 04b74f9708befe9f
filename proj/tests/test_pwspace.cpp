#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ecp/pwspace.hpp"

using namespace ecp;

namespace {

DenseMatrix geo_matrix(double beta, double delta, double eps) {
  DenseMatrix m = DenseMatrix::identity(4);
  m(2, 1) = beta;
  m(3, 1) = delta;
  m(3, 2) = eps;
  return m;
}

PWSpace cubic_space(int q, const std::vector<DenseMatrix>& mats) {
  std::vector<double> knots;
  for (int k = 0; k <= q + 1; ++k) knots.push_back(k);
  std::vector<SectionSpace> sections;
  for (int k = 0; k <= q; ++k) sections.push_back(SectionSpace::polynomial(3, k, k + 1));
  std::vector<ConnectionMatrix> cms;
  for (const DenseMatrix& m : mats) cms.emplace_back(m);
  return PWSpace(Partition(knots), std::move(sections), std::move(cms));
}

}  // namespace

TEST_CASE("partition validation") {
  REQUIRE_NOTHROW(Partition({0.0, 1.0}));
  REQUIRE_THROWS_AS(Partition({0.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(Partition({0.0, 0.0, 1.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(Partition({0.0, 2.0, 1.0}), std::invalid_argument);
  REQUIRE(Partition({0.0, 1.0}).interior_count() == 0);
}

TEST_CASE("connection matrix validation") {
  DenseMatrix good = DenseMatrix::identity(3);
  good(2, 0) = -1.5;
  REQUIRE_NOTHROW(ConnectionMatrix(good));

  DenseMatrix upper = DenseMatrix::identity(3);
  upper(0, 2) = 0.25;
  REQUIRE_THROWS_AS(ConnectionMatrix(upper), std::invalid_argument);

  DenseMatrix zdiag = DenseMatrix::identity(3);
  zdiag(1, 1) = 0.0;
  REQUIRE_THROWS_AS(ConnectionMatrix(zdiag), std::invalid_argument);

  DenseMatrix ndiag = DenseMatrix::identity(3);
  ndiag(1, 1) = -2.0;
  REQUIRE_THROWS_AS(ConnectionMatrix(ndiag), std::invalid_argument);
}

TEST_CASE("contains_constants") {
  PWSpace identity2 = cubic_space(2, {DenseMatrix::identity(4), DenseMatrix::identity(4)});
  REQUIRE(contains_constants(identity2));

  // matrices with free parameters but first column (1,0,0,0)^T
  PWSpace geo = cubic_space(2, {geo_matrix(0.7, -1.0, 2.0), geo_matrix(0.7, 2.4, 2.0)});
  REQUIRE(contains_constants(geo));

  DenseMatrix bad = DenseMatrix::identity(4);
  bad(1, 0) = 0.1;
  PWSpace nogood = cubic_space(1, {bad});
  REQUIRE_FALSE(contains_constants(nogood));

  // a section without a leading constant
  std::vector<SectionSpace> sections{SectionSpace::cos_sin(0.0, 1.0)};
  PWSpace trig(Partition({0.0, 1.0}), std::move(sections), {});
  REQUIRE_FALSE(contains_constants(trig));
}

TEST_CASE("derivative_space truncates matrices and drops dimension") {
  PWSpace geo = cubic_space(2, {geo_matrix(0.5, 1.5, -0.75), geo_matrix(0.5, -1.125, -0.75)});
  PWSpace d = derivative_space(geo);
  REQUIRE(d.dim() == 3);
  REQUIRE(d.q() == 2);
  const ConnectionMatrix& m1 = d.matrix(1);
  REQUIRE(m1(0, 0) == 1.0);
  REQUIRE(m1(1, 0) == 0.5);
  REQUIRE(m1(1, 1) == 1.0);
  REQUIRE(m1(2, 0) == 1.5);
  REQUIRE(m1(2, 1) == -0.75);
  REQUIRE(m1(2, 2) == 1.0);

  PWSpace identity1 = cubic_space(1, {DenseMatrix::identity(4)});
  PWSpace di = derivative_space(identity1);
  REQUIRE(di.matrix(1).dense() == DenseMatrix::identity(3));

  PWSpace dd = derivative_space(di);
  REQUIRE(dd.dim() == 2);

  DenseMatrix bad = DenseMatrix::identity(4);
  bad(2, 0) = 1.0;
  PWSpace nogood = cubic_space(1, {bad});
  REQUIRE_THROWS_AS(derivative_space(nogood), std::invalid_argument);
}

TEST_CASE("connection residual") {
  PWSpace identity1 = cubic_space(1, {DenseMatrix::identity(4)});
  std::vector<double> v{1.0, -2.0, 0.5, 3.0};
  REQUIRE(connection_residual(identity1, 1, v, v) == 0.0);

  PWSpace geo = cubic_space(1, {geo_matrix(1.0, 0.3, 0.9)});
  std::vector<double> left{0.0, 1.0, 0.0, 0.0};
  std::vector<double> right{0.0, 1.0, 1.0, 0.3};
  REQUIRE(connection_residual(geo, 1, left, right) == 0.0);

  std::mt19937 rng(42);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int t = 0; t < 25; ++t) {
    std::vector<double> l(4), r(4);
    for (double& x : l) x = dist(rng);
    for (double& x : r) x = dist(rng);
    // naive triple-check: explicit loops, no library calls
    double expect = 0.0;
    const ConnectionMatrix& m = geo.matrix(1);
    for (int p = 0; p < 4; ++p) {
      double s = 0.0;
      for (int c = 0; c < 4; ++c) s += m(p, c) * l[c];
      expect = std::max(expect, std::abs(r[p] - s));
    }
    REQUIRE(connection_residual(geo, 1, l, r) == Catch::Approx(expect).margin(1e-15));
  }
}

TEST_CASE("global polynomials meet identity connections exactly") {
  PWSpace space = cubic_space(3, {DenseMatrix::identity(4), DenseMatrix::identity(4),
                                  DenseMatrix::identity(4)});
  // derivative vector of p(x) = 2 - x + 0.5 x^2 + 0.25 x^3 at each knot
  const auto derivs = [](double x) {
    return std::vector<double>{2 - x + 0.5 * x * x + 0.25 * x * x * x,
                               -1 + x + 0.75 * x * x, 1 + 1.5 * x, 1.5};
  };
  for (int k = 1; k <= space.q(); ++k) {
    std::vector<double> v = derivs(space.partition().knot(k));
    REQUIRE(connection_residual(space, k, v, v) == 0.0);
  }
}

TEST_CASE("structure validation") {
  std::vector<SectionSpace> two{SectionSpace::polynomial(3, 0.0, 1.0),
                                SectionSpace::polynomial(2, 1.0, 2.0)};
  REQUIRE_THROWS_AS(PWSpace(Partition({0.0, 1.0, 2.0}), std::move(two),
                            {ConnectionMatrix(DenseMatrix::identity(4))}),
                    std::invalid_argument);

  std::vector<SectionSpace> misplaced{SectionSpace::polynomial(3, 0.0, 1.0),
                                      SectionSpace::polynomial(3, 0.0, 1.0)};
  REQUIRE_THROWS_AS(PWSpace(Partition({0.0, 1.0, 2.0}), std::move(misplaced),
                            {ConnectionMatrix(DenseMatrix::identity(4))}),
                    std::invalid_argument);

  std::vector<SectionSpace> ok{SectionSpace::polynomial(3, 0.0, 1.0),
                               SectionSpace::polynomial(3, 1.0, 2.0)};
  REQUIRE_THROWS_AS(PWSpace(Partition({0.0, 1.0, 2.0}), std::move(ok), {}),
                    std::invalid_argument);
}
