#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ecp/errors.hpp"
#include "ecp/linalg.hpp"
#include "ecp/pwspace.hpp"
#include "ecp/sections.hpp"

namespace ecp {

struct TestConfig {
  double tol = 1e-30;        // positivity threshold for tested coefficients
  double kappa_max = 1e12;   // condition guard for every direct solve
  double pivot_floor = 1e-14;
  bool record_trace = true;  // keep per-level minima in the outcome
  int positivity_samples = 200;

  LocalBasisOptions local_options() const {
    return LocalBasisOptions{positivity_samples, kappa_max, pivot_floor};
  }
};

/// Coefficients gamma(i,k,r) of the level-p global basis elements in the
/// local bases: i indexes the global element, k the interval, r the local
/// element. At level p the index ranges are i,r = 0..n-p, k = 0..q.
class GammaTensor {
 public:
  GammaTensor(int n, int q, int level = 0)
      : n_(n), q_(q), level_(level),
        v_(static_cast<size_t>(q + 1) * (n - level + 1) * (n - level + 1), 0.0) {}

  int n() const { return n_; }
  int q() const { return q_; }
  int level() const { return level_; }
  /// number of basis elements at this level (= n - level + 1)
  int size() const { return n_ - level_ + 1; }

  double& at(int i, int k, int r) {
    return v_[(static_cast<size_t>(k) * size() + i) * size() + r];
  }
  double at(int i, int k, int r) const {
    return v_[(static_cast<size_t>(k) * size() + i) * size() + r];
  }

 private:
  int n_, q_, level_;
  std::vector<double> v_;
};

struct FailureLocation {
  int i = 0, k = 0, r = 0;
  double value = 0.0;
};

struct PositivityScan {
  std::optional<FailureLocation> failure;
  double min_tested = 0.0;  // minimum coefficient examined before stopping
};

/// Scan the tested entries in the fixed order (k outer, i middle, r inner;
/// r >= i on the first interval, r <= i on the last) and report the first
/// coefficient that is not > tol. Structural zeros are exempt by the bounds.
inline PositivityScan scan_positivity(const GammaTensor& g, double tol) {
  PositivityScan res;
  bool any = false;
  const int m = g.size() - 1;
  for (int k = 0; k <= g.q(); ++k) {
    for (int i = 0; i <= m; ++i) {
      const int r_lo = (k == 0) ? i : 0;
      const int r_hi = (k == g.q()) ? i : m;
      for (int r = r_lo; r <= r_hi; ++r) {
        const double v = g.at(i, k, r);
        if (!any || v < res.min_tested) res.min_tested = v;
        any = true;
        if (!(v > tol)) {
          res.failure = FailureLocation{i, k, r, v};
          return res;
        }
      }
    }
  }
  return res;
}

inline std::optional<FailureLocation> check_positivity(const GammaTensor& g,
                                                       const TestConfig& config) {
  return scan_positivity(g, config.tol).failure;
}

/// One dimension-diminishing step: suffix sums down the element index,
/// normalisation by the column sums, then first differences across the
/// local index. Shrinks both element and local-coefficient ranges by one.
inline GammaTensor iterate_gamma(const GammaTensor& g) {
  const int m = g.size();  // elements at current level
  if (m < 2) throw std::invalid_argument("iterate_gamma: nothing left to diminish");
  GammaTensor next(g.n(), g.q(), g.level() + 1);
  std::vector<double> work(static_cast<size_t>(m) * m);
  for (int k = 0; k <= g.q(); ++k) {
    for (int i = 0; i < m; ++i)
      for (int r = 0; r < m; ++r) work[static_cast<size_t>(i) * m + r] = g.at(i, k, r);
    for (int i = m - 2; i >= 0; --i)
      for (int r = 0; r < m; ++r)
        work[static_cast<size_t>(i) * m + r] += work[static_cast<size_t>(i + 1) * m + r];
    for (int r = 0; r < m; ++r) {
      const double colsum = work[r];
      if (colsum == 0.0)
        throw InternalInconsistency("iterate_gamma: zero column sum after positivity passed");
      for (int i = 1; i < m; ++i)
        work[static_cast<size_t>(i - 1) * m + r] = work[static_cast<size_t>(i) * m + r] / colsum;
    }
    for (int i = 0; i < m - 1; ++i)
      for (int r = 0; r < m - 1; ++r)
        next.at(i, k, r) =
            work[static_cast<size_t>(i) * m + r + 1] - work[static_cast<size_t>(i) * m + r];
  }
  return next;
}

/// Exact structural-zero pattern: gamma(i,0,r) = 0 for r < i and
/// gamma(i,q,r) = 0 for r > i.
inline bool has_structural_zeros(const GammaTensor& g) {
  const int m = g.size() - 1;
  for (int i = 0; i <= m; ++i) {
    for (int r = 0; r < i; ++r)
      if (g.at(i, 0, r) != 0.0) return false;
    for (int r = i + 1; r <= m; ++r)
      if (g.at(i, g.q(), r) != 0.0) return false;
  }
  return true;
}

// --- outcome -------------------------------------------------------------

enum class Verdict { ECP, NotECP };

struct StageCompleted {};
struct StageSectionFailure {
  int k = 0;  // interval whose section-space failed
  std::string detail;
};
struct StageT0System {
  int i = 0;  // element whose system could not be solved reliably
  double condition = 0.0;
  double pivot_ratio = 0.0;
};
struct StageT0Positivity {
  FailureLocation where;
};
struct StageT1Positivity {
  int p = 0;
  FailureLocation where;
};
using Stage = std::variant<StageCompleted, StageSectionFailure, StageT0System,
                           StageT0Positivity, StageT1Positivity>;

struct LevelTrace {
  int p = 0;
  double min_tested = 0.0;
};

struct TestOutcome {
  Verdict verdict = Verdict::NotECP;
  Stage stage = StageCompleted{};
  std::vector<LevelTrace> level_minima;       // per examined level, when traced
  std::vector<double> condition_estimates;    // one per solved global element
  double tol = 0.0;

  bool is_ecp() const { return verdict == Verdict::ECP; }
};

inline const char* stage_name(const Stage& s) {
  struct Visitor {
    const char* operator()(const StageCompleted&) const { return "completed"; }
    const char* operator()(const StageSectionFailure&) const { return "section_failure"; }
    const char* operator()(const StageT0System&) const { return "t0_system"; }
    const char* operator()(const StageT0Positivity&) const { return "t0_positivity"; }
    const char* operator()(const StageT1Positivity&) const { return "t1_positivity"; }
  };
  return std::visit(Visitor{}, s);
}

// --- global basis construction --------------------------------------------

/// Local bases of all sections plus their endpoint derivative tables:
/// left[k](r, j) = d^j V_{k,r} at t_k, right[k](r, j) = d^j V_{k,r} at t_{k+1}.
struct LocalBasisSet {
  std::vector<LocalBernsteinBasis> bases;
  std::vector<DenseMatrix> left;
  std::vector<DenseMatrix> right;
};

inline LocalBasisSet build_local_bases(const PWSpace& space, const TestConfig& config) {
  LocalBasisSet out;
  const int n = space.n();
  for (int k = 0; k <= space.q(); ++k) {
    const SectionSpace& s = space.section(k);
    out.bases.push_back(local_bernstein_basis(s, config.local_options()));
    out.left.push_back(local_basis_derivs(s, out.bases.back(), s.lower(), n));
    out.right.push_back(local_basis_derivs(s, out.bases.back(), s.upper(), n));
  }
  return out;
}

struct GlobalBasisResult {
  std::optional<GammaTensor> gamma;
  std::optional<StageT0System> failure;
  std::vector<double> condition_estimates;
};

/// Solve, independently for each element i, the square system of size
/// (q+1)(n+1) fixing the local expansion of the global Bernstein-like
/// candidate: n endpoint zero pins, one unit-derivative normalisation, and
/// q(n+1) connection rows (ordered by knot, then derivative order).
/// Unknowns are ordered (k, r) lexicographically.
inline GlobalBasisResult build_global_basis(const PWSpace& space, const LocalBasisSet& locals,
                                            const TestConfig& config) {
  const int n = space.n();
  const int q = space.q();
  const int d = n + 1;
  const int size = (q + 1) * d;
  const auto idx = [d](int k, int r) { return k * d + r; };

  GlobalBasisResult result;
  GammaTensor gamma(n, q, 0);

  for (int i = 0; i <= n; ++i) {
    DenseMatrix sys(size, size);
    std::vector<double> rhs(size, 0.0);
    int row = 0;
    for (int r = 0; r < i; ++r, ++row) sys(row, idx(0, r)) = 1.0;
    for (int r = i + 1; r <= n; ++r, ++row) sys(row, idx(q, r)) = 1.0;
    const bool unit_left = (i <= n / 2);
    double pin_value;
    int pin_col;
    if (unit_left) {
      pin_value = 1.0 / locals.left[0](i, i);
      pin_col = idx(0, i);
    } else {
      const double sgn = ((n - i) % 2 == 0) ? 1.0 : -1.0;
      pin_value = sgn / locals.right[q](i, n - i);
      pin_col = idx(q, i);
    }
    sys(row, pin_col) = 1.0;
    rhs[row] = pin_value;
    ++row;
    const int first_connection_row = row;
    for (int k = 1; k <= q; ++k) {
      const ConnectionMatrix& m = space.matrix(k);
      for (int ord = 0; ord <= n; ++ord, ++row) {
        for (int r = 0; r <= n; ++r) sys(row, idx(k, r)) = locals.left[k](r, ord);
        for (int p = 0; p <= ord; ++p)
          for (int r = 0; r <= n; ++r)
            sys(row, idx(k - 1, r)) -= m(ord, p) * locals.right[k - 1](r, p);
      }
    }

    SolveReport rep;
    bool singular = false;
    try {
      rep = solve(sys, rhs);
    } catch (const SingularSystem&) {
      singular = true;
    }
    if (singular || !is_reliable(rep, config.kappa_max, config.pivot_floor)) {
      result.failure = StageT0System{
          i, singular ? std::numeric_limits<double>::infinity() : rep.condition_estimate,
          singular ? 0.0 : rep.pivot_ratio};
      return result;
    }
    result.condition_estimates.push_back(rep.condition_estimate);

    // Every connection equation must be satisfied to near machine accuracy,
    // otherwise the solution is not trustworthy either.
    const double xn = inf_norm(rep.x);
    for (int cr = first_connection_row; cr < size; ++cr) {
      double resid = -rhs[cr];
      double rowsum = 0.0;
      for (int c = 0; c < size; ++c) {
        resid += sys(cr, c) * rep.x[c];
        rowsum += std::abs(sys(cr, c));
      }
      if (std::abs(resid) > 1e-8 * (rowsum * xn + std::abs(rhs[cr]) + 1.0)) {
        result.failure = StageT0System{i, rep.condition_estimate, rep.pivot_ratio};
        return result;
      }
    }

    for (int k = 0; k <= q; ++k)
      for (int r = 0; r <= n; ++r) gamma.at(i, k, r) = rep.x[idx(k, r)];
    // The pinned entries hold exactly by definition of the system.
    for (int r = 0; r < i; ++r) gamma.at(i, 0, r) = 0.0;
    for (int r = i + 1; r <= n; ++r) gamma.at(i, q, r) = 0.0;
    gamma.at(i, unit_left ? 0 : q, i) = pin_value;
  }
  result.gamma = std::move(gamma);
  return result;
}

// --- the test --------------------------------------------------------------

/// Full numerical decision procedure: build the global Bernstein-like basis
/// candidate, check the positivity pattern of its local coefficients, then
/// repeat the dimension-diminishing iteration and check at every level down
/// to dimension two. Deterministic; never throws for test-negative inputs.
inline TestOutcome run_test(const PWSpace& space, const TestConfig& config = {}) {
  if (!(config.tol > 0.0)) throw std::invalid_argument("config.tol must be positive");
  TestOutcome out;
  out.tol = config.tol;

  LocalBasisSet locals;
  const int n = space.n();
  for (int k = 0; k <= space.q(); ++k) {
    const SectionSpace& s = space.section(k);
    try {
      locals.bases.push_back(local_bernstein_basis(s, config.local_options()));
    } catch (const NotECSection& e) {
      out.verdict = Verdict::NotECP;
      out.stage = StageSectionFailure{k, e.what()};
      return out;
    }
    locals.left.push_back(local_basis_derivs(s, locals.bases.back(), s.lower(), n));
    locals.right.push_back(local_basis_derivs(s, locals.bases.back(), s.upper(), n));
  }

  GlobalBasisResult built = build_global_basis(space, locals, config);
  out.condition_estimates = built.condition_estimates;
  if (built.failure) {
    out.verdict = Verdict::NotECP;
    out.stage = *built.failure;
    return out;
  }
  GammaTensor gamma = std::move(*built.gamma);

  for (int p = 0; p <= std::max(0, n - 1); ++p) {
    if (p > 0) {
      gamma = iterate_gamma(gamma);
      if (!has_structural_zeros(gamma))
        throw InternalInconsistency("structural zeros lost at level " + std::to_string(p));
    }
    const PositivityScan scan = scan_positivity(gamma, config.tol);
    if (config.record_trace) out.level_minima.push_back({p, scan.min_tested});
    if (scan.failure) {
      out.verdict = Verdict::NotECP;
      if (p == 0)
        out.stage = StageT0Positivity{*scan.failure};
      else
        out.stage = StageT1Positivity{p, *scan.failure};
      return out;
    }
  }
  out.verdict = Verdict::ECP;
  out.stage = StageCompleted{};
  return out;
}

/// A constants-containing space is good for design when its derivative
/// space passes the test.
inline TestOutcome good_for_design(const PWSpace& space, const TestConfig& config = {}) {
  if (space.n() < 1)
    throw NotApplicable("good_for_design: need dimension >= 2");
  if (!contains_constants(space))
    throw NotApplicable("good_for_design: space does not contain constants");
  return run_test(derivative_space(space), config);
}

}  // namespace ecp
