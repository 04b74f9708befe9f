#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ecp/ecptest.hpp"
#include "ecp/pwspace.hpp"

namespace ecp {

using ParamMap = std::map<std::string, double>;

/// Interval length beyond which span{1, x, x^2, cos x, sin x} stops being
/// an extended Chebyshev space. Documented constant, not computed here.
inline constexpr double kTrigCriticalLength = 8.98;

struct ParamRange {
  std::string name;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool integer = false;
};

/// A named parametric family of piecewise spaces.
struct Family {
  std::string name;
  std::vector<ParamRange> params;
  std::function<PWSpace(const ParamMap&)> generator;

  PWSpace make(const ParamMap& values) const { return generator(values); }

  const ParamRange* param(const std::string& p) const {
    for (const ParamRange& r : params)
      if (r.name == p) return &r;
    return nullptr;
  }
};

namespace detail {

inline double get_param(const ParamMap& m, const std::string& name, double fallback,
                        bool required = false) {
  auto it = m.find(name);
  if (it != m.end()) return it->second;
  if (required) throw std::invalid_argument("missing family parameter: " + name);
  return fallback;
}

/// Connection matrix of the geometrically continuous cubic families:
/// identity except for rows 2 and 3 acting on the first derivative block.
inline DenseMatrix cubic_geo_matrix(double beta, double delta, double eps) {
  DenseMatrix m = DenseMatrix::identity(4);
  m(2, 1) = beta;
  m(3, 1) = delta;
  m(3, 2) = eps;
  return m;
}

inline PWSpace cubic_geo_space(double beta, double delta, double eps, int q, double spacing) {
  if (q < 1) throw std::invalid_argument("cubic family needs q >= 1");
  if (!(spacing > 0.0)) throw std::invalid_argument("knot spacing must be positive");
  std::vector<double> knots;
  for (int k = 0; k <= q + 1; ++k) knots.push_back(k * spacing);
  std::vector<SectionSpace> sections;
  for (int k = 0; k <= q; ++k)
    sections.push_back(SectionSpace::polynomial(3, knots[k], knots[k + 1]));
  std::vector<ConnectionMatrix> mats;
  for (int k = 1; k <= q; ++k) {
    // odd interior knots carry (beta, delta, eps); even ones the mirrored
    // variant with delta replaced by beta*eps - delta
    const double d = (k % 2 == 1) ? delta : beta * eps - delta;
    mats.emplace_back(cubic_geo_matrix(beta, d, eps));
  }
  return PWSpace(Partition(std::move(knots)), std::move(sections), std::move(mats));
}

inline PWSpace thth_space(double lambda, double mu) {
  if (!(lambda > 0.0) || !(mu > 0.0))
    throw std::invalid_argument("thth: lambda and mu must be positive");
  if (mu >= kTrigCriticalLength)
    throw std::invalid_argument("thth: first trigonometric section exceeds critical length");
  const double t0 = 0.0, t1 = mu, t2 = mu + lambda, t3 = mu + lambda + 5.0,
               t4 = mu + 2.0 * lambda + 5.0;
  std::vector<SectionSpace> sections{
      SectionSpace::trigonometric_n4(t0, t1), SectionSpace::hyperbolic_n4(t1, t2),
      SectionSpace::trigonometric_n4(t2, t3), SectionSpace::hyperbolic_n4(t3, t4)};
  std::vector<ConnectionMatrix> mats(3, ConnectionMatrix(DenseMatrix::identity(5)));
  return PWSpace(Partition({t0, t1, t2, t3, t4}), std::move(sections), std::move(mats));
}

inline PWSpace cossin_space(double h) {
  if (!(h > 0.0)) throw std::invalid_argument("cossin: h must be positive");
  std::vector<SectionSpace> sections{SectionSpace::cos_sin(-h, 0.0),
                                     SectionSpace::cos_sin(0.0, h)};
  std::vector<ConnectionMatrix> mats{ConnectionMatrix(DenseMatrix::identity(2))};
  return PWSpace(Partition({-h, 0.0, h}), std::move(sections), std::move(mats));
}

}  // namespace detail

/// Registry of the built-in families.
inline const std::vector<Family>& builtin_families() {
  static const std::vector<Family> families = [] {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<Family> fs;

    fs.push_back(Family{
        "cubic_geo",
        {{"beta", -inf, inf, false},
         {"delta", -inf, inf, false},
         {"eps", -inf, inf, false},
         {"q", 1, 1000, true},
         {"spacing", 0.0, inf, false}},
        [](const ParamMap& p) {
          return detail::cubic_geo_space(detail::get_param(p, "beta", 0.0),
                                         detail::get_param(p, "delta", 0.0),
                                         detail::get_param(p, "eps", 0.0),
                                         static_cast<int>(detail::get_param(p, "q", 2)),
                                         detail::get_param(p, "spacing", 1.0));
        }});

    fs.push_back(Family{"cubic_caseI",
                        {{"delta", -inf, inf, false}, {"eps", -inf, inf, false}},
                        [](const ParamMap& p) {
                          return detail::cubic_geo_space(0.0, detail::get_param(p, "delta", 0.0),
                                                         detail::get_param(p, "eps", 0.0), 2, 1.0);
                        }});

    fs.push_back(Family{"cubic_caseII",
                        {{"beta", -inf, inf, false}, {"delta", -inf, inf, false}},
                        [](const ParamMap& p) {
                          return detail::cubic_geo_space(detail::get_param(p, "beta", 0.0),
                                                         detail::get_param(p, "delta", 0.0), 0.0,
                                                         2, 1.0);
                        }});

    fs.push_back(Family{"cubic_caseIII",
                        {{"beta", -inf, inf, false}, {"eps", -inf, inf, false}},
                        [](const ParamMap& p) {
                          return detail::cubic_geo_space(detail::get_param(p, "beta", 0.0), 0.0,
                                                         detail::get_param(p, "eps", 0.0), 2, 1.0);
                        }});

    fs.push_back(Family{"cubic_caseIV",
                        {{"beta", -inf, inf, false}, {"eps", -inf, inf, false}},
                        [](const ParamMap& p) {
                          const double beta = detail::get_param(p, "beta", 0.0);
                          const double eps = detail::get_param(p, "eps", 0.0);
                          return detail::cubic_geo_space(beta, beta * eps / 2.0, eps, 2, 1.0);
                        }});

    fs.push_back(Family{"cubic_spline_family",
                        {{"beta", -inf, inf, false}, {"q", 1, 1000, true}},
                        [](const ParamMap& p) {
                          return detail::cubic_geo_space(
                              detail::get_param(p, "beta", 0.0), 0.0, 0.0,
                              static_cast<int>(detail::get_param(p, "q", 2)), 1.0);
                        }});

    fs.push_back(Family{"cubic_G3",
                        {{"beta", -inf, inf, false}, {"q", 1, 1000, true}},
                        [](const ParamMap& p) {
                          const double beta = detail::get_param(p, "beta", 0.0);
                          const double eps = 3.0 * beta;
                          return detail::cubic_geo_space(
                              beta, beta * eps / 2.0, eps,
                              static_cast<int>(detail::get_param(p, "q", 2)), 1.0);
                        }});

    fs.push_back(
        Family{"thth",
               {{"lambda", 0.0, inf, false}, {"mu", 0.0, kTrigCriticalLength, false}},
               [](const ParamMap& p) {
                 return detail::thth_space(detail::get_param(p, "lambda", 0.0, true),
                                           detail::get_param(p, "mu", 0.0, true));
               }});

    fs.push_back(Family{"cossin",
                        {{"h", 0.0, inf, false}},
                        [](const ParamMap& p) {
                          return detail::cossin_space(detail::get_param(p, "h", 0.0, true));
                        }});

    return fs;
  }();
  return families;
}

inline const Family* find_family(const std::string& name) {
  for (const Family& f : builtin_families())
    if (f.name == name) return &f;
  return nullptr;
}

// --- region scanning --------------------------------------------------------

enum class ScanMode { ecp, good_for_design };

struct GridAxis {
  std::string param;
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;

  int count() const {
    if (!(step > 0.0) || hi < lo) return 0;
    return static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  }
  double value(int j) const { return lo + j * step; }
};

enum class CellOutcome : unsigned char {
  good,
  t0_system,
  t0_positivity,
  t1_positivity,
  section_failure,
  error
};

inline const char* to_string(CellOutcome o) {
  switch (o) {
    case CellOutcome::good: return "good";
    case CellOutcome::t0_system: return "t0_system";
    case CellOutcome::t0_positivity: return "t0_positivity";
    case CellOutcome::t1_positivity: return "t1_positivity";
    case CellOutcome::section_failure: return "section_failure";
    case CellOutcome::error: return "error";
  }
  return "?";
}

struct RegionCell {
  CellOutcome outcome = CellOutcome::error;
  int p = -1;               // failing level for t1_positivity
  double min_coeff = std::numeric_limits<double>::quiet_NaN();
};

struct RegionMap {
  std::vector<GridAxis> axes;
  ParamMap fixed;
  ScanMode mode = ScanMode::good_for_design;
  std::vector<RegionCell> cells;  // row-major, first axis slowest

  size_t cell_count() const {
    size_t c = 1;
    for (const GridAxis& a : axes) c *= static_cast<size_t>(a.count());
    return c;
  }
  size_t index(const std::vector<int>& coords) const {
    size_t idx = 0;
    for (size_t d = 0; d < axes.size(); ++d) idx = idx * axes[d].count() + coords[d];
    return idx;
  }
  const RegionCell& cell(const std::vector<int>& coords) const { return cells[index(coords)]; }
};

namespace detail {

inline RegionCell classify(const TestOutcome& outcome) {
  RegionCell cell;
  double min_seen = std::numeric_limits<double>::quiet_NaN();
  for (const LevelTrace& t : outcome.level_minima)
    if (std::isnan(min_seen) || t.min_tested < min_seen) min_seen = t.min_tested;
  cell.min_coeff = min_seen;
  struct Visitor {
    RegionCell& c;
    void operator()(const StageCompleted&) { c.outcome = CellOutcome::good; }
    void operator()(const StageSectionFailure&) { c.outcome = CellOutcome::section_failure; }
    void operator()(const StageT0System&) { c.outcome = CellOutcome::t0_system; }
    void operator()(const StageT0Positivity&) { c.outcome = CellOutcome::t0_positivity; }
    void operator()(const StageT1Positivity& s) {
      c.outcome = CellOutcome::t1_positivity;
      c.p = s.p;
    }
  };
  std::visit(Visitor{cell}, outcome.stage);
  return cell;
}

}  // namespace detail

inline TestOutcome run_mode(const PWSpace& space, ScanMode mode, const TestConfig& config) {
  return mode == ScanMode::ecp ? run_test(space, config) : good_for_design(space, config);
}

/// Evaluate the test at every grid node. Cells are written position-indexed
/// by a pool of workers, so results do not depend on the worker count.
/// Generator or section errors are recorded in the cell, never thrown.
inline RegionMap scan(const Family& family, std::vector<GridAxis> axes, ParamMap fixed,
                      ScanMode mode, const TestConfig& config = {}, int jobs = 0) {
  if (axes.empty()) throw std::invalid_argument("scan needs at least one axis");
  for (const GridAxis& a : axes) {
    if (a.count() <= 0) throw std::invalid_argument("empty axis range for " + a.param);
    const ParamRange* pr = family.param(a.param);
    if (pr == nullptr)
      throw std::invalid_argument("unknown parameter " + a.param + " for family " + family.name);
    if (a.lo < pr->lo || a.hi > pr->hi)
      throw std::invalid_argument("axis " + a.param + " leaves the family range");
  }

  RegionMap map;
  map.axes = axes;
  map.fixed = fixed;
  map.mode = mode;
  map.cells.resize(map.cell_count());

  TestConfig cell_config = config;
  cell_config.record_trace = true;

  const size_t total = map.cells.size();
  const auto worker_body = [&](std::atomic<size_t>& cursor) {
    std::vector<int> coords(axes.size());
    for (;;) {
      const size_t idx = cursor.fetch_add(1);
      if (idx >= total) return;
      size_t rem = idx;
      for (size_t d = axes.size(); d-- > 0;) {
        coords[d] = static_cast<int>(rem % axes[d].count());
        rem /= axes[d].count();
      }
      ParamMap params = fixed;
      for (size_t d = 0; d < axes.size(); ++d) params[axes[d].param] = axes[d].value(coords[d]);
      RegionCell cell;
      try {
        const PWSpace space = family.make(params);
        cell = detail::classify(run_mode(space, mode, cell_config));
      } catch (const std::exception&) {
        cell.outcome = CellOutcome::error;
      }
      map.cells[idx] = cell;
    }
  };

  int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  if (workers <= 0) workers = 1;
  workers = std::min<size_t>(workers, total);
  std::atomic<size_t> cursor{0};
  if (workers <= 1) {
    worker_body(cursor);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back([&] { worker_body(cursor); });
    for (std::thread& t : pool) t.join();
  }
  return map;
}

// --- boundary bisection -------------------------------------------------------

struct BracketResult {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_good = false;
  bool hi_good = false;
  int iterations = 0;
};

/// Bisect the free parameter between two differently classified endpoints
/// until the bracket is narrower than 1e-4 (or the iteration cap is hit).
inline BracketResult bisect_boundary(const Family& family, ParamMap fixed,
                                     const std::string& free_param, double lo, double hi,
                                     int max_iters, ScanMode mode = ScanMode::good_for_design,
                                     const TestConfig& config = {}) {
  if (!(lo < hi)) throw std::invalid_argument("bisect: need lo < hi");
  if (family.param(free_param) == nullptr)
    throw std::invalid_argument("unknown parameter " + free_param + " for family " + family.name);
  const auto classify = [&](double x) {
    ParamMap params = fixed;
    params[free_param] = x;
    return run_mode(family.make(params), mode, config).is_ecp();
  };
  BracketResult res;
  res.lo = lo;
  res.hi = hi;
  res.lo_good = classify(lo);
  res.hi_good = classify(hi);
  if (res.lo_good == res.hi_good)
    throw NoBracket("both endpoints classify as " + std::string(res.lo_good ? "good" : "bad"));
  while (res.hi - res.lo > 1e-4 && res.iterations < max_iters) {
    const double mid = 0.5 * (res.lo + res.hi);
    if (classify(mid) == res.lo_good)
      res.lo = mid;
    else
      res.hi = mid;
    ++res.iterations;
  }
  return res;
}

}  // namespace ecp
