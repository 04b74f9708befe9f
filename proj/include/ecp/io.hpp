#pragma once

#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecp/design.hpp"
#include "ecp/ecptest.hpp"
#include "ecp/families.hpp"
#include "ecp/pwspace.hpp"

namespace ecp {

inline std::string format_double(double v, int digits = 10) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// --- space-description files ---------------------------------------------
//
// Line-oriented key/value format, '#' starts a comment. Either an explicit
// description
//
//   dimension 4
//   knots 0 1 2 3
//   section polynomial degree=3     (one line per interval, in order)
//   ...
//   matrix 1 0 0 0 ; 0 1 0 0 ; 0 b 1 0 ; 0 d e 1   (one per interior knot)
//
// or a family reference with parameter bindings
//
//   family thth
//   param lambda 5
//   param mu 1

namespace detail {

inline std::vector<std::string> tokens_of(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') break;
    out.push_back(tok);
  }
  return out;
}

inline double parse_number(const std::string& tok, int line, const std::string& field) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw SpecParseError(line, field, "expected a number, got '" + tok + "'");
  }
  if (used != tok.size())
    throw SpecParseError(line, field, "trailing characters in number '" + tok + "'");
  return v;
}

struct SectionDecl {
  int line = 0;
  std::string kind;
  std::map<std::string, double> params;
};

}  // namespace detail

/// Parse a space description. Errors carry the line and field they refer to.
inline PWSpace parse_space(std::istream& in) {
  std::optional<int> dimension;
  std::vector<double> knots;
  std::vector<detail::SectionDecl> section_decls;
  std::vector<std::vector<double>> matrix_rows;
  std::optional<std::string> family_name;
  ParamMap family_params;
  int knots_line = 0;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::vector<std::string> toks = detail::tokens_of(line);
    if (toks.empty()) continue;
    const std::string& key = toks[0];

    if (key == "dimension") {
      if (toks.size() != 2) throw SpecParseError(lineno, "dimension", "expected one integer");
      dimension = static_cast<int>(detail::parse_number(toks[1], lineno, "dimension"));
      if (*dimension < 1) throw SpecParseError(lineno, "dimension", "must be >= 1");
    } else if (key == "knots") {
      if (toks.size() < 3) throw SpecParseError(lineno, "knots", "need at least two knots");
      for (size_t t = 1; t < toks.size(); ++t)
        knots.push_back(detail::parse_number(toks[t], lineno, "knots"));
      knots_line = lineno;
    } else if (key == "section") {
      if (toks.size() < 2) throw SpecParseError(lineno, "section", "missing kind");
      detail::SectionDecl decl;
      decl.line = lineno;
      decl.kind = toks[1];
      for (size_t t = 2; t < toks.size(); ++t) {
        const size_t eq = toks[t].find('=');
        if (eq == std::string::npos)
          throw SpecParseError(lineno, "section", "expected key=value, got '" + toks[t] + "'");
        decl.params[toks[t].substr(0, eq)] =
            detail::parse_number(toks[t].substr(eq + 1), lineno, "section");
      }
      section_decls.push_back(std::move(decl));
    } else if (key == "matrix") {
      std::vector<double> entries;
      int cols = -1, col_count = 0, row_count = 1;
      for (size_t t = 1; t < toks.size(); ++t) {
        if (toks[t] == ";") {
          if (cols == -1) cols = col_count;
          if (col_count != cols)
            throw SpecParseError(lineno, "matrix", "ragged matrix rows");
          col_count = 0;
          ++row_count;
          continue;
        }
        entries.push_back(detail::parse_number(toks[t], lineno, "matrix"));
        ++col_count;
      }
      if (cols == -1) cols = col_count;
      if (col_count != cols) throw SpecParseError(lineno, "matrix", "ragged matrix rows");
      if (row_count != cols)
        throw SpecParseError(lineno, "matrix", "matrix must be square");
      std::vector<double> flat(entries);
      flat.push_back(cols);  // smuggle the order in the last slot
      matrix_rows.push_back(std::move(flat));
    } else if (key == "family") {
      if (toks.size() != 2) throw SpecParseError(lineno, "family", "expected one name");
      family_name = toks[1];
    } else if (key == "param") {
      if (toks.size() != 3)
        throw SpecParseError(lineno, "param", "expected: param <name> <value>");
      family_params[toks[1]] = detail::parse_number(toks[2], lineno, "param");
    } else {
      throw SpecParseError(lineno, key, "unknown key");
    }
  }

  if (family_name) {
    if (dimension || !knots.empty() || !section_decls.empty() || !matrix_rows.empty())
      throw SpecParseError(0, "family", "family form cannot be mixed with explicit keys");
    const Family* fam = find_family(*family_name);
    if (fam == nullptr) throw SpecParseError(0, "family", "unknown family '" + *family_name + "'");
    for (const auto& [pname, value] : family_params) {
      (void)value;
      if (fam->param(pname) == nullptr)
        throw SpecParseError(0, "param", "family has no parameter '" + pname + "'");
    }
    try {
      return fam->make(family_params);
    } catch (const std::invalid_argument& e) {
      throw SpecParseError(0, "family", e.what());
    }
  }

  if (!dimension) throw SpecParseError(0, "dimension", "missing");
  if (knots.empty()) throw SpecParseError(0, "knots", "missing");
  if (section_decls.empty()) throw SpecParseError(0, "section", "missing");
  if (section_decls.size() + 1 != knots.size())
    throw SpecParseError(knots_line, "knots", "need one section per knot interval");

  std::vector<SectionSpace> sections;
  for (size_t k = 0; k < section_decls.size(); ++k) {
    const detail::SectionDecl& decl = section_decls[k];
    const double a = knots[k], b = knots[k + 1];
    try {
      if (decl.kind == "polynomial") {
        auto it = decl.params.find("degree");
        if (it == decl.params.end())
          throw SpecParseError(decl.line, "section", "polynomial needs degree=<int>");
        sections.push_back(SectionSpace::polynomial(static_cast<int>(it->second), a, b));
      } else if (decl.kind == "trigonometric_n4") {
        sections.push_back(SectionSpace::trigonometric_n4(a, b));
      } else if (decl.kind == "hyperbolic_n4") {
        sections.push_back(SectionSpace::hyperbolic_n4(a, b));
      } else if (decl.kind == "cossin") {
        sections.push_back(SectionSpace::cos_sin(a, b));
      } else {
        throw SpecParseError(decl.line, "section", "unknown kind '" + decl.kind + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw SpecParseError(decl.line, "section", e.what());
    }
    if (sections.back().dim() != *dimension)
      throw SpecParseError(decl.line, "section",
                           "section dimension " + std::to_string(sections.back().dim()) +
                               " does not match declared dimension");
  }

  std::vector<ConnectionMatrix> matrices;
  for (std::vector<double> flat : matrix_rows) {
    const int order = static_cast<int>(flat.back());
    flat.pop_back();
    if (order != *dimension)
      throw SpecParseError(0, "matrix", "matrix order does not match declared dimension");
    DenseMatrix m(order, order);
    for (int i = 0; i < order; ++i)
      for (int j = 0; j < order; ++j) m(i, j) = flat[static_cast<size_t>(i) * order + j];
    try {
      matrices.emplace_back(std::move(m));
    } catch (const std::invalid_argument& e) {
      throw SpecParseError(0, "matrix", e.what());
    }
  }

  try {
    return PWSpace(Partition(std::move(knots)), std::move(sections), std::move(matrices));
  } catch (const std::invalid_argument& e) {
    throw SpecParseError(0, "space", e.what());
  }
}

inline PWSpace parse_space(const std::string& text) {
  std::istringstream in(text);
  return parse_space(in);
}

/// Serialize in the explicit form; parsing the output reproduces the space.
inline std::string serialize_space(const PWSpace& space) {
  std::ostringstream out;
  out << "dimension " << space.dim() << "\n";
  out << "knots";
  for (double t : space.partition().knots()) out << ' ' << format_double(t, 17);
  out << "\n";
  for (int k = 0; k <= space.q(); ++k) {
    const SectionSpace& s = space.section(k);
    switch (s.kind()) {
      case SectionKind::polynomial:
        out << "section polynomial degree=" << s.dim() - 1 << "\n";
        break;
      case SectionKind::trigonometric_n4:
        out << "section trigonometric_n4\n";
        break;
      case SectionKind::hyperbolic_n4:
        out << "section hyperbolic_n4\n";
        break;
      case SectionKind::cossin:
        out << "section cossin\n";
        break;
      case SectionKind::custom:
        throw CapabilityError("custom section-spaces cannot be serialized");
    }
  }
  for (const ConnectionMatrix& m : space.matrices()) {
    out << "matrix";
    for (int i = 0; i < m.order(); ++i) {
      if (i > 0) out << " ;";
      for (int j = 0; j < m.order(); ++j) out << ' ' << format_double(m(i, j), 17);
    }
    out << "\n";
  }
  return out.str();
}

// --- reports ----------------------------------------------------------------

namespace detail {

struct StageFields {
  std::vector<std::pair<std::string, std::string>> kv;
};

inline StageFields stage_fields(const Stage& stage) {
  StageFields f;
  struct Visitor {
    StageFields& f;
    void operator()(const StageCompleted&) {}
    void operator()(const StageSectionFailure& s) {
      f.kv.emplace_back("k", std::to_string(s.k));
      f.kv.emplace_back("detail", s.detail);
    }
    void operator()(const StageT0System& s) {
      f.kv.emplace_back("i", std::to_string(s.i));
      f.kv.emplace_back("condition", format_double(s.condition));
      f.kv.emplace_back("pivot_ratio", format_double(s.pivot_ratio));
    }
    void operator()(const StageT0Positivity& s) {
      f.kv.emplace_back("i", std::to_string(s.where.i));
      f.kv.emplace_back("k", std::to_string(s.where.k));
      f.kv.emplace_back("r", std::to_string(s.where.r));
      f.kv.emplace_back("value", format_double(s.where.value));
    }
    void operator()(const StageT1Positivity& s) {
      f.kv.emplace_back("p", std::to_string(s.p));
      f.kv.emplace_back("i", std::to_string(s.where.i));
      f.kv.emplace_back("k", std::to_string(s.where.k));
      f.kv.emplace_back("r", std::to_string(s.where.r));
      f.kv.emplace_back("value", format_double(s.where.value));
    }
  };
  std::visit(Visitor{f}, stage);
  return f;
}

}  // namespace detail

/// Line-delimited report: one "key value" pair per line.
inline void write_test_report(std::ostream& out, const TestOutcome& outcome,
                              const std::string& mode, bool trace) {
  out << "verdict " << (outcome.is_ecp() ? "positive" : "negative") << "\n";
  out << "mode " << mode << "\n";
  out << "stage " << stage_name(outcome.stage) << "\n";
  for (const auto& [k, v] : detail::stage_fields(outcome.stage).kv) out << k << ' ' << v << "\n";
  out << "tol " << format_double(outcome.tol) << "\n";
  if (trace)
    for (const LevelTrace& t : outcome.level_minima)
      out << "level_min " << t.p << ' ' << format_double(t.min_tested, 17) << "\n";
}

inline nlohmann::json to_json(const TestOutcome& outcome, const std::string& mode) {
  nlohmann::json j;
  j["verdict"] = outcome.is_ecp() ? "positive" : "negative";
  j["mode"] = mode;
  j["stage"] = stage_name(outcome.stage);
  for (const auto& [k, v] : detail::stage_fields(outcome.stage).kv) j[k] = v;
  j["tol"] = outcome.tol;
  nlohmann::json levels = nlohmann::json::array();
  for (const LevelTrace& t : outcome.level_minima)
    levels.push_back({{"p", t.p}, {"min", t.min_tested}});
  j["levels"] = levels;
  return j;
}

// --- CSV --------------------------------------------------------------------

/// Fixed scan schema: "param1,param2,outcome,stage,p,min_coeff", one row per
/// grid cell (first axis slowest). param2 stays empty for 1-axis scans, p is
/// empty unless the failure happened during the iteration levels.
inline void write_scan_csv(std::ostream& out, const RegionMap& map) {
  out << "param1,param2,outcome,stage,p,min_coeff\n";
  const size_t total = map.cells.size();
  std::vector<int> coords(map.axes.size(), 0);
  for (size_t idx = 0; idx < total; ++idx) {
    size_t rem = idx;
    for (size_t d = map.axes.size(); d-- > 0;) {
      coords[d] = static_cast<int>(rem % map.axes[d].count());
      rem /= map.axes[d].count();
    }
    const RegionCell& cell = map.cells[idx];
    out << format_double(map.axes[0].value(coords[0]));
    out << ',';
    if (map.axes.size() > 1) out << format_double(map.axes[1].value(coords[1]));
    out << ',' << to_string(cell.outcome) << ',';
    out << (cell.outcome == CellOutcome::good ? "completed" : to_string(cell.outcome));
    out << ',';
    if (cell.outcome == CellOutcome::t1_positivity) out << cell.p;
    out << ',';
    if (!std::isnan(cell.min_coeff)) out << format_double(cell.min_coeff);
    out << "\n";
  }
}

/// Curve sample schema: "x,side,coord_0..coord_{d-1}".
inline void write_curve_csv(std::ostream& out, const std::vector<CurveSample>& samples) {
  if (samples.empty()) return;
  out << "x,side";
  for (size_t c = 0; c < samples.front().point.size(); ++c) out << ",coord_" << c;
  out << "\n";
  for (const CurveSample& s : samples) {
    out << format_double(s.x) << ',' << (s.side == Side::left ? '-' : '+');
    for (double v : s.point) out << ',' << format_double(v);
    out << "\n";
  }
}

}  // namespace ecp
