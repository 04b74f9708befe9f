// Command-line front end: run the ECP / good-for-design test on a space
// description, scan parameter regions of the built-in families, bisect
// region boundaries, and sample design curves.
//
// Exit codes: 0 positive verdict, 1 negative verdict (stage in the report),
// 2 usage, parse, or validation errors.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ecp/design.hpp"
#include "ecp/ecptest.hpp"
#include "ecp/families.hpp"
#include "ecp/io.hpp"

namespace {

struct CommonOptions {
  double tol = 1e-30;
  double kappa_max = 1e12;
  double pivot_floor = 1e-14;

  ecp::TestConfig config() const {
    ecp::TestConfig c;
    c.tol = tol;
    c.kappa_max = kappa_max;
    c.pivot_floor = pivot_floor;
    return c;
  }
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--tol", opt.tol, "positivity threshold for tested coefficients")
      ->envname("ECP_TOL");
  cmd->add_option("--kappa-max", opt.kappa_max, "condition-estimate ceiling for direct solves");
  cmd->add_option("--pivot-floor", opt.pivot_floor, "minimum admissible pivot ratio");
}

ecp::PWSpace load_space(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open space description '" + path + "'");
  return ecp::parse_space(in);
}

ecp::ScanMode parse_mode(const std::string& mode) {
  if (mode == "ecp") return ecp::ScanMode::ecp;
  if (mode == "design") return ecp::ScanMode::good_for_design;
  throw std::invalid_argument("mode must be 'ecp' or 'design'");
}

// "name=lo:hi:step"
ecp::GridAxis parse_axis(const std::string& text) {
  const size_t eq = text.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("axis must look like name=lo:hi:step");
  ecp::GridAxis axis;
  axis.param = text.substr(0, eq);
  const std::string spec = text.substr(eq + 1);
  const size_t c1 = spec.find(':');
  const size_t c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw std::invalid_argument("axis must look like name=lo:hi:step");
  axis.lo = std::stod(spec.substr(0, c1));
  axis.hi = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
  axis.step = std::stod(spec.substr(c2 + 1));
  if (axis.count() <= 0) throw std::invalid_argument("empty axis range for " + axis.param);
  return axis;
}

std::pair<std::string, double> parse_binding(const std::string& text) {
  const size_t eq = text.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("binding must look like name=value");
  return {text.substr(0, eq), std::stod(text.substr(eq + 1))};
}

std::vector<std::vector<double>> load_control_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open control-point file '" + path + "'");
  std::vector<std::vector<double>> points;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<double> p;
    double v;
    while (ls >> v) p.push_back(v);
    if (!p.empty()) points.push_back(std::move(p));
  }
  if (points.empty()) throw std::invalid_argument("control-point file is empty");
  for (const auto& p : points)
    if (p.size() != points.front().size())
      throw std::invalid_argument("control points must share one coordinate count");
  return points;
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::invalid_argument("cannot open output file '" + path + "'");
  return file;
}

int run_test_command(const std::string& spec_path, const std::string& mode,
                     const CommonOptions& common, bool trace, bool json) {
  const ecp::PWSpace space = load_space(spec_path);
  ecp::TestConfig config = common.config();
  config.record_trace = true;
  const ecp::TestOutcome outcome = ecp::run_mode(space, parse_mode(mode), config);
  if (json)
    std::cout << ecp::to_json(outcome, mode).dump(2) << "\n";
  else
    ecp::write_test_report(std::cout, outcome, mode, trace);
  return outcome.is_ecp() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"piecewise extended Chebyshev space tester"};
  app.require_subcommand(1);

  // --- test ---
  auto* test_cmd = app.add_subcommand("test", "decide a space description");
  std::string test_spec, test_mode = "ecp";
  bool test_trace = false, test_json = false;
  CommonOptions test_common;
  test_cmd->add_option("spec", test_spec, "space description file")->required();
  test_cmd->add_option("--mode", test_mode, "ecp | design");
  test_cmd->add_flag("--trace", test_trace, "print per-level minimum coefficients");
  test_cmd->add_flag("--json", test_json, "emit a JSON report");
  add_common(test_cmd, test_common);

  // --- scan ---
  auto* scan_cmd = app.add_subcommand("scan", "grid scan of a built-in family");
  std::string scan_family, scan_mode = "design", scan_out;
  std::vector<std::string> scan_axes, scan_fixed;
  int scan_jobs = 0;
  CommonOptions scan_common;
  scan_cmd->add_option("--family", scan_family, "family name")->required();
  scan_cmd->add_option("--param", scan_axes, "axis as name=lo:hi:step (1 or 2)")->required();
  scan_cmd->add_option("--fixed", scan_fixed, "fixed binding as name=value");
  scan_cmd->add_option("--mode", scan_mode, "ecp | design");
  scan_cmd->add_option("--out", scan_out, "CSV output path (default stdout)");
  scan_cmd->add_option("--jobs", scan_jobs, "worker count (default: hardware)");
  add_common(scan_cmd, scan_common);

  // --- bisect ---
  auto* bisect_cmd = app.add_subcommand("bisect", "bracket a region boundary");
  std::string bisect_family, bisect_free, bisect_mode = "design";
  std::vector<std::string> bisect_fixed;
  double bisect_lo = 0.0, bisect_hi = 0.0;
  int bisect_iters = 60;
  CommonOptions bisect_common;
  bisect_cmd->add_option("--family", bisect_family, "family name")->required();
  bisect_cmd->add_option("--free", bisect_free, "parameter to bisect")->required();
  bisect_cmd->add_option("--lo", bisect_lo, "lower end")->required();
  bisect_cmd->add_option("--hi", bisect_hi, "upper end")->required();
  bisect_cmd->add_option("--fixed", bisect_fixed, "fixed binding as name=value");
  bisect_cmd->add_option("--iters", bisect_iters, "iteration cap");
  bisect_cmd->add_option("--mode", bisect_mode, "ecp | design");
  add_common(bisect_cmd, bisect_common);

  // --- curve ---
  auto* curve_cmd = app.add_subcommand("curve", "sample a design curve");
  std::string curve_spec, curve_points, curve_out, curve_side = "right";
  int curve_samples = 101;
  CommonOptions curve_common;
  curve_cmd->add_option("spec", curve_spec, "space description file")->required();
  curve_cmd->add_option("--control-points", curve_points, "one point per line")->required();
  curve_cmd->add_option("--samples", curve_samples, "number of samples (>= 2)");
  curve_cmd->add_option("--out", curve_out, "CSV output path (default stdout)");
  curve_cmd->add_option("--side", curve_side, "limit taken at interior knots: left | right");
  add_common(curve_cmd, curve_common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(test_cmd))
      return run_test_command(test_spec, test_mode, test_common, test_trace, test_json);

    if (app.got_subcommand(scan_cmd)) {
      const ecp::Family* family = ecp::find_family(scan_family);
      if (family == nullptr) throw std::invalid_argument("unknown family '" + scan_family + "'");
      if (scan_axes.empty() || scan_axes.size() > 2)
        throw std::invalid_argument("scan takes one or two --param axes");
      std::vector<ecp::GridAxis> axes;
      for (const std::string& a : scan_axes) axes.push_back(parse_axis(a));
      ecp::ParamMap fixed;
      for (const std::string& b : scan_fixed) fixed.insert(parse_binding(b));
      const ecp::RegionMap map = ecp::scan(*family, axes, fixed, parse_mode(scan_mode),
                                           scan_common.config(), scan_jobs);
      std::ofstream file;
      ecp::write_scan_csv(open_output(file, scan_out), map);
      return 0;
    }

    if (app.got_subcommand(bisect_cmd)) {
      const ecp::Family* family = ecp::find_family(bisect_family);
      if (family == nullptr) throw std::invalid_argument("unknown family '" + bisect_family + "'");
      ecp::ParamMap fixed;
      for (const std::string& b : bisect_fixed) fixed.insert(parse_binding(b));
      try {
        const ecp::BracketResult res =
            ecp::bisect_boundary(*family, fixed, bisect_free, bisect_lo, bisect_hi, bisect_iters,
                                 parse_mode(bisect_mode), bisect_common.config());
        std::cout << "bracket_lo " << ecp::format_double(res.lo, 17) << "\n";
        std::cout << "bracket_hi " << ecp::format_double(res.hi, 17) << "\n";
        std::cout << "lo_verdict " << (res.lo_good ? "positive" : "negative") << "\n";
        std::cout << "hi_verdict " << (res.hi_good ? "positive" : "negative") << "\n";
        std::cout << "iterations " << res.iterations << "\n";
        return 0;
      } catch (const ecp::NoBracket& e) {
        std::cout << "no_bracket " << e.what() << "\n";
        return 1;
      }
    }

    if (app.got_subcommand(curve_cmd)) {
      const ecp::PWSpace space = load_space(curve_spec);
      const auto points = load_control_points(curve_points);
      if (static_cast<int>(points.size()) != space.dim())
        throw std::invalid_argument("need exactly " + std::to_string(space.dim()) +
                                    " control points, got " + std::to_string(points.size()));
      if (curve_samples < 2) throw std::invalid_argument("--samples must be >= 2");
      if (curve_side != "left" && curve_side != "right")
        throw std::invalid_argument("--side must be 'left' or 'right'");
      try {
        ecp::GlobalBernsteinBasis basis =
            ecp::global_bernstein_basis(space, curve_common.config());
        ecp::BezierCurve curve(std::move(basis), points);
        const auto samples = ecp::sample_curve(
            curve, curve_samples, curve_side == "left" ? ecp::Side::left : ecp::Side::right);
        std::ofstream file;
        ecp::write_curve_csv(open_output(file, curve_out), samples);
        return 0;
      } catch (const ecp::NotCertified& e) {
        std::cerr << "error: " << e.what() << "\n";
        ecp::write_test_report(std::cout, e.outcome, "design", false);
        return 1;
      }
    }
  } catch (const ecp::SpecParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ecp::NotApplicable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
