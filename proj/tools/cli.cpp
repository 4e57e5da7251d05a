#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "betadpd/csv.hpp"
#include "betadpd/error.hpp"
#include "betadpd/estimator.hpp"
#include "betadpd/inference.hpp"
#include "betadpd/simlab.hpp"
#include "betadpd/tuning.hpp"
#include "betadpd/vardisp.hpp"

namespace betadpd::cli {
namespace {

using nlohmann::ordered_json;
constexpr int kSchemaVersion = 1;
constexpr double kUnboundedThreshold = 1e6;

struct DataOptions {
  std::string path;
  std::string response;
  std::string covariates;
  bool no_intercept = false;
  std::string link = "logit";
  std::string transform_range;
  bool boundary_adjust = false;
  std::string drop_rows;
  bool vardisp = false;
  std::string precision_covariates;
  std::string precision_link = "log";
};

struct FitOptions {
  std::string alpha = "0";
  int max_iterations = 200;
  double tolerance = 1e-8;
};

struct OutputOptions {
  std::string out;
  std::string format = "json";
};

struct Loaded {
  Dataset data;
  Link link;
  PrecisionLink plink;
  std::vector<Eigen::Index> dropped;
};

std::vector<std::string> name_list(const std::string& s) {
  if (io::trim(s).empty()) return {};
  return io::split(s, ',');
}

Eigen::MatrixXd design_from(const io::CsvTable& t, const std::vector<std::string>& cols,
                            bool intercept, std::vector<std::string>& names) {
  const Eigen::Index n = static_cast<Eigen::Index>(t.rows.size());
  const Eigen::Index k = static_cast<Eigen::Index>(cols.size()) + (intercept ? 1 : 0);
  if (k == 0) throw ModelError("design has no columns");
  Eigen::MatrixXd x(n, k);
  Eigen::Index j = 0;
  if (intercept) {
    x.col(j++).setOnes();
    names.push_back("intercept");
  }
  for (const auto& c : cols) {
    const std::vector<double> v = t.numeric(c);
    x.col(j++) = Eigen::Map<const Eigen::VectorXd>(v.data(), n);
    names.push_back(c);
  }
  return x;
}

Loaded load(const DataOptions& o) {
  const io::CsvTable t = io::read_csv_file(o.path);
  if (t.rows.empty()) throw ParseError(o.path + ": no data rows");
  std::vector<double> y = t.numeric(o.response);
  if (!o.transform_range.empty()) {
    const std::vector<double> r = io::parse_real_list(o.transform_range, "--transform-range");
    if (r.size() != 2) throw ParseError("--transform-range needs two values a,b");
    y = transform_response(y, r[0], r[1], o.boundary_adjust);
  } else if (o.boundary_adjust) {
    y = transform_response(y, 0.0, 1.0, true);
  }
  std::vector<std::string> xn, zn;
  Eigen::MatrixXd x = design_from(t, name_list(o.covariates), !o.no_intercept, xn);
  std::optional<Eigen::MatrixXd> z;
  if (o.vardisp) z = design_from(t, name_list(o.precision_covariates), true, zn);
  Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  Dataset data(std::move(yv), std::move(x), std::move(xn), std::move(z), std::move(zn));
  std::vector<Eigen::Index> dropped;
  for (const auto& s : name_list(o.drop_rows)) dropped.push_back(io::parse_integer(s, "--drop-rows"));
  if (!dropped.empty()) data = data.without_rows(dropped);
  return {std::move(data), Link::parse(o.link), PrecisionLink::parse(o.precision_link), dropped};
}

std::vector<double> alpha_list(const std::string& s) {
  std::vector<double> a = io::parse_real_list(s, "--alpha");
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  for (double v : a) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParseError("alpha values must be finite and >= 0");
  }
  return a;
}

FitConfig fit_config(const FitOptions& f) {
  FitConfig c;
  c.max_iterations = f.max_iterations;
  c.gradient_tolerance = f.tolerance;
  return c;
}

// NaN and infinities become null.
ordered_json num(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json vec(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

ordered_json mat(const Eigen::MatrixXd& m) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec(m.row(i).transpose()));
  return a;
}

ordered_json named(const std::vector<std::string>& names, const Eigen::VectorXd& v) {
  ordered_json o = ordered_json::object();
  for (std::size_t i = 0; i < names.size(); ++i) o[names[i]] = num(v[static_cast<Eigen::Index>(i)]);
  return o;
}

ordered_json header(const std::string& command, const DataOptions& d, const Loaded& l) {
  ordered_json h;
  h["schema_version"] = kSchemaVersion;
  h["command"] = command;
  ordered_json data;
  data["path"] = d.path;
  data["response"] = d.response;
  data["n"] = l.data.n();
  data["dropped_rows"] = l.dropped;
  h["data"] = data;
  h["link"] = l.link.name();
  return h;
}

std::vector<std::string> natural_names(const Dataset& d) {
  std::vector<std::string> n = d.x_names();
  n.push_back("phi");
  return n;
}

void emit(const OutputOptions& o, const std::string& text, std::ostream& out) {
  if (o.out.empty() || o.out == "-") {
    out << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f || !(f << text)) throw std::ios_base::failure("cannot write '" + o.out + "'");
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += ',';
    s += cells[i];
  }
  return s + '\n';
}

// Parses "1,0/0,1;-1,1": rows of M separated by '/', then m0.
LinearHypothesis parse_hypothesis(const std::string& s, Eigen::Index p) {
  const auto semi = s.find(';');
  if (semi == std::string::npos) throw ParseError("--hypothesis must look like 'M-rows;m0'");
  const std::vector<std::string> rows = io::split(s.substr(0, semi), '/');
  const std::vector<double> m0 = io::parse_real_list(s.substr(semi + 1), "--hypothesis m0");
  LinearHypothesis h;
  h.m.resize(static_cast<Eigen::Index>(rows.size()), p);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::vector<double> v = io::parse_real_list(rows[r], "--hypothesis");
    if (static_cast<Eigen::Index>(v.size()) != p) {
      throw ParseError("--hypothesis row " + std::to_string(r + 1) + " needs " + std::to_string(p) +
                       " entries");
    }
    for (Eigen::Index j = 0; j < p; ++j) h.m(static_cast<Eigen::Index>(r), j) = v[static_cast<std::size_t>(j)];
  }
  h.m0 = Eigen::Map<const Eigen::VectorXd>(m0.data(), static_cast<Eigen::Index>(m0.size()));
  h.validate(p);
  return h;
}

LinearHypothesis coefficient_hypothesis(const std::string& name, const Dataset& d) {
  const auto& names = d.x_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ParseError("--coef: no coefficient named '" + name + "'");
  return LinearHypothesis::coefficient(d.p(), it - names.begin(), 0.0);
}

ParamVector parse_theta(const std::string& s, Eigen::Index p) {
  const std::vector<double> v = io::parse_real_list(s, "--at-theta");
  if (static_cast<Eigen::Index>(v.size()) != p + 1) {
    throw ParseError("--at-theta needs " + std::to_string(p + 1) + " values (coefficients, then phi)");
  }
  Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(v.data(), p);
  return ParamVector(std::move(beta), v.back());
}

BetaBlock parse_block(const std::string& s) {
  if (s == "leading") return BetaBlock::leading;
  if (s == "full") return BetaBlock::full_inverse;
  throw ParseError("--block must be 'leading' or 'full'");
}

// Either the fits of the alpha path or one fixed theta per alpha.
struct Estimate {
  double alpha;
  std::optional<FitResult> fit;
  ParamVector theta;
  std::string error;
};

std::vector<Estimate> estimates(const Loaded& l, const std::vector<double>& alphas,
                                const FitOptions& f, const std::string& at_theta) {
  std::vector<Estimate> out;
  if (!at_theta.empty()) {
    const ParamVector t = parse_theta(at_theta, l.data.p());
    for (double a : alphas) out.push_back({a, std::nullopt, t, {}});
    return out;
  }
  FitConfig cfg = fit_config(f);
  for (const PathPoint& pt : fit_alpha_path(l.data, l.link, alphas, cfg)) {
    Estimate e{pt.alpha, pt.fit, pt.fit ? pt.fit->theta_hat : ParamVector{}, pt.error};
    if (pt.fit && !pt.fit->converged) e.error = pt.fit->message;
    out.push_back(std::move(e));
  }
  return out;
}

bool usable(const Estimate& e) { return e.error.empty() && (!e.fit || e.fit->converged); }

// ---------------------------------------------------------------- fit

int cmd_fit(const DataOptions& d, const FitOptions& f, const OutputOptions& o, std::ostream& out) {
  const Loaded l = load(d);
  const std::vector<double> alphas = alpha_list(f.alpha);
  bool all_converged = true;
  ordered_json report = header("fit", d, l);
  ordered_json fits = ordered_json::array();
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> rows;

  if (d.vardisp) {
    const VarDispSpec spec = VarDispSpec::linear(l.data, l.link, l.plink);
    report["precision_link"] = l.plink.name();
    for (const auto& zn : l.data.z_names()) names.push_back("gamma_" + zn);
    names.insert(names.begin(), l.data.x_names().begin(), l.data.x_names().end());
    for (double a : alphas) {
      VdFitConfig cfg;
      cfg.alpha = a;
      cfg.max_iterations = f.max_iterations;
      cfg.gradient_tolerance = f.tolerance;
      ordered_json j;
      j["alpha"] = a;
      try {
        const VdFitResult r = vd_fit(l.data, spec, cfg);
        all_converged = all_converged && r.converged;
        j["converged"] = r.converged;
        j["iterations"] = r.iterations;
        j["objective"] = num(r.objective_value);
        j["gradient_norm"] = num(r.gradient_norm);
        j["estimates"] = named(names, r.theta);
        j["standard_errors"] = named(names, r.standard_errors());
        j["covariance"] = r.covariance_available ? mat(r.covariance) : ordered_json(nullptr);
        j["message"] = r.message;
        std::vector<std::string> row{io::fmt(a), r.converged ? "1" : "0", std::to_string(r.iterations),
                                     io::fmt(r.objective_value), io::fmt(r.gradient_norm)};
        for (Eigen::Index i = 0; i < r.theta.size(); ++i) row.push_back(io::fmt(r.theta[i]));
        const Eigen::VectorXd se = r.standard_errors();
        for (Eigen::Index i = 0; i < se.size(); ++i) row.push_back(io::fmt(se[i]));
        rows.push_back(std::move(row));
      } catch (const DivergentIntegralError& e) {
        all_converged = false;
        j["converged"] = false;
        j["error"] = e.what();
      }
      fits.push_back(j);
    }
  } else {
    names = natural_names(l.data);
    for (const PathPoint& pt : fit_alpha_path(l.data, l.link, alphas, fit_config(f))) {
      ordered_json j;
      j["alpha"] = pt.alpha;
      if (!pt.fit) {
        all_converged = false;
        j["converged"] = false;
        j["error"] = pt.error;
        fits.push_back(j);
        continue;
      }
      const FitResult& r = *pt.fit;
      all_converged = all_converged && r.converged;
      j["converged"] = r.converged;
      j["iterations"] = r.iterations;
      j["objective"] = num(r.objective_value);
      j["gradient_norm"] = num(r.gradient_norm);
      j["estimates"] = named(names, r.theta_hat.natural());
      j["standard_errors"] = named(names, r.standard_errors());
      j["covariance"] = r.covariance_available ? mat(r.covariance) : ordered_json(nullptr);
      j["message"] = r.message;
      fits.push_back(j);
      std::vector<std::string> row{io::fmt(r.alpha), r.converged ? "1" : "0", std::to_string(r.iterations),
                                   io::fmt(r.objective_value), io::fmt(r.gradient_norm)};
      const Eigen::VectorXd th = r.theta_hat.natural();
      const Eigen::VectorXd se = r.standard_errors();
      for (Eigen::Index i = 0; i < th.size(); ++i) row.push_back(io::fmt(th[i]));
      for (Eigen::Index i = 0; i < se.size(); ++i) row.push_back(io::fmt(se[i]));
      rows.push_back(std::move(row));
    }
  }
  report["fits"] = fits;

  if (o.format == "csv") {
    std::vector<std::string> head{"alpha", "converged", "iterations", "objective", "gradient_norm"};
    for (const auto& n : names) head.push_back(n);
    for (const auto& n : names) head.push_back("se_" + n);
    std::string text = csv_line(head);
    for (const auto& r : rows) text += csv_line(r);
    emit(o, text, out);
  } else {
    emit(o, report.dump(2) + "\n", out);
  }
  return all_converged ? kOk : kNotConverged;
}

// ---------------------------------------------------------------- test

struct TestOptions {
  std::string hypothesis;
  std::string coef;
  std::string at_theta;
  std::string power;
  double level = 0.05;
  std::string block = "leading";
};

int cmd_test(const DataOptions& d, const FitOptions& f, const TestOptions& t,
             const OutputOptions& o, std::ostream& out) {
  if (d.vardisp) throw ParseError("Wald-type tests are available for the fixed-dispersion model only");
  const Loaded l = load(d);
  const LinearHypothesis hyp =
      t.coef.empty() ? parse_hypothesis(t.hypothesis, l.data.p()) : coefficient_hypothesis(t.coef, l.data);
  const BetaBlock block = parse_block(t.block);
  if (!(t.level > 0.0 && t.level < 1.0)) throw ParseError("--level must lie in (0, 1)");
  const std::vector<double> alphas = alpha_list(f.alpha);
  std::optional<Eigen::VectorXd> dvec;
  if (!t.power.empty()) {
    const std::vector<double> v = io::parse_real_list(t.power, "--power");
    if (v.size() == 1 && l.data.p() > 1) {
      dvec = Eigen::VectorXd::Constant(l.data.p(), v[0]);
    } else if (static_cast<Eigen::Index>(v.size()) == l.data.p()) {
      dvec = Eigen::Map<const Eigen::VectorXd>(v.data(), l.data.p());
    } else {
      throw ParseError("--power needs one value or " + std::to_string(l.data.p()));
    }
  }

  ordered_json report = header("test", d, l);
  report["hypothesis"] = {{"m", mat(hyp.m)}, {"m0", vec(hyp.m0)}};
  report["level"] = t.level;
  report["critical_value"] = chi_square_critical(hyp.rows(), t.level);
  ordered_json tests = ordered_json::array();
  std::string text = csv_line({"alpha", "statistic", "df", "p_value", "reject"});
  bool all_ok = true;
  for (const Estimate& e : estimates(l, alphas, f, t.at_theta)) {
    ordered_json j;
    j["alpha"] = e.alpha;
    if (!usable(e)) {
      all_ok = false;
      j["error"] = e.error;
      tests.push_back(j);
      continue;
    }
    const TestResult r = wald_test_at(l.data, l.link, e.theta, e.alpha, hyp, block);
    j["statistic"] = num(r.statistic);
    j["df"] = r.df;
    j["p_value"] = num(r.p_value);
    j["reject"] = r.p_value < t.level;
    j["residual"] = vec(r.residual);
    text += csv_line({io::fmt(e.alpha), io::fmt(r.statistic), std::to_string(r.df), io::fmt(r.p_value),
                      r.p_value < t.level ? "1" : "0"});
    if (dvec) {
      // Powers are computed at the projection of the estimate onto H0.
      const Eigen::MatrixXd& m = hyp.m;
      const Eigen::VectorXd beta = e.theta.beta();
      const Eigen::VectorXd beta0 =
          beta - m.transpose() * (m * m.transpose()).ldlt().solve(m * beta - hyp.m0);
      const ParamVector theta0(beta0, e.theta.phi());
      ordered_json p;
      p["d"] = vec(*dvec);
      p["theta0"] = vec(theta0.natural());
      p["noncentrality"] = num(noncentrality(l.data, l.link, theta0, e.alpha, hyp, *dvec, block));
      p["power"] = num(contiguous_power(l.data, l.link, theta0, e.alpha, hyp, *dvec, t.level, block));
      ordered_json curve = ordered_json::array();
      for (int k = 0; k <= 12; ++k) {
        const double s = 0.25 * k;
        curve.push_back({{"scale", s},
                         {"power", num(contiguous_power(l.data, l.link, theta0, e.alpha, hyp,
                                                        s * *dvec, t.level, block))}});
      }
      p["curve"] = curve;
      j["contiguous_power"] = p;
    }
    tests.push_back(j);
  }
  report["tests"] = tests;
  emit(o, o.format == "csv" ? text : report.dump(2) + "\n", out);
  return all_ok ? kOk : kNotConverged;
}

// ---------------------------------------------------------------- influence

struct InfluenceOptions {
  Eigen::Index slot = 0;
  std::size_t points = 400;
  double edge = 1e-6;
  std::string at_theta;
  std::string hypothesis;
  std::string block = "leading";
};

int cmd_influence(const DataOptions& d, const FitOptions& f, const InfluenceOptions& io_,
                  const OutputOptions& o, std::ostream& out) {
  if (d.vardisp) throw ParseError("influence diagnostics are available for the fixed-dispersion model only");
  const Loaded l = load(d);
  if (io_.slot < 0 || io_.slot >= l.data.n()) throw ParseError("--slot is out of range");
  if (!(io_.edge > 0.0 && io_.edge < 0.5)) throw ParseError("--grid-edge must lie in (0, 0.5)");
  if (io_.points < 2) throw ParseError("--grid-points must be at least 2");
  std::optional<LinearHypothesis> hyp;
  if (!io_.hypothesis.empty()) hyp = parse_hypothesis(io_.hypothesis, l.data.p());
  const BetaBlock block = parse_block(io_.block);
  const std::vector<double> grid = influence_grid(io_.points, io_.edge);
  const std::vector<std::string> names = natural_names(l.data);

  ordered_json report = header("influence", d, l);
  report["slot"] = io_.slot;
  report["grid_points"] = io_.points;
  report["grid_edge"] = io_.edge;
  ordered_json results = ordered_json::array();
  std::vector<std::string> head{"alpha", "t"};
  for (const auto& n : names) head.push_back("if_" + n);
  head.push_back("norm");
  if (hyp) head.push_back("test_if2");
  std::string text = csv_line(head);
  bool all_ok = true;
  for (const Estimate& e : estimates(l, alpha_list(f.alpha), f, io_.at_theta)) {
    ordered_json j;
    j["alpha"] = e.alpha;
    if (!usable(e)) {
      all_ok = false;
      j["error"] = e.error;
      results.push_back(j);
      continue;
    }
    const InfluenceReport r = influence_report(l.data, l.link, e.theta, io_.slot, e.alpha, grid, hyp, block);
    j["theta"] = named(names, e.theta.natural());
    j["sup_norm"] = num(r.sup_norm);
    j["norm_at_edge"] = num(std::max(r.values.front().norm(), r.values.back().norm()));
    j["unbounded_behavior"] = !(r.sup_norm <= kUnboundedThreshold);
    ordered_json vals = ordered_json::array();
    for (std::size_t k = 0; k < r.t.size(); ++k) {
      ordered_json v;
      v["t"] = r.t[k];
      v["if"] = vec(r.values[k]);
      v["norm"] = num(r.values[k].norm());
      if (hyp) v["test_if2"] = num(r.second_order_test[k]);
      vals.push_back(v);
      std::vector<std::string> row{io::fmt(e.alpha), io::fmt(r.t[k])};
      for (Eigen::Index i = 0; i < r.values[k].size(); ++i) row.push_back(io::fmt(r.values[k][i]));
      row.push_back(io::fmt(r.values[k].norm()));
      if (hyp) row.push_back(io::fmt(r.second_order_test[k]));
      text += csv_line(row);
    }
    j["values"] = vals;
    results.push_back(j);
  }
  report["results"] = results;
  emit(o, o.format == "csv" ? text : report.dump(2) + "\n", out);
  return all_ok ? kOk : kNotConverged;
}

// ---------------------------------------------------------------- tune

struct TuneOptions {
  std::string grid;
  double pilot = 0.5;
  bool standardize = false;
};

int cmd_tune(const DataOptions& d, const FitOptions& f, const TuneOptions& t, const OutputOptions& o,
             std::ostream& out) {
  if (d.vardisp) throw ParseError("tuning is available for the fixed-dispersion model only");
  const Loaded l = load(d);
  TuningOptions opt;
  if (!t.grid.empty()) opt.grid = alpha_list(t.grid);
  opt.pilot_alpha = t.pilot;
  opt.standardize = t.standardize;
  opt.fit = fit_config(f);
  const TuningResult r = select_alpha(l.data, l.link, opt);

  ordered_json report = header("tune", d, l);
  report["pilot_alpha"] = t.pilot;
  report["pilot"] = named(natural_names(l.data), r.pilot.natural());
  report["standardized"] = t.standardize;
  report["alpha_star"] = r.alpha_star;
  report["alpha_star_raw"] = r.alpha_star_raw;
  report["alpha_star_standardized"] = r.alpha_star_standardized;
  ordered_json table = ordered_json::array();
  std::string text = csv_line({"alpha", "mse", "bias", "variance", "mse_standardized"});
  for (std::size_t k = 0; k < r.alpha_grid.size(); ++k) {
    table.push_back({{"alpha", r.alpha_grid[k]},
                     {"mse", num(r.mse_estimates[k])},
                     {"bias", num(r.bias_terms[k])},
                     {"variance", num(r.variance_terms[k])},
                     {"mse_standardized", num(r.mse_standardized[k])}});
    text += csv_line({io::fmt(r.alpha_grid[k]), io::fmt(r.mse_estimates[k]), io::fmt(r.bias_terms[k]),
                      io::fmt(r.variance_terms[k]), io::fmt(r.mse_standardized[k])});
  }
  report["table"] = table;
  report["warnings"] = r.warnings;
  emit(o, o.format == "csv" ? text : report.dump(2) + "\n", out);
  return r.warnings.empty() ? kOk : kNotConverged;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string config;
  int workers = 0;
  std::string out_dir = ".";
  int replications = 0;
  long long seed = -1;
  double level = 0.05;
  std::string block = "leading";
};

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f || !(f << text)) throw std::ios_base::failure("cannot write '" + p.string() + "'");
}

int cmd_simulate(const SimulateOptions& s, std::ostream& out) {
  auto kv = io::read_key_values_file(s.config);
  std::string hyps = "standard";
  if (auto it = kv.find("hypotheses"); it != kv.end()) {
    hyps = it->second;
    kv.erase(it);
  }
  if (hyps != "standard" && hyps != "none") throw ParseError("hypotheses must be 'standard' or 'none'");
  if (s.replications > 0) kv["replications"] = std::to_string(s.replications);
  if (s.seed >= 0) kv["master_seed"] = std::to_string(s.seed);
  const std::vector<sim::SimScenario> scenarios = sim::scenarios_from_config(kv);
  std::vector<sim::NamedHypothesis> hypotheses;
  if (hyps == "standard") {
    if (scenarios.front().p() != 2) throw ParseError("the standard hypotheses need the linear design");
    hypotheses = sim::standard_hypotheses();
  }
  sim::StudyOptions opt;
  opt.workers = s.workers;
  opt.level = s.level;
  opt.block = parse_block(s.block);

  std::vector<sim::SimReport> reports;
  for (const auto& sc : scenarios) reports.push_back(sim::run_study(sc, hypotheses, opt));

  std::filesystem::create_directories(s.out_dir);
  const std::filesystem::path dir(s.out_dir);
  const std::string stem = scenarios.front().name;
  std::ostringstream est, tst, fail;
  sim::write_estimation_table(est, reports);
  sim::write_failure_table(fail, reports);
  write_file(dir / (stem + "_estimation.csv"), est.str());
  write_file(dir / (stem + "_failures.csv"), fail.str());
  std::vector<std::string> files{stem + "_estimation.csv", stem + "_failures.csv"};
  if (!hypotheses.empty()) {
    sim::write_testing_table(tst, reports);
    write_file(dir / (stem + "_testing.csv"), tst.str());
    files.push_back(stem + "_testing.csv");
  }

  ordered_json report;
  report["schema_version"] = kSchemaVersion;
  report["command"] = "simulate";
  report["config"] = s.config;
  ordered_json studies = ordered_json::array();
  bool failed = false;
  for (const auto& r : reports) {
    const auto& sc = r.scenario;
    ordered_json j;
    j["name"] = sc.name;
    j["n"] = sc.n;
    j["theta0"] = vec(sc.theta0.natural());
    j["link"] = sc.link.name();
    j["replications"] = r.replications;
    j["alpha_grid"] = r.alpha_grid;
    j["contamination"] = sim::contamination_name(sc.contamination);
    j["rate"] = sc.effective_rate();
    j["y_out"] = sc.y_out;
    j["master_seed"] = sc.master_seed;
    j["redraw_design"] = sc.redraw_design;
    j["design"] = sc.design == sim::DesignKind::linear ? "linear" : "cubic";
    j["failures"] = r.failures;
    j["failed"] = r.failed;
    j["messages"] = r.messages;
    failed = failed || r.failed;
    studies.push_back(j);
  }
  report["studies"] = studies;
  report["files"] = files;
  write_file(dir / (stem + "_report.json"), report.dump(2) + "\n");
  files.push_back(stem + "_report.json");
  for (const auto& f : files) out << (dir / f).string() << '\n';
  return failed ? kNotConverged : kOk;
}

void add_data_options(CLI::App* app, DataOptions& d) {
  app->add_option("--data", d.path, "CSV file with a header row")->required();
  app->add_option("--response", d.response, "response column")->required();
  app->add_option("--covariates", d.covariates, "mean covariates, comma separated");
  app->add_flag("--no-intercept", d.no_intercept, "omit the intercept column");
  app->add_option("--link", d.link, "logit | probit | cloglog | log")
      ->check(CLI::IsMember({"logit", "probit", "cloglog", "log"}));
  app->add_option("--transform-range", d.transform_range, "a,b: rescale the response from [a, b]");
  app->add_flag("--boundary-adjust", d.boundary_adjust, "apply y -> (y (n-1) + 0.5) / n");
  app->add_option("--drop-rows", d.drop_rows, "0-based data rows to exclude, comma separated");
}

void add_fit_options(CLI::App* app, FitOptions& f) {
  app->add_option("--alpha", f.alpha, "tuning parameter(s), comma separated");
  app->add_option("--max-iter", f.max_iterations, "optimizer iteration limit")->check(CLI::PositiveNumber);
  app->add_option("--tol", f.tolerance, "gradient max-norm tolerance")->check(CLI::PositiveNumber);
}

void add_output_options(CLI::App* app, OutputOptions& o) {
  app->add_option("--out", o.out, "output file (default standard output)");
  app->add_option("--format", o.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust beta regression by minimum density power divergence"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "betadpd 1.0");

  DataOptions data;
  FitOptions fitopt;
  OutputOptions output;

  CLI::App* fit = app.add_subcommand("fit", "fit the MDPDE for one or more alpha");
  add_data_options(fit, data);
  add_fit_options(fit, fitopt);
  add_output_options(fit, output);
  auto* vd = fit->add_flag("--vardisp", data.vardisp, "regression model for the precision");
  fit->add_option("--precision-covariates", data.precision_covariates,
                  "precision covariates (intercept added)")
      ->needs(vd);
  fit->add_option("--precision-link", data.precision_link, "log | sqrt | identity")
      ->check(CLI::IsMember({"log", "sqrt", "identity"}))
      ->needs(vd);

  TestOptions testopt;
  CLI::App* test = app.add_subcommand("test", "Wald-type tests of linear hypotheses on beta");
  add_data_options(test, data);
  add_fit_options(test, fitopt);
  add_output_options(test, output);
  auto* h = test->add_option("--hypothesis", testopt.hypothesis, "'M rows separated by /;m0'");
  auto* c = test->add_option("--coef", testopt.coef, "shorthand for H0: beta_NAME = 0");
  h->excludes(c);
  c->excludes(h);
  test->add_option("--at-theta", testopt.at_theta, "evaluate at these (beta, phi) instead of fitting");
  test->add_option("--power", testopt.power, "local alternative d (one value or p values)");
  test->add_option("--level", testopt.level, "significance level");
  test->add_option("--block", testopt.block, "covariance of beta: leading | full")
      ->check(CLI::IsMember({"leading", "full"}));

  InfluenceOptions infopt;
  CLI::App* inf = app.add_subcommand("influence", "influence function of the estimator");
  add_data_options(inf, data);
  add_fit_options(inf, fitopt);
  add_output_options(inf, output);
  inf->add_option("--slot", infopt.slot, "0-based contaminated observation");
  inf->add_option("--grid-points", infopt.points, "number of contamination points");
  inf->add_option("--grid-edge", infopt.edge, "grid covers [edge, 1 - edge] on the logit scale");
  inf->add_option("--at-theta", infopt.at_theta, "evaluate at these (beta, phi) instead of fitting");
  inf->add_option("--hypothesis", infopt.hypothesis, "also report the second-order test influence");
  inf->add_option("--block", infopt.block, "covariance of beta: leading | full")
      ->check(CLI::IsMember({"leading", "full"}));

  TuneOptions tuneopt;
  CLI::App* tune = app.add_subcommand("tune", "choose alpha by estimated MSE (experimental)");
  add_data_options(tune, data);
  add_fit_options(tune, fitopt);
  add_output_options(tune, output);
  tune->add_option("--grid", tuneopt.grid, "candidate alphas (default 0, 0.05, ..., 1)");
  tune->add_option("--pilot-alpha", tuneopt.pilot, "alpha of the pilot estimate");
  tune->add_flag("--standardize", tuneopt.standardize, "scale coordinates by pilot standard errors");

  SimulateOptions simopt;
  CLI::App* simc = app.add_subcommand("simulate", "Monte-Carlo study from a scenario file");
  simc->add_option("--config", simopt.config, "key = value scenario file")->required();
  simc->add_option("--workers", simopt.workers, "threads over replications (0: default)")
      ->check(CLI::NonNegativeNumber);
  simc->add_option("--out-dir", simopt.out_dir, "directory for the CSV tables and report");
  simc->add_option("--replications", simopt.replications, "override the scenario's replications")
      ->check(CLI::PositiveNumber);
  simc->add_option("--seed", simopt.seed, "override the scenario's master seed")
      ->check(CLI::NonNegativeNumber);
  simc->add_option("--level", simopt.level, "test level");
  simc->add_option("--block", simopt.block, "covariance of beta: leading | full")
      ->check(CLI::IsMember({"leading", "full"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kParseOrIo;
  }

  try {
    if (fit->parsed()) return cmd_fit(data, fitopt, output, out);
    if (test->parsed()) {
      if (testopt.hypothesis.empty() && testopt.coef.empty()) {
        throw ParseError("test needs --hypothesis or --coef");
      }
      return cmd_test(data, fitopt, testopt, output, out);
    }
    if (inf->parsed()) return cmd_influence(data, fitopt, infopt, output, out);
    if (tune->parsed()) return cmd_tune(data, fitopt, tuneopt, output, out);
    if (simc->parsed()) return cmd_simulate(simopt, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kParseOrIo;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << '\n';
    return kParseOrIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kParseOrIo;
  } catch (const ModelError& e) {
    err << "model error: " << e.what() << '\n';
    return kModel;
  } catch (const DomainError& e) {
    err << "model error: " << e.what() << '\n';
    return kModel;
  }
  return kParseOrIo;
}

}  // namespace betadpd::cli
