#include "betadpd/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include <omp.h>

#include "betadpd/csv.hpp"
#include "betadpd/dpd.hpp"
#include "betadpd/error.hpp"

namespace betadpd::sim {
namespace {

// Replication index used for the shared design stream.
constexpr std::uint64_t kSharedDesign = 0xffffffffffffull;

struct RepOutcome {
  std::vector<char> ok;
  Eigen::MatrixXd estimate;  // alpha x coordinate
  Eigen::MatrixXi reject;    // alpha x hypothesis
  std::string error;
};

RepOutcome run_replication(const SimScenario& s, const std::vector<NamedHypothesis>& hyps,
                           const std::vector<double>& critical, const StudyOptions& opt,
                           int r) {
  const std::size_t na = s.alpha_grid.size();
  const Eigen::Index d = s.p() + 1;
  RepOutcome out;
  out.ok.assign(na, 0);
  out.estimate = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(na), d, std::nan(""));
  out.reject = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(na),
                                     static_cast<Eigen::Index>(hyps.size()));
  try {
    Dataset data = generate(s, r);
    if (s.contamination != Contamination::none) {
      RngStream rng(s.master_seed, static_cast<std::uint64_t>(r), StreamTag::contamination);
      data = contaminate(data, s.contamination, s.effective_rate(), s.y_out, rng);
    }
    FitConfig cfg = opt.fit;
    cfg.warm_start.reset();
    cfg.compute_covariance = false;
    cfg.exec = kernels::Exec::serial;
    const std::vector<PathPoint> path = fit_alpha_path(data, s.link, s.alpha_grid, cfg);
    for (std::size_t k = 0; k < na; ++k) {
      const auto& pt = path[k];
      if (!pt.fit || !pt.fit->converged) {
        if (out.error.empty()) out.error = pt.fit ? pt.fit->message : pt.error;
        continue;
      }
      const Eigen::Index row = static_cast<Eigen::Index>(k);
      try {
        const dpd::SandwichPair sw =
            dpd::sandwich(data, s.link, pt.fit->theta_hat, pt.alpha, kernels::Exec::serial);
        for (std::size_t h = 0; h < hyps.size(); ++h) {
          const TestResult t = wald_test_at(sw, data.n(), pt.fit->theta_hat.beta(), pt.alpha,
                                            hyps[h].hypothesis, opt.block);
          out.reject(row, static_cast<Eigen::Index>(h)) = t.statistic > critical[h] ? 1 : 0;
        }
      } catch (const ModelError& e) {
        if (out.error.empty()) out.error = e.what();
        continue;
      }
      out.estimate.row(row) = pt.fit->theta_hat.natural().transpose();
      out.ok[k] = 1;
    }
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

std::string hypothesis_column(const NamedHypothesis& h) {
  return (h.role == HypothesisRole::level ? "size_" : "power_") + h.name;
}

std::string prefix(const SimReport& r, bool several) {
  return several ? "n" + std::to_string(r.scenario.n) + "_" : "";
}

void check_same_grid(const std::vector<SimReport>& reports) {
  if (reports.empty()) throw ModelError("no reports to write");
  for (const auto& r : reports) {
    if (r.alpha_grid != reports.front().alpha_grid) {
      throw ModelError("reports in one table must share the alpha grid");
    }
  }
}

}  // namespace

double SimScenario::effective_rate() const {
  if (rate >= 0.0) return rate;
  switch (contamination) {
    case Contamination::scheme_I: return 0.10;
    case Contamination::scheme_II: return 0.05;
    default: return 0.0;
  }
}

void SimScenario::validate() const {
  if (n < p() + 2) throw ModelError("sample size must be at least p + 2");
  if (theta0.p() != p()) {
    throw ModelError("theta0 has " + std::to_string(theta0.p()) +
                     " regression coefficients, the design needs " + std::to_string(p()));
  }
  if (replications < 1) throw ModelError("replications must be positive");
  if (alpha_grid.empty()) throw ModelError("alpha grid is empty");
  for (double a : alpha_grid) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("alpha values must be finite and >= 0");
  }
  if (!std::is_sorted(alpha_grid.begin(), alpha_grid.end())) {
    throw DomainError("alpha grid must be ascending");
  }
  const double r = effective_rate();
  if (!(r >= 0.0 && r < 1.0)) throw DomainError("contamination rate must lie in [0, 1)");
  if (!(y_out > 0.0 && y_out < 1.0)) throw DomainError("y_out must lie in (0, 1)");
}

std::vector<NamedHypothesis> standard_hypotheses() {
  auto two = [](double a, double b) {
    LinearHypothesis h;
    h.m = Eigen::Matrix2d::Identity();
    h.m0 = Eigen::Vector2d(a, b);
    return h;
  };
  return {
      {"L1", HypothesisRole::level, LinearHypothesis::coefficient(2, 0, -1.0)},
      {"L2", HypothesisRole::level, LinearHypothesis::coefficient(2, 1, 1.0)},
      {"L3", HypothesisRole::level, two(-1.0, 1.0)},
      {"P1", HypothesisRole::power, LinearHypothesis::coefficient(2, 0, 0.0)},
      {"P2", HypothesisRole::power, LinearHypothesis::coefficient(2, 1, 0.0)},
      {"P3", HypothesisRole::power, two(0.0, 0.0)},
  };
}

Eigen::MatrixXd design_matrix(const SimScenario& s, int replication) {
  RngStream rng(s.master_seed,
                s.redraw_design ? static_cast<std::uint64_t>(replication) : kSharedDesign,
                StreamTag::design);
  Eigen::MatrixXd x(s.n, s.p());
  for (Eigen::Index i = 0; i < s.n; ++i) {
    const double u = rng.uniform();
    x(i, 0) = 1.0;
    x(i, 1) = u;
    if (s.design == DesignKind::cubic) {
      x(i, 2) = u * u;
      x(i, 3) = u * u * u;
    }
  }
  return x;
}

Dataset generate(const SimScenario& s, int replication) {
  s.validate();
  Eigen::MatrixXd x = design_matrix(s, replication);
  const Eigen::VectorXd mu = mean_vector(x, s.link, s.theta0.beta());
  const double phi = s.theta0.phi();
  RngStream rng(s.master_seed, static_cast<std::uint64_t>(replication), StreamTag::response);
  Eigen::VectorXd y(s.n);
  for (Eigen::Index i = 0; i < s.n; ++i) y[i] = rng.beta(mu[i] * phi, (1.0 - mu[i]) * phi);
  std::vector<std::string> names{"intercept", "x"};
  if (s.design == DesignKind::cubic) {
    names.push_back("x2");
    names.push_back("x3");
  }
  return Dataset(std::move(y), std::move(x), std::move(names));
}

Eigen::Index contamination_count(double rate, Eigen::Index n) {
  if (!(rate >= 0.0 && rate < 1.0)) throw DomainError("contamination rate must lie in [0, 1)");
  // The slack keeps 0.05 * 100 at 5 despite binary rounding of the rate.
  return static_cast<Eigen::Index>(std::ceil(rate * static_cast<double>(n) - 1e-9));
}

std::vector<Eigen::Index> contamination_indices(const Dataset& data, Contamination scheme,
                                                double rate, RngStream& rng) {
  const Eigen::Index n = data.n();
  const Eigen::Index k = contamination_count(rate, n);
  std::vector<Eigen::Index> out;
  if (scheme == Contamination::none || k == 0) return out;
  if (scheme == Contamination::scheme_I) {
    for (std::size_t i : rng.sample_without_replacement(static_cast<std::size_t>(n),
                                                        static_cast<std::size_t>(k))) {
      out.push_back(static_cast<Eigen::Index>(i));
    }
    return out;
  }
  Eigen::Index col = -1;
  for (Eigen::Index j = 0; j < data.p() && col < 0; ++j) {
    if (data.x().col(j).maxCoeff() > data.x().col(j).minCoeff()) col = j;
  }
  if (col < 0) throw ModelError("scheme II needs a non-constant covariate");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return data.x()(a, col) < data.x()(b, col);
  });
  out.assign(order.begin(), order.begin() + k);
  return out;
}

Dataset contaminate(const Dataset& data, Contamination scheme, double rate, double y_out,
                    RngStream& rng) {
  Eigen::VectorXd y = data.y();
  for (Eigen::Index i : contamination_indices(data, scheme, rate, rng)) {
    y[i] = scheme == Contamination::scheme_I ? 1.0 - y[i] : y_out;
  }
  return data.with_responses(std::move(y));
}

SimReport run_study(const SimScenario& s, const std::vector<NamedHypothesis>& hypotheses,
                    const StudyOptions& options) {
  s.validate();
  for (const auto& h : hypotheses) h.hypothesis.validate(s.p());
  std::vector<double> critical;
  for (const auto& h : hypotheses) critical.push_back(chi_square_critical(h.hypothesis.rows(), options.level));

  const int reps = s.replications;
  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(reps));
  const int workers = options.workers > 0 ? options.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int r = 0; r < reps; ++r) {
    outcomes[static_cast<std::size_t>(r)] = run_replication(s, hypotheses, critical, options, r);
  }

  // Serial aggregation in replication order keeps the report independent of threading.
  const std::size_t na = s.alpha_grid.size();
  const Eigen::Index d = s.p() + 1;
  const auto nh = static_cast<Eigen::Index>(hypotheses.size());
  const Eigen::VectorXd truth = s.theta0.natural();
  SimReport rep;
  rep.scenario = s;
  rep.alpha_grid = s.alpha_grid;
  for (Eigen::Index j = 0; j < s.p(); ++j) rep.coordinates.push_back("beta" + std::to_string(j + 1));
  rep.coordinates.push_back("phi");
  rep.hypotheses = hypotheses;
  rep.replications = reps;
  const auto A = static_cast<Eigen::Index>(na);
  rep.bias.setZero(A, d);
  rep.bias_mcse.setZero(A, d);
  rep.mse.setZero(A, d);
  rep.mse_mcse.setZero(A, d);
  rep.rejection.setZero(A, nh);
  rep.rejection_mcse.setZero(A, nh);
  std::set<std::string> seen;
  for (std::size_t k = 0; k < na; ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    int m = 0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(d), s2 = s1, q1 = s1, q2 = s1;
    Eigen::VectorXd rej = Eigen::VectorXd::Zero(nh);
    for (const auto& o : outcomes) {
      if (!o.ok[k]) continue;
      ++m;
      const Eigen::VectorXd e = o.estimate.row(row).transpose() - truth;
      const Eigen::VectorXd sq = e.array().square();
      s1 += e;
      s2 += sq;
      q1 += sq;
      q2 += sq.array().square().matrix();
      rej += o.reject.row(row).transpose().cast<double>();
    }
    rep.successes.push_back(m);
    rep.failures.push_back(reps - m);
    if (m == 0) {
      rep.bias.row(row).setConstant(std::nan(""));
      rep.bias_mcse.row(row).setConstant(std::nan(""));
      rep.mse.row(row).setConstant(std::nan(""));
      rep.mse_mcse.row(row).setConstant(std::nan(""));
      rep.rejection.row(row).setConstant(std::nan(""));
      rep.rejection_mcse.row(row).setConstant(std::nan(""));
      continue;
    }
    const double md = m;
    const Eigen::ArrayXd mean = s1.array() / md;
    const Eigen::ArrayXd msq = q1.array() / md;
    const double denom = m > 1 ? md - 1.0 : 1.0;
    const Eigen::ArrayXd var_e = ((s2.array() - md * mean.square()) / denom).max(0.0);
    const Eigen::ArrayXd var_sq = ((q2.array() - md * msq.square()) / denom).max(0.0);
    rep.bias.row(row) = mean.matrix().transpose();
    rep.mse.row(row) = msq.matrix().transpose();
    rep.bias_mcse.row(row) = (var_e / md).sqrt().matrix().transpose();
    rep.mse_mcse.row(row) = (var_sq / md).sqrt().matrix().transpose();
    const Eigen::ArrayXd p = rej.array() / md;
    rep.rejection.row(row) = p.matrix().transpose();
    rep.rejection_mcse.row(row) = (p * (1.0 - p) / md).sqrt().matrix().transpose();
  }
  for (const auto& o : outcomes) {
    if (!o.error.empty() && seen.size() < 5 && seen.insert(o.error).second) {
      rep.messages.push_back(o.error);
    }
  }
  for (std::size_t k = 0; k < na; ++k) {
    if (rep.failures[k] > options.max_failure_rate * reps) {
      rep.failed = true;
      rep.messages.push_back("alpha = " + io::fmt(s.alpha_grid[k]) + ": " +
                             std::to_string(rep.failures[k]) + " of " + std::to_string(reps) +
                             " fits failed");
    }
  }
  return rep;
}

void write_estimation_table(std::ostream& out, const std::vector<SimReport>& reports) {
  check_same_grid(reports);
  const bool several = reports.size() > 1;
  out << "alpha";
  for (const auto& r : reports) {
    const std::string p = prefix(r, several);
    for (const char* stat : {"bias", "mse"}) {
      for (const auto& c : r.coordinates) out << ',' << p << stat << '_' << c;
    }
    for (const char* stat : {"bias", "mse"}) {
      for (const auto& c : r.coordinates) out << ',' << p << stat << '_' << c << "_mcse";
    }
  }
  out << '\n';
  for (std::size_t k = 0; k < reports.front().alpha_grid.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    out << io::fmt(reports.front().alpha_grid[k]);
    for (const auto& r : reports) {
      for (const Eigen::MatrixXd* m : {&r.bias, &r.mse, &r.bias_mcse, &r.mse_mcse}) {
        for (Eigen::Index j = 0; j < m->cols(); ++j) out << ',' << io::fmt((*m)(row, j));
      }
    }
    out << '\n';
  }
}

void write_testing_table(std::ostream& out, const std::vector<SimReport>& reports) {
  check_same_grid(reports);
  const bool several = reports.size() > 1;
  out << "alpha";
  for (const auto& r : reports) {
    const std::string p = prefix(r, several);
    for (const auto& h : r.hypotheses) out << ',' << p << hypothesis_column(h);
    for (const auto& h : r.hypotheses) out << ',' << p << hypothesis_column(h) << "_mcse";
  }
  out << '\n';
  for (std::size_t k = 0; k < reports.front().alpha_grid.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    out << io::fmt(reports.front().alpha_grid[k]);
    for (const auto& r : reports) {
      for (const Eigen::MatrixXd* m : {&r.rejection, &r.rejection_mcse}) {
        for (Eigen::Index j = 0; j < m->cols(); ++j) out << ',' << io::fmt((*m)(row, j));
      }
    }
    out << '\n';
  }
}

void write_failure_table(std::ostream& out, const std::vector<SimReport>& reports) {
  out << "n,alpha,successes,failures,failure_rate,flagged\n";
  for (const auto& r : reports) {
    for (std::size_t k = 0; k < r.alpha_grid.size(); ++k) {
      const double rate = static_cast<double>(r.failures[k]) / r.replications;
      out << r.scenario.n << ',' << io::fmt(r.alpha_grid[k]) << ',' << r.successes[k] << ','
          << r.failures[k] << ',' << io::fmt(rate) << ',' << (r.failed ? 1 : 0) << '\n';
    }
  }
}

std::string contamination_name(Contamination c) {
  switch (c) {
    case Contamination::scheme_I: return "scheme_I";
    case Contamination::scheme_II: return "scheme_II";
    default: return "none";
  }
}

std::vector<SimScenario> scenarios_from_config(const std::map<std::string, std::string>& kv) {
  SimScenario base;
  std::vector<Eigen::Index> ns{base.n};
  std::optional<std::vector<double>> theta;
  for (const auto& [key, value] : kv) {
    if (key == "name") {
      base.name = value;
    } else if (key == "n") {
      ns.clear();
      for (const auto& part : io::split(value, ',')) ns.push_back(io::parse_integer(part, key));
    } else if (key == "theta0") {
      theta = io::parse_real_list(value, key);
    } else if (key == "link") {
      base.link = Link::parse(value);
    } else if (key == "replications") {
      base.replications = static_cast<int>(io::parse_integer(value, key));
    } else if (key == "alpha_grid") {
      base.alpha_grid = io::parse_real_list(value, key);
    } else if (key == "contamination") {
      if (value == "none") base.contamination = Contamination::none;
      else if (value == "scheme_I" || value == "I") base.contamination = Contamination::scheme_I;
      else if (value == "scheme_II" || value == "II") base.contamination = Contamination::scheme_II;
      else throw ParseError("unknown contamination '" + value + "'");
    } else if (key == "rate") {
      base.rate = io::parse_real(value, key);
    } else if (key == "y_out") {
      base.y_out = io::parse_real(value, key);
    } else if (key == "master_seed") {
      const long long v = io::parse_integer(value, key);
      if (v < 0) throw ParseError("master_seed must be non-negative");
      base.master_seed = static_cast<std::uint64_t>(v);
    } else if (key == "redraw_design") {
      base.redraw_design = io::parse_bool(value, key);
    } else if (key == "design") {
      if (value == "linear") base.design = DesignKind::linear;
      else if (value == "cubic") base.design = DesignKind::cubic;
      else throw ParseError("unknown design '" + value + "'");
    } else {
      throw ParseError("unknown scenario key '" + key + "'");
    }
  }
  if (theta) {
    if (theta->size() < 2) throw ParseError("theta0 needs at least one coefficient and phi");
    Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(theta->data(),
                                                             static_cast<Eigen::Index>(theta->size() - 1));
    if (!(theta->back() > 0.0)) throw ParseError("phi in theta0 must be positive");
    base.theta0 = ParamVector(std::move(beta), theta->back());
  }
  std::vector<SimScenario> out;
  for (Eigen::Index n : ns) {
    SimScenario s = base;
    s.n = n;
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace betadpd::sim
