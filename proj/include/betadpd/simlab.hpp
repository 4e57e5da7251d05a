#pragma once

// Monte-Carlo studies of the MDPDE and its Wald-type tests under the beta
// regression model, with optional response contamination.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "betadpd/estimator.hpp"
#include "betadpd/inference.hpp"
#include "betadpd/rng.hpp"

namespace betadpd::sim {

enum class Contamination { none, scheme_I, scheme_II };

/// linear: X = [1, x]; cubic: X = [1, x, x^2, x^3]. x ~ U(0, 1).
enum class DesignKind { linear, cubic };

struct SimScenario {
  std::string name = "study";
  Eigen::Index n = 100;
  ParamVector theta0{Eigen::Vector2d(-1.0, 1.0), 5.0};
  Link link;
  int replications = 1000;
  std::vector<double> alpha_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  Contamination contamination = Contamination::none;
  /// Negative: 0.10 for scheme I, 0.05 for scheme II.
  double rate = -1.0;
  double y_out = 0.99;
  std::uint64_t master_seed = 1;
  /// Draw a fresh design for every replication instead of one shared design.
  bool redraw_design = false;
  DesignKind design = DesignKind::linear;

  double effective_rate() const;
  Eigen::Index p() const { return design == DesignKind::linear ? 2 : 4; }
  /// Throws ModelError / DomainError.
  void validate() const;
};

enum class HypothesisRole { level, power };

struct NamedHypothesis {
  std::string name;
  HypothesisRole role = HypothesisRole::level;
  LinearHypothesis hypothesis;
};

/// L1: b1 = -1, L2: b2 = 1, L3: (b1, b2) = (-1, 1), P1: b1 = 0, P2: b2 = 0, P3: (b1, b2) = 0.
std::vector<NamedHypothesis> standard_hypotheses();

Eigen::MatrixXd design_matrix(const SimScenario& s, int replication);

/// Responses from Beta(mu_i phi, (1 - mu_i) phi) on the scenario design.
Dataset generate(const SimScenario& s, int replication);

/// Number of altered responses: ceil(rate * n).
Eigen::Index contamination_count(double rate, Eigen::Index n);

/// Indices altered by the scheme. Scheme I draws them from `rng`; scheme II
/// takes the smallest values of the first non-constant covariate.
std::vector<Eigen::Index> contamination_indices(const Dataset& data, Contamination scheme,
                                                double rate, RngStream& rng);

/// Scheme I: y -> 1 - y; scheme II: y -> y_out.
Dataset contaminate(const Dataset& data, Contamination scheme, double rate, double y_out,
                    RngStream& rng);

struct StudyOptions {
  /// OpenMP threads over replications; 0 uses the runtime default.
  int workers = 0;
  double level = 0.05;
  BetaBlock block = BetaBlock::leading;
  /// alpha, warm_start and exec are managed by the study.
  FitConfig fit;
  /// Share of failed fits (at any alpha) above which the study is flagged.
  double max_failure_rate = 0.02;
};

struct SimReport {
  SimScenario scenario;
  std::vector<double> alpha_grid;
  std::vector<std::string> coordinates;  // beta1, ..., betap, phi
  std::vector<NamedHypothesis> hypotheses;
  /// Rows alpha, columns coordinates.
  Eigen::MatrixXd bias, bias_mcse, mse, mse_mcse;
  /// Rows alpha, columns hypotheses.
  Eigen::MatrixXd rejection, rejection_mcse;
  std::vector<int> successes;
  std::vector<int> failures;
  int replications = 0;
  bool failed = false;
  std::vector<std::string> messages;
};

SimReport run_study(const SimScenario& s, const std::vector<NamedHypothesis>& hypotheses,
                    const StudyOptions& options = {});

/// One row per alpha; for each report the bias and MSE columns followed by their MCSE.
void write_estimation_table(std::ostream& out, const std::vector<SimReport>& reports);
/// One row per alpha; rejection frequency per hypothesis and MCSE.
void write_testing_table(std::ostream& out, const std::vector<SimReport>& reports);
/// n, alpha, successes, failures, failure_rate, flagged.
void write_failure_table(std::ostream& out, const std::vector<SimReport>& reports);

/// Scenario keys: name, n (list allowed), theta0, link, replications,
/// alpha_grid, contamination (none | scheme_I | scheme_II), rate, y_out,
/// master_seed, redraw_design, design (linear | cubic). Returns one
/// scenario per n. Unknown keys throw ParseError.
std::vector<SimScenario> scenarios_from_config(const std::map<std::string, std::string>& kv);

std::string contamination_name(Contamination c);

}  // namespace betadpd::sim
