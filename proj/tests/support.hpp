#pragma once

// Fixture loaders shared by the unit tests and the acceptance binary.

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "betadpd/csv.hpp"
#include "betadpd/model.hpp"
#include "betadpd/simlab.hpp"

#ifndef BETADPD_DATA_DIR
#error "BETADPD_DATA_DIR must be defined"
#endif

namespace testsupport {

inline std::string data_path(const std::string& file) { return std::string(BETADPD_DATA_DIR) + "/" + file; }

inline nlohmann::json manifest() {
  std::ifstream in(data_path("manifest.json"));
  return nlohmann::json::parse(in);
}

inline std::vector<Eigen::Index> outlier_rows(const std::string& name) {
  return manifest()["datasets"][name]["outlier_rows"].get<std::vector<Eigen::Index>>();
}

inline betadpd::Dataset load_xy(const std::string& file, const std::string& response,
                                const std::string& covariate, bool precision_design) {
  const betadpd::io::CsvTable t = betadpd::io::read_csv_file(data_path(file));
  const std::vector<double> y = t.numeric(response);
  const std::vector<double> x = t.numeric(covariate);
  const Eigen::Index n = static_cast<Eigen::Index>(y.size());
  Eigen::VectorXd yv(n);
  Eigen::MatrixXd xm(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    yv[i] = y[i];
    xm(i, 0) = 1.0;
    xm(i, 1) = x[i];
  }
  std::vector<std::string> names{"intercept", covariate};
  if (precision_design) return betadpd::Dataset(yv, xm, names, xm, names);
  return betadpd::Dataset(yv, xm, names);
}

inline betadpd::Dataset ais() { return load_xy("ais_rowing.csv", "bfp", "lbm", false); }
inline betadpd::Dataset stress_anxiety() {
  return load_xy("stress_anxiety.csv", "anxiety", "stress", true);
}

/// The synthetic "seed-1" dataset: n draws at theta0 = (-1, 1, 5), master seed 1, replication 0.
inline betadpd::Dataset seed1(Eigen::Index n = 50, std::uint64_t seed = 1, int replication = 0) {
  betadpd::sim::SimScenario s;
  s.n = n;
  s.master_seed = seed;
  return betadpd::sim::generate(s, replication);
}

struct AisRow {
  double alpha, b1, b2, phi, p_value;
};
/// Reference AIS estimates: full data, then outlier-deleted data.
inline constexpr AisRow kAisFull[] = {{0.0, 0.098, -0.027, 96.616, 0.699}, {0.1, 0.328, -0.031, 116.026, 0.158},
                                      {0.2, 0.765, -0.037, 206.180, 0.0},  {0.3, 0.807, -0.038, 219.286, 0.0},
                                      {0.4, 0.804, -0.038, 218.032, 0.0},  {0.5, 0.794, -0.038, 216.333, 0.0}};
inline constexpr AisRow kAisDeleted[] = {{0.0, 0.838, -0.038, 246.305, 0.0}, {0.1, 0.832, -0.038, 238.036, 0.0},
                                         {0.2, 0.824, -0.038, 231.658, 0.0}, {0.3, 0.815, -0.038, 227.072, 0.0},
                                         {0.4, 0.804, -0.038, 224.270, 0.0}, {0.5, 0.790, -0.038, 223.383, 0.0}};

}  // namespace testsupport
