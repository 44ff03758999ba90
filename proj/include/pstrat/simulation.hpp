#pragma once

#include "pstrat/data_model.hpp"
#include "pstrat/executor.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace pstrat {

struct CovariateDist {
  enum class Kind { Bernoulli, Normal } kind;
  double param; // success probability, or variance
};

/// Outcome feature computed from the raw covariate vector.
struct Feature {
  std::string name;
  std::function<double(const Eigen::VectorXd&)> eval;
};

/// Data-generating process of one simulation scenario.
///
/// Clusters follow the Bernoulli pair (X1, X2):
///   (1,1) -> 1, (1,0) -> 2, (0,0) -> 3, (0,1) -> 3.
struct ScenarioSpec {
  int id = 0;
  Eigen::Index n = 0;
  std::vector<CovariateDist> covariates;     // X1..Xq
  Eigen::VectorXd treatment_coef;            // T ~ Bern(expit(X' coef)), length q
  std::vector<int> post_covariates;          // 0-based columns of X in the P regression
  std::array<Eigen::VectorXd, 2> beta;       // intercept, then post_covariates
  std::array<double, 2> sigma2_p{1.0, 1.0};
  std::array<std::vector<Feature>, 2> outcome_features; // between intercept and the P term
  std::array<Eigen::MatrixXd, 2> eta;        // 3 x (1 + features + 1), intercept first, P term last
  std::array<Eigen::VectorXd, 2> sigma2_y;   // per cluster

  Eigen::Index q() const { return static_cast<Eigen::Index>(covariates.size()); }
};

/// Scenario 1, 2 or 3. Throws std::invalid_argument for anything else.
ScenarioSpec scenario(int id);

/// 0-based cluster from the Bernoulli pair.
int scenario_cluster(double x1, double x2);

double expit(double z);

/// Simulated dataset with its ground truth.
struct SimReplicate {
  Dataset data;
  PotentialState truth;
  std::vector<int> cluster; // 0-based
  double ate_p = 0.0;
  double ate_y = 0.0;
};

/// Sample averages of P(1)-P(0) and Y(1)-Y(0).
double sample_ate_p(const PotentialState& pot);
double sample_ate_y(const PotentialState& pot);

SimReplicate generate_replicate(const ScenarioSpec& spec, std::uint64_t seed);

/// Data drawn from the fitted model class itself with a single cluster:
/// X ~ N(0, I), T ~ Bern(treat_prob), P(t) ~ N([1,x]'beta_t, sigma2_p_t),
/// Y(0) ~ N(eta_0'[1, x, P(0)], s0), Y(1) ~ N(eta_1'[1, x, P(1)-P(0)], s1).
struct ModelClassSpec {
  Eigen::Index n = 500;
  Eigen::Index q = 2;
  double treat_prob = 0.5;
  std::array<Eigen::VectorXd, 2> beta;
  std::array<double, 2> sigma2_p{1.0, 1.0};
  std::array<Eigen::VectorXd, 2> eta;
  std::array<double, 2> sigma2_y{1.0, 1.0};
};

SimReplicate generate_model_class_replicate(const ModelClassSpec& spec, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Replicate benchmark

struct BenchmarkRow {
  int replicate = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double ate_p_true = 0.0, ate_p_hat = 0.0;
  double ate_y_true = 0.0, ate_y_hat = 0.0;
  double bias_p = 0.0, bias_y = 0.0;
  double seconds = 0.0;
  std::array<double, 3> stratum_occupied{0, 0, 0}; // fraction of draws each stratum is non-empty
  double identity_max_error = 0.0;                 // max |sum_s n_s EAE_s - n ATE_Y| over draws
  std::size_t draws = 0;
};

struct BenchmarkReport {
  int scenario = 0;
  std::vector<BenchmarkRow> rows;
  int failures = 0;
  double median_bias_p = 0.0, iqr_bias_p = 0.0;
  double median_bias_y = 0.0, iqr_bias_y = 0.0;
  std::array<double, 3> stratum_occupied{0, 0, 0}; // pooled over all draws of successful replicates
  double identity_max_error = 0.0;
  double wall_seconds = 0.0;

  double success_rate() const;
};

/// Replicate r uses seed derive_seed(base_seed, r); its data come from
/// derive_seed(that, 0) and its chain from derive_seed(that, 1).
BenchmarkReport run_benchmark(const ScenarioSpec& spec, int replicates, const FitConfig& config,
                              std::uint64_t base_seed, Executor& exec = serial_executor());

/// Columns scenario,replicate,seed,ate_p_true,ate_p_hat,ate_y_true,ate_y_hat,bias_p,bias_y.
void write_benchmark_csv(std::ostream& out, const BenchmarkReport& report);
/// statistic,value rows: medians/IQRs, failures, stratum occupancy.
void write_benchmark_summary(std::ostream& out, const BenchmarkReport& report);
/// replicate,status,seconds,draws,error
void write_benchmark_timing(std::ostream& out, const BenchmarkReport& report);

/// Truth file of a replicate: id,p0,p1,y0,y1,cluster (1-based cluster).
void write_truth_csv(std::ostream& out, const SimReplicate& rep);

} // namespace pstrat
