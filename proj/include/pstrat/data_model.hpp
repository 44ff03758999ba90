#pragma once

#include "pstrat/distributions.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pstrat {

/// Invalid or inconsistent input data.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Observed data: covariates, binary treatment, post-treatment, outcome.
struct Dataset {
  Eigen::MatrixXd X;                       // n x q
  std::vector<int> T;                      // 0/1
  Eigen::VectorXd P;                       // observed post-treatment
  Eigen::VectorXd Y;                       // observed outcome
  std::vector<std::string> ids;            // optional, size n when present
  std::vector<std::string> covariate_names;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index q() const { return X.cols(); }
};

struct ValidationIssue {
  Eigen::Index row; // -1 for dataset-level issues
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

/// Every invariant violation, with its (0-based) row.
ValidationReport validate_dataset(const Dataset& data);

/// Returns `data` unchanged if valid, otherwise throws DataError carrying
/// the full report.
Dataset validated(Dataset data);

/// Per-column centering/scaling applied to covariates before fitting.
struct Standardization {
  Eigen::VectorXd center;
  Eigen::VectorXd scale;

  static Standardization identity(Eigen::Index q);
  /// Column means and sample SDs; constant columns keep scale 1.
  static Standardization fit(const Eigen::MatrixXd& X);

  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
  /// Map coefficients [intercept, x_1..x_q, extra...] fitted on standardized
  /// covariates back to the original covariate scale. Entries after the
  /// covariate block are untouched.
  Eigen::VectorXd to_original_scale(const Eigen::VectorXd& coef) const;
};

// ---------------------------------------------------------------------------
// Configuration

enum class TreatedDesign { Gain, Joint };
enum class StrataMode { PerDraw, PosteriorMean };
enum class DrawsFormat { Csv, Binary };

struct PriorConfig {
  double mu_beta = 0.0;
  double sigma2_beta = 100.0;
  double ig_p_shape = 2.0;
  double ig_p_rate = 1.0;
  double mu_eta = 0.0;
  double sigma2_eta = 100.0;
  double ig_y_shape = 2.0;
  double ig_y_rate = 1.0;
  double mu_eps = 0.0;
  double sigma2_eps = 100.0;
  // Noise of the stick-breaking scores. Only 1 is supported: the probit
  // augmentation fixes the latent noise to unit variance.
  double sigma2_gamma = 1.0;
};

struct SamplerConfig {
  int M = 30;
  int iterations = 4000;
  int burn_in = 2000;
  int thin = 2;
  std::uint64_t seed = 1;
  TreatedDesign treated_design = TreatedDesign::Gain;
  bool standardize = true;
  bool inner_parallel = false;
};

struct EstimandConfig {
  double xi = 0.01;
  StrataMode strata_mode = StrataMode::PerDraw;
};

struct IoConfig {
  DrawsFormat draws_format = DrawsFormat::Csv;
  bool save_params = false;
};

struct FitConfig {
  PriorConfig prior;
  SamplerConfig sampler;
  EstimandConfig estimands;
  IoConfig io;

  /// floor((iterations - burn_in) / thin)
  int kept_draws() const;
  /// Throws ConfigError on the first violated invariant.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Chain state

/// Potential post-treatment and outcome values. The entry of the observed
/// arm is pinned to data; the other is the current imputation.
struct PotentialState {
  std::array<Eigen::VectorXd, 2> P;
  std::array<Eigen::VectorXd, 2> Y;
};

struct PostTreatmentParams {
  std::array<Eigen::VectorXd, 2> beta;   // length q+1, intercept first
  std::array<double, 2> sigma2{1.0, 1.0};
};

struct MixtureParams {
  std::array<std::vector<Eigen::VectorXd>, 2> eta;    // [arm][cluster], outcome regression
  std::array<std::vector<double>, 2> sigma2_y;        // [arm][cluster]
  std::array<std::vector<Eigen::VectorXd>, 2> eps;    // [arm][cluster < M-1], stick scores

  int M() const { return static_cast<int>(sigma2_y[0].size()); }
};

struct AllocationState {
  std::array<std::vector<int>, 2> label;  // 0-based cluster index
  std::array<Eigen::MatrixXd, 2> Z;       // n x (M-1); only columns <= label are meaningful
};

struct ChainState {
  PotentialState potentials;
  AllocationState alloc;
  PostTreatmentParams post;
  MixtureParams mix;
};

/// Data prepared for the sampler: (optionally standardized) covariates with
/// an intercept column, plus per-arm unit lists.
struct ModelData {
  Eigen::MatrixXd Xp;         // n x (q+1), column 0 = 1
  std::vector<int> T;
  Eigen::VectorXd P;
  Eigen::VectorXd Y;
  Standardization standardization;
  TreatedDesign treated_design = TreatedDesign::Gain;
  std::array<std::vector<Eigen::Index>, 2> arm_units;

  Eigen::Index n() const { return Xp.rows(); }
  Eigen::Index q() const { return Xp.cols() - 1; }
  /// Length of the arm-t outcome design row.
  Eigen::Index outcome_dim(int arm) const;
};

ModelData make_model_data(const Dataset& data, bool standardize, TreatedDesign design);

/// Chain starting point: missing P and Y at their arm means of the observed
/// values, labels uniform on the M clusters, parameters from their priors,
/// augmentation variables consistent with the labels.
ChainState initialize_state(const ModelData& data, const PriorConfig& prior, int M,
                            RandomStream& rng);

/// Parameters drawn from their priors (no data involved).
PostTreatmentParams sample_post_prior(const PriorConfig& prior, Eigen::Index q, RandomStream& rng);
MixtureParams sample_mixture_prior(const PriorConfig& prior, Eigen::Index q, int M,
                                   TreatedDesign design, RandomStream& rng);

/// Observed cells of the potentials equal the data bit for bit.
bool consistent_with_data(const PotentialState& pot, const ModelData& data);

} // namespace pstrat
