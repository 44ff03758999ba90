#include "pstrat/data_model.hpp"

#include "pstrat/mixture_model.hpp"

#include <cmath>
#include <sstream>

namespace pstrat {

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (std::size_t k = 0; k < issues.size(); ++k) {
    if (k) out << '\n';
    if (issues[k].row >= 0) out << "row " << issues[k].row << ": ";
    out << issues[k].message;
  }
  return out.str();
}

ValidationReport validate_dataset(const Dataset& data) {
  ValidationReport report;
  auto add = [&](Eigen::Index row, std::string msg) { report.issues.push_back({row, std::move(msg)}); };
  const Eigen::Index n = data.n();
  if (static_cast<Eigen::Index>(data.T.size()) != n || data.P.size() != n || data.Y.size() != n) {
    add(-1, "column lengths differ");
    return report;
  }
  if (n == 0) {
    add(-1, "dataset is empty");
    return report;
  }
  Eigen::Index treated = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (data.T[i] != 0 && data.T[i] != 1) {
      add(i, "treatment must be 0 or 1, got " + std::to_string(data.T[i]));
    } else {
      treated += data.T[i];
    }
    if (!std::isfinite(data.P[i])) add(i, "non-finite post-treatment value");
    if (!std::isfinite(data.Y[i])) add(i, "non-finite outcome value");
    for (Eigen::Index j = 0; j < data.q(); ++j) {
      if (!std::isfinite(data.X(i, j))) add(i, "non-finite covariate x" + std::to_string(j + 1));
    }
  }
  if (treated == 0) add(-1, "positivity violated: empty treated arm");
  if (treated == n) add(-1, "positivity violated: empty control arm");
  return report;
}

Dataset validated(Dataset data) {
  const auto report = validate_dataset(data);
  if (!report.ok()) throw DataError(report.to_string());
  return data;
}

Standardization Standardization::identity(Eigen::Index q) {
  return {Eigen::VectorXd::Zero(q), Eigen::VectorXd::Ones(q)};
}

Standardization Standardization::fit(const Eigen::MatrixXd& X) {
  Standardization s = identity(X.cols());
  const auto n = static_cast<double>(X.rows());
  if (X.rows() < 2) return s;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double mean = X.col(j).mean();
    const double var = (X.col(j).array() - mean).square().sum() / (n - 1.0);
    s.center[j] = mean;
    s.scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardization::apply(const Eigen::MatrixXd& X) const {
  return (X.rowwise() - center.transpose()).array().rowwise() / scale.transpose().array();
}

Eigen::VectorXd Standardization::to_original_scale(const Eigen::VectorXd& coef) const {
  const Eigen::Index q = center.size();
  Eigen::VectorXd out = coef;
  for (Eigen::Index j = 0; j < q; ++j) {
    out[1 + j] = coef[1 + j] / scale[j];
    out[0] -= out[1 + j] * center[j];
  }
  return out;
}

int FitConfig::kept_draws() const {
  return (sampler.iterations - sampler.burn_in) / sampler.thin;
}

void FitConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  const auto& p = prior;
  require(p.sigma2_beta > 0 && p.sigma2_eta > 0 && p.sigma2_eps > 0, "prior variances must be positive");
  require(p.ig_p_shape > 0 && p.ig_p_rate > 0, "ig_p_shape and ig_p_rate must be positive");
  require(p.ig_y_shape > 0 && p.ig_y_rate > 0, "ig_y_shape and ig_y_rate must be positive");
  require(std::isfinite(p.mu_beta) && std::isfinite(p.mu_eta) && std::isfinite(p.mu_eps),
          "prior means must be finite");
  require(p.sigma2_gamma == 1.0, "sigma2_gamma must be 1 (probit augmentation uses unit noise)");
  const auto& s = sampler;
  require(s.M >= 1, "M must be at least 1");
  require(s.iterations > 0, "iterations must be positive");
  require(s.burn_in >= 0 && s.burn_in < s.iterations, "burn_in must satisfy 0 <= burn_in < iterations");
  require(s.thin >= 1, "thin must be at least 1");
  require(estimands.xi > 0, "xi must be positive");
}

Eigen::Index ModelData::outcome_dim(int arm) const {
  const Eigen::Index base = Xp.cols() + 1;
  return (arm == 1 && treated_design == TreatedDesign::Joint) ? base + 1 : base;
}

ModelData make_model_data(const Dataset& data, bool standardize, TreatedDesign design) {
  ModelData md;
  md.standardization = standardize ? Standardization::fit(data.X) : Standardization::identity(data.q());
  md.Xp.resize(data.n(), data.q() + 1);
  md.Xp.col(0).setOnes();
  md.Xp.rightCols(data.q()) = md.standardization.apply(data.X);
  md.T = data.T;
  md.P = data.P;
  md.Y = data.Y;
  md.treated_design = design;
  for (Eigen::Index i = 0; i < data.n(); ++i) md.arm_units[data.T[i]].push_back(i);
  return md;
}

PostTreatmentParams sample_post_prior(const PriorConfig& prior, Eigen::Index q, RandomStream& rng) {
  PostTreatmentParams p;
  const double sd = std::sqrt(prior.sigma2_beta);
  for (int arm = 0; arm < 2; ++arm) {
    p.beta[arm].resize(q + 1);
    for (Eigen::Index k = 0; k <= q; ++k) p.beta[arm][k] = rng.normal(prior.mu_beta, sd);
    p.sigma2[arm] = sample_inverse_gamma(rng, prior.ig_p_shape, prior.ig_p_rate);
  }
  return p;
}

MixtureParams sample_mixture_prior(const PriorConfig& prior, Eigen::Index q, int M,
                                   TreatedDesign design, RandomStream& rng) {
  MixtureParams mix;
  const double sd_eta = std::sqrt(prior.sigma2_eta);
  const double sd_eps = std::sqrt(prior.sigma2_eps);
  for (int arm = 0; arm < 2; ++arm) {
    const Eigen::Index k = q + ((arm == 1 && design == TreatedDesign::Joint) ? 3 : 2);
    mix.eta[arm].resize(M);
    mix.sigma2_y[arm].resize(M);
    mix.eps[arm].resize(M - 1);
    for (int m = 0; m < M; ++m) {
      mix.eta[arm][m].resize(k);
      for (Eigen::Index j = 0; j < k; ++j) mix.eta[arm][m][j] = rng.normal(prior.mu_eta, sd_eta);
      mix.sigma2_y[arm][m] = sample_inverse_gamma(rng, prior.ig_y_shape, prior.ig_y_rate);
    }
    for (int m = 0; m < M - 1; ++m) {
      mix.eps[arm][m].resize(q + 1);
      for (Eigen::Index j = 0; j <= q; ++j) mix.eps[arm][m][j] = rng.normal(prior.mu_eps, sd_eps);
    }
  }
  return mix;
}

ChainState initialize_state(const ModelData& data, const PriorConfig& prior, int M,
                            RandomStream& rng) {
  const Eigen::Index n = data.n();
  ChainState s;
  for (int arm = 0; arm < 2; ++arm) {
    double p_mean = 0.0, y_mean = 0.0;
    for (auto i : data.arm_units[arm]) {
      p_mean += data.P[i];
      y_mean += data.Y[i];
    }
    const auto count = static_cast<double>(data.arm_units[arm].size());
    p_mean /= count;
    y_mean /= count;
    s.potentials.P[arm].resize(n);
    s.potentials.Y[arm].resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool observed = data.T[i] == arm;
      s.potentials.P[arm][i] = observed ? data.P[i] : p_mean;
      s.potentials.Y[arm][i] = observed ? data.Y[i] : y_mean;
    }
  }
  for (int arm = 0; arm < 2; ++arm) {
    s.alloc.label[arm].resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      s.alloc.label[arm][i] = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(M));
    }
    s.alloc.Z[arm] = Eigen::MatrixXd::Zero(n, std::max(M - 1, 0));
  }
  s.post = sample_post_prior(prior, data.q(), rng);
  s.mix = sample_mixture_prior(prior, data.q(), M, data.treated_design, rng);
  draw_augmentation(s, data, rng);
  return s;
}

bool consistent_with_data(const PotentialState& pot, const ModelData& data) {
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const int t = data.T[i];
    if (pot.P[t][i] != data.P[i] || pot.Y[t][i] != data.Y[i]) return false;
  }
  return true;
}

} // namespace pstrat
