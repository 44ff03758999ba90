#include "pstrat/post_model.hpp"

#include <cmath>

namespace pstrat {

GaussianPosterior beta_posterior(const Eigen::MatrixXd& design, const Eigen::VectorXd& p,
                                 double sigma2, const PriorConfig& prior) {
  Eigen::MatrixXd precision = design.transpose() * design / sigma2;
  precision.diagonal().array() += 1.0 / prior.sigma2_beta;
  Eigen::VectorXd rhs = design.transpose() * p / sigma2;
  rhs.array() += prior.mu_beta / prior.sigma2_beta;
  return GaussianPosterior(precision, rhs);
}

InverseGammaParams sigma2_p_posterior(const Eigen::VectorXd& residuals, const PriorConfig& prior) {
  return variance_posterior(prior.ig_p_shape, prior.ig_p_rate,
                            static_cast<double>(residuals.size()), residuals.squaredNorm());
}

void update_beta(ChainState& state, const ModelData& data, int arm, const PriorConfig& prior,
                 RandomStream& rng) {
  state.post.beta[arm] =
      beta_posterior(data.Xp, state.potentials.P[arm], state.post.sigma2[arm], prior).sample(rng);
}

void update_sigma2_p(ChainState& state, const ModelData& data, int arm, const PriorConfig& prior,
                     RandomStream& rng) {
  const Eigen::VectorXd residuals = state.potentials.P[arm] - data.Xp * state.post.beta[arm];
  state.post.sigma2[arm] = sigma2_p_posterior(residuals, prior).sample(rng);
}

double post_mean(const PostTreatmentParams& params, const Eigen::VectorXd& xp, int arm) {
  return params.beta[arm].dot(xp);
}

double prior_predictive_P(const PostTreatmentParams& params, const Eigen::VectorXd& xp, int arm,
                          RandomStream& rng) {
  return rng.normal(post_mean(params, xp, arm), std::sqrt(params.sigma2[arm]));
}

} // namespace pstrat
