#pragma once

#include "pstrat/data_model.hpp"
#include "pstrat/distributions.hpp"

#include <Eigen/Dense>

namespace pstrat {

// Potential post-treatment model, one per arm:
//   P_i(t) | x_i ~ N([1, x_i]' beta^(t), sigma2_p^(t))
//   beta^(t) ~ N(mu_beta 1, sigma2_beta I),  sigma2_p^(t) ~ InvGamma(shape_p, rate_p)

/// Conjugate posterior of beta given the design rows, responses and variance.
GaussianPosterior beta_posterior(const Eigen::MatrixXd& design, const Eigen::VectorXd& p,
                                 double sigma2, const PriorConfig& prior);

/// Conjugate posterior of sigma2_p given the residual vector.
InverseGammaParams sigma2_p_posterior(const Eigen::VectorXd& residuals, const PriorConfig& prior);

/// Redraw beta^(t) using the current P(t) of all n units.
void update_beta(ChainState& state, const ModelData& data, int arm, const PriorConfig& prior,
                 RandomStream& rng);

/// Redraw sigma2_p^(t) from residuals under the current beta^(t).
void update_sigma2_p(ChainState& state, const ModelData& data, int arm, const PriorConfig& prior,
                     RandomStream& rng);

/// Mean [1, x]' beta^(t); `xp` includes the leading 1.
double post_mean(const PostTreatmentParams& params, const Eigen::VectorXd& xp, int arm);

/// Draw from N([1, x]' beta^(t), sigma2_p^(t)).
double prior_predictive_P(const PostTreatmentParams& params, const Eigen::VectorXd& xp, int arm,
                          RandomStream& rng);

} // namespace pstrat
