#pragma once

#include "pstrat/data_model.hpp"
#include "pstrat/distributions.hpp"
#include "pstrat/executor.hpp"

#include <Eigen/Dense>

namespace pstrat {

/// Finite mixture of univariate Gaussians with normalized weights.
struct GaussianMixture1D {
  Eigen::VectorXd weights;
  Eigen::VectorXd means;
  Eigen::VectorXd variances;

  /// Builds from unnormalized log-weights.
  static GaussianMixture1D from_log_weights(const Eigen::VectorXd& log_weights,
                                            Eigen::VectorXd means, Eigen::VectorXd variances);

  double mean() const;
  double variance() const;
  double pdf(double x) const;
  double cdf(double x) const;
  double sample(RandomStream& rng) const;
};

/// Full conditional of the missing P_i(0) of a treated unit, with its
/// arm-1 label integrated out. Each component combines the prior
/// N([1,x]'beta0, sigma2_p0) with the likelihood of the observed Y_i(1)
/// under cluster m, where Y_i(1) is affine in p0:
///   Y_i(1) = r_m + c_m p0 + noise,  noise ~ N(0, sigma2_m)
///   precision  tau_m = 1/sigma2_p0 + c_m^2 / sigma2_m
///   mean       mu_m  = (mean0/sigma2_p0 + c_m r_m / sigma2_m) / tau_m
///   weight     lambda_m(x) N(r_m; c_m mean0, sigma2_m + c_m^2 sigma2_p0)
GaussianMixture1D treated_post_conditional(const ChainState& state, const ModelData& data,
                                           Eigen::Index i);

/// Gibbs block 1. Treated units draw P(0) from the collapsed conditional
/// above and then redraw their missing Y(0) from its cluster given the new
/// P(0), since the draw integrated that value out. For control units P(1)
/// enters only the missing Y(1), so (P(1), Y(1)) is drawn as a block:
/// P(1) from N([1,x]'beta1, sigma2_p1), then Y(1) from its cluster.
void impute_missing_post(ChainState& state, const ModelData& data, RandomStream& rng,
                         Executor& exec = serial_executor());

/// Gibbs block 5. Missing-arm outcomes from N(eta_V' d, sigma2_V).
void impute_missing_outcome(ChainState& state, const ModelData& data, RandomStream& rng,
                            Executor& exec = serial_executor());

} // namespace pstrat
