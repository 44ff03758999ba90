#pragma once

#include "pstrat/data_model.hpp"
#include "pstrat/distributions.hpp"
#include "pstrat/executor.hpp"

#include <Eigen/Dense>

#include <array>
#include <span>
#include <vector>

namespace pstrat {

// Truncated probit stick-breaking mixture for the potential outcomes.
//
// For arm t and unit covariates xp = [1, x]:
//   g_m        = xp' eps_m                          m = 1..M-1
//   lambda_m   = Phi(g_m) prod_{a<m} (1 - Phi(g_a))   m < M
//   lambda_M   = prod_{a<M} (1 - Phi(g_a))
//   Y(t) | V=m ~ N(eta_m' d_t, sigma2_m)
// with d_0 = [1, x, p0] and d_1 = [1, x, p1 - p0] (gain) or [1, x, p1, p0]
// (joint).

/// Weights lambda_1..lambda_M, M = eps.size() + 1. Sum to one.
Eigen::VectorXd stick_weights(std::span<const Eigen::VectorXd> eps, const Eigen::VectorXd& xp);

/// log lambda_m, computed from log Phi so deep tails do not underflow.
Eigen::VectorXd log_stick_weights(std::span<const Eigen::VectorXd> eps, const Eigen::VectorXd& xp);

/// `x` excludes the intercept.
Eigen::VectorXd outcome_design_row(const Eigen::VectorXd& x, double p0, double p1, int arm,
                                   TreatedDesign design = TreatedDesign::Gain);

/// Same, from a row of ModelData::Xp (intercept included) for unit i, using
/// the potentials in `pot`.
Eigen::VectorXd unit_outcome_design(const ModelData& data, const PotentialState& pot,
                                    Eigen::Index i, int arm);

/// Design row of arm t for unit i written as base + slope * p_t', where p_t'
/// is P0 for `wrt_arm` = 0 and P1 for `wrt_arm` = 1, the other potential held
/// at its current value.
struct AffineDesign {
  Eigen::VectorXd base;
  Eigen::VectorXd slope;
};
AffineDesign affine_outcome_design(const ModelData& data, const PotentialState& pot,
                                   Eigen::Index i, int arm, int wrt_arm);

/// Unnormalized log allocation weights of unit i in arm t:
///   log lambda_m(x_i) + log N(Y_i(t); eta_m' d, sigma2_m)   if T_i = t
///   log lambda_m(x_i)                                      otherwise
/// A missing Y_i(t) is integrated out here and redrawn in block 5.
Eigen::VectorXd allocation_log_weights(const ChainState& state, const ModelData& data,
                                       Eigen::Index i, int arm);

/// Gibbs block 2: redraw V^(0), V^(1) for every unit.
void update_allocation(ChainState& state, const ModelData& data, RandomStream& rng,
                       Executor& exec = serial_executor());

/// Truncated-normal augmentation Z given the labels, for every unit and arm.
void draw_augmentation(ChainState& state, const ModelData& data, RandomStream& rng,
                       Executor& exec = serial_executor());

/// Posterior of one stick coefficient vector given the stacked design rows
/// [1, x_i] of units with V_i >= m and their column-m augmentation values
/// (unit noise variance).
GaussianPosterior stick_coefficient_posterior(const Eigen::MatrixXd& design,
                                              const Eigen::VectorXd& z, const PriorConfig& prior);

/// Redraw eps_m for all arms and clusters m < M from the current Z.
void update_stick_coefficients(ChainState& state, const ModelData& data, const PriorConfig& prior,
                               RandomStream& rng);

/// Gibbs block 3: Z then eps.
void update_augmentation(ChainState& state, const ModelData& data, const PriorConfig& prior,
                         RandomStream& rng, Executor& exec = serial_executor());

/// Conjugate posterior of a cluster's outcome regression given the member
/// design matrix, responses, and the cluster variance.
GaussianPosterior eta_posterior(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                double sigma2, const PriorConfig& prior);

/// Gibbs block 4a: eta_m then sigma2_m, each arm and cluster, from the units
/// whose outcome in that arm is observed. Missing outcomes stay integrated
/// out until block 5. Clusters without such units draw from the prior.
void update_cluster_params(ChainState& state, const ModelData& data, const PriorConfig& prior,
                           RandomStream& rng);

/// Members per cluster, per arm.
std::array<std::vector<int>, 2> cluster_occupancy(const AllocationState& alloc, int M);

} // namespace pstrat
