#include "pstrat/imputation.hpp"

#include "pstrat/mixture_model.hpp"
#include "pstrat/post_model.hpp"

#include <cmath>
#include <numbers>

namespace pstrat {

namespace {

struct Combined {
  double mean;
  double variance;
};

// Prior N(m0, v0) on p times likelihood N(r; c p, s2).
Combined combine(double m0, double v0, double c, double r, double s2) {
  const double precision = 1.0 / v0 + c * c / s2;
  if (!(precision > 0.0) || !std::isfinite(precision)) {
    throw NumericalError("post-treatment conditional has non-positive precision");
  }
  return {(m0 / v0 + c * r / s2) / precision, 1.0 / precision};
}

void redraw_outcome(ChainState& state, const ModelData& data, Eigen::Index i, int arm,
                    RandomStream& rng) {
  const int m = state.alloc.label[arm][i];
  const double mean = state.mix.eta[arm][m].dot(unit_outcome_design(data, state.potentials, i, arm));
  state.potentials.Y[arm][i] = rng.normal(mean, std::sqrt(state.mix.sigma2_y[arm][m]));
}

} // namespace

GaussianMixture1D GaussianMixture1D::from_log_weights(const Eigen::VectorXd& log_weights,
                                                      Eigen::VectorXd means,
                                                      Eigen::VectorXd variances) {
  GaussianMixture1D g;
  const double norm = log_sum_exp(std::span<const double>(log_weights.data(), log_weights.size()));
  if (!std::isfinite(norm)) throw NumericalError("mixture has no finite component weight");
  g.weights = (log_weights.array() - norm).exp();
  g.means = std::move(means);
  g.variances = std::move(variances);
  return g;
}

double GaussianMixture1D::mean() const { return weights.dot(means); }

double GaussianMixture1D::variance() const {
  const double mu = mean();
  return (weights.array() * (variances.array() + (means.array() - mu).square())).sum();
}

double GaussianMixture1D::pdf(double x) const {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    acc += weights[k] * std::exp(normal_logpdf(x, means[k], variances[k]));
  }
  return acc;
}

double GaussianMixture1D::cdf(double x) const {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    acc += weights[k] * normal_cdf((x - means[k]) / std::sqrt(variances[k]));
  }
  return acc;
}

double GaussianMixture1D::sample(RandomStream& rng) const {
  const std::size_t k =
      weights.size() == 1 ? 0 : sample_categorical(rng, std::span<const double>(weights.data(), weights.size()));
  return rng.normal(means[k], std::sqrt(variances[k]));
}

GaussianMixture1D treated_post_conditional(const ChainState& state, const ModelData& data,
                                           Eigen::Index i) {
  const auto& mix = state.mix;
  const int M = mix.M();
  const Eigen::VectorXd xp = data.Xp.row(i).transpose();
  const double m0 = post_mean(state.post, xp, 0);
  const double v0 = state.post.sigma2[0];
  const AffineDesign design = affine_outcome_design(data, state.potentials, i, 1, 0);
  const double y = state.potentials.Y[1][i];

  Eigen::VectorXd lw = log_stick_weights(mix.eps[1], xp);
  Eigen::VectorXd means(M), vars(M);
  for (int m = 0; m < M; ++m) {
    const double c = mix.eta[1][m].dot(design.slope);
    const double r = y - mix.eta[1][m].dot(design.base);
    const double s2 = mix.sigma2_y[1][m];
    const Combined comp = combine(m0, v0, c, r, s2);
    means[m] = comp.mean;
    vars[m] = comp.variance;
    lw[m] += normal_logpdf(r, c * m0, s2 + c * c * v0);
  }
  return GaussianMixture1D::from_log_weights(lw, std::move(means), std::move(vars));
}

void impute_missing_post(ChainState& state, const ModelData& data, RandomStream& rng,
                         Executor& exec) {
  for_unit_blocks(data.n(), rng, exec, [&](Eigen::Index begin, Eigen::Index end, RandomStream& r) {
    for (Eigen::Index i = begin; i < end; ++i) {
      if (data.T[i] == 1) {
        state.potentials.P[0][i] = treated_post_conditional(state, data, i).sample(r);
        redraw_outcome(state, data, i, 0, r);
      } else {
        state.potentials.P[1][i] = prior_predictive_P(state.post, data.Xp.row(i).transpose(), 1, r);
        redraw_outcome(state, data, i, 1, r);
      }
    }
  });
}

void impute_missing_outcome(ChainState& state, const ModelData& data, RandomStream& rng,
                            Executor& exec) {
  for_unit_blocks(data.n(), rng, exec, [&](Eigen::Index begin, Eigen::Index end, RandomStream& r) {
    for (Eigen::Index i = begin; i < end; ++i) redraw_outcome(state, data, i, 1 - data.T[i], r);
  });
}

} // namespace pstrat
