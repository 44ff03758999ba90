#include "pstrat/mixture_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace pstrat {

namespace {

void fill_design(const ModelData& data, Eigen::Index i, double p0, double p1, int arm,
                 Eigen::VectorXd& out) {
  const Eigen::Index k = data.Xp.cols();
  out.resize(data.outcome_dim(arm));
  out.head(k) = data.Xp.row(i).transpose();
  if (arm == 0) {
    out[k] = p0;
  } else if (data.treated_design == TreatedDesign::Gain) {
    out[k] = p1 - p0;
  } else {
    out[k] = p1;
    out[k + 1] = p0;
  }
}

// Row-major so each unit's scores are contiguous.
using ScoreMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// G(i, m) = eps_m' x_i for every unit and stick.
ScoreMatrix stick_scores(std::span<const Eigen::VectorXd> eps, const Eigen::MatrixXd& Xp) {
  Eigen::MatrixXd E(Xp.cols(), static_cast<Eigen::Index>(eps.size()));
  for (std::size_t m = 0; m < eps.size(); ++m) E.col(static_cast<Eigen::Index>(m)) = eps[m];
  return Xp * E;
}

void fill_log_sticks_from_scores(const double* g, Eigen::Index sticks, Eigen::VectorXd& out) {
  out.resize(sticks + 1);
  double log_rest = 0.0; // log prod_{a<m} (1 - Phi(g_a))
  for (Eigen::Index m = 0; m < sticks; ++m) {
    const auto [take, pass] = log_normal_cdf_pair(g[m]);
    out[m] = log_rest + take;
    log_rest += pass;
  }
  out[sticks] = log_rest;
}

void fill_log_sticks(std::span<const Eigen::VectorXd> eps, const Eigen::VectorXd& xp,
                     Eigen::VectorXd& out) {
  Eigen::VectorXd g(static_cast<Eigen::Index>(eps.size()));
  for (std::size_t m = 0; m < eps.size(); ++m) g[static_cast<Eigen::Index>(m)] = eps[m].dot(xp);
  fill_log_sticks_from_scores(g.data(), g.size(), out);
}

} // namespace

Eigen::VectorXd stick_weights(std::span<const Eigen::VectorXd> eps, const Eigen::VectorXd& xp) {
  const auto M = static_cast<Eigen::Index>(eps.size()) + 1;
  Eigen::VectorXd w(M);
  double rest = 1.0;
  for (Eigen::Index m = 0; m + 1 < M; ++m) {
    const double g = eps[m].dot(xp);
    const double take = normal_cdf(g);
    w[m] = rest * take;
    rest *= normal_cdf(-g);
  }
  w[M - 1] = rest;
  return w;
}

Eigen::VectorXd log_stick_weights(std::span<const Eigen::VectorXd> eps, const Eigen::VectorXd& xp) {
  Eigen::VectorXd out;
  fill_log_sticks(eps, xp, out);
  return out;
}

Eigen::VectorXd outcome_design_row(const Eigen::VectorXd& x, double p0, double p1, int arm,
                                   TreatedDesign design) {
  const Eigen::Index q = x.size();
  const bool joint = arm == 1 && design == TreatedDesign::Joint;
  Eigen::VectorXd d(q + (joint ? 3 : 2));
  d[0] = 1.0;
  d.segment(1, q) = x;
  if (arm == 0) {
    d[q + 1] = p0;
  } else if (!joint) {
    d[q + 1] = p1 - p0;
  } else {
    d[q + 1] = p1;
    d[q + 2] = p0;
  }
  return d;
}

Eigen::VectorXd unit_outcome_design(const ModelData& data, const PotentialState& pot,
                                    Eigen::Index i, int arm) {
  Eigen::VectorXd d;
  fill_design(data, i, pot.P[0][i], pot.P[1][i], arm, d);
  return d;
}

AffineDesign affine_outcome_design(const ModelData& data, const PotentialState& pot,
                                   Eigen::Index i, int arm, int wrt_arm) {
  double p0 = pot.P[0][i];
  double p1 = pot.P[1][i];
  (wrt_arm == 0 ? p0 : p1) = 0.0;
  AffineDesign out;
  fill_design(data, i, p0, p1, arm, out.base);
  (wrt_arm == 0 ? p0 : p1) = 1.0;
  fill_design(data, i, p0, p1, arm, out.slope);
  out.slope -= out.base;
  return out;
}

Eigen::VectorXd allocation_log_weights(const ChainState& state, const ModelData& data,
                                       Eigen::Index i, int arm) {
  const auto& mix = state.mix;
  Eigen::VectorXd lw;
  fill_log_sticks(mix.eps[arm], data.Xp.row(i).transpose(), lw);
  if (data.T[i] != arm) return lw;
  const Eigen::VectorXd d = unit_outcome_design(data, state.potentials, i, arm);
  const double y = state.potentials.Y[arm][i];
  for (Eigen::Index m = 0; m < lw.size(); ++m) {
    lw[m] += normal_logpdf(y, mix.eta[arm][m].dot(d), mix.sigma2_y[arm][m]);
  }
  return lw;
}

void update_allocation(ChainState& state, const ModelData& data, RandomStream& rng,
                       Executor& exec) {
  const int M = state.mix.M();
  if (M == 1) {
    for (auto& lab : state.alloc.label) std::fill(lab.begin(), lab.end(), 0);
    return;
  }
  const std::array<ScoreMatrix, 2> G{stick_scores(state.mix.eps[0], data.Xp),
                                     stick_scores(state.mix.eps[1], data.Xp)};
  for_unit_blocks(data.n(), rng, exec, [&](Eigen::Index begin, Eigen::Index end, RandomStream& r) {
    Eigen::VectorXd lw, d;
    for (Eigen::Index i = begin; i < end; ++i) {
      for (int arm = 0; arm < 2; ++arm) {
        fill_log_sticks_from_scores(G[arm].row(i).data(), M - 1, lw);
        if (data.T[i] == arm) {
          fill_design(data, i, state.potentials.P[0][i], state.potentials.P[1][i], arm, d);
          const double y = state.potentials.Y[arm][i];
          for (int m = 0; m < M; ++m) {
            lw[m] += normal_logpdf(y, state.mix.eta[arm][m].dot(d), state.mix.sigma2_y[arm][m]);
          }
        }
        state.alloc.label[arm][i] =
            static_cast<int>(sample_categorical_log(r, std::span<const double>(lw.data(), lw.size())));
      }
    }
  });
}

void draw_augmentation(ChainState& state, const ModelData& data, RandomStream& rng,
                       Executor& exec) {
  const int M = state.mix.M();
  if (M == 1) return;
  const std::array<ScoreMatrix, 2> G{stick_scores(state.mix.eps[0], data.Xp),
                                     stick_scores(state.mix.eps[1], data.Xp)};
  for_unit_blocks(data.n(), rng, exec, [&](Eigen::Index begin, Eigen::Index end, RandomStream& r) {
    for (Eigen::Index i = begin; i < end; ++i) {
      for (int arm = 0; arm < 2; ++arm) {
        const int v = state.alloc.label[arm][i];
        const int last = std::min(v, M - 2);
        for (int m = 0; m <= last; ++m) {
          const double g = G[arm](i, m);
          state.alloc.Z[arm](i, m) =
              sample_truncated_normal(r, g, 1.0, m == v ? HalfLine::Positive : HalfLine::Negative);
        }
      }
    }
  });
}

GaussianPosterior stick_coefficient_posterior(const Eigen::MatrixXd& design,
                                              const Eigen::VectorXd& z, const PriorConfig& prior) {
  Eigen::MatrixXd precision = design.transpose() * design;
  precision.diagonal().array() += 1.0 / prior.sigma2_eps;
  Eigen::VectorXd rhs = design.transpose() * z;
  rhs.array() += prior.mu_eps / prior.sigma2_eps;
  return GaussianPosterior(precision, rhs);
}

void update_stick_coefficients(ChainState& state, const ModelData& data, const PriorConfig& prior,
                               RandomStream& rng) {
  const int M = state.mix.M();
  if (M == 1) return;
  const Eigen::Index k = data.Xp.cols();
  std::vector<Eigen::MatrixXd> xtx(M - 1);
  std::vector<Eigen::VectorXd> xtz(M - 1);
  for (int arm = 0; arm < 2; ++arm) {
    for (int m = 0; m < M - 1; ++m) {
      xtx[m] = Eigen::MatrixXd::Zero(k, k);
      xtz[m] = Eigen::VectorXd::Zero(k);
    }
    // Unit i enters the regression of every stick it reached: m <= V_i.
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      const int last = std::min(state.alloc.label[arm][i], M - 2);
      const auto xp = data.Xp.row(i).transpose();
      const Eigen::MatrixXd outer = xp * xp.transpose();
      for (int m = 0; m <= last; ++m) {
        xtx[m] += outer;
        xtz[m] += state.alloc.Z[arm](i, m) * xp;
      }
    }
    for (int m = 0; m < M - 1; ++m) {
      Eigen::MatrixXd precision = xtx[m];
      precision.diagonal().array() += 1.0 / prior.sigma2_eps;
      Eigen::VectorXd rhs = xtz[m];
      rhs.array() += prior.mu_eps / prior.sigma2_eps;
      state.mix.eps[arm][m] = GaussianPosterior(precision, rhs).sample(rng);
    }
  }
}

void update_augmentation(ChainState& state, const ModelData& data, const PriorConfig& prior,
                         RandomStream& rng, Executor& exec) {
  draw_augmentation(state, data, rng, exec);
  update_stick_coefficients(state, data, prior, rng);
}

GaussianPosterior eta_posterior(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                double sigma2, const PriorConfig& prior) {
  Eigen::MatrixXd precision = design.transpose() * design / sigma2;
  precision.diagonal().array() += 1.0 / prior.sigma2_eta;
  Eigen::VectorXd rhs = design.transpose() * y / sigma2;
  rhs.array() += prior.mu_eta / prior.sigma2_eta;
  return GaussianPosterior(precision, rhs);
}

void update_cluster_params(ChainState& state, const ModelData& data, const PriorConfig& prior,
                           RandomStream& rng) {
  const int M = state.mix.M();
  const auto& pot = state.potentials;
  Eigen::VectorXd d;
  for (int arm = 0; arm < 2; ++arm) {
    const Eigen::Index k = data.outcome_dim(arm);
    std::vector<Eigen::MatrixXd> dtd(M, Eigen::MatrixXd::Zero(k, k));
    std::vector<Eigen::VectorXd> dty(M, Eigen::VectorXd::Zero(k));
    std::vector<int> count(M, 0);
    const auto& label = state.alloc.label[arm];
    const auto& units = data.arm_units[arm];
    for (const Eigen::Index i : units) {
      const int m = label[i];
      fill_design(data, i, pot.P[0][i], pot.P[1][i], arm, d);
      dtd[m].selfadjointView<Eigen::Lower>().rankUpdate(d);
      dty[m] += pot.Y[arm][i] * d;
      ++count[m];
    }
    for (int m = 0; m < M; ++m) {
      const double s2 = state.mix.sigma2_y[arm][m];
      Eigen::MatrixXd precision = dtd[m].selfadjointView<Eigen::Lower>();
      precision /= s2;
      precision.diagonal().array() += 1.0 / prior.sigma2_eta;
      Eigen::VectorXd rhs = dty[m] / s2;
      rhs.array() += prior.mu_eta / prior.sigma2_eta;
      state.mix.eta[arm][m] = GaussianPosterior(precision, rhs).sample(rng);
    }
    std::vector<double> ssr(M, 0.0);
    for (const Eigen::Index i : units) {
      const int m = label[i];
      fill_design(data, i, pot.P[0][i], pot.P[1][i], arm, d);
      const double r = pot.Y[arm][i] - state.mix.eta[arm][m].dot(d);
      ssr[m] += r * r;
    }
    for (int m = 0; m < M; ++m) {
      state.mix.sigma2_y[arm][m] =
          variance_posterior(prior.ig_y_shape, prior.ig_y_rate, count[m], ssr[m]).sample(rng);
    }
  }
}

std::array<std::vector<int>, 2> cluster_occupancy(const AllocationState& alloc, int M) {
  std::array<std::vector<int>, 2> out;
  for (int arm = 0; arm < 2; ++arm) {
    out[arm].assign(M, 0);
    for (int v : alloc.label[arm]) ++out[arm][v];
  }
  return out;
}

} // namespace pstrat
