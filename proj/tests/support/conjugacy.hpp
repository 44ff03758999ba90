#pragma once

// Full-conditional checks on one-covariate toys. Each check builds prior x
// likelihood by hand, normalizes it on a grid, and compares the library's
// analytic moments and sampler against it.

#include "oracles.hpp"

#include "pstrat/data_model.hpp"
#include "pstrat/distributions.hpp"
#include "pstrat/imputation.hpp"
#include "pstrat/mixture_model.hpp"
#include "pstrat/post_model.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace conjugacy {

struct Result {
  std::string name;
  double mean_err = 0.0; // max |analytic - quadrature| over mean entries
  double var_err = 0.0;  // same over covariance entries
  double ks = 0.0;       // max KS over marginals, sampler vs quadrature

  bool ok(double tol, double ks_tol) const { return mean_err <= tol && var_err <= tol && ks < ks_tol; }
};

struct Toy {
  Eigen::MatrixXd D; // n x 2, columns [1, x]
  Eigen::VectorXd x;
};

inline Toy make_toy(int n, std::uint64_t seed) {
  pstrat::RandomStream rng(seed);
  Toy t;
  t.x.resize(n);
  t.D.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    t.x[i] = rng.normal();
    t.D(i, 0) = 1.0;
    t.D(i, 1) = t.x[i];
  }
  return t;
}

inline pstrat::PriorConfig toy_prior() {
  pstrat::PriorConfig p;
  p.mu_beta = 0.3;
  p.sigma2_beta = 2.0;
  p.mu_eta = -0.2;
  p.sigma2_eta = 3.0;
  p.mu_eps = 0.1;
  p.sigma2_eps = 1.5;
  p.ig_p_shape = 3.0;
  p.ig_p_rate = 1.5;
  p.ig_y_shape = 2.5;
  p.ig_y_rate = 0.8;
  return p;
}

// Gaussian posterior vs quadrature of `logf` over +-9 analytic SDs.
inline Result compare_gaussian(const std::string& name, const pstrat::GaussianPosterior& post,
                               const std::function<double(const Eigen::VectorXd&)>& logf, int pts,
                               int draws, std::uint64_t seed) {
  const Eigen::VectorXd mu = post.mean();
  const Eigen::MatrixXd cov = post.covariance();
  const Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
  const auto q = oracle::grid_moments(logf, mu - 9.0 * sd, mu + 9.0 * sd, pts);
  Result r{name};
  r.mean_err = (mu - q.mean).cwiseAbs().maxCoeff();
  r.var_err = (cov - q.cov).cwiseAbs().maxCoeff();
  pstrat::RandomStream rng(seed);
  std::vector<std::vector<double>> xs(mu.size());
  for (int d = 0; d < draws; ++d) {
    const Eigen::VectorXd s = post.sample(rng);
    for (Eigen::Index k = 0; k < mu.size(); ++k) xs[k].push_back(s[k]);
  }
  for (Eigen::Index k = 0; k < mu.size(); ++k) {
    const double m = q.mean[k], s = std::sqrt(q.cov(k, k));
    r.ks = std::max(r.ks, oracle::ks_statistic(xs[k], [&](double v) { return oracle::std_normal_cdf((v - m) / s); }));
  }
  return r;
}

// Inverse-gamma posterior vs quadrature in the variance itself.
inline Result compare_variance(const std::string& name, const pstrat::InverseGammaParams& post,
                               const std::function<double(double)>& logf, int draws, std::uint64_t seed) {
  const double a = post.shape, b = post.rate;
  const double mean = b / (a - 1.0), var = b * b / ((a - 1.0) * (a - 1.0) * (a - 2.0));
  const auto g = oracle::grid_cdf(logf, 1e-3 * mean, 12.0 * mean, 200001);
  Result r{name};
  r.mean_err = std::abs(mean - g.mean);
  r.var_err = std::abs(var - g.var);
  pstrat::RandomStream rng(seed);
  std::vector<double> xs(draws);
  for (auto& v : xs) v = post.sample(rng);
  r.ks = oracle::ks_statistic(xs, g);
  return r;
}

inline Result check_beta(int draws, std::uint64_t seed) {
  const auto prior = toy_prior();
  const Toy t = make_toy(40, seed);
  const double s2 = 0.8;
  pstrat::RandomStream rng(seed + 1);
  Eigen::VectorXd p(t.x.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = 1.0 + 2.0 * t.x[i] + rng.normal(0.0, std::sqrt(s2));
  auto logf = [&](const Eigen::VectorXd& b) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) acc += oracle::log_normal_pdf(p[i], t.D.row(i).dot(b), s2);
    for (Eigen::Index k = 0; k < b.size(); ++k) acc += oracle::log_normal_pdf(b[k], prior.mu_beta, prior.sigma2_beta);
    return acc;
  };
  return compare_gaussian("beta", pstrat::beta_posterior(t.D, p, s2, prior), logf, 301, draws, seed + 2);
}

inline Result check_sigma2_p(int draws, std::uint64_t seed) {
  const auto prior = toy_prior();
  pstrat::RandomStream rng(seed);
  Eigen::VectorXd res(30);
  for (auto& v : res) v = rng.normal(0.0, 0.7);
  auto logf = [&](double s2) {
    double acc = oracle::log_inv_gamma_pdf(s2, prior.ig_p_shape, prior.ig_p_rate);
    for (double v : res) acc += oracle::log_normal_pdf(v, 0.0, s2);
    return acc;
  };
  return compare_variance("sigma2_p", pstrat::sigma2_p_posterior(res, prior), logf, draws, seed + 1);
}

inline Result check_eta(int draws, std::uint64_t seed) {
  const auto prior = toy_prior();
  const Toy t = make_toy(40, seed);
  const double s2 = 0.6;
  pstrat::RandomStream rng(seed + 1);
  Eigen::MatrixXd D(t.x.size(), 3);
  Eigen::VectorXd y(t.x.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double p = 0.5 + 0.5 * t.x[i] + rng.normal();
    D.row(i) = pstrat::outcome_design_row(t.x.segment(i, 1), p, 0.0, 0);
    y[i] = 2.0 - t.x[i] + 0.7 * p + rng.normal(0.0, std::sqrt(s2));
  }
  auto logf = [&](const Eigen::VectorXd& e) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) acc += oracle::log_normal_pdf(y[i], D.row(i).dot(e), s2);
    for (Eigen::Index k = 0; k < e.size(); ++k) acc += oracle::log_normal_pdf(e[k], prior.mu_eta, prior.sigma2_eta);
    return acc;
  };
  return compare_gaussian("eta", pstrat::eta_posterior(D, y, s2, prior), logf, 121, draws, seed + 2);
}

inline Result check_sigma2_y(int draws, std::uint64_t seed) {
  const auto prior = toy_prior();
  pstrat::RandomStream rng(seed);
  Eigen::VectorXd res(25);
  for (auto& v : res) v = rng.normal(0.0, 1.3);
  auto logf = [&](double s2) {
    double acc = oracle::log_inv_gamma_pdf(s2, prior.ig_y_shape, prior.ig_y_rate);
    for (double v : res) acc += oracle::log_normal_pdf(v, 0.0, s2);
    return acc;
  };
  const auto post = pstrat::variance_posterior(prior.ig_y_shape, prior.ig_y_rate,
                                               static_cast<double>(res.size()), res.squaredNorm());
  return compare_variance("sigma2_y", post, logf, draws, seed + 1);
}

inline Result check_eps(int draws, std::uint64_t seed) {
  const auto prior = toy_prior();
  const Toy t = make_toy(35, seed);
  pstrat::RandomStream rng(seed + 1);
  Eigen::VectorXd z(t.x.size());
  for (auto& v : z) v = rng.normal(0.4, 1.0);
  auto logf = [&](const Eigen::VectorXd& e) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) acc += oracle::log_normal_pdf(z[i], t.D.row(i).dot(e), 1.0);
    for (Eigen::Index k = 0; k < e.size(); ++k) acc += oracle::log_normal_pdf(e[k], prior.mu_eps, prior.sigma2_eps);
    return acc;
  };
  return compare_gaussian("eps", pstrat::stick_coefficient_posterior(t.D, z, prior), logf, 301, draws, seed + 2);
}

// Two units, q = 1: unit 0 treated, unit 1 control. Parameters are set by
// hand so the missing-P conditionals are non-trivial.
struct ImputationToy {
  pstrat::ModelData data;
  pstrat::ChainState state;
};

inline ImputationToy make_imputation_toy(pstrat::TreatedDesign design) {
  pstrat::Dataset d;
  d.X.resize(2, 1);
  d.X << 0.7, -1.2;
  d.T = {1, 0};
  d.P.resize(2);
  d.P << 1.4, 0.3;
  d.Y.resize(2);
  d.Y << 2.1, -0.6;
  ImputationToy toy;
  toy.data = pstrat::make_model_data(d, false, design);
  pstrat::RandomStream rng(5);
  toy.state = pstrat::initialize_state(toy.data, toy_prior(), 3, rng);
  auto& s = toy.state;
  s.post.beta[0] = Eigen::Vector2d(0.4, 0.9);
  s.post.beta[1] = Eigen::Vector2d(1.1, 0.5);
  s.post.sigma2 = {0.7, 0.5};
  const bool joint = design == pstrat::TreatedDesign::Joint;
  auto eta1 = [&](double a, double b, double c, double e) {
    Eigen::VectorXd v(joint ? 4 : 3);
    if (joint) v << a, b, c, e;
    else v << a, b, c;
    return v;
  };
  s.mix.eta[1] = {eta1(0.5, 0.3, 1.6, -0.8), eta1(-1.0, 0.2, -0.9, 0.4), eta1(2.0, -0.4, 0.3, 1.1)};
  s.mix.sigma2_y[1] = {0.4, 0.9, 0.25};
  s.mix.eps[1] = {Eigen::Vector2d(0.2, -0.5), Eigen::Vector2d(-0.3, 0.8)};
  s.potentials.P[0][0] = 0.9;
  s.potentials.P[1][1] = 1.7;
  s.potentials.Y[1][1] = 0.8;
  s.alloc.label[1][1] = 2;
  return toy;
}

inline double toy_phi(double z) { return oracle::std_normal_cdf(z); }

inline Result compare_mixture(const std::string& name, const pstrat::GaussianMixture1D& g,
                              const std::function<double(double)>& logf, int draws, std::uint64_t seed) {
  const double mean = g.mean(), var = g.variance(), sd = std::sqrt(var);
  const auto q = oracle::grid_cdf(logf, mean - 14.0 * sd, mean + 14.0 * sd, 400001);
  Result r{name};
  r.mean_err = std::abs(mean - q.mean);
  r.var_err = std::abs(var - q.var);
  pstrat::RandomStream rng(seed);
  std::vector<double> xs(draws);
  for (auto& v : xs) v = g.sample(rng);
  r.ks = oracle::ks_statistic(xs, q);
  return r;
}

inline Result check_treated_post(pstrat::TreatedDesign design, int draws, std::uint64_t seed) {
  const ImputationToy toy = make_imputation_toy(design);
  const auto& s = toy.state;
  const double x = toy.data.Xp(0, 1), p1 = s.potentials.P[1][0], y1 = s.potentials.Y[1][0];
  // Stick weights from their definition.
  const double g1 = s.mix.eps[1][0].dot(Eigen::Vector2d(1.0, x));
  const double g2 = s.mix.eps[1][1].dot(Eigen::Vector2d(1.0, x));
  const double lam[3] = {toy_phi(g1), (1 - toy_phi(g1)) * toy_phi(g2), (1 - toy_phi(g1)) * (1 - toy_phi(g2))};
  const bool joint = design == pstrat::TreatedDesign::Joint;
  auto logf = [&](double p0) {
    double like = 0.0;
    for (int m = 0; m < 3; ++m) {
      const auto& e = s.mix.eta[1][m];
      const double mean = joint ? e[0] + e[1] * x + e[2] * p1 + e[3] * p0 : e[0] + e[1] * x + e[2] * (p1 - p0);
      like += lam[m] * std::exp(oracle::log_normal_pdf(y1, mean, s.mix.sigma2_y[1][m]));
    }
    return oracle::log_normal_pdf(p0, s.post.beta[0][0] + s.post.beta[0][1] * x, s.post.sigma2[0]) +
           std::log(like);
  };
  return compare_mixture(joint ? "P0 imputation (joint)" : "P0 imputation (gain)",
                         pstrat::treated_post_conditional(s, toy.data, 0), logf, draws, seed);
}

inline std::vector<Result> all_checks(int draws, std::uint64_t seed) {
  using pstrat::TreatedDesign;
  return {check_beta(draws, seed),
          check_sigma2_p(draws, seed + 10),
          check_eta(draws, seed + 20),
          check_sigma2_y(draws, seed + 30),
          check_eps(draws, seed + 40),
          check_treated_post(TreatedDesign::Gain, draws, seed + 50),
          check_treated_post(TreatedDesign::Joint, draws, seed + 60)};
}

} // namespace conjugacy
