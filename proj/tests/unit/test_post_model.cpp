#include "conjugacy.hpp"

#include "pstrat/post_model.hpp"

#include <doctest.h>

using namespace pstrat;

TEST_CASE("beta conditional matches quadrature") {
  const auto r = conjugacy::check_beta(20000, 101);
  CHECK(r.mean_err < 1e-6);
  CHECK(r.var_err < 1e-6);
  CHECK(r.ks < 0.02);
}

TEST_CASE("sigma2_p conditional matches quadrature") {
  const auto r = conjugacy::check_sigma2_p(20000, 103);
  CHECK(r.mean_err < 1e-6);
  CHECK(r.var_err < 1e-6);
  CHECK(r.ks < 0.02);
}

TEST_CASE("beta posterior with a flat-ish prior approaches least squares") {
  RandomStream rng(5);
  const int n = 2000;
  Eigen::MatrixXd D(n, 2);
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) {
    D(i, 0) = 1.0;
    D(i, 1) = rng.normal();
    p[i] = -0.5 + 1.5 * D(i, 1) + rng.normal(0.0, 0.3);
  }
  PriorConfig prior;
  prior.sigma2_beta = 1e8;
  const auto post = beta_posterior(D, p, 0.09, prior);
  const Eigen::VectorXd ols = D.colPivHouseholderQr().solve(p);
  CHECK((post.mean() - ols).norm() < 1e-6);
}

TEST_CASE("update_beta and update_sigma2_p use every unit's potential") {
  Dataset d;
  const int n = 400;
  RandomStream rng(9);
  d.X.resize(n, 1);
  d.T.resize(n);
  d.P.resize(n);
  d.Y.resize(n);
  for (int i = 0; i < n; ++i) {
    d.X(i, 0) = rng.normal();
    d.T[i] = i % 2;
    d.P[i] = 0.0;
    d.Y[i] = 0.0;
  }
  const ModelData md = make_model_data(d, false, TreatedDesign::Gain);
  ChainState s = initialize_state(md, PriorConfig{}, 2, rng);
  // Potentials of both arms follow known lines exactly (observed or not).
  for (int i = 0; i < n; ++i) {
    s.potentials.P[0][i] = 1.0 + 2.0 * d.X(i, 0);
    s.potentials.P[1][i] = -1.0 + 0.5 * d.X(i, 0);
  }
  s.post.sigma2 = {1e-4, 1e-4};
  update_beta(s, md, 0, PriorConfig{}, rng);
  update_beta(s, md, 1, PriorConfig{}, rng);
  CHECK(s.post.beta[0][0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(s.post.beta[0][1] == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(s.post.beta[1][1] == doctest::Approx(0.5).epsilon(1e-3));
  update_sigma2_p(s, md, 0, PriorConfig{}, rng);
  CHECK(s.post.sigma2[0] < 0.05);
}

TEST_CASE("post mean and predictive draw") {
  PostTreatmentParams p;
  p.beta[0] = Eigen::Vector2d(1.0, -2.0);
  p.beta[1] = Eigen::Vector2d(0.0, 1.0);
  p.sigma2 = {0.25, 4.0};
  const Eigen::Vector2d xp(1.0, 0.5);
  CHECK(post_mean(p, xp, 0) == doctest::Approx(0.0));
  CHECK(post_mean(p, xp, 1) == doctest::Approx(0.5));
  RandomStream rng(3);
  double s = 0, s2 = 0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const double v = prior_predictive_P(p, xp, 1, rng);
    s += v;
    s2 += v * v;
  }
  CHECK(s / n == doctest::Approx(0.5).epsilon(0.05));
  CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(4.0).epsilon(0.02));
}
