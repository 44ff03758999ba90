#include "pstrat/simulation.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace pstrat;

TEST_CASE("scenario shapes") {
  for (int id : {1, 2, 3}) {
    const ScenarioSpec s = scenario(id);
    CAPTURE(id);
    CHECK(s.id == id);
    CHECK(s.n == (id == 3 ? 300 : 500));
    CHECK(s.treatment_coef.size() == s.q());
    for (int arm = 0; arm < 2; ++arm) {
      CHECK(s.beta[arm].size() == 1 + static_cast<Eigen::Index>(s.post_covariates.size()));
      CHECK(s.eta[arm].rows() == 3);
      CHECK(s.eta[arm].cols() == 2 + static_cast<Eigen::Index>(s.outcome_features[arm].size()));
      CHECK(s.sigma2_y[arm].size() == 3);
      CHECK((s.sigma2_y[arm].array() > 0).all());
    }
  }
  CHECK_THROWS_AS(scenario(0), std::invalid_argument);
  CHECK_THROWS_AS(scenario(4), std::invalid_argument);
}

TEST_CASE("cluster map") {
  CHECK(scenario_cluster(1, 1) == 0);
  CHECK(scenario_cluster(1, 0) == 1);
  CHECK(scenario_cluster(0, 0) == 2);
  CHECK(scenario_cluster(0, 1) == 2);
}

TEST_CASE("replicates are deterministic and consistent with their truth") {
  const ScenarioSpec s = scenario(2);
  const SimReplicate a = generate_replicate(s, 11);
  const SimReplicate b = generate_replicate(s, 11);
  const SimReplicate c = generate_replicate(s, 12);
  CHECK(a.data.P == b.data.P);
  CHECK(a.data.Y == b.data.Y);
  CHECK(a.data.P != c.data.P);
  REQUIRE(a.data.n() == s.n);
  CHECK(a.data.q() == s.q());
  CHECK(consistent_with_data(a.truth, make_model_data(a.data, false, TreatedDesign::Gain)));
  CHECK(a.ate_p == doctest::Approx((a.truth.P[1] - a.truth.P[0]).mean()).epsilon(1e-12));
  CHECK(a.ate_y == doctest::Approx(sample_ate_y(a.truth)).epsilon(1e-12));
  for (Eigen::Index i = 0; i < a.data.n(); ++i) {
    REQUIRE(a.cluster[i] == scenario_cluster(a.data.X(i, 0), a.data.X(i, 1)));
  }
  int treated = 0;
  for (int t : a.data.T) treated += t;
  CHECK(treated > 0);
  CHECK(treated < s.n);
}

TEST_CASE("model-class replicate follows its regression") {
  ModelClassSpec spec;
  spec.n = 20000;
  spec.q = 1;
  spec.beta = {Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(0.0, -1.0)};
  spec.eta = {Eigen::Vector3d(0.5, 1.0, -1.0), Eigen::Vector3d(1.0, 0.0, 2.0)};
  const SimReplicate r = generate_model_class_replicate(spec, 3);
  // E[P(1) - P(0)] = (0 - 1) + (-1 - 2) E[X] = -1.
  CHECK(r.ate_p == doctest::Approx(-1.0).epsilon(0.05));
  // E[Y(1) - Y(0)] = 1 + 2(-1) - (0.5 - 1) = -0.5.
  CHECK(r.ate_y == doctest::Approx(-0.5).epsilon(0.1));
}

TEST_CASE("benchmark writers and a tiny run") {
  ScenarioSpec s = scenario(1);
  s.n = 60;
  FitConfig c;
  c.sampler.M = 3;
  c.sampler.iterations = 40;
  c.sampler.burn_in = 20;
  c.sampler.thin = 1;
  const BenchmarkReport rep = run_benchmark(s, 2, c, 5);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.failures == 0);
  CHECK(rep.success_rate() == 1.0);
  for (const auto& row : rep.rows) {
    CHECK(row.ok);
    CHECK(row.draws == 20);
    CHECK(row.identity_max_error < 1e-10);
    CHECK(row.bias_y == doctest::Approx(row.ate_y_hat - row.ate_y_true));
  }
  ThreadPool pool(2);
  const BenchmarkReport par = run_benchmark(s, 2, c, 5, pool);
  CHECK(par.rows[1].ate_y_hat == rep.rows[1].ate_y_hat);

  std::ostringstream csv;
  write_benchmark_csv(csv, rep);
  CHECK(csv.str().rfind("scenario,replicate,seed,ate_p_true,ate_p_hat,ate_y_true,ate_y_hat,bias_p,bias_y\r\n", 0) == 0);
  std::ostringstream sum;
  write_benchmark_summary(sum, rep);
  CHECK(sum.str().find("median_bias_ate_y,") != std::string::npos);
  std::ostringstream timing;
  write_benchmark_timing(timing, rep);
  CHECK(timing.str().rfind("replicate,status,seconds,draws,error\r\n", 0) == 0);
  std::ostringstream truth;
  write_truth_csv(truth, generate_replicate(s, 1));
  CHECK(truth.str().rfind("id,p0,p1,y0,y1,cluster\r\n", 0) == 0);
}
