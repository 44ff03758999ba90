#include "pstrat/gibbs.hpp"
#include "pstrat/simulation.hpp"

#include <doctest.h>

#include <cmath>

using namespace pstrat;

namespace {

ModelData small_data(std::uint64_t seed, int n = 60) {
  ModelClassSpec spec;
  spec.n = n;
  spec.q = 1;
  spec.beta = {Eigen::Vector2d(1.0, 0.5), Eigen::Vector2d(2.0, -0.5)};
  spec.eta = {Eigen::Vector3d(0.0, 1.0, 1.0), Eigen::Vector3d(1.0, 0.5, 2.0)};
  const auto rep = generate_model_class_replicate(spec, seed);
  return make_model_data(validated(rep.data), true, TreatedDesign::Gain);
}

FitConfig quick_config() {
  FitConfig c;
  c.sampler.M = 4;
  c.sampler.iterations = 120;
  c.sampler.burn_in = 40;
  c.sampler.thin = 3;
  c.sampler.seed = 17;
  return c;
}

} // namespace

TEST_CASE("sweeps keep observed cells pinned") {
  const ModelData md = small_data(1);
  RandomStream rng(2);
  ChainState s = initialize_state(md, PriorConfig{}, 5, rng);
  for (int k = 0; k < 30; ++k) {
    gibbs_sweep(s, md, PriorConfig{}, rng);
    REQUIRE(consistent_with_data(s.potentials, md));
  }
  for (int arm = 0; arm < 2; ++arm) {
    CHECK(s.potentials.P[arm].allFinite());
    CHECK(s.potentials.Y[arm].allFinite());
  }
}

TEST_CASE("kept draws follow burn-in and thinning") {
  const ModelData md = small_data(3);
  const FitConfig c = quick_config();
  const ChainResult r = run_chain(md, c);
  REQUIRE(r.draws.size() == static_cast<std::size_t>(c.kept_draws()));
  CHECK(r.draws.iteration.front() == 42);
  for (std::size_t d = 1; d < r.draws.size(); ++d) CHECK(r.draws.iteration[d] - r.draws.iteration[d - 1] == 3);
  CHECK(r.draws.params.empty());
  CHECK(r.diagnostics.split_half.size() == 5);
}

TEST_CASE("chains are reproducible and independent of the executor") {
  const ModelData md = small_data(4, 300); // several unit blocks
  FitConfig c = quick_config();
  c.io.save_params = true;
  const ChainResult a = run_chain(md, c);
  const ChainResult b = run_chain(md, c);
  ThreadPool pool(3);
  const ChainResult p = run_chain(md, c, pool);
  REQUIRE(a.draws.size() == b.draws.size());
  for (std::size_t d = 0; d < a.draws.size(); ++d) {
    CHECK(a.draws.effects[d].ate_y == b.draws.effects[d].ate_y);
    CHECK(a.draws.effects[d].ate_y == p.draws.effects[d].ate_y);
    CHECK(a.draws.effects[d].ate_p == p.draws.effects[d].ate_p);
    CHECK(a.draws.params[d].mix.eta[1][0] == p.draws.params[d].mix.eta[1][0]);
  }
  c.sampler.seed = 18;
  const ChainResult other = run_chain(md, c);
  CHECK(other.draws.effects.back().ate_y != a.draws.effects.back().ate_y);
}

TEST_CASE("stratum identity holds in every kept draw") {
  const ModelData md = small_data(5);
  const ChainResult r = run_chain(md, quick_config());
  for (const auto& e : r.draws.effects) {
    double lhs = 0.0;
    if (e.eae_plus) lhs += *e.eae_plus * e.counts[2];
    if (e.eae_minus) lhs += *e.eae_minus * e.counts[0];
    if (e.ede) lhs += *e.ede * e.counts[1];
    CHECK(std::abs(lhs - e.n() * e.ate_y) < 1e-10);
  }
}

TEST_CASE("numerical failure carries the iteration") {
  ModelData md = small_data(6);
  md.Y[md.arm_units[0][0]] = std::nan("");
  try {
    run_chain(md, quick_config());
    FAIL("expected a failure");
  } catch (const ChainFailure& e) {
    CHECK(e.iteration() == 0);
    CHECK(std::string(e.what()).rfind("iteration 0:", 0) == 0);
  }
}

TEST_CASE("forward simulation and observation") {
  ModelData md = small_data(7);
  RandomStream rng(8);
  ChainState s = initialize_state(md, PriorConfig{}, 3, rng);
  simulate_potentials(s, md, rng);
  observe(s, md);
  CHECK(consistent_with_data(s.potentials, md));
  CHECK(s.potentials.P[0].size() == md.n());
}
