#include "pstrat/gibbs.hpp"

#include "pstrat/imputation.hpp"
#include "pstrat/mixture_model.hpp"
#include "pstrat/post_model.hpp"

#include <cassert>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace pstrat {

void gibbs_sweep(ChainState& state, const ModelData& data, const PriorConfig& prior,
                 RandomStream& rng, Executor& exec) {
  impute_missing_post(state, data, rng, exec);
  assert(consistent_with_data(state.potentials, data));
  update_allocation(state, data, rng, exec);
  update_augmentation(state, data, prior, rng, exec);
  update_cluster_params(state, data, prior, rng);
  for (int arm = 0; arm < 2; ++arm) {
    update_beta(state, data, arm, prior, rng);
    update_sigma2_p(state, data, arm, prior, rng);
  }
  impute_missing_outcome(state, data, rng, exec);
  assert(consistent_with_data(state.potentials, data));
}

void simulate_potentials(ChainState& state, const ModelData& data, RandomStream& rng) {
  const Eigen::Index n = data.n();
  auto& pot = state.potentials;
  for (int arm = 0; arm < 2; ++arm) {
    pot.P[arm].resize(n);
    pot.Y[arm].resize(n);
    state.alloc.label[arm].resize(n);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd xp = data.Xp.row(i).transpose();
    for (int arm = 0; arm < 2; ++arm) pot.P[arm][i] = prior_predictive_P(state.post, xp, arm, rng);
    for (int arm = 0; arm < 2; ++arm) {
      const Eigen::VectorXd w = stick_weights(state.mix.eps[arm], xp);
      const auto m = static_cast<int>(sample_categorical(rng, std::span<const double>(w.data(), w.size())));
      state.alloc.label[arm][i] = m;
      const double mean = state.mix.eta[arm][m].dot(unit_outcome_design(data, pot, i, arm));
      pot.Y[arm][i] = rng.normal(mean, std::sqrt(state.mix.sigma2_y[arm][m]));
    }
  }
}

void observe(const ChainState& state, ModelData& data) {
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    data.P[i] = state.potentials.P[data.T[i]][i];
    data.Y[i] = state.potentials.Y[data.T[i]][i];
  }
}

namespace {

ChainDiagnostics diagnose(const PosteriorDraws& draws, int M) {
  ChainDiagnostics diag;
  const std::size_t D = draws.size();
  for (int arm = 0; arm < 2; ++arm) {
    double acc = 0.0;
    for (const auto& occ : draws.occupancy) {
      int used = 0;
      for (int m = 0; m < M; ++m) used += occ[arm][m] > 0;
      acc += used;
    }
    diag.mean_occupied[arm] = D ? acc / static_cast<double>(D) : 0.0;
  }
  double sy = 0.0, sp = 0.0;
  const std::size_t step = std::max<std::size_t>(1, D / 4);
  for (std::size_t d = 0; d < D; ++d) {
    sy += draws.effects[d].ate_y;
    sp += draws.effects[d].ate_p;
    if ((d + 1) % step == 0 || d + 1 == D) {
      diag.running_ate_y.emplace_back(static_cast<int>(d + 1), sy / static_cast<double>(d + 1));
      diag.running_ate_p.emplace_back(static_cast<int>(d + 1), sp / static_cast<double>(d + 1));
    }
  }
  auto half_means = [&](const char* name, auto get) {
    SplitHalf h{name, 0.0, 0.0};
    std::size_t c1 = 0, c2 = 0;
    for (std::size_t d = 0; d < D; ++d) {
      const std::optional<double> v = get(draws.effects[d]);
      if (!v) continue;
      if (d < D / 2) { h.first += *v; ++c1; } else { h.second += *v; ++c2; }
    }
    h.first = c1 ? h.first / static_cast<double>(c1) : std::nan("");
    h.second = c2 ? h.second / static_cast<double>(c2) : std::nan("");
    diag.split_half.push_back(h);
  };
  half_means("EAE+", [](const EffectsDraw& e) { return e.eae_plus; });
  half_means("EAE-", [](const EffectsDraw& e) { return e.eae_minus; });
  half_means("EDE", [](const EffectsDraw& e) { return e.ede; });
  half_means("ATE_P", [](const EffectsDraw& e) { return std::optional<double>(e.ate_p); });
  half_means("ATE_Y", [](const EffectsDraw& e) { return std::optional<double>(e.ate_y); });
  return diag;
}

} // namespace

ChainResult run_chain(const ModelData& data, const FitConfig& config, Executor& exec) {
  config.validate();
  const auto& sc = config.sampler;
  RandomStream rng(sc.seed);
  ChainResult result;
  ChainState state = initialize_state(data, config.prior, sc.M, rng);
  auto& draws = result.draws;
  const int kept = config.kept_draws();
  draws.effects.reserve(kept);
  draws.strata.reserve(kept);
  draws.occupancy.reserve(kept);
  const bool keep_gains = config.estimands.strata_mode == StrataMode::PosteriorMean;
  for (int it = 0; it < sc.iterations; ++it) {
    try {
      gibbs_sweep(state, data, config.prior, rng, exec);
    } catch (const std::exception& e) {
      throw ChainFailure(it, e.what());
    }
    if (it < sc.burn_in || (it - sc.burn_in + 1) % sc.thin != 0) continue;
    const auto& pot = state.potentials;
    auto strata = classify_strata(pot.P[0], pot.P[1], config.estimands.xi);
    EffectsDraw eff = effects_for_strata(pot, strata);
    if (!std::isfinite(eff.ate_y) || !std::isfinite(eff.ate_p)) {
      throw ChainFailure(it, "non-finite imputed potentials");
    }
    draws.iteration.push_back(it);
    draws.effects.push_back(eff);
    draws.strata.push_back(std::move(strata));
    draws.occupancy.push_back(cluster_occupancy(state.alloc, sc.M));
    if (config.io.save_params) draws.params.push_back({state.post, state.mix});
    if (keep_gains) {
      draws.p_gain.push_back(pot.P[1] - pot.P[0]);
      draws.y_gain.push_back(pot.Y[1] - pot.Y[0]);
    }
  }
  result.diagnostics = diagnose(draws, sc.M);
  result.final_state = std::move(state);
  return result;
}

std::string format_diagnostics(const ChainDiagnostics& diag) {
  std::ostringstream out;
  char line[160];
  out << "diagnostics\n";
  std::snprintf(line, sizeof line, "  mean occupied clusters: control %.2f, treated %.2f\n",
                diag.mean_occupied[0], diag.mean_occupied[1]);
  out << line;
  out << "  running means (draws: ATE_P, ATE_Y)\n";
  for (std::size_t k = 0; k < diag.running_ate_y.size(); ++k) {
    std::snprintf(line, sizeof line, "    %6d: %10.5f %10.5f\n", diag.running_ate_y[k].first,
                  diag.running_ate_p[k].second, diag.running_ate_y[k].second);
    out << line;
  }
  out << "  split-half means (first, second)\n";
  for (const auto& h : diag.split_half) {
    std::snprintf(line, sizeof line, "    %-6s %10.5f %10.5f\n", h.name.c_str(), h.first, h.second);
    out << line;
  }
  return out.str();
}

} // namespace pstrat
