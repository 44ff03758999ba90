#pragma once

#include "pstrat/data_model.hpp"

#include <json.hpp>

#include <filesystem>

namespace pstrat {

// JSON layout, every key optional:
// {
//   "prior":     { "mu_beta", "sigma2_beta", "ig_p_shape", "ig_p_rate",
//                  "mu_eta", "sigma2_eta", "ig_y_shape", "ig_y_rate",
//                  "mu_eps", "sigma2_eps", "sigma2_gamma" },
//   "sampler":   { "M", "iterations", "burn_in", "thin", "seed",
//                  "treated_design": "gain"|"joint", "standardize",
//                  "inner_parallel" },
//   "estimands": { "xi", "strata_mode": "per_draw"|"posterior_mean" },
//   "io":        { "draws_format": "csv"|"binary", "save_params" }
// }
// Unknown keys and wrong types are ConfigErrors.

FitConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const FitConfig& config);
FitConfig load_config(const std::filesystem::path& path);

/// STRATA_SEED, when set, replaces sampler.seed.
void apply_env_overrides(FitConfig& config);

} // namespace pstrat
