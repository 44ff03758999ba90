#include "pstrat/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <string>

namespace pstrat {

using nlohmann::json;

namespace {

void reject_unknown(const json& section, const std::string& where, const std::set<std::string>& known) {
  if (!section.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& [key, _] : section.items()) {
    if (!known.count(key)) throw ConfigError("unknown key '" + where + "." + key + "'");
  }
}

template <class T>
void read(const json& section, const std::string& where, const char* key, T& out) {
  if (!section.contains(key)) return;
  try {
    out = section.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + where + "." + key + "'");
  }
}

void read_number(const json& section, const std::string& where, const char* key, double& out) {
  if (!section.contains(key)) return;
  if (!section.at(key).is_number()) throw ConfigError("'" + where + "." + key + "' must be a number");
  out = section.at(key).get<double>();
}

void read_int(const json& section, const std::string& where, const char* key, int& out) {
  if (!section.contains(key)) return;
  if (!section.at(key).is_number_integer()) throw ConfigError("'" + where + "." + key + "' must be an integer");
  out = section.at(key).get<int>();
}

} // namespace

FitConfig config_from_json(const json& doc) {
  FitConfig c;
  reject_unknown(doc, "config", {"prior", "sampler", "estimands", "io"});
  if (doc.contains("prior")) {
    const auto& p = doc["prior"];
    reject_unknown(p, "prior", {"mu_beta", "sigma2_beta", "ig_p_shape", "ig_p_rate", "mu_eta", "sigma2_eta",
                                "ig_y_shape", "ig_y_rate", "mu_eps", "sigma2_eps", "sigma2_gamma"});
    read_number(p, "prior", "mu_beta", c.prior.mu_beta);
    read_number(p, "prior", "sigma2_beta", c.prior.sigma2_beta);
    read_number(p, "prior", "ig_p_shape", c.prior.ig_p_shape);
    read_number(p, "prior", "ig_p_rate", c.prior.ig_p_rate);
    read_number(p, "prior", "mu_eta", c.prior.mu_eta);
    read_number(p, "prior", "sigma2_eta", c.prior.sigma2_eta);
    read_number(p, "prior", "ig_y_shape", c.prior.ig_y_shape);
    read_number(p, "prior", "ig_y_rate", c.prior.ig_y_rate);
    read_number(p, "prior", "mu_eps", c.prior.mu_eps);
    read_number(p, "prior", "sigma2_eps", c.prior.sigma2_eps);
    read_number(p, "prior", "sigma2_gamma", c.prior.sigma2_gamma);
  }
  if (doc.contains("sampler")) {
    const auto& s = doc["sampler"];
    reject_unknown(s, "sampler", {"M", "iterations", "burn_in", "thin", "seed", "treated_design",
                                  "standardize", "inner_parallel"});
    read_int(s, "sampler", "M", c.sampler.M);
    read_int(s, "sampler", "iterations", c.sampler.iterations);
    read_int(s, "sampler", "burn_in", c.sampler.burn_in);
    read_int(s, "sampler", "thin", c.sampler.thin);
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned() && !(s["seed"].is_number_integer() && s["seed"].get<long long>() >= 0)) {
        throw ConfigError("'sampler.seed' must be a nonnegative integer");
      }
      c.sampler.seed = s["seed"].get<std::uint64_t>();
    }
    std::string design = c.sampler.treated_design == TreatedDesign::Gain ? "gain" : "joint";
    read(s, "sampler", "treated_design", design);
    if (design == "gain") c.sampler.treated_design = TreatedDesign::Gain;
    else if (design == "joint") c.sampler.treated_design = TreatedDesign::Joint;
    else throw ConfigError("'sampler.treated_design' must be \"gain\" or \"joint\"");
    read(s, "sampler", "standardize", c.sampler.standardize);
    read(s, "sampler", "inner_parallel", c.sampler.inner_parallel);
  }
  if (doc.contains("estimands")) {
    const auto& e = doc["estimands"];
    reject_unknown(e, "estimands", {"xi", "strata_mode"});
    read_number(e, "estimands", "xi", c.estimands.xi);
    std::string mode = "per_draw";
    read(e, "estimands", "strata_mode", mode);
    if (mode == "per_draw") c.estimands.strata_mode = StrataMode::PerDraw;
    else if (mode == "posterior_mean") c.estimands.strata_mode = StrataMode::PosteriorMean;
    else throw ConfigError("'estimands.strata_mode' must be \"per_draw\" or \"posterior_mean\"");
  }
  if (doc.contains("io")) {
    const auto& io = doc["io"];
    reject_unknown(io, "io", {"draws_format", "save_params"});
    std::string fmt = "csv";
    read(io, "io", "draws_format", fmt);
    if (fmt == "csv") c.io.draws_format = DrawsFormat::Csv;
    else if (fmt == "binary") c.io.draws_format = DrawsFormat::Binary;
    else throw ConfigError("'io.draws_format' must be \"csv\" or \"binary\"");
    read(io, "io", "save_params", c.io.save_params);
  }
  c.validate();
  return c;
}

json config_to_json(const FitConfig& c) {
  json doc;
  doc["prior"] = {
      {"mu_beta", c.prior.mu_beta},       {"sigma2_beta", c.prior.sigma2_beta},
      {"ig_p_shape", c.prior.ig_p_shape}, {"ig_p_rate", c.prior.ig_p_rate},
      {"mu_eta", c.prior.mu_eta},         {"sigma2_eta", c.prior.sigma2_eta},
      {"ig_y_shape", c.prior.ig_y_shape}, {"ig_y_rate", c.prior.ig_y_rate},
      {"mu_eps", c.prior.mu_eps},         {"sigma2_eps", c.prior.sigma2_eps},
      {"sigma2_gamma", c.prior.sigma2_gamma},
  };
  doc["sampler"] = {
      {"M", c.sampler.M},
      {"iterations", c.sampler.iterations},
      {"burn_in", c.sampler.burn_in},
      {"thin", c.sampler.thin},
      {"seed", c.sampler.seed},
      {"treated_design", c.sampler.treated_design == TreatedDesign::Gain ? "gain" : "joint"},
      {"standardize", c.sampler.standardize},
      {"inner_parallel", c.sampler.inner_parallel},
  };
  doc["estimands"] = {
      {"xi", c.estimands.xi},
      {"strata_mode", c.estimands.strata_mode == StrataMode::PerDraw ? "per_draw" : "posterior_mean"},
  };
  doc["io"] = {
      {"draws_format", c.io.draws_format == DrawsFormat::Csv ? "csv" : "binary"},
      {"save_params", c.io.save_params},
  };
  return doc;
}

FitConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

void apply_env_overrides(FitConfig& config) {
  const char* seed = std::getenv("STRATA_SEED");
  if (!seed || !*seed) return;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(seed, &end, 10);
  if (*end != '\0' || seed[0] == '-') throw ConfigError("STRATA_SEED must be a nonnegative integer");
  config.sampler.seed = v;
}

} // namespace pstrat
