// pstrat: fit, simulate and benchmark the principal stratification model.
//
//   pstrat fit --config cfg.json --data d.csv --out run1/
//   pstrat simulate --scenario 1 --seed 7 --out sim/
//   pstrat benchmark --scenario 1 --replicates 20 --config cfg.json --out bench/
//
// Exit codes: 0 ok, 1 usage or I/O, 2 config error, 3 data error, 4 numerical failure.

#include "pstrat/config.hpp"
#include "pstrat/estimands.hpp"
#include "pstrat/gibbs.hpp"
#include "pstrat/io.hpp"
#include "pstrat/simulation.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <thread>

namespace fs = std::filesystem;
using namespace pstrat;

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kData = 3, kNumerical = 4 };

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

FitConfig resolve_config(const std::string& path) {
  FitConfig cfg = path.empty() ? FitConfig{} : load_config(path);
  apply_env_overrides(cfg);
  cfg.validate();
  return cfg;
}

std::unique_ptr<ThreadPool> make_pool(std::size_t threads) {
  if (threads <= 1) return nullptr;
  return std::make_unique<ThreadPool>(threads);
}

struct FitArgs {
  std::string config, data, out;
  bool save_params = false;
  std::optional<std::string> draws_format;
  bool inner_parallel = false;
};

int cmd_fit(const FitArgs& a) {
  FitConfig cfg = resolve_config(a.config);
  if (a.save_params) cfg.io.save_params = true;
  if (a.inner_parallel) cfg.sampler.inner_parallel = true;
  if (a.draws_format) {
    if (*a.draws_format == "csv") cfg.io.draws_format = DrawsFormat::Csv;
    else if (*a.draws_format == "binary") cfg.io.draws_format = DrawsFormat::Binary;
    else throw ConfigError("--draws-format must be csv or binary");
  }
  const Dataset data = validated(read_dataset(a.data));
  const ModelData md = make_model_data(data, cfg.sampler.standardize, cfg.sampler.treated_design);

  auto pool = make_pool(cfg.sampler.inner_parallel ? std::max(1u, std::thread::hardware_concurrency()) : 1);
  Executor& exec = pool ? static_cast<Executor&>(*pool) : serial_executor();
  const ChainResult chain = run_chain(md, cfg, exec);
  const PosteriorSummary summary = summarize_posterior(chain.draws, cfg.estimands.strata_mode, cfg.estimands.xi);

  const fs::path out(a.out);
  fs::create_directories(out);
  {
    auto f = open_out(out / "config.json");
    f << config_to_json(cfg).dump(2) << '\n';
  }
  if (cfg.io.draws_format == DrawsFormat::Csv) {
    auto f = open_out(out / "draws.csv");
    write_draws_csv(f, chain.draws, md.standardization);
  } else {
    auto f = open_out(out / "draws.bin");
    write_draws_binary(f, chain.draws, md.standardization);
  }
  {
    auto f = open_out(out / "effects.csv");
    write_summary_csv(f, summary);
  }
  {
    auto f = open_out(out / "strata.csv");
    write_strata_csv(f, summary, data.ids);
  }
  const std::string table = format_summary_table(summary);
  const std::string diag = format_diagnostics(chain.diagnostics);
  {
    auto f = open_out(out / "summary.txt");
    f << "units " << data.n() << ", covariates " << data.q() << ", kept draws " << chain.draws.size() << "\n\n"
      << table << '\n' << diag;
  }
  std::cout << table << '\n' << diag;
  return kOk;
}

int cmd_simulate(int id, std::uint64_t seed, const std::string& out_dir, std::optional<long> n) {
  ScenarioSpec spec = scenario(id);
  if (n) {
    if (*n < 4) throw ConfigError("--n must be at least 4");
    spec.n = *n;
  }
  const SimReplicate rep = generate_replicate(spec, seed);
  const fs::path out(out_dir);
  fs::create_directories(out);
  {
    auto f = open_out(out / "observed.csv");
    write_dataset_csv(f, rep.data);
  }
  {
    auto f = open_out(out / "truth.csv");
    write_truth_csv(f, rep);
  }
  std::printf("scenario %d: n=%ld, treated %ld, ATE_P %.5f, ATE_Y %.5f\n", id, static_cast<long>(spec.n),
              static_cast<long>(std::count(rep.data.T.begin(), rep.data.T.end(), 1)), rep.ate_p, rep.ate_y);
  return kOk;
}

int cmd_benchmark(int id, int replicates, const std::string& config, const std::string& out_dir, int jobs,
                  std::uint64_t seed) {
  if (replicates < 2) throw ConfigError("--replicates must be at least 2");
  if (jobs < 1) throw ConfigError("--jobs must be at least 1");
  const ScenarioSpec spec = scenario(id);
  FitConfig cfg = resolve_config(config);
  auto pool = make_pool(static_cast<std::size_t>(std::min(jobs, replicates)));
  Executor& exec = pool ? static_cast<Executor&>(*pool) : serial_executor();
  const BenchmarkReport report = run_benchmark(spec, replicates, cfg, seed, exec);

  const fs::path out(out_dir);
  fs::create_directories(out);
  {
    auto f = open_out(out / "config.json");
    f << config_to_json(cfg).dump(2) << '\n';
  }
  {
    auto f = open_out(out / "benchmark.csv");
    write_benchmark_csv(f, report);
  }
  {
    auto f = open_out(out / "benchmark_summary.csv");
    write_benchmark_summary(f, report);
  }
  {
    auto f = open_out(out / "timing.csv");
    write_benchmark_timing(f, report);
  }
  std::printf("scenario %d: %zu replicates, %d failed, wall %.1fs\n", id, report.rows.size(), report.failures,
              report.wall_seconds);
  std::printf("  ATE_P bias median %+.4f IQR %.4f\n", report.median_bias_p, report.iqr_bias_p);
  std::printf("  ATE_Y bias median %+.4f IQR %.4f\n", report.median_bias_y, report.iqr_bias_y);
  std::printf("  strata occupied: negative %.3f dissociative %.3f positive %.3f\n", report.stratum_occupied[0],
              report.stratum_occupied[1], report.stratum_occupied[2]);
  for (const auto& r : report.rows) {
    if (!r.ok) std::fprintf(stderr, "replicate %d failed: %s\n", r.replicate, r.error.c_str());
  }
  return report.success_rate() >= 0.9 ? kOk : kNumerical;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian semi-parametric principal stratification"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Run the Gibbs sampler on a dataset");
  fit_cmd->add_option("--config", fit.config, "JSON config (defaults when omitted)");
  fit_cmd->add_option("--data", fit.data, "CSV with id,t,p,y and covariates")->required();
  fit_cmd->add_option("--out", fit.out, "Output directory")->required();
  fit_cmd->add_flag("--save-params", fit.save_params, "Store full parameter traces");
  fit_cmd->add_option("--draws-format", fit.draws_format, "csv or binary");
  fit_cmd->add_flag("--inner-parallel", fit.inner_parallel, "Parallel per-unit updates");

  int sim_scenario = 0;
  std::uint64_t sim_seed = 1;
  std::string sim_out;
  std::optional<long> sim_n;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate one scenario replicate");
  sim_cmd->add_option("--scenario", sim_scenario)->required();
  sim_cmd->add_option("--seed", sim_seed);
  sim_cmd->add_option("--out", sim_out)->required();
  sim_cmd->add_option("--n", sim_n, "Override the scenario sample size");

  int bench_scenario = 0, bench_replicates = 20, bench_jobs = 1;
  std::uint64_t bench_seed = 1;
  std::string bench_config, bench_out;
  auto* bench_cmd = app.add_subcommand("benchmark", "Bias study over simulated replicates");
  bench_cmd->add_option("--scenario", bench_scenario)->required();
  bench_cmd->add_option("--replicates", bench_replicates);
  bench_cmd->add_option("--config", bench_config);
  bench_cmd->add_option("--out", bench_out)->required();
  bench_cmd->add_option("--jobs", bench_jobs, "Replicates run concurrently");
  bench_cmd->add_option("--seed", bench_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit);
    if (*sim_cmd) return cmd_simulate(sim_scenario, sim_seed, sim_out, sim_n);
    if (*bench_cmd) {
      return cmd_benchmark(bench_scenario, bench_replicates, bench_config, bench_out, bench_jobs, bench_seed);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfig;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kData;
  } catch (const ChainFailure& e) {
    std::fprintf(stderr, "numerical failure at %s\n", e.what());
    return kNumerical;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
