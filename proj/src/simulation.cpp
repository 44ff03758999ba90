#include "pstrat/simulation.hpp"

#include "pstrat/estimands.hpp"
#include "pstrat/gibbs.hpp"
#include "pstrat/io.hpp"

#include <chrono>
#include <cmath>
#include <mutex>
#include <ostream>
#include <stdexcept>

namespace pstrat {

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

Eigen::MatrixXd rows(std::initializer_list<std::initializer_list<double>> r) {
  const auto nr = static_cast<Eigen::Index>(r.size());
  const auto nc = static_cast<Eigen::Index>(r.begin()->size());
  Eigen::MatrixXd out(nr, nc);
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double x : row) out(i, j++) = x;
    ++i;
  }
  return out;
}

// Feature helpers; `j` is the 1-based covariate index.
Feature raw(int j) {
  return {"x" + std::to_string(j), [j](const Eigen::VectorXd& x) { return x[j - 1]; }};
}
Feature abs_shift(int j, double shift, double scale) {
  return {"abs", [=](const Eigen::VectorXd& x) { return scale * std::abs(x[j - 1] + shift); }};
}
Feature exp_scaled(int j, double rate) {
  return {"exp", [=](const Eigen::VectorXd& x) { return std::exp(rate * x[j - 1]); }};
}

ScenarioSpec scenario1() {
  ScenarioSpec s;
  s.id = 1;
  s.n = 500;
  s.covariates = {{CovariateDist::Kind::Bernoulli, 0.4}, {CovariateDist::Kind::Bernoulli, 0.6},
                  {CovariateDist::Kind::Normal, 1.0},    {CovariateDist::Kind::Normal, 1.0},
                  {CovariateDist::Kind::Normal, 1.0}};
  s.treatment_coef = vec({0.4, 0.4, 0.0, 0.15, 0.0});
  s.post_covariates = {0, 1, 2, 3, 4};
  s.beta[0] = vec({1, 2, 3, 0.5, 0.1, 0.3});
  s.beta[1] = vec({1, 4, 5, 0.5, 0.4, 0.2});
  s.sigma2_p = {1.0, 1.0};
  for (int arm = 0; arm < 2; ++arm) {
    s.outcome_features[arm] = {raw(1), raw(2), raw(3), abs_shift(4, 0.0, -0.5), exp_scaled(5, 0.5)};
  }
  s.eta[0] = rows({{10, 1.5, 1.3, 2, 2, 0.3, 1.8},
                   {1, 1.1, 0.75, 1, 0.2, 0.3, 0.2},
                   {-5, 0.25, 0.1, 1, 0.2, 0.1, -1}});
  s.sigma2_y[0] = vec({1, 2, 1.5});
  s.eta[1] = rows({{3, 1, 1, 1, 0.3, 0.3, 1.5},
                   {0.5, 0.5, 0.5, 0.5, 0.3, 0.3, 0.6},
                   {-2, 0.1, 0.1, 0.1, 0.4, 0.3, -0.6}});
  s.sigma2_y[1] = vec({2, 0.5, 1});
  return s;
}

std::vector<Feature> later_features(int arm, bool extended) {
  std::vector<Feature> f{raw(3), raw(4), raw(5), raw(6)};
  if (arm == 0) {
    f.push_back(abs_shift(7, 2.0, 1.0));
    f.push_back(exp_scaled(8, 0.2));
    f.push_back(abs_shift(9, 0.0, -0.1));
    f.push_back(exp_scaled(10, 0.1));
  } else {
    f.push_back(abs_shift(7, 1.5, 1.0));
    f.push_back(exp_scaled(8, 0.1));
    f.push_back(abs_shift(9, 0.0, -0.3));
    f.push_back(exp_scaled(10, 0.2));
  }
  if (extended) {
    for (int j = 11; j <= 14; ++j) f.push_back(raw(j));
  }
  return f;
}

ScenarioSpec scenario2() {
  ScenarioSpec s;
  s.id = 2;
  s.n = 500;
  s.covariates = {{CovariateDist::Kind::Bernoulli, 0.4}, {CovariateDist::Kind::Bernoulli, 0.6}};
  for (int j = 3; j <= 10; ++j) s.covariates.push_back({CovariateDist::Kind::Normal, j == 4 ? 0.5 : 1.0});
  s.treatment_coef = Eigen::VectorXd::Zero(10);
  s.treatment_coef[0] = 0.2;
  s.treatment_coef[1] = 0.4;
  s.treatment_coef[5] = 0.1;
  s.post_covariates = {2, 3, 4, 5, 6, 7, 8, 9};
  s.beta[0] = vec({-1, 0.5, 1.5, 0.2, 0.5, 0.7, 1, -0.5, -1.2});
  s.beta[1] = vec({-0.5, 1, 1.8, 0.2, 0.5, 0.7, 1.2, -0.3, -1});
  s.sigma2_p = {1.0, 1.0};
  for (int arm = 0; arm < 2; ++arm) s.outcome_features[arm] = later_features(arm, false);
  // The tabulated rows stop before the post-treatment term; its coefficient
  // is taken from the Scenario 3 rows, which share every other leading entry.
  s.eta[0] = rows({{10, 1.5, 1.3, 0.1, 0.4, 0.1, 0.2, -0.4, 0.3, 2},
                   {2, 1, 1.1, 0.75, 0.1, 0.1, 0.2, 0.2, -0.4, 1},
                   {-5, 0.25, 0.1, 0.5, 0.1, 0.2, 0.4, -0.4, -0.3, -1}});
  s.eta[1] = rows({{10, 1, 1, 0.6, 0.1, 0.1, 0.2, -0.4, 0.3, 2.5},
                   {2.5, 0, 0.8, 0.5, 0.5, 0.1, 0.2, 0.4, -0.4, 0.5},
                   {-5, 0.5, 0.25, 0.2, 0.1, 0.2, 0.7, -0.4, 0.4, -2}});
  s.sigma2_y[0] = vec({0.5, 0.5, 0.5});
  s.sigma2_y[1] = vec({0.5, 0.5, 0.5});
  return s;
}

ScenarioSpec scenario3() {
  ScenarioSpec s;
  s.id = 3;
  s.n = 300;
  s.covariates = {{CovariateDist::Kind::Bernoulli, 0.4}, {CovariateDist::Kind::Bernoulli, 0.6}};
  // Twelve Gaussian covariates with variances evenly spaced over [0.25, 1].
  for (int j = 3; j <= 14; ++j) {
    s.covariates.push_back({CovariateDist::Kind::Normal, 0.25 + 0.75 * (j - 3) / 11.0});
  }
  s.treatment_coef = Eigen::VectorXd::Zero(14);
  s.treatment_coef[0] = 0.2;
  s.treatment_coef[1] = 0.4;
  s.treatment_coef[5] = 0.1;
  for (int j = 2; j < 14; ++j) s.post_covariates.push_back(j);
  s.beta[0] = vec({-1, 0.5, 1.5, 0.2, 0.5, 0.7, 1, -0.5, -1.2, 0.1, 0.1, 0.1, 0.1});
  s.beta[1] = vec({-0.5, 1, 1.8, 0.2, 0.5, 0.7, 1.2, -0.3, -1, 0.1, 0.1, 0.1, 0.1});
  s.sigma2_p = {0.5, 0.5};
  for (int arm = 0; arm < 2; ++arm) s.outcome_features[arm] = later_features(arm, true);
  s.eta[0] = rows({{10, 1.5, 1.3, 0.1, 0.4, 0.1, 0.2, -0.4, 0.3, 0.1, 0.1, 0.1, 0.1, 2},
                   {2, 1, 1.1, 0.75, 0.1, 0.1, 0.2, 0.2, -0.4, 0.1, 0.1, 0.1, 0.1, 1},
                   {-5, 0.25, 0.1, 0.5, 0.1, 0.2, 0.4, -0.4, -0.3, 0.1, 0.1, 0.1, 0.1, -1}});
  s.eta[1] = rows({{10, 1, 1, 0.6, 0.1, 0.1, 0.2, -0.4, 0.3, 0.1, 0.1, 0.1, 0.1, 2.5},
                   {2.5, 0, 0.8, 0.5, 0.5, 0.1, 0.2, 0.4, -0.4, 0.1, 0.1, 0.1, 0.1, 0.5},
                   {-5, 0.5, 0.25, 0.2, 0.1, 0.2, 0.7, -0.4, 0.4, 0.1, 0.1, 0.1, 0.1, -2}});
  s.sigma2_y[0] = vec({0.5, 0.5, 0.5});
  s.sigma2_y[1] = vec({0.5, 0.5, 0.5});
  return s;
}

double draw_covariate(const CovariateDist& c, RandomStream& rng) {
  if (c.kind == CovariateDist::Kind::Bernoulli) return rng.bernoulli(c.param) ? 1.0 : 0.0;
  return rng.normal(0.0, std::sqrt(c.param));
}

void fill_dataset(SimReplicate& rep, Eigen::MatrixXd X, const std::vector<int>& T) {
  const Eigen::Index n = X.rows();
  rep.data.X = std::move(X);
  rep.data.T = T;
  rep.data.P.resize(n);
  rep.data.Y.resize(n);
  rep.data.ids.resize(n);
  rep.data.covariate_names.clear();
  for (Eigen::Index j = 0; j < rep.data.X.cols(); ++j) rep.data.covariate_names.push_back("x" + std::to_string(j + 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    rep.data.ids[i] = std::to_string(i + 1);
    rep.data.P[i] = rep.truth.P[T[i]][i];
    rep.data.Y[i] = rep.truth.Y[T[i]][i];
  }
  rep.ate_p = sample_ate_p(rep.truth);
  rep.ate_y = sample_ate_y(rep.truth);
}

} // namespace

ScenarioSpec scenario(int id) {
  switch (id) {
    case 1: return scenario1();
    case 2: return scenario2();
    case 3: return scenario3();
    default: throw std::invalid_argument("unknown scenario " + std::to_string(id) + " (expected 1, 2 or 3)");
  }
}

int scenario_cluster(double x1, double x2) {
  if (x1 == 1.0 && x2 == 1.0) return 0;
  if (x1 == 1.0 && x2 == 0.0) return 1;
  return 2;
}

double expit(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double sample_ate_p(const PotentialState& pot) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < pot.P[0].size(); ++i) acc += pot.P[1][i] - pot.P[0][i];
  return acc / static_cast<double>(pot.P[0].size());
}

double sample_ate_y(const PotentialState& pot) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < pot.Y[0].size(); ++i) acc += pot.Y[1][i] - pot.Y[0][i];
  return acc / static_cast<double>(pot.Y[0].size());
}

SimReplicate generate_replicate(const ScenarioSpec& spec, std::uint64_t seed) {
  RandomStream rng(seed);
  const Eigen::Index n = spec.n, q = spec.q();
  Eigen::MatrixXd X(n, q);
  std::vector<int> T(n);
  SimReplicate rep;
  rep.cluster.resize(n);
  for (int arm = 0; arm < 2; ++arm) {
    rep.truth.P[arm].resize(n);
    rep.truth.Y[arm].resize(n);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) X(i, j) = draw_covariate(spec.covariates[j], rng);
    const Eigen::VectorXd x = X.row(i).transpose();
    T[i] = rng.bernoulli(expit(x.dot(spec.treatment_coef))) ? 1 : 0;
    for (int arm = 0; arm < 2; ++arm) {
      double mean = spec.beta[arm][0];
      for (std::size_t k = 0; k < spec.post_covariates.size(); ++k) {
        mean += spec.beta[arm][static_cast<Eigen::Index>(k) + 1] * x[spec.post_covariates[k]];
      }
      rep.truth.P[arm][i] = rng.normal(mean, std::sqrt(spec.sigma2_p[arm]));
    }
    const int m = scenario_cluster(x[0], x[1]);
    rep.cluster[i] = m;
    const double p0 = rep.truth.P[0][i], p1 = rep.truth.P[1][i];
    for (int arm = 0; arm < 2; ++arm) {
      const auto& feats = spec.outcome_features[arm];
      const auto& coef = spec.eta[arm];
      double mean = coef(m, 0);
      for (std::size_t k = 0; k < feats.size(); ++k) {
        mean += coef(m, static_cast<Eigen::Index>(k) + 1) * feats[k].eval(x);
      }
      mean += coef(m, coef.cols() - 1) * (arm == 0 ? p0 : p1 - p0);
      rep.truth.Y[arm][i] = rng.normal(mean, std::sqrt(spec.sigma2_y[arm][m]));
    }
  }
  fill_dataset(rep, std::move(X), T);
  return rep;
}

SimReplicate generate_model_class_replicate(const ModelClassSpec& spec, std::uint64_t seed) {
  RandomStream rng(seed);
  const Eigen::Index n = spec.n, q = spec.q;
  Eigen::MatrixXd X(n, q);
  std::vector<int> T(n);
  SimReplicate rep;
  rep.cluster.assign(n, 0);
  for (int arm = 0; arm < 2; ++arm) {
    rep.truth.P[arm].resize(n);
    rep.truth.Y[arm].resize(n);
  }
  Eigen::VectorXd xp(q + 1), d(q + 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    xp[0] = 1.0;
    for (Eigen::Index j = 0; j < q; ++j) X(i, j) = xp[j + 1] = rng.normal();
    T[i] = rng.bernoulli(spec.treat_prob) ? 1 : 0;
    for (int arm = 0; arm < 2; ++arm) {
      rep.truth.P[arm][i] = rng.normal(spec.beta[arm].dot(xp), std::sqrt(spec.sigma2_p[arm]));
    }
    const double p0 = rep.truth.P[0][i], p1 = rep.truth.P[1][i];
    d.head(q + 1) = xp;
    d[q + 1] = p0;
    rep.truth.Y[0][i] = rng.normal(spec.eta[0].dot(d), std::sqrt(spec.sigma2_y[0]));
    d[q + 1] = p1 - p0;
    rep.truth.Y[1][i] = rng.normal(spec.eta[1].dot(d), std::sqrt(spec.sigma2_y[1]));
  }
  fill_dataset(rep, std::move(X), T);
  return rep;
}

double BenchmarkReport::success_rate() const {
  return rows.empty() ? 0.0 : 1.0 - static_cast<double>(failures) / static_cast<double>(rows.size());
}

BenchmarkReport run_benchmark(const ScenarioSpec& spec, int replicates, const FitConfig& config,
                              std::uint64_t base_seed, Executor& exec) {
  if (replicates < 2) throw std::invalid_argument("run_benchmark: need at least 2 replicates");
  config.validate();
  const auto wall_start = std::chrono::steady_clock::now();
  BenchmarkReport report;
  report.scenario = spec.id;
  report.rows.resize(replicates);
  std::vector<std::array<std::size_t, 3>> occupied_counts(replicates, {0, 0, 0});

  exec.run(static_cast<std::size_t>(replicates), [&](std::size_t r) {
    const auto start = std::chrono::steady_clock::now();
    BenchmarkRow& row = report.rows[r];
    row.replicate = static_cast<int>(r);
    row.seed = derive_seed(base_seed, r);
    try {
      const SimReplicate rep = generate_replicate(spec, derive_seed(row.seed, 0));
      FitConfig fit = config;
      fit.sampler.seed = derive_seed(row.seed, 1);
      const ModelData md = make_model_data(validated(rep.data), fit.sampler.standardize,
                                           fit.sampler.treated_design);
      const ChainResult chain = run_chain(md, fit);
      const auto& draws = chain.draws;
      row.draws = draws.size();
      double sp = 0.0, sy = 0.0;
      for (const auto& e : draws.effects) {
        sp += e.ate_p;
        sy += e.ate_y;
        const std::array<std::optional<double>, 3> by{e.eae_minus, e.ede, e.eae_plus};
        double weighted = 0.0;
        for (int k = 0; k < 3; ++k) {
          if (e.counts[k] > 0) {
            ++occupied_counts[r][k];
            weighted += e.counts[k] * *by[k];
          }
        }
        row.identity_max_error = std::max(row.identity_max_error, std::abs(weighted - e.n() * e.ate_y));
      }
      const auto D = static_cast<double>(draws.size());
      for (int k = 0; k < 3; ++k) row.stratum_occupied[k] = occupied_counts[r][k] / D;
      // Truth recomputed from the stored potentials.
      row.ate_p_true = sample_ate_p(rep.truth);
      row.ate_y_true = sample_ate_y(rep.truth);
      row.ate_p_hat = sp / D;
      row.ate_y_hat = sy / D;
      row.bias_p = row.ate_p_hat - row.ate_p_true;
      row.bias_y = row.ate_y_hat - row.ate_y_true;
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  std::vector<double> bp, by;
  std::array<double, 3> occ{0, 0, 0};
  double total_draws = 0.0;
  for (std::size_t r = 0; r < report.rows.size(); ++r) {
    const auto& row = report.rows[r];
    if (!row.ok) {
      ++report.failures;
      continue;
    }
    bp.push_back(row.bias_p);
    by.push_back(row.bias_y);
    for (int k = 0; k < 3; ++k) occ[k] += static_cast<double>(occupied_counts[r][k]);
    total_draws += static_cast<double>(row.draws);
    report.identity_max_error = std::max(report.identity_max_error, row.identity_max_error);
  }
  const double na = std::nan("");
  report.median_bias_p = bp.empty() ? na : quantile_type7(bp, 0.5);
  report.median_bias_y = by.empty() ? na : quantile_type7(by, 0.5);
  report.iqr_bias_p = bp.empty() ? na : quantile_type7(bp, 0.75) - quantile_type7(bp, 0.25);
  report.iqr_bias_y = by.empty() ? na : quantile_type7(by, 0.75) - quantile_type7(by, 0.25);
  for (int k = 0; k < 3; ++k) report.stratum_occupied[k] = total_draws > 0 ? occ[k] / total_draws : na;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return report;
}

void write_benchmark_csv(std::ostream& out, const BenchmarkReport& report) {
  write_csv_row(out, {"scenario", "replicate", "seed", "ate_p_true", "ate_p_hat", "ate_y_true", "ate_y_hat",
                      "bias_p", "bias_y"});
  const double na = std::nan("");
  for (const auto& r : report.rows) {
    write_csv_row(out, {std::to_string(report.scenario), std::to_string(r.replicate), std::to_string(r.seed),
                        format_number(r.ok ? r.ate_p_true : na), format_number(r.ok ? r.ate_p_hat : na),
                        format_number(r.ok ? r.ate_y_true : na), format_number(r.ok ? r.ate_y_hat : na),
                        format_number(r.ok ? r.bias_p : na), format_number(r.ok ? r.bias_y : na)});
  }
}

void write_benchmark_summary(std::ostream& out, const BenchmarkReport& report) {
  write_csv_row(out, {"statistic", "value"});
  auto put = [&](const std::string& k, double v) { write_csv_row(out, {k, format_number(v)}); };
  put("scenario", report.scenario);
  put("replicates", static_cast<double>(report.rows.size()));
  put("failures", report.failures);
  put("median_bias_ate_p", report.median_bias_p);
  put("iqr_bias_ate_p", report.iqr_bias_p);
  put("median_bias_ate_y", report.median_bias_y);
  put("iqr_bias_ate_y", report.iqr_bias_y);
  put("occupied_frac_negative", report.stratum_occupied[0]);
  put("occupied_frac_dissociative", report.stratum_occupied[1]);
  put("occupied_frac_positive", report.stratum_occupied[2]);
  put("identity_max_error", report.identity_max_error);
  put("wall_seconds", report.wall_seconds);
  for (const auto& r : report.rows) {
    if (!r.ok) write_csv_row(out, {"failed_replicate_" + std::to_string(r.replicate), r.error});
  }
}

void write_benchmark_timing(std::ostream& out, const BenchmarkReport& report) {
  write_csv_row(out, {"replicate", "status", "seconds", "draws", "error"});
  for (const auto& r : report.rows) {
    write_csv_row(out, {std::to_string(r.replicate), r.ok ? "ok" : "failed", format_number(r.seconds),
                        std::to_string(r.draws), r.error});
  }
}

void write_truth_csv(std::ostream& out, const SimReplicate& rep) {
  write_csv_row(out, {"id", "p0", "p1", "y0", "y1", "cluster"});
  for (Eigen::Index i = 0; i < rep.truth.P[0].size(); ++i) {
    write_csv_row(out, {rep.data.ids[i], format_number(rep.truth.P[0][i]), format_number(rep.truth.P[1][i]),
                        format_number(rep.truth.Y[0][i]), format_number(rep.truth.Y[1][i]),
                        std::to_string(rep.cluster[i] + 1)});
  }
}

} // namespace pstrat
