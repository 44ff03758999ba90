#include "pstrat/estimands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pstrat {

const char* stratum_name(Stratum s) {
  switch (s) {
    case Stratum::Negative: return "negative";
    case Stratum::Dissociative: return "dissociative";
    case Stratum::Positive: return "positive";
  }
  return "?";
}

Stratum classify_gain(double gain, double xi) {
  if (gain >= xi) return Stratum::Positive;
  if (gain <= -xi) return Stratum::Negative;
  return Stratum::Dissociative;
}

std::vector<Stratum> classify_strata(const Eigen::VectorXd& P0, const Eigen::VectorXd& P1, double xi) {
  if (!(xi > 0.0)) throw std::domain_error("classify_strata: xi must be positive");
  std::vector<Stratum> out(P0.size());
  for (Eigen::Index i = 0; i < P0.size(); ++i) out[i] = classify_gain(P1[i] - P0[i], xi);
  return out;
}

EffectsDraw effects_for_strata(const PotentialState& pot, const std::vector<Stratum>& strata) {
  EffectsDraw e;
  std::array<double, 3> sums{0.0, 0.0, 0.0};
  double sum_p = 0.0, sum_y = 0.0;
  const Eigen::Index n = pot.P[0].size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double gy = pot.Y[1][i] - pot.Y[0][i];
    const auto k = static_cast<std::size_t>(strata[i]);
    sums[k] += gy;
    ++e.counts[k];
    sum_p += pot.P[1][i] - pot.P[0][i];
    sum_y += gy;
  }
  auto mean_of = [&](Stratum s) -> std::optional<double> {
    const auto k = static_cast<std::size_t>(s);
    if (e.counts[k] == 0) return std::nullopt;
    return sums[k] / e.counts[k];
  };
  e.eae_plus = mean_of(Stratum::Positive);
  e.eae_minus = mean_of(Stratum::Negative);
  e.ede = mean_of(Stratum::Dissociative);
  e.ate_p = sum_p / static_cast<double>(n);
  e.ate_y = sum_y / static_cast<double>(n);
  return e;
}

EffectsDraw effects_for_draw(const PotentialState& pot, double xi) {
  return effects_for_strata(pot, classify_strata(pot.P[0], pot.P[1], xi));
}

double quantile_type7(std::vector<double> values, double prob) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

EstimandSummary summarize_values(std::string name, const std::vector<double>& values,
                                 std::size_t total) {
  EstimandSummary s;
  s.name = std::move(name);
  s.used = values.size();
  s.empty_frac = total ? 1.0 - static_cast<double>(values.size()) / static_cast<double>(total) : 0.0;
  if (values.empty()) {
    s.mean = s.median = s.q025 = s.q975 = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double acc = 0.0;
  for (double v : values) acc += v;
  s.mean = acc / static_cast<double>(values.size());
  s.median = quantile_type7(values, 0.5);
  s.q025 = quantile_type7(values, 0.025);
  s.q975 = quantile_type7(values, 0.975);
  return s;
}

Stratum modal_label(const double* freq) {
  // Preference on ties: dissociative, negative, positive.
  Stratum best = Stratum::Dissociative;
  double top = freq[1];
  if (freq[0] > top) { best = Stratum::Negative; top = freq[0]; }
  if (freq[2] > top) best = Stratum::Positive;
  return best;
}

} // namespace

PosteriorSummary summarize_posterior(const PosteriorDraws& draws, StrataMode mode, double xi) {
  PosteriorSummary out;
  out.mode = mode;
  const std::size_t D = draws.size();
  if (D == 0) throw std::invalid_argument("summarize_posterior: no draws");

  std::vector<EffectsDraw> effects;
  std::vector<std::vector<Stratum>> strata;
  if (mode == StrataMode::PosteriorMean) {
    if (draws.p_gain.size() != D || draws.y_gain.size() != D) {
      throw std::invalid_argument("summarize_posterior: posterior-mean mode needs unit-level gains");
    }
    Eigen::VectorXd mean_gain = Eigen::VectorXd::Zero(draws.p_gain[0].size());
    for (const auto& g : draws.p_gain) mean_gain += g;
    mean_gain /= static_cast<double>(D);
    std::vector<Stratum> fixed(mean_gain.size());
    for (Eigen::Index i = 0; i < mean_gain.size(); ++i) fixed[i] = classify_gain(mean_gain[i], xi);
    for (std::size_t d = 0; d < D; ++d) {
      // Only gains matter for stratum effects: rebuild a potential pair from them.
      PotentialState pot;
      const Eigen::Index n = mean_gain.size();
      pot.P[0] = Eigen::VectorXd::Zero(n);
      pot.P[1] = draws.p_gain[d];
      pot.Y[0] = Eigen::VectorXd::Zero(n);
      pot.Y[1] = draws.y_gain[d];
      effects.push_back(effects_for_strata(pot, fixed));
      strata.push_back(fixed);
    }
  } else {
    effects = draws.effects;
    strata = draws.strata;
  }

  std::array<std::vector<double>, 5> vals;
  for (const auto& e : effects) {
    if (e.eae_plus) vals[0].push_back(*e.eae_plus);
    if (e.eae_minus) vals[1].push_back(*e.eae_minus);
    if (e.ede) vals[2].push_back(*e.ede);
    vals[3].push_back(e.ate_p);
    vals[4].push_back(e.ate_y);
  }
  const std::array<const char*, 5> names{"EAE+", "EAE-", "EDE", "ATE_P", "ATE_Y"};
  for (std::size_t k = 0; k < 5; ++k) out.rows[k] = summarize_values(names[k], vals[k], D);

  if (!strata.empty() && !strata[0].empty()) {
    const auto n = static_cast<Eigen::Index>(strata[0].size());
    out.label_freq = Eigen::MatrixXd::Zero(n, 3);
    for (const auto& s : strata) {
      for (Eigen::Index i = 0; i < n; ++i) out.label_freq(i, static_cast<Eigen::Index>(s[i])) += 1.0;
    }
    out.label_freq /= static_cast<double>(strata.size());
    out.modal.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double f[3] = {out.label_freq(i, 0), out.label_freq(i, 1), out.label_freq(i, 2)};
      out.modal[i] = modal_label(f);
      out.modal_share[static_cast<std::size_t>(out.modal[i])] += 1.0 / static_cast<double>(n);
    }
  }
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_summary_csv(std::ostream& out, const PosteriorSummary& summary) {
  out << "estimand,mean,median,q2.5,q97.5,empty_frac\r\n";
  for (const auto& r : summary.rows) {
    out << r.name << ',' << format_number(r.mean) << ',' << format_number(r.median) << ','
        << format_number(r.q025) << ',' << format_number(r.q975) << ','
        << format_number(r.empty_frac) << "\r\n";
  }
}

std::string format_summary_table(const PosteriorSummary& summary) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %12s %12s %12s %12s %10s\n", "estimand", "mean", "median",
                "q2.5", "q97.5", "empty_frac");
  out << line;
  for (const auto& r : summary.rows) {
    std::snprintf(line, sizeof line, "%-8s %12.5f %12.5f %12.5f %12.5f %10.4f\n", r.name.c_str(),
                  r.mean, r.median, r.q025, r.q975, r.empty_frac);
    out << line;
  }
  if (!summary.modal.empty()) {
    std::snprintf(line, sizeof line,
                  "\nmodal strata: negative %.1f%%  dissociative %.1f%%  positive %.1f%%\n",
                  100.0 * summary.modal_share[0], 100.0 * summary.modal_share[1],
                  100.0 * summary.modal_share[2]);
    out << line;
  }
  return out.str();
}

} // namespace pstrat
