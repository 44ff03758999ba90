#pragma once

#include "pstrat/data_model.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace pstrat {

// Principal strata by the post-treatment gain P(1) - P(0):
//   positive      gain >= xi
//   negative      gain <= -xi
//   dissociative  otherwise
// Associative strata own the boundary points +-xi.
enum class Stratum : std::int8_t { Negative = 0, Dissociative = 1, Positive = 2 };

const char* stratum_name(Stratum s);

Stratum classify_gain(double gain, double xi);
std::vector<Stratum> classify_strata(const Eigen::VectorXd& P0, const Eigen::VectorXd& P1, double xi);

/// Principal causal effects of one posterior draw.
struct EffectsDraw {
  std::optional<double> eae_plus;   // mean Y(1)-Y(0) over the positive stratum
  std::optional<double> eae_minus;  // ... negative stratum
  std::optional<double> ede;        // ... dissociative stratum
  double ate_p = 0.0;
  double ate_y = 0.0;
  std::array<int, 3> counts{0, 0, 0}; // indexed by Stratum

  int n() const { return counts[0] + counts[1] + counts[2]; }
};

EffectsDraw effects_for_draw(const PotentialState& pot, double xi);

/// Effects with strata held fixed (used by the posterior-mean reporting mode).
EffectsDraw effects_for_strata(const PotentialState& pot, const std::vector<Stratum>& strata);

/// Parameter snapshot kept when full traces are requested.
struct ParamSnapshot {
  PostTreatmentParams post;
  MixtureParams mix;
};

/// Per-kept-iteration records of one chain.
struct PosteriorDraws {
  std::vector<int> iteration;
  std::vector<EffectsDraw> effects;
  std::vector<std::vector<Stratum>> strata;
  std::vector<std::array<std::vector<int>, 2>> occupancy;
  std::vector<ParamSnapshot> params;            // empty unless traces requested
  std::vector<Eigen::VectorXd> p_gain, y_gain;  // unit-level gains; PosteriorMean mode only

  std::size_t size() const { return effects.size(); }
};

struct EstimandSummary {
  std::string name;
  double mean = 0.0;
  double median = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
  double empty_frac = 0.0;
  std::size_t used = 0; // draws where the estimand was defined
};

struct PosteriorSummary {
  std::array<EstimandSummary, 5> rows; // EAE+, EAE-, EDE, ATE_P, ATE_Y
  std::vector<Stratum> modal;          // per-unit modal stratum
  Eigen::MatrixXd label_freq;          // n x 3 posterior label frequencies
  std::array<double, 3> modal_share{0, 0, 0};
  StrataMode mode = StrataMode::PerDraw;
};

/// Type-7 empirical quantile (linear interpolation between order statistics).
double quantile_type7(std::vector<double> values, double prob);

/// Per-estimand posterior mean, median and equal-tailed 95% interval, with
/// empty-stratum draws excluded and counted. Modal stratum ties go to
/// dissociative, then negative.
///
/// In PosteriorMean mode strata are fixed once from the posterior-mean gains
/// (requires p_gain / y_gain in the draws) and effects are recomputed per draw.
PosteriorSummary summarize_posterior(const PosteriorDraws& draws,
                                     StrataMode mode = StrataMode::PerDraw, double xi = 0.01);

void write_summary_csv(std::ostream& out, const PosteriorSummary& summary);
std::string format_summary_table(const PosteriorSummary& summary);

/// Fixed-format number used in every CSV the project writes.
std::string format_number(double v);

} // namespace pstrat
