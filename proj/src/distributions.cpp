#include "pstrat/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pstrat {

namespace {

constexpr double kJitter = 1e-10;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::domain_error(std::string(what) + ": non-finite argument");
  }
}

// Standard normal restricted to [a, inf).
double std_normal_tail(RandomStream& rng, double a) {
  if (a < 0.0) {
    for (;;) {
      const double z = rng.normal();
      if (z >= a) return z;
    }
  }
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a - std::log(rng.uniform()) / rate;
    const double d = z - rate;
    if (std::log(rng.uniform()) <= -0.5 * d * d) return z;
  }
}

} // namespace

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
}

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double RandomStream::uniform() {
  // 53 random bits, offset by half a step: never 0, never 1.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() { return std_normal_(engine_); }

double RandomStream::gamma(double shape) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(engine_);
}

double normal_cdf(double z) {
  require_finite(z, "normal_cdf");
  return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0);
}

double log_normal_cdf(double z) {
  require_finite(z, "log_normal_cdf");
  if (z > 0.0) return std::log1p(-0.5 * std::erfc(z * std::numbers::sqrt2 / 2.0));
  if (z > -30.0) return std::log(0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0));
  // Mills-ratio asymptotic series; truncation error < 1e-12 relative here.
  const double r = 1.0 / (z * z);
  const double series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
  return -0.5 * z * z - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

std::pair<double, double> log_normal_cdf_pair(double z) {
  require_finite(z, "log_normal_cdf_pair");
  const double a = std::abs(z);
  if (a >= 30.0) {
    const double tail = log_normal_cdf(-a);
    return z > 0.0 ? std::pair{-std::exp(tail), tail} : std::pair{tail, -std::exp(tail)};
  }
  const double upper = 0.5 * std::erfc(a * std::numbers::sqrt2 / 2.0); // Phi(-|z|)
  const double lo = std::log(upper), hi = std::log1p(-upper);
  return z > 0.0 ? std::pair{hi, lo} : std::pair{lo, hi};
}

double normal_logpdf(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + d * d / variance);
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - top);
  return top + std::log(acc);
}

double sample_truncated_normal(RandomStream& rng, double mean, double sd, HalfLine side) {
  require_finite(mean, "sample_truncated_normal");
  if (!(sd > 0.0) || !std::isfinite(sd)) {
    throw std::domain_error("sample_truncated_normal: sd must be positive");
  }
  // Negative side is the mirror image of the positive side.
  const double m = side == HalfLine::Positive ? mean : -mean;
  for (;;) {
    const double draw = m + sd * std_normal_tail(rng, -m / sd);
    if (draw > 0.0 && std::isfinite(draw)) {
      return side == HalfLine::Positive ? draw : -draw;
    }
  }
}

double sample_inverse_gamma(RandomStream& rng, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
    throw std::domain_error("sample_inverse_gamma: shape and rate must be positive");
  }
  for (;;) {
    const double g = rng.gamma(shape);
    if (g > 0.0) {
      const double v = rate / g;
      if (std::isfinite(v)) return v;
    }
  }
}

Eigen::VectorXd sample_mvn(RandomStream& rng, const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& covariance) {
  const auto d = mean.size();
  if (covariance.rows() != d || covariance.cols() != d) {
    throw std::invalid_argument("sample_mvn: dimension mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> chol(covariance);
  if (chol.info() != Eigen::Success) {
    chol.compute(covariance + kJitter * Eigen::MatrixXd::Identity(d, d));
    if (chol.info() != Eigen::Success) {
      throw NumericalError("sample_mvn: covariance is not positive semi-definite");
    }
  }
  Eigen::VectorXd z(d);
  for (Eigen::Index k = 0; k < d; ++k) z[k] = rng.normal();
  return mean + chol.matrixL() * z;
}

std::size_t sample_categorical(RandomStream& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::domain_error("sample_categorical: weights must be finite and nonnegative");
    }
    total += w;
  }
  if (!(total > 0.0)) throw std::domain_error("sample_categorical: all weights are zero");
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] > 0.0) last_positive = k;
    acc += weights[k];
    if (u < acc) return k;
  }
  return last_positive;
}

std::size_t sample_categorical_log(RandomStream& rng, std::span<const double> log_weights) {
  if (log_weights.empty()) throw std::domain_error("sample_categorical_log: no weights");
  double top = -std::numeric_limits<double>::infinity();
  for (double lw : log_weights) {
    if (std::isnan(lw) || lw == std::numeric_limits<double>::infinity()) {
      throw std::domain_error("sample_categorical_log: invalid log-weight");
    }
    top = std::max(top, lw);
  }
  if (!std::isfinite(top)) throw std::domain_error("sample_categorical_log: all weights are zero");
  double total = 0.0;
  for (double lw : log_weights) total += std::exp(lw - top);
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < log_weights.size(); ++k) {
    const double w = std::exp(log_weights[k] - top);
    if (w > 0.0) last_positive = k;
    acc += w;
    if (u < acc) return k;
  }
  return last_positive;
}

GaussianPosterior::GaussianPosterior(const Eigen::MatrixXd& precision, const Eigen::VectorXd& rhs)
    : precision_(precision), chol_(precision) {
  if (chol_.info() != Eigen::Success) {
    precision_ += kJitter * Eigen::MatrixXd::Identity(precision.rows(), precision.cols());
    chol_.compute(precision_);
    if (chol_.info() != Eigen::Success) {
      throw NumericalError("posterior precision is not positive definite");
    }
  }
  mean_ = chol_.solve(rhs);
}

Eigen::MatrixXd GaussianPosterior::covariance() const {
  return chol_.solve(Eigen::MatrixXd::Identity(precision_.rows(), precision_.cols()));
}

Eigen::VectorXd GaussianPosterior::sample(RandomStream& rng) const {
  // Q = L L^T  =>  mean + L^{-T} z has covariance Q^{-1}.
  Eigen::VectorXd z(mean_.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = rng.normal();
  return mean_ + chol_.matrixU().solve(z);
}

} // namespace pstrat
