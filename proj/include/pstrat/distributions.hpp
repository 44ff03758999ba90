#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

namespace pstrat {

/// Thrown when a matrix factorization fails even after jitter.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Child seed for worker/replicate/block `index` of a parent seed.
///   child = mix64(mix64(seed) ^ (0x9E3779B97F4A7C15 * (index + 1)))
/// Used for every seed split in the project so results never depend on
/// how many threads run the work.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Seeded pseudo-random stream. Not thread-safe; one per worker.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  /// Gamma(shape, rate = 1).
  double gamma(double shape);
  bool bernoulli(double p) { return uniform() < p; }

  RandomStream split(std::uint64_t index) const {
    return RandomStream(derive_seed(seed_, index));
  }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> std_normal_{0.0, 1.0};
};

// ---------------------------------------------------------------------------
// Densities and distribution functions

/// Standard normal CDF. Throws std::domain_error on non-finite input.
double normal_cdf(double z);

/// log Phi(z), accurate in both tails.
double log_normal_cdf(double z);

/// {log Phi(z), log Phi(-z)} sharing one erfc evaluation.
std::pair<double, double> log_normal_cdf_pair(double z);

double normal_logpdf(double x, double mean, double variance);

double log_sum_exp(std::span<const double> values);

// ---------------------------------------------------------------------------
// Samplers

enum class HalfLine { Positive, Negative };

/// N(mean, sd^2) conditioned on (0, inf) or (-inf, 0).
///
/// Standardized bound a = -mean/sd. For a < 0 plain rejection from the
/// untruncated normal is used (acceptance >= 1/2). For a >= 0, tail
/// rejection with an exponential proposal of rate (a + sqrt(a^2+4))/2,
/// which stays efficient however far the mean lies outside the region.
double sample_truncated_normal(RandomStream& rng, double mean, double sd, HalfLine side);

double sample_inverse_gamma(RandomStream& rng, double shape, double rate);

/// Draw from N(mean, covariance). Falls back to covariance + 1e-10 I when the
/// plain Cholesky fails; throws NumericalError if that also fails.
Eigen::VectorXd sample_mvn(RandomStream& rng, const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& covariance);

/// Index drawn with probability weights[m] / sum(weights).
std::size_t sample_categorical(RandomStream& rng, std::span<const double> weights);

/// Same, with weights given as logs (log-sum-exp normalized).
std::size_t sample_categorical_log(RandomStream& rng, std::span<const double> log_weights);

/// Gaussian in information form: precision Q and mean Q^{-1} b.
/// Conjugate regression updates are all built on this.
class GaussianPosterior {
public:
  GaussianPosterior(const Eigen::MatrixXd& precision, const Eigen::VectorXd& rhs);

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& precision() const { return precision_; }
  Eigen::MatrixXd covariance() const;
  Eigen::VectorXd sample(RandomStream& rng) const;

private:
  Eigen::MatrixXd precision_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd mean_;
};

struct InverseGammaParams {
  double shape;
  double rate;
  double mean() const { return rate / (shape - 1.0); }
  double sample(RandomStream& rng) const { return sample_inverse_gamma(rng, shape, rate); }
};

/// Conjugate update of a Gaussian variance with an InvGamma(shape, rate)
/// prior: InvGamma(shape + count/2, rate + ssr/2).
inline InverseGammaParams variance_posterior(double shape, double rate, double count, double ssr) {
  return {shape + 0.5 * count, rate + 0.5 * ssr};
}

} // namespace pstrat
