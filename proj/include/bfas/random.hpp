#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace bfas {

/// Seeded xoshiro256++ stream. Substreams are derived by hashing a key onto
/// (seed, stream_id), so a unit of work gets the same variates no matter
/// which worker runs it or in what order.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  /// Independent stream keyed by e.g. (sweep, step, unit).
  RngStream substream(std::initializer_list<std::uint64_t> key) const;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  Eigen::VectorXd normal_vector(Eigen::Index d);
  bool bernoulli(double prob) { return uniform() < prob; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::array<std::uint64_t, 4> s_{};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Counters for numerical repairs and fallbacks; every sampler move is Gibbs,
/// so these are the only bookkeeping a chain keeps.
struct NumericalEvents {
  long spd_jitter = 0;
  long imputation_fallback = 0;
  long prediction_fallback = 0;

  NumericalEvents& operator+=(const NumericalEvents& o) {
    spd_jitter += o.spd_jitter;
    imputation_fallback += o.imputation_fallback;
    prediction_fallback += o.prediction_fallback;
    return *this;
  }
};

enum class Support { positive, negative };

/// N(mean, 1) restricted to [0, inf) or (-inf, 0].
double sample_truncated_normal(double mean, Support support, RngStream& rng);

/// Gamma with the given shape and rate (mean shape/rate).
double sample_gamma(double shape, double rate, RngStream& rng);

/// log of a Gamma(shape, 1) variate; stays finite for tiny shapes.
double sample_log_gamma(double shape, RngStream& rng);

Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& concentration, RngStream& rng);

/// Draw from N(mean, covariance).
Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance, RngStream& rng,
                           NumericalEvents* events = nullptr, const std::string& context = {});

/// Gaussian given in canonical form: precision Q and linear term b, so
/// mean = Q^{-1} b and covariance = Q^{-1}.
struct CanonicalGaussian {
  Eigen::MatrixXd precision;
  Eigen::VectorXd linear;

  Eigen::VectorXd mean() const;
  Eigen::MatrixXd covariance() const;
};

/// Draw from a canonical-form Gaussian through the Cholesky factor of Q.
Eigen::VectorXd sample_canonical(const CanonicalGaussian& g, RngStream& rng, NumericalEvents* events = nullptr,
                                 const std::string& context = {});

}  // namespace bfas
