#include "bfas/random.hpp"

#include <bit>
#include <cmath>

#include <fmt/format.h>

#include "bfas/errors.hpp"

namespace bfas {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  std::uint64_t x = h ^ (v * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
  return splitmix64(x);
}

// Rejection thresholds for the one-sided standard normal tail draw.
constexpr double kTailSwitch = 0.47;

// Standard normal restricted to [lower, inf).
double standard_tail(double lower, RngStream& rng) {
  if (lower <= kTailSwitch) {
    for (;;) {
      const double t = rng.normal();
      if (t >= lower) return t;
    }
  }
  // exponential proposal with the optimal rate for this bound
  const double rate = 0.5 * (lower + std::sqrt(lower * lower + 4.0));
  for (;;) {
    const double t = lower - std::log(rng.uniform()) / rate;
    const double d = t - rate;
    if (std::log(rng.uniform()) <= -0.5 * d * d) return t;
  }
}

// Marsaglia-Tsang for shape >= 1; returns log of the Gamma(shape, 1) draw.
double log_gamma_shape_ge1(double shape, RngStream& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return std::log(d) + std::log(v);
  }
}

Eigen::LLT<Eigen::MatrixXd> factor_with_jitter(const Eigen::MatrixXd& m, NumericalEvents* events,
                                               const std::string& context) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() == Eigen::Success) return llt;
  const double jitter = 1e-10 * m.trace() / double(m.rows());
  Eigen::MatrixXd repaired = m;
  for (int attempt = 0; attempt < 3; ++attempt) {
    repaired.diagonal().array() += jitter;
    if (events) ++events->spd_jitter;
    llt.compute(repaired);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw NumericalError(fmt::format("matrix not positive definite after jitter{}{}", context.empty() ? "" : ": ", context));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {
  std::uint64_t x = hash_combine(hash_combine(0x6A09E667F3BCC908ULL, seed), stream_id);
  for (auto& w : s_) w = splitmix64(x);
}

RngStream RngStream::substream(std::initializer_list<std::uint64_t> key) const {
  std::uint64_t h = hash_combine(seed_, 0xA0761D6478BD642FULL);
  for (std::uint64_t k : key) h = hash_combine(h, k);
  return RngStream(h, stream_id_);
}

RngStream::result_type RngStream::operator()() {
  const std::uint64_t result = std::rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() { return (double((*this)() >> 11) + 0.5) * 0x1.0p-53; }

double RngStream::normal() { return normal_(*this); }

Eigen::VectorXd RngStream::normal_vector(Eigen::Index d) {
  Eigen::VectorXd v(d);
  for (Eigen::Index k = 0; k < d; ++k) v[k] = normal();
  return v;
}

double sample_truncated_normal(double mean, Support support, RngStream& rng) {
  if (support == Support::positive) return mean + standard_tail(-mean, rng);
  return mean - standard_tail(mean, rng);
}

double sample_log_gamma(double shape, RngStream& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) throw DomainError(fmt::format("gamma shape must be positive, got {}", shape));
  if (shape >= 1.0) return log_gamma_shape_ge1(shape, rng);
  // boost a shape+1 draw by U^(1/shape)
  const double boosted = log_gamma_shape_ge1(shape + 1.0, rng);
  return boosted + std::log(rng.uniform()) / shape;
}

double sample_gamma(double shape, double rate, RngStream& rng) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw DomainError(fmt::format("gamma rate must be positive, got {}", rate));
  return std::exp(sample_log_gamma(shape, rng)) / rate;
}

Eigen::VectorXd sample_dirichlet(const Eigen::VectorXd& concentration, RngStream& rng) {
  const auto d = concentration.size();
  if (d == 0) throw DomainError("Dirichlet concentration is empty");
  for (Eigen::Index k = 0; k < d; ++k)
    if (!(concentration[k] > 0.0)) throw DomainError(fmt::format("Dirichlet concentration {} is not positive", k));
  if (d == 1) return Eigen::VectorXd::Ones(1);
  Eigen::VectorXd logs(d);
  for (Eigen::Index k = 0; k < d; ++k) logs[k] = sample_log_gamma(concentration[k], rng);
  Eigen::VectorXd out = (logs.array() - logs.maxCoeff()).exp();
  out /= out.sum();
  return out;
}

Eigen::VectorXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& covariance, RngStream& rng,
                           NumericalEvents* events, const std::string& context) {
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size())
    throw StructuralError("covariance does not match the mean dimension");
  const auto llt = factor_with_jitter(covariance, events, context);
  return mean + llt.matrixL() * rng.normal_vector(mean.size());
}

Eigen::VectorXd CanonicalGaussian::mean() const { return precision.llt().solve(linear); }

Eigen::MatrixXd CanonicalGaussian::covariance() const {
  return precision.llt().solve(Eigen::MatrixXd::Identity(precision.rows(), precision.cols()));
}

Eigen::VectorXd sample_canonical(const CanonicalGaussian& g, RngStream& rng, NumericalEvents* events,
                                 const std::string& context) {
  const auto llt = factor_with_jitter(g.precision, events, context);
  const Eigen::VectorXd mean = llt.solve(g.linear);
  return mean + llt.matrixU().solve(rng.normal_vector(mean.size()));
}

}  // namespace bfas
