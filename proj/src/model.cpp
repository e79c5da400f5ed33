#include "bfas/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "bfas/errors.hpp"

namespace bfas {

std::vector<int> VaDataset::rows(Split which) const {
  std::vector<int> out;
  for (int i = 0; i < n(); ++i)
    if (split[i] == which) out.push_back(i);
  return out;
}

int VaDataset::count(Split which) const {
  return static_cast<int>(std::count(split.begin(), split.end(), which));
}

namespace {

double missing_fraction(const std::vector<int>& v) {
  if (v.empty()) return 0.0;
  return double(std::count(v.begin(), v.end(), kMissing)) / double(v.size());
}

}  // namespace

double VaDataset::age_missing_rate() const { return missing_fraction(age); }
double VaDataset::sex_missing_rate() const { return missing_fraction(sex); }

double VaDataset::symptom_missing_rate() const {
  if (missing.size() == 0) return 0.0;
  return missing.cast<double>().sum() / double(missing.size());
}

void VaDataset::validate() const {
  const auto rows_n = std::size_t(n());
  if (p < 1) throw StructuralError("dataset needs at least one symptom");
  if (L < 2) throw StructuralError("dataset needs at least two causes");
  if (x.rows() != n() || x.cols() != p || missing.rows() != n() || missing.cols() != p)
    throw StructuralError(fmt::format("symptom matrix is {}x{}, expected {}x{}", x.rows(), x.cols(), n(), p));
  if (age.size() != rows_n || sex.size() != rows_n || cause.size() != rows_n || ids.size() != rows_n)
    throw StructuralError("per-individual columns disagree in length");
  if (cause_labels.size() != std::size_t(L)) throw StructuralError("cause label map does not have L entries");
  if (symptom_names.size() != std::size_t(p)) throw StructuralError("symptom name list does not have p entries");
  for (int i = 0; i < n(); ++i) {
    for (int j = 0; j < p; ++j) {
      if (missing(i, j) > 1 || x(i, j) > 1) throw StructuralError(fmt::format("non-binary cell at ({}, {})", i, j));
      if (missing(i, j) == 1 && x(i, j) != 0) throw StructuralError(fmt::format("missing cell ({}, {}) carries a value", i, j));
    }
    auto binary_or_missing = [](int v) { return v == 0 || v == 1 || v == kMissing; };
    if (!binary_or_missing(age[i]) || !binary_or_missing(sex[i]))
      throw StructuralError(fmt::format("row {}: age/sex must be 0, 1 or missing", i));
    if (split[i] == Split::training && (cause[i] < 0 || cause[i] >= L))
      throw StructuralError(fmt::format("training row {} has no valid cause", i));
    if (split[i] == Split::target && cause[i] != kMissing)
      throw StructuralError(fmt::format("target row {} carries a cause label", i));
  }
}

Standardizer Standardizer::from_training(const VaDataset& data) {
  auto moments = [&](const std::vector<int>& v, double& mean, double& sd) {
    double sum = 0.0, sum2 = 0.0;
    int count = 0;
    for (int i = 0; i < data.n(); ++i) {
      if (data.split[i] != Split::training || v[i] == kMissing) continue;
      sum += v[i];
      sum2 += double(v[i]) * v[i];
      ++count;
    }
    mean = count > 0 ? sum / count : 0.0;
    // population sd; a constant column keeps unit scale
    const double var = count > 0 ? sum2 / count - mean * mean : 0.0;
    sd = var > 1e-12 ? std::sqrt(var) : 1.0;
  };
  Standardizer s;
  moments(data.age, s.age_mean, s.age_sd);
  moments(data.sex, s.sex_mean, s.sex_sd);
  return s;
}

CovariateVector Standardizer::covariates(int raw_age, int raw_sex) const {
  CovariateVector c;
  c.raw_age = raw_age;
  c.raw_sex = raw_sex;
  c.w = Eigen::Vector3d(1.0, (raw_age - age_mean) / age_sd, (raw_sex - sex_mean) / sex_sd);
  return c;
}

Loadings Loadings::zeros(int L, int p, int K) {
  Loadings l;
  l.L = L;
  l.p = p;
  l.K = K;
  l.B.assign(L, Eigen::MatrixXd::Zero(p, 3));
  l.Lambda.assign(L, Eigen::MatrixXd::Zero(p, K));
  l.C.resize(L);
  for (auto& c : l.C) c.fill(Eigen::MatrixXd::Zero(p, K));
  return l;
}

void Loadings::check() const {
  auto sized = [](const Eigen::MatrixXd& m, int r, int c) { return m.rows() == r && m.cols() == c; };
  if (B.size() != std::size_t(L) || Lambda.size() != std::size_t(L) || C.size() != std::size_t(L))
    throw StructuralError("loadings do not hold L causes");
  for (int y = 0; y < L; ++y) {
    if (!sized(B[y], p, 3) || !sized(Lambda[y], p, K))
      throw StructuralError(fmt::format("loadings for cause {} have the wrong shape", y));
    for (const auto& c : C[y])
      if (!sized(c, p, K)) throw StructuralError(fmt::format("interaction loadings for cause {} have the wrong shape", y));
    if (!B[y].allFinite() || !Lambda[y].allFinite()) throw StructuralError("non-finite loadings");
  }
}

ShrinkagePrecisions ShrinkagePrecisions::ones(int p) {
  return {Eigen::MatrixXd::Ones(p, 3), Eigen::VectorXd::Ones(p), Eigen::MatrixXd::Ones(p, 3)};
}

CategoricalModels CategoricalModels::prior_means(const Eigen::VectorXd& concentration_cause,
                                                 const Eigen::Vector4d& concentration_demog) {
  CategoricalModels m;
  m.concentration_cause = concentration_cause;
  m.concentration_demog = concentration_demog;
  const auto L = concentration_cause.size();
  m.cause_prior = concentration_cause / concentration_cause.sum();
  m.demog = (concentration_demog / concentration_demog.sum()).transpose().replicate(L, 1);
  return m;
}

void CategoricalModels::check() const {
  auto valid = [](const Eigen::Ref<const Eigen::VectorXd>& v) {
    return (v.array() >= 0.0).all() && (v.array() <= 1.0).all() && std::abs(v.sum() - 1.0) <= 1e-12;
  };
  if (!valid(cause_prior)) throw DomainError("cause prior is not a probability vector");
  for (Eigen::Index y = 0; y < demog.rows(); ++y)
    if (!valid(demog.row(y).transpose())) throw DomainError(fmt::format("demographic row {} is not a probability vector", y));
}

namespace {

void check_cause(const Loadings& loadings, int cause) {
  if (cause < 0 || cause >= loadings.L)
    throw StructuralError(fmt::format("cause index {} outside [0, {})", cause, loadings.L));
}

}  // namespace

Eigen::MatrixXd interaction_loading(const Loadings& loadings, int cause, const CovariateVector& w) {
  check_cause(loadings, cause);
  const auto& c = loadings.C[cause];
  if (c[0].rows() != loadings.p || c[0].cols() != loadings.K)
    throw StructuralError("interaction loadings do not match (p, K)");
  return c[0] + w.age_std() * c[1] + w.sex_std() * c[2];
}

Eigen::MatrixXd effective_loading(const Loadings& loadings, int cause, const CovariateVector& w) {
  const int K = loadings.K;
  Eigen::MatrixXd out(loadings.p, 2 * K);
  out.leftCols(K) = loadings.Lambda[cause];
  out.rightCols(K) = interaction_loading(loadings, cause, w);
  return out;
}

Eigen::MatrixXd implied_covariance(const Loadings& loadings, int cause, const CovariateVector& w) {
  const Eigen::MatrixXd lt = effective_loading(loadings, cause, w);
  Eigen::MatrixXd cov = lt * lt.transpose();
  cov.diagonal().array() += 1.0;
  return cov;
}

double probit_marginal(const Loadings& loadings, int cause, const CovariateVector& w, int j) {
  check_cause(loadings, cause);
  if (j < 0 || j >= loadings.p) throw StructuralError(fmt::format("symptom index {} outside [0, {})", j, loadings.p));
  const double mean = loadings.B[cause].row(j).dot(w.w);
  const Eigen::MatrixXd lt = effective_loading(loadings, cause, w);
  return std_normal_cdf(mean / std::sqrt(1.0 + lt.row(j).squaredNorm()));
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double log_std_normal_cdf(double x) {
  if (x > -30.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  // Mills-ratio asymptotic series; below -30 the omitted terms are < 1e-12
  const double x2 = x * x;
  const double inv = 1.0 / x2;
  const double series = 1.0 - inv * (1.0 - 3.0 * inv * (1.0 - 5.0 * inv * (1.0 - 7.0 * inv)));
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double log_sum_exp(std::span<const double> v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double a : v) mx = std::max(mx, a);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double a : v) s += std::exp(a - mx);
  return mx + std::log(s);
}

}  // namespace bfas
