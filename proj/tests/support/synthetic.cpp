#include "synthetic.hpp"

#include <random>
#include <string>

namespace bfas::testing {

namespace {

Eigen::VectorXd draw_dirichlet(const Eigen::VectorXd& a, std::mt19937_64& gen) {
  Eigen::VectorXd g(a.size());
  for (Eigen::Index k = 0; k < a.size(); ++k) g(k) = std::gamma_distribution<double>(a(k), 1.0)(gen);
  return g / g.sum();
}

int draw_index(const Eigen::VectorXd& probs, std::mt19937_64& gen) {
  std::discrete_distribution<int> d(probs.data(), probs.data() + probs.size());
  return d(gen);
}

}  // namespace

SyntheticData generate(const SyntheticSpec& spec) {
  std::mt19937_64 gen(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int L = spec.L, p = spec.p, K = spec.K, n = spec.n_train + spec.n_target;

  SyntheticData out;
  out.loadings = Loadings::zeros(L, p, K);
  for (int y = 0; y < L; ++y) {
    for (int j = 0; j < p; ++j) {
      out.loadings.B[y](j, 0) = spec.intercept_sd * normal(gen);
      out.loadings.B[y](j, 1) = spec.covariate_sd * normal(gen);
      out.loadings.B[y](j, 2) = spec.covariate_sd * normal(gen);
      for (int k = 0; k < K; ++k) {
        out.loadings.Lambda[y](j, k) = spec.lambda_sd * normal(gen);
        for (int q = 0; q < 3; ++q) out.loadings.C[y][q](j, k) = spec.interaction_sd * normal(gen);
      }
    }
  }
  out.demog.resize(L, 4);
  for (int y = 0; y < L; ++y) out.demog.row(y) = draw_dirichlet(Eigen::Vector4d::Constant(4.0), gen).transpose();

  const Eigen::VectorXd train_csmf =
      spec.train_csmf.size() ? spec.train_csmf : Eigen::VectorXd(Eigen::VectorXd::Constant(L, 1.0 / L));
  const Eigen::VectorXd target_csmf =
      spec.target_csmf.size() ? spec.target_csmf : draw_dirichlet(Eigen::VectorXd::Constant(L, 2.0), gen);

  std::vector<int> cause(n), age(n), sex(n);
  for (int i = 0; i < n; ++i) {
    cause[i] = draw_index(i < spec.n_train ? train_csmf : target_csmf, gen);
    const int cell = draw_index(out.demog.row(cause[i]).transpose(), gen);
    age[i] = cell >> 1;
    sex[i] = cell & 1;
  }

  VaDataset& d = out.data;
  d.p = p;
  d.L = L;
  d.x.setZero(n, p);
  d.missing.setZero(n, p);
  for (int y = 0; y < L; ++y) d.cause_labels.push_back(std::to_string(y + 1));
  for (int j = 0; j < p; ++j) d.symptom_names.push_back("s" + std::to_string(j + 1));
  for (int i = 0; i < n; ++i) {
    const bool training = i < spec.n_train;
    d.split.push_back(training ? Split::training : Split::target);
    d.ids.push_back("r" + std::to_string(i + 1));
    d.age.push_back(age[i]);
    d.sex.push_back(sex[i]);
    d.cause.push_back(training ? cause[i] : kMissing);
  }
  out.standardizer = Standardizer::from_training(d);

  Eigen::VectorXd eta(2 * K);
  for (int i = 0; i < n; ++i) {
    const auto w = out.standardizer.covariates(age[i], sex[i]);
    const Eigen::MatrixXd lt = effective_loading(out.loadings, cause[i], w);
    for (int k = 0; k < 2 * K; ++k) eta(k) = normal(gen);
    const Eigen::VectorXd mean = out.loadings.B[cause[i]] * w.w + lt * eta;
    for (int j = 0; j < p; ++j) {
      d.x(i, j) = mean(j) + normal(gen) > 0.0 ? 1 : 0;
      if (unif(gen) < spec.symptom_missing) {
        d.missing(i, j) = 1;
        d.x(i, j) = 0;
      }
    }
    if (unif(gen) < spec.demog_missing) d.age[i] = kMissing;
    if (unif(gen) < spec.demog_missing) d.sex[i] = kMissing;
  }
  for (int i = spec.n_train; i < n; ++i) out.target_truth.push_back(cause[i]);
  d.validate();
  return out;
}

VaDataset make_dataset(const std::vector<std::vector<int>>& symptoms, const std::vector<int>& age,
                       const std::vector<int>& sex, const std::vector<int>& cause, int L,
                       const std::vector<Split>& split) {
  VaDataset d;
  const int n = int(symptoms.size());
  d.p = n > 0 ? int(symptoms.front().size()) : 0;
  d.L = L;
  d.x.setZero(n, d.p);
  d.missing.setZero(n, d.p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d.p; ++j) {
      const int v = symptoms[std::size_t(i)][std::size_t(j)];
      if (v == kMissing) d.missing(i, j) = 1; else d.x(i, j) = std::uint8_t(v);
    }
  d.age = age;
  d.sex = sex;
  d.cause = cause;
  d.split = split.empty() ? std::vector<Split>(std::size_t(n), Split::training) : split;
  for (int i = 0; i < n; ++i) d.ids.push_back("r" + std::to_string(i + 1));
  for (int y = 0; y < L; ++y) d.cause_labels.push_back(std::to_string(y + 1));
  for (int j = 0; j < d.p; ++j) d.symptom_names.push_back("s" + std::to_string(j + 1));
  d.validate();
  return d;
}

}  // namespace bfas::testing
