#include "bfas/predictor.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "bfas/errors.hpp"

namespace bfas {

Eigen::MatrixXd draw_factor_samples(int R, int dim, RngStream& rng) {
  if (R < 1) throw DomainError("Monte Carlo size R must be at least 1");
  Eigen::MatrixXd draws(R, dim);
  for (int r = 0; r < R; ++r)
    for (int k = 0; k < dim; ++k) draws(r, k) = rng.normal();
  return draws;
}

double log_mc_marginal_likelihood(const Loadings& loadings, int cause, const CovariateVector& w,
                                  std::span<const std::uint8_t> x_row, std::span<const std::uint8_t> missing_row,
                                  const Eigen::MatrixXd& factor_draws) {
  const int p = loadings.p;
  if (x_row.size() != std::size_t(p) || missing_row.size() != std::size_t(p))
    throw StructuralError("symptom row does not have p entries");
  if (factor_draws.cols() != 2 * loadings.K) throw StructuralError("factor draws must have 2K columns");

  std::vector<int> observed;
  for (int j = 0; j < p; ++j)
    if (missing_row[j] == 0) observed.push_back(j);
  if (observed.empty()) return 0.0;

  const Eigen::MatrixXd lt = effective_loading(loadings, cause, w);
  const Eigen::VectorXd mean = loadings.B[cause] * w.w;
  const auto n_obs = Eigen::Index(observed.size());
  Eigen::MatrixXd lt_obs(n_obs, lt.cols());
  Eigen::VectorXd sign(n_obs), mean_obs(n_obs);
  for (Eigen::Index k = 0; k < n_obs; ++k) {
    lt_obs.row(k) = lt.row(observed[k]);
    mean_obs[k] = mean[observed[k]];
    sign[k] = x_row[observed[k]] == 1 ? 1.0 : -1.0;
  }
  const Eigen::MatrixXd linear = factor_draws * lt_obs.transpose();

  const auto R = factor_draws.rows();
  std::vector<double> log_terms(std::size_t(R), 0.0);
  for (Eigen::Index r = 0; r < R; ++r) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < n_obs; ++k) s += log_std_normal_cdf(sign[k] * (mean_obs[k] + linear(r, k)));
    log_terms[std::size_t(r)] = s;
  }
  return log_sum_exp(log_terms) - std::log(double(R));
}

double mc_marginal_likelihood(const Loadings& loadings, int cause, const CovariateVector& w,
                              std::span<const std::uint8_t> x_row, std::span<const std::uint8_t> missing_row, int R,
                              RngStream& rng) {
  const Eigen::MatrixXd draws = draw_factor_samples(R, 2 * loadings.K, rng);
  return std::exp(log_mc_marginal_likelihood(loadings, cause, w, x_row, missing_row, draws));
}

bool normalize_log_weights(const Eigen::VectorXd& log_weights, Eigen::VectorXd& probs) {
  const auto L = log_weights.size();
  const double mx = log_weights.maxCoeff();
  if (!std::isfinite(mx) || log_weights.hasNaN()) {
    probs = Eigen::VectorXd::Constant(L, 1.0 / double(L));
    return false;
  }
  // scalar exp: the vectorized one maps -inf to a denormal, not 0
  probs = log_weights.unaryExpr([mx](double v) { return std::exp(v - mx); });
  probs /= probs.sum();
  return true;
}

int sample_categorical(const Eigen::VectorXd& probs, RngStream& rng) {
  const double u = rng.uniform() * probs.sum();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return int(k);
  }
  // u landed on the rounding gap at the top; take the last nonzero cell
  for (Eigen::Index k = probs.size() - 1; k >= 0; --k)
    if (probs[k] > 0.0) return int(k);
  return int(probs.size()) - 1;
}

CausePosterior predict_cause(const ModelState& state, const VaDataset& data, int i,
                             const Eigen::MatrixXd& factor_draws, RngStream& rng) {
  const int L = state.loadings.L;
  const auto x_row = data.x_row(i);
  const auto m_row = data.missing_row(i);

  std::vector<int> ages, sexes;
  if (data.age[i] == kMissing) ages = {0, 1}; else ages = {data.age[i]};
  if (data.sex[i] == kMissing) sexes = {0, 1}; else sexes = {data.sex[i]};

  Eigen::VectorXd log_w(L);
  std::vector<double> cell_terms;
  for (int y = 0; y < L; ++y) {
    cell_terms.clear();
    for (int a : ages) {
      for (int b : sexes) {
        const double cell = state.categorical.demog(y, demog_cell(a, b));
        if (!(cell > 0.0)) continue;
        const auto w = state.standardizer.covariates(a, b);
        cell_terms.push_back(std::log(cell) +
                             log_mc_marginal_likelihood(state.loadings, y, w, x_row, m_row, factor_draws));
      }
    }
    const double prior = state.categorical.cause_prior[y];
    log_w[y] = (prior > 0.0 && !cell_terms.empty()) ? std::log(prior) + log_sum_exp(cell_terms)
                                                     : -std::numeric_limits<double>::infinity();
  }

  CausePosterior out;
  out.fallback = !normalize_log_weights(log_w, out.probs);
  out.label = sample_categorical(out.probs, rng);
  return out;
}

CausePosterior predict_cause(const ModelState& state, const VaDataset& data, int i, int R, RngStream& rng) {
  const Eigen::MatrixXd draws = draw_factor_samples(R, 2 * state.K(), rng);
  return predict_cause(state, data, i, draws, rng);
}

Eigen::VectorXd csmf_draw(std::span<const int> labels, int L) {
  if (labels.empty()) throw DomainError("CSMF of an empty target set is undefined");
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(L);
  for (int y : labels) {
    if (y < 0 || y >= L) throw DomainError(fmt::format("label {} outside [0, {})", y, L));
    counts[y] += 1.0;
  }
  return counts / double(labels.size());
}

}  // namespace bfas
