#pragma once

// Cause assignment for target individuals. The symptom likelihood with the
// factors integrated out,
//   P(x_i | y, age, sex) ~= (1/R) sum_r prod_{j observed} P(x_ij | eta~_(r), y, age, sex),
// is evaluated in log space with a max-shifted log-sum-exp over the R draws.

#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "bfas/model.hpp"
#include "bfas/random.hpp"

namespace bfas {

/// R x dim matrix of independent N(0, 1) draws.
Eigen::MatrixXd draw_factor_samples(int R, int dim, RngStream& rng);

/// log of the Monte Carlo marginal likelihood using the given factor draws
/// (rows of `factor_draws`, each of length 2K).
double log_mc_marginal_likelihood(const Loadings& loadings, int cause, const CovariateVector& w,
                                  std::span<const std::uint8_t> x_row, std::span<const std::uint8_t> missing_row,
                                  const Eigen::MatrixXd& factor_draws);

/// Monte Carlo marginal likelihood with R fresh factor draws.
double mc_marginal_likelihood(const Loadings& loadings, int cause, const CovariateVector& w,
                              std::span<const std::uint8_t> x_row, std::span<const std::uint8_t> missing_row, int R,
                              RngStream& rng);

struct CausePosterior {
  Eigen::VectorXd probs;  ///< P(y_i = y | x_i, age_i, sex_i)
  int label = 0;          ///< sampled from probs
  bool fallback = false;  ///< all causes had zero weight; probs is uniform
};

/// Combines the Monte Carlo likelihood, P(age, sex | y) and P(y) for row i.
/// Missing raw age or sex is summed out over its demographic cells. One set
/// of R factor draws is shared by every cause and cell of the row.
CausePosterior predict_cause(const ModelState& state, const VaDataset& data, int i, int R, RngStream& rng);

/// Same with caller-provided factor draws.
CausePosterior predict_cause(const ModelState& state, const VaDataset& data, int i,
                             const Eigen::MatrixXd& factor_draws, RngStream& rng);

/// Normalizes log weights into a probability vector; returns false (and a
/// uniform vector) when every weight is -inf or NaN.
bool normalize_log_weights(const Eigen::VectorXd& log_weights, Eigen::VectorXd& probs);

/// Index drawn from a probability vector.
int sample_categorical(const Eigen::VectorXd& probs, RngStream& rng);

/// Fractions of each cause among the sampled target labels.
Eigen::VectorXd csmf_draw(std::span<const int> labels, int L);

}  // namespace bfas
