#pragma once

// K selection by stratified k-fold cross-validation. Each fold's chain sees
// the other folds as training rows and the held-out fold as unlabelled
// targets; the score is the mean held-out log posterior-mean probability of
// the true cause. Chains for different K share seeds fold by fold.

#include <vector>

#include <Eigen/Dense>

#include "bfas/config.hpp"
#include "bfas/gibbs.hpp"
#include "bfas/model.hpp"
#include "bfas/random.hpp"

namespace bfas {

/// Fold index per training row (-1 for target rows). Rows of each cause are
/// shuffled and dealt round-robin, continuing the deal across causes.
std::vector<int> stratified_folds(const VaDataset& data, int folds, RngStream& rng);

/// True when every cause of a held-out fold also appears in its training folds.
bool folds_cover_causes(const VaDataset& data, const std::vector<int>& fold_of_row, int folds);

/// Training folds as training rows, fold `f` as target rows; `truth` receives
/// the held-out causes in target order.
VaDataset fold_dataset(const VaDataset& data, const std::vector<int>& fold_of_row, int f, std::vector<int>& truth);

/// Mean log probability of the true causes; probabilities are floored at the
/// smallest normal double.
double heldout_log_score(const Eigen::MatrixXd& probs, const std::vector<int>& truth);

struct SelectKResult {
  int selected = 0;
  std::vector<int> ks;
  Eigen::MatrixXd fold_scores;  ///< candidates x folds
  Eigen::VectorXd mean_scores;
  std::vector<int> fold_of_row;
};

/// Largest mean score; ties go to the smaller K.
int pick_k(const std::vector<int>& ks, const Eigen::VectorXd& mean_scores);

/// Runs the cross-validation. `base` supplies priors and seeds; the chain
/// budget and R come from `cv`. The cause prior is held fixed inside folds.
SelectKResult select_k(const VaDataset& data, const CvSettings& cv, const ChainConfig& base, RngStream& rng);

/// Same with caller-supplied folds.
SelectKResult select_k(const VaDataset& data, const CvSettings& cv, const ChainConfig& base,
                       const std::vector<int>& fold_of_row, RngStream& rng);

}  // namespace bfas
