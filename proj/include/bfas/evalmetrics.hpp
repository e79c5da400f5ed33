#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bfas/model.hpp"

namespace bfas {

/// 1 - sum|P0 - P| / (2 (1 - min P0)).
double csmf_accuracy(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate);

/// Cramer's V on the pairwise-complete rows of two categorical columns
/// (kMissing marks a missing entry). Unadjusted Pearson chi-square. Empty
/// when either column has fewer than two observed levels.
std::optional<double> cramers_v(std::span<const int> a, std::span<const int> b);

/// Type-7 (linear interpolation) sample quantile.
double quantile(std::vector<double> values, double prob);

/// Fraction of causes whose true fraction lies in the equal-tailed central
/// interval of the draws at `level`.
double interval_coverage(const std::vector<Eigen::VectorXd>& draws, const Eigen::VectorXd& truth, double level);

struct CsmfSummary {
  Eigen::VectorXd mean, sd, q025, q50, q975;
};

CsmfSummary summarize_draws(const std::vector<Eigen::VectorXd>& draws);

struct EvalReport {
  double csmf_accuracy = 0.0;
  double coverage = 0.0;
};

EvalReport evaluate_csmf(const std::vector<Eigen::VectorXd>& draws, const Eigen::VectorXd& truth, double level = 0.95);

enum class GroupKind { age, sex };

/// Symmetric p x p Cramer's V among symptoms for one cause and one group
/// value (age or sex equal to `group_value`). Undefined entries are NaN.
Eigen::MatrixXd cramers_v_table(const VaDataset& data, int cause, GroupKind kind, int group_value);

}  // namespace bfas
