#pragma once

// Information-theoretic relevance of the predictors x~ = (age, sex, x_1..x_p)
// for the cause of death, evaluated on one posterior state. All logarithms are
// natural; standardized values divide by H(y).
//
// Predictor index: 0 = age, 1 = sex, 2 + j = symptom j.

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bfas/model.hpp"
#include "bfas/random.hpp"

namespace bfas {

inline constexpr int kAgePredictor = 0;
inline constexpr int kSexPredictor = 1;
constexpr int symptom_predictor(int j) { return j + 2; }

/// Shannon entropy in nats; 0 log 0 = 0. Throws DomainError off the simplex.
double entropy(const Eigen::VectorXd& dist);

/// L x 2 joint table P(y, x~_k = v) with every other predictor summed out.
/// Symptom marginals use the closed-form probit marginal inside each
/// demographic cell.
Eigen::MatrixXd predictor_joint(const ModelState& state, int predictor);

/// I(y; v) of a joint table (rows y, columns v), in nats.
double mutual_information(const Eigen::MatrixXd& joint);

/// I(y; x~_k) in nats.
double mutual_information(const ModelState& state, int predictor);

/// Precomputed log Phi tables for every (cause, demographic cell) under a
/// common set of R factor draws. P(x | y, age, sex) is approximated by the
/// average over those draws, the same way for every configuration.
class SymptomLikelihoodTable {
 public:
  SymptomLikelihoodTable(const ModelState& state, Eigen::MatrixXd factor_draws);

  int causes() const { return L_; }
  int symptoms() const { return p_; }
  int draws() const { return R_; }

  /// log Phi(+-(B_j w + Lambda~_j eta~_r)) for x_j = 1 / 0; R x p.
  const Eigen::MatrixXd& log_prob(int cause, int cell, int value) const {
    return value == 1 ? log_p1_[index(cause, cell)] : log_p0_[index(cause, cell)];
  }
  /// log P^(x | cause, cell) for a complete symptom vector.
  double log_likelihood(int cause, int cell, std::span<const int> x) const;

 private:
  std::size_t index(int cause, int cell) const { return std::size_t(cause) * 4 + std::size_t(cell); }

  int L_ = 0, p_ = 0, R_ = 0;
  std::vector<Eigen::MatrixXd> log_p1_, log_p0_;
};

struct CmiEstimate {
  Eigen::VectorXd cmi;       ///< per predictor, nats
  Eigen::VectorXd mc_sd;     ///< Monte Carlo SD of each estimate
  Eigen::VectorXd skipped;   ///< fraction of samples dropped for a zero joint evaluation
};

/// Monte Carlo conditional mutual information I(y; x~_k | x~_{-k}) for every
/// predictor from `R_tilde` joint samples. Samples are drawn from the same
/// approximate joint the table evaluates, so the estimate is unbiased for the
/// enumerated value under that table.
CmiEstimate conditional_mutual_information(const ModelState& state, const SymptomLikelihoodTable& table,
                                           int R_tilde, RngStream& rng);

/// Convenience overload drawing R common factor draws first.
CmiEstimate conditional_mutual_information(const ModelState& state, int R, int R_tilde, RngStream& rng);

/// Full enumeration over every (y, age, sex, x) configuration under the
/// table; feasible for small p (at most 16 symptoms).
struct EnumeratedRelevance {
  Eigen::VectorXd mi;   ///< I(y; x~_k)
  Eigen::VectorXd cmi;  ///< I(y; x~_k | x~_{-k})
  double total_mi = 0;  ///< I(y; x~)
  /// I(y; x~_{-k} | x~_k), for chain-rule checks
  Eigen::VectorXd cmi_rest_given;
};

EnumeratedRelevance enumerate_relevance(const ModelState& state, const SymptomLikelihoodTable& table);

struct KlByGroup {
  std::array<double, 4> kl{};         ///< per demographic cell (age, sex)
  std::array<double, 4> cell_prob{};  ///< P(age, sex)
  std::array<bool, 4> defined{};      ///< false when the cell has probability 0
  double weighted = 0.0;              ///< sum over defined cells of P(cell) KL(cell)
};

/// D_KL{P(y, x_j | cell) || P(y | cell) P(x_j | cell)} for symptom j.
KlByGroup kl_by_group(const ModelState& state, int symptom);

/// Everything relevance-related from one posterior sweep.
struct SweepRelevance {
  double cause_entropy = 0.0;
  Eigen::VectorXd mi_std;      ///< I(y; x~_k) / H(y)
  Eigen::VectorXd cmi_std;     ///< I(y; x~_k | x~_{-k}) / H(y)
  Eigen::VectorXd cmi_mc_sd;   ///< Monte Carlo SD of cmi_std
  Eigen::VectorXd cmi_skipped;
  Eigen::MatrixXd kl;          ///< p x 4, NaN where undefined
  Eigen::VectorXd kl_weighted; ///< p
};

SweepRelevance evaluate_relevance(const ModelState& state, int R, int R_tilde, RngStream& rng);

/// Posterior mean and SD across sweeps.
class RelevanceSummary {
 public:
  void add(const SweepRelevance& sweep);
  int sweeps() const { return int(draws_.size()); }

  Eigen::VectorXd mi_mean() const;
  Eigen::VectorXd mi_sd() const;
  Eigen::VectorXd cmi_mean() const;
  Eigen::VectorXd cmi_sd() const;
  Eigen::VectorXd cmi_mc_sd_mean() const;
  Eigen::VectorXd cmi_skipped_mean() const;
  /// p x 4; cells undefined in every sweep stay NaN.
  Eigen::MatrixXd kl_mean() const;
  Eigen::MatrixXd kl_sd() const;
  Eigen::VectorXd kl_weighted_mean() const;
  Eigen::VectorXd kl_weighted_sd() const;

 private:
  std::vector<SweepRelevance> draws_;
};

/// 1-based ranks by descending value (ties keep index order).
std::vector<int> descending_ranks(const Eigen::VectorXd& values);

}  // namespace bfas
