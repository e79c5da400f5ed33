#pragma once

// Gibbs sampler for the age/sex-dependent probit factor model.
//
// One sweep runs, in order:
//   1. loadings beta_yj = (B_yj, Lambda_yj, C1_yj, C2_yj, C3_yj) for every (y, j)
//   2. factors eta~_i = (eta_i, gamma_i) for every active row
//   3-5. shrinkage precisions phi_B, phi_Lambda, phi_C
//   6. latent utilities z_ij on observed cells
//   7. P(age, sex | cause)
//   8. missing age, then missing sex
//   9. fit mode: cause probabilities and labels for target rows, then P(cause)
//      relevance mode: P(cause) from training labels
// Each unit of work inside a step draws from its own substream keyed by
// (sweep, step, unit), so a chain is reproducible from its seed alone.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bfas/model.hpp"
#include "bfas/random.hpp"

namespace bfas {

enum class ChainMode { fit, relevance };

/// How P(cause) moves during a fit.
enum class CausePriorUpdate {
  target_labels,  ///< Dirichlet(concentration + counts of sampled target labels)
  fixed,          ///< stays at the prior mean
};

/// Data weight in the relevance-mode cause update Dirichlet(a + weight).
enum class RelevanceCauseWeights {
  fractions,  ///< (1/n) sum_i 1(y_i = l)
  counts,     ///< sum_i 1(y_i = l)
};

struct ChainConfig {
  int K = 1;
  int iterations = 10000;
  int burn_in = 1000;
  int thin = 20;
  int R = 1000;
  int R_tilde = 10000;
  std::uint64_t seed = 1;
  bool transductive = false;
  Eigen::VectorXd dirichlet_cause_concentration;  ///< empty means all ones
  Eigen::Vector4d dirichlet_demog_concentration = Eigen::Vector4d::Ones();
  CausePriorUpdate cause_prior_update = CausePriorUpdate::target_labels;
  RelevanceCauseWeights relevance_cause_weights = RelevanceCauseWeights::fractions;
  bool keep_states = false;

  void validate(int L) const;
  Eigen::VectorXd cause_concentration(int L) const;
  int kept_count() const { return iterations / thin; }
};

/// Rows that enter steps 1-8: training rows, plus target rows when transductive.
std::vector<int> active_rows(const VaDataset& data, bool transductive);

/// Neutral starting point: zero loadings, unit precisions, N(0, I) factors,
/// z = +-0.5 matching x, missing age/sex from the training marginal, tables at
/// their prior means. Target labels start from the cause prior.
ModelState initialize_state(const VaDataset& data, const ChainConfig& config, RngStream& rng);

// ---- step 1 ---------------------------------------------------------------

/// a_i = (w_i, eta_i, gamma_i, age_std gamma_i, sex_std gamma_i), length 3 + 4K.
Eigen::VectorXd design_vector(const ModelState& state, int i);

/// Diagonal of the prior precision for beta_yj.
Eigen::VectorXd loadings_prior_precision(const ShrinkagePrecisions& precisions, int j, int K);

/// Full conditional of beta_yj given the rows currently labelled y.
CanonicalGaussian loadings_conditional(const ModelState& state, const VaDataset& data,
                                       std::span<const int> rows_of_cause, int j);

/// Writes beta into B_y, Lambda_y and C_y row j.
void set_loading_row(Loadings& loadings, int cause, int j, const Eigen::VectorXd& beta);
Eigen::VectorXd loading_row(const Loadings& loadings, int cause, int j);

void update_loadings(ModelState& state, const VaDataset& data, std::span<const int> active, const RngStream& sweep,
                     NumericalEvents& events);

// ---- step 2 ---------------------------------------------------------------

CanonicalGaussian factor_conditional(const ModelState& state, const VaDataset& data, int i);
void update_factors(ModelState& state, const VaDataset& data, std::span<const int> active, const RngStream& sweep,
                    NumericalEvents& events);

// ---- steps 3-5 ------------------------------------------------------------

struct PrecisionConditionals {
  double shape_B = 0.0;           ///< 0.5 (L + 1)
  Eigen::MatrixXd rate_B;         ///< p x 3
  double shape_factor = 0.0;      ///< 0.5 (L K + 1), shared by phi_Lambda and phi_C
  Eigen::VectorXd rate_Lambda;    ///< p
  Eigen::MatrixXd rate_C;         ///< p x 3
};

PrecisionConditionals precision_conditionals(const Loadings& loadings);
void update_precisions(ModelState& state, const RngStream& sweep);

// ---- step 6 ---------------------------------------------------------------

/// B_{y_i j} w_i + Lambda~_{y_i j} eta~_i.
double latent_mean(const ModelState& state, int i, int j);
void update_latent_z(ModelState& state, const VaDataset& data, std::span<const int> active, const RngStream& sweep);

// ---- step 7 ---------------------------------------------------------------

/// L x 4 Dirichlet concentrations: prior plus cell counts over active rows.
Eigen::MatrixXd demog_conditional(const ModelState& state, std::span<const int> active);
void update_demog_probs(ModelState& state, std::span<const int> active, const RngStream& sweep);

// ---- step 8 ---------------------------------------------------------------

/// log P(x_i | cause, age, sex, eta~_i) over the observed symptoms of row i.
double log_symptom_likelihood(const ModelState& state, const VaDataset& data, int i, int cause, int age, int sex);

/// Two-point conditional (P(age=0), P(age=1)) for row i, holding sex fixed.
/// Sets `fallback` when both cells underflow and only the table is used.
Eigen::Vector2d age_conditional(const ModelState& state, const VaDataset& data, int i, bool* fallback = nullptr);
Eigen::Vector2d sex_conditional(const ModelState& state, const VaDataset& data, int i, bool* fallback = nullptr);

void impute_demographics(ModelState& state, const VaDataset& data, std::span<const int> active,
                         const RngStream& sweep, NumericalEvents& events);

// ---- step 9 (cause prior) -------------------------------------------------

/// Concentration of the relevance-mode update of P(cause).
Eigen::VectorXd relevance_cause_conditional(const ModelState& state, const VaDataset& data,
                                            const ChainConfig& config);

// ---- chain ----------------------------------------------------------------

struct ChainOutput {
  std::vector<int> target_rows;
  std::vector<int> kept_sweeps;
  std::vector<Eigen::VectorXd> csmf_draws;  ///< one per kept sweep (fit mode with targets)
  Eigen::MatrixXd target_prob_sum;          ///< n_S x L, summed over kept sweeps
  std::vector<ModelState> snapshots;        ///< only when keep_states
  NumericalEvents events;

  Eigen::VectorXd csmf_mean() const;
  Eigen::MatrixXd target_prob_mean() const;
};

/// Called after every kept sweep with the sweep index, the state and the
/// sweep's root substream.
using SweepObserver = std::function<void(int sweep, const ModelState& state, const RngStream& sweep_rng)>;

/// Keyed stream for one sweep of a chain seeded with `seed`.
RngStream sweep_stream(std::uint64_t seed, int sweep);

/// Stable step keys for substreams.
enum class StepKey : std::uint64_t {
  loadings = 1,
  factors = 2,
  precisions = 3,
  latent = 6,
  demog = 7,
  impute = 8,
  predict = 9,
  cause_prior = 90,
  relevance = 10,
};

inline RngStream step_stream(const RngStream& sweep, StepKey step, std::uint64_t unit = 0) {
  return sweep.substream({static_cast<std::uint64_t>(step), unit});
}

/// Runs burn_in + iterations sweeps and keeps every thin-th post-burn-in sweep.
ChainOutput run_chain(const VaDataset& data, const ChainConfig& config, ChainMode mode = ChainMode::fit,
                      const SweepObserver& observer = {});

/// Same, starting from a caller-built state (standardizer included).
ChainOutput run_chain(const VaDataset& data, const ChainConfig& config, ChainMode mode, ModelState state,
                      const SweepObserver& observer = {});

/// One full sweep. With `predict_targets` the target rows get fresh cause
/// probabilities (written to `target_probs`, n_S x L, when given) and labels.
void gibbs_sweep(ModelState& state, const VaDataset& data, const ChainConfig& config, ChainMode mode, int sweep,
                 NumericalEvents& events, bool predict_targets = false, Eigen::MatrixXd* target_probs = nullptr);

}  // namespace bfas
