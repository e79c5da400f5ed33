#pragma once

// Model quantities of the age/sex-dependent probit factor model and the
// deterministic math on them. Nothing in here draws random numbers.
//
// Symptoms follow x_ij = 1(z_ij > 0) with
//   z_i = B_y w_i + Lambda_y eta_i + D_y gamma_i + eps_i,   eps_i ~ N(0, I_p)
//   D_y = C_y^(1) + C_y^(2) age_std + C_y^(3) sex_std
// and w_i = (1, age_std, sex_std)'. Causes are 0-based internally.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace bfas {

inline constexpr int kMissing = -1;

using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Split : std::uint8_t { training, target };

/// Binary VA records. Training and target rows live in one table.
struct VaDataset {
  int p = 0;
  int L = 0;
  BinaryMatrix x;        ///< n x p, 0 where missing
  BinaryMatrix missing;  ///< n x p, 1 means x_ij is missing
  std::vector<int> age;  ///< 0/1 or kMissing
  std::vector<int> sex;  ///< 0/1 or kMissing
  std::vector<int> cause;  ///< 0..L-1 for training rows, kMissing for target rows
  std::vector<Split> split;
  std::vector<std::string> ids;
  std::vector<std::string> cause_labels;   ///< index -> external label
  std::vector<std::string> symptom_names;  ///< length p

  int n() const { return static_cast<int>(split.size()); }
  std::vector<int> rows(Split which) const;
  int count(Split which) const;
  double age_missing_rate() const;
  double sex_missing_rate() const;
  double symptom_missing_rate() const;

  std::span<const std::uint8_t> x_row(int i) const { return {x.data() + std::size_t(i) * p, std::size_t(p)}; }
  std::span<const std::uint8_t> missing_row(int i) const {
    return {missing.data() + std::size_t(i) * p, std::size_t(p)};
  }

  /// Throws StructuralError when any invariant is broken.
  void validate() const;
};

/// w = (1, age_std, sex_std) plus the raw binary values behind it.
struct CovariateVector {
  Eigen::Vector3d w = Eigen::Vector3d(1.0, 0.0, 0.0);
  int raw_age = 0;
  int raw_sex = 0;

  double age_std() const { return w[1]; }
  double sex_std() const { return w[2]; }
};

/// Location/scale for age and sex, estimated on training rows only.
struct Standardizer {
  double age_mean = 0.0;
  double age_sd = 1.0;
  double sex_mean = 0.0;
  double sex_sd = 1.0;

  /// Zero-variance (or all-missing) covariates fall back to sd = 1.
  static Standardizer from_training(const VaDataset& data);
  /// No rescaling; w carries the raw 0/1 values.
  static Standardizer identity() { return {}; }

  CovariateVector covariates(int raw_age, int raw_sex) const;
};

struct Loadings {
  int L = 0;
  int p = 0;
  int K = 0;
  std::vector<Eigen::MatrixXd> B;       ///< per cause, p x 3
  std::vector<Eigen::MatrixXd> Lambda;  ///< per cause, p x K
  std::vector<std::array<Eigen::MatrixXd, 3>> C;  ///< per cause and q, p x K

  static Loadings zeros(int L, int p, int K);
  void check() const;
};

struct ShrinkagePrecisions {
  Eigen::MatrixXd phi_B;       ///< p x 3
  Eigen::VectorXd phi_Lambda;  ///< p
  Eigen::MatrixXd phi_C;       ///< p x 3

  static ShrinkagePrecisions ones(int p);
};

struct LatentState {
  Eigen::MatrixXd z;    ///< n x p, meaningful where the symptom is observed
  Eigen::MatrixXd eta;  ///< n x 2K, (eta_i', gamma_i')
};

/// Demographic cell index for (age, sex): (0,0)=0, (0,1)=1, (1,0)=2, (1,1)=3.
constexpr int demog_cell(int age, int sex) { return 2 * age + sex; }

struct CategoricalModels {
  Eigen::MatrixXd demog;        ///< L x 4, rows are P(age, sex | cause)
  Eigen::VectorXd cause_prior;  ///< L
  Eigen::Vector4d concentration_demog = Eigen::Vector4d::Ones();
  Eigen::VectorXd concentration_cause;

  /// Tables at the Dirichlet prior means.
  static CategoricalModels prior_means(const Eigen::VectorXd& concentration_cause,
                                       const Eigen::Vector4d& concentration_demog);
  void check() const;
};

/// Everything one sweep of the sampler reads and writes.
struct ModelState {
  Loadings loadings;
  ShrinkagePrecisions precisions;
  LatentState latent;
  CategoricalModels categorical;
  Standardizer standardizer;
  std::vector<int> age;    ///< current values, imputed where the data are missing
  std::vector<int> sex;
  std::vector<int> cause;  ///< true labels for training rows, sampled labels for target rows

  int K() const { return loadings.K; }
  CovariateVector covariates(int i) const { return standardizer.covariates(age[i], sex[i]); }
};

/// D_y = C^(1) + C^(2) age_std + C^(3) sex_std  (p x K).
Eigen::MatrixXd interaction_loading(const Loadings& loadings, int cause, const CovariateVector& w);

/// [Lambda_y | D_y]  (p x 2K).
Eigen::MatrixXd effective_loading(const Loadings& loadings, int cause, const CovariateVector& w);

/// Lambda_y Lambda_y' + D_y D_y' + I_p.
Eigen::MatrixXd implied_covariance(const Loadings& loadings, int cause, const CovariateVector& w);

/// Closed-form P(x_j = 1 | y, w) with the factors integrated out.
double probit_marginal(const Loadings& loadings, int cause, const CovariateVector& w, int j);

double std_normal_cdf(double x);
/// log Phi(x), accurate far into the lower tail.
double log_std_normal_cdf(double x);

/// log(sum(exp(v))) with the max shifted out; -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> v);

}  // namespace bfas
