#include "bfas/gibbs.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "bfas/errors.hpp"
#include "bfas/predictor.hpp"

namespace bfas {

void ChainConfig::validate(int L) const {
  if (iterations <= 0) throw DomainError("iterations must be positive");
  if (burn_in < 0) throw DomainError("burn-in must be nonnegative");
  if (thin < 1) throw DomainError("thin must be at least 1");
  if (K < 1) throw DomainError("K must be at least 1");
  if (R < 1 || R_tilde < 1) throw DomainError("Monte Carlo sizes must be at least 1");
  if (dirichlet_cause_concentration.size() != 0) {
    if (dirichlet_cause_concentration.size() != L)
      throw DomainError(fmt::format("cause concentration has {} entries, expected {}",
                                    dirichlet_cause_concentration.size(), L));
    if ((dirichlet_cause_concentration.array() <= 0.0).any()) throw DomainError("cause concentration must be positive");
  }
  if ((dirichlet_demog_concentration.array() <= 0.0).any()) throw DomainError("demographic concentration must be positive");
}

Eigen::VectorXd ChainConfig::cause_concentration(int L) const {
  if (dirichlet_cause_concentration.size() == 0) return Eigen::VectorXd::Ones(L);
  return dirichlet_cause_concentration;
}

std::vector<int> active_rows(const VaDataset& data, bool transductive) {
  std::vector<int> rows;
  for (int i = 0; i < data.n(); ++i)
    if (data.split[i] == Split::training || transductive) rows.push_back(i);
  return rows;
}

ModelState initialize_state(const VaDataset& data, const ChainConfig& config, RngStream& rng) {
  data.validate();
  config.validate(data.L);
  const int n = data.n(), p = data.p, K = config.K;

  ModelState s;
  s.loadings = Loadings::zeros(data.L, p, K);
  s.precisions = ShrinkagePrecisions::ones(p);
  s.standardizer = Standardizer::from_training(data);
  s.categorical = CategoricalModels::prior_means(config.cause_concentration(data.L), config.dirichlet_demog_concentration);

  s.latent.eta.resize(n, 2 * K);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 2 * K; ++k) s.latent.eta(i, k) = rng.normal();
  s.latent.z = Eigen::MatrixXd::Zero(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j)
      if (data.missing(i, j) == 0) s.latent.z(i, j) = data.x(i, j) == 1 ? 0.5 : -0.5;

  // empirical training marginals for the initial fill of missing age/sex
  double age_ones = 0, age_seen = 0, sex_ones = 0, sex_seen = 0;
  for (int i = 0; i < n; ++i) {
    if (data.split[i] != Split::training) continue;
    if (data.age[i] != kMissing) { age_ones += data.age[i]; age_seen += 1; }
    if (data.sex[i] != kMissing) { sex_ones += data.sex[i]; sex_seen += 1; }
  }
  const double age_rate = age_seen > 0 ? age_ones / age_seen : 0.5;
  const double sex_rate = sex_seen > 0 ? sex_ones / sex_seen : 0.5;

  s.age = data.age;
  s.sex = data.sex;
  s.cause = data.cause;
  for (int i = 0; i < n; ++i) {
    if (s.age[i] == kMissing) s.age[i] = rng.bernoulli(age_rate) ? 1 : 0;
    if (s.sex[i] == kMissing) s.sex[i] = rng.bernoulli(sex_rate) ? 1 : 0;
    if (data.split[i] == Split::target) s.cause[i] = sample_categorical(s.categorical.cause_prior, rng);
  }
  return s;
}

// ---- step 1 ---------------------------------------------------------------

Eigen::VectorXd design_vector(const ModelState& state, int i) {
  const int K = state.K();
  const auto cov = state.covariates(i);
  const auto eta = state.latent.eta.row(i);
  Eigen::VectorXd a(3 + 4 * K);
  a.head<3>() = cov.w;
  a.segment(3, K) = eta.head(K).transpose();
  a.segment(3 + K, K) = eta.tail(K).transpose();
  a.segment(3 + 2 * K, K) = cov.age_std() * eta.tail(K).transpose();
  a.segment(3 + 3 * K, K) = cov.sex_std() * eta.tail(K).transpose();
  return a;
}

Eigen::VectorXd loadings_prior_precision(const ShrinkagePrecisions& precisions, int j, int K) {
  Eigen::VectorXd d(3 + 4 * K);
  d.head<3>() = precisions.phi_B.row(j).transpose();
  d.segment(3, K).setConstant(precisions.phi_Lambda[j]);
  for (int q = 0; q < 3; ++q) d.segment(3 + (q + 1) * K, K).setConstant(precisions.phi_C(j, q));
  return d;
}

CanonicalGaussian loadings_conditional(const ModelState& state, const VaDataset& data,
                                       std::span<const int> rows_of_cause, int j) {
  const int d = 3 + 4 * state.K();
  CanonicalGaussian g;
  g.precision = loadings_prior_precision(state.precisions, j, state.K()).asDiagonal();
  g.linear = Eigen::VectorXd::Zero(d);
  for (int i : rows_of_cause) {
    if (data.missing(i, j) != 0) continue;
    const Eigen::VectorXd a = design_vector(state, i);
    g.precision.selfadjointView<Eigen::Lower>().rankUpdate(a);
    g.linear += a * state.latent.z(i, j);
  }
  g.precision.triangularView<Eigen::StrictlyUpper>() = g.precision.transpose();
  return g;
}

void set_loading_row(Loadings& loadings, int cause, int j, const Eigen::VectorXd& beta) {
  const int K = loadings.K;
  loadings.B[cause].row(j) = beta.head<3>().transpose();
  loadings.Lambda[cause].row(j) = beta.segment(3, K).transpose();
  for (int q = 0; q < 3; ++q) loadings.C[cause][q].row(j) = beta.segment(3 + (q + 1) * K, K).transpose();
}

Eigen::VectorXd loading_row(const Loadings& loadings, int cause, int j) {
  const int K = loadings.K;
  Eigen::VectorXd beta(3 + 4 * K);
  beta.head<3>() = loadings.B[cause].row(j).transpose();
  beta.segment(3, K) = loadings.Lambda[cause].row(j).transpose();
  for (int q = 0; q < 3; ++q) beta.segment(3 + (q + 1) * K, K) = loadings.C[cause][q].row(j).transpose();
  return beta;
}

namespace {

std::vector<std::vector<int>> rows_by_cause(const ModelState& state, std::span<const int> active) {
  std::vector<std::vector<int>> out(std::size_t(state.loadings.L));
  for (int i : active) out[std::size_t(state.cause[i])].push_back(i);
  return out;
}

}  // namespace

void update_loadings(ModelState& state, const VaDataset& data, std::span<const int> active, const RngStream& sweep,
                     NumericalEvents& events) {
  const int L = state.loadings.L, p = data.p, K = state.K();
  const int d = 3 + 4 * K;
  const auto by_cause = rows_by_cause(state, active);

  for (int y = 0; y < L; ++y) {
    const auto& rows = by_cause[std::size_t(y)];
    const auto m = Eigen::Index(rows.size());
    // Gram matrix over every row of this cause, then rows missing symptom j
    // are taken back out per column.
    Eigen::MatrixXd A(m, d);
    Eigen::MatrixXd Z(m, p);
    for (Eigen::Index r = 0; r < m; ++r) {
      A.row(r) = design_vector(state, rows[std::size_t(r)]).transpose();
      for (int j = 0; j < p; ++j) {
        const int i = rows[std::size_t(r)];
        Z(r, j) = data.missing(i, j) == 0 ? state.latent.z(i, j) : 0.0;
      }
    }
    const Eigen::MatrixXd gram = A.transpose() * A;
    const Eigen::MatrixXd cross = A.transpose() * Z;

    for (int j = 0; j < p; ++j) {
      CanonicalGaussian g;
      g.precision = gram;
      for (Eigen::Index r = 0; r < m; ++r)
        if (data.missing(rows[std::size_t(r)], j) != 0) g.precision.noalias() -= A.row(r).transpose() * A.row(r);
      g.precision.diagonal() += loadings_prior_precision(state.precisions, j, K);
      g.linear = cross.col(j);
      auto rng = step_stream(sweep, StepKey::loadings, std::uint64_t(y) * std::uint64_t(p) + std::uint64_t(j));
      const Eigen::VectorXd beta =
          sample_canonical(g, rng, &events, fmt::format("loadings of cause {} symptom {}", y, j));
      set_loading_row(state.loadings, y, j, beta);
    }
  }
}

// ---- step 2 ---------------------------------------------------------------

CanonicalGaussian factor_conditional(const ModelState& state, const VaDataset& data, int i) {
  const int y = state.cause[i];
  const int K2 = 2 * state.K();
  const auto cov = state.covariates(i);
  const Eigen::MatrixXd lt = effective_loading(state.loadings, y, cov);
  const Eigen::VectorXd resid = state.latent.z.row(i).transpose() - state.loadings.B[y] * cov.w;

  CanonicalGaussian g;
  g.precision = Eigen::MatrixXd::Identity(K2, K2);
  g.linear = Eigen::VectorXd::Zero(K2);
  for (int j = 0; j < data.p; ++j) {
    if (data.missing(i, j) != 0) continue;
    g.precision.noalias() += lt.row(j).transpose() * lt.row(j);
    g.linear += lt.row(j).transpose() * resid[j];
  }
  return g;
}

void update_factors(ModelState& state, const VaDataset& data, std::span<const int> active, const RngStream& sweep,
                    NumericalEvents& events) {
  for (int i : active) {
    auto rng = step_stream(sweep, StepKey::factors, std::uint64_t(i));
    const auto g = factor_conditional(state, data, i);
    state.latent.eta.row(i) = sample_canonical(g, rng, &events, fmt::format("factors of row {}", i)).transpose();
  }
}

// ---- steps 3-5 ------------------------------------------------------------

PrecisionConditionals precision_conditionals(const Loadings& loadings) {
  const int L = loadings.L, p = loadings.p, K = loadings.K;
  PrecisionConditionals c;
  c.shape_B = 0.5 * (L + 1);
  c.shape_factor = 0.5 * (L * K + 1);
  Eigen::MatrixXd sum_B = Eigen::MatrixXd::Zero(p, 3);
  Eigen::VectorXd sum_Lambda = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd sum_C = Eigen::MatrixXd::Zero(p, 3);
  for (int y = 0; y < L; ++y) {
    sum_B += loadings.B[y].array().square().matrix();
    sum_Lambda += loadings.Lambda[y].array().square().rowwise().sum().matrix();
    for (int q = 0; q < 3; ++q) sum_C.col(q) += loadings.C[y][q].array().square().rowwise().sum().matrix();
  }
  c.rate_B = 0.5 * (sum_B.array() + 1.0).matrix();
  c.rate_Lambda = 0.5 * (sum_Lambda.array() + 1.0).matrix();
  c.rate_C = 0.5 * (sum_C.array() + 1.0).matrix();
  return c;
}

void update_precisions(ModelState& state, const RngStream& sweep) {
  const auto c = precision_conditionals(state.loadings);
  const int p = state.loadings.p;
  for (int j = 0; j < p; ++j) {
    auto rng = step_stream(sweep, StepKey::precisions, std::uint64_t(j));
    for (int q = 0; q < 3; ++q) state.precisions.phi_B(j, q) = sample_gamma(c.shape_B, c.rate_B(j, q), rng);
    state.precisions.phi_Lambda[j] = sample_gamma(c.shape_factor, c.rate_Lambda[j], rng);
    for (int q = 0; q < 3; ++q) state.precisions.phi_C(j, q) = sample_gamma(c.shape_factor, c.rate_C(j, q), rng);
  }
}

// ---- step 6 ---------------------------------------------------------------

double latent_mean(const ModelState& state, int i, int j) {
  const int y = state.cause[i];
  const int K = state.K();
  const auto cov = state.covariates(i);
  const auto eta = state.latent.eta.row(i);
  double m = state.loadings.B[y].row(j).dot(cov.w) + state.loadings.Lambda[y].row(j).dot(eta.head(K));
  const auto& C = state.loadings.C[y];
  for (int k = 0; k < K; ++k)
    m += (C[0](j, k) + cov.age_std() * C[1](j, k) + cov.sex_std() * C[2](j, k)) * eta[K + k];
  return m;
}

void update_latent_z(ModelState& state, const VaDataset& data, std::span<const int> active, const RngStream& sweep) {
  for (int i : active) {
    auto rng = step_stream(sweep, StepKey::latent, std::uint64_t(i));
    for (int j = 0; j < data.p; ++j) {
      if (data.missing(i, j) != 0) continue;
      const auto support = data.x(i, j) == 1 ? Support::positive : Support::negative;
      state.latent.z(i, j) = sample_truncated_normal(latent_mean(state, i, j), support, rng);
    }
  }
}

// ---- step 7 ---------------------------------------------------------------

Eigen::MatrixXd demog_conditional(const ModelState& state, std::span<const int> active) {
  const int L = state.loadings.L;
  Eigen::MatrixXd conc = state.categorical.concentration_demog.transpose().replicate(L, 1);
  for (int i : active) conc(state.cause[i], demog_cell(state.age[i], state.sex[i])) += 1.0;
  return conc;
}

void update_demog_probs(ModelState& state, std::span<const int> active, const RngStream& sweep) {
  const Eigen::MatrixXd conc = demog_conditional(state, active);
  for (int y = 0; y < state.loadings.L; ++y) {
    auto rng = step_stream(sweep, StepKey::demog, std::uint64_t(y));
    state.categorical.demog.row(y) = sample_dirichlet(conc.row(y).transpose(), rng).transpose();
  }
}

// ---- step 8 ---------------------------------------------------------------

double log_symptom_likelihood(const ModelState& state, const VaDataset& data, int i, int cause, int age, int sex) {
  const auto cov = state.standardizer.covariates(age, sex);
  const Eigen::MatrixXd lt = effective_loading(state.loadings, cause, cov);
  const Eigen::VectorXd mean = state.loadings.B[cause] * cov.w + lt * state.latent.eta.row(i).transpose();
  double s = 0.0;
  for (int j = 0; j < data.p; ++j) {
    if (data.missing(i, j) != 0) continue;
    s += log_std_normal_cdf(data.x(i, j) == 1 ? mean[j] : -mean[j]);
  }
  return s;
}

namespace {

Eigen::Vector2d two_point(const Eigen::Vector2d& log_lik, const Eigen::Vector2d& cells, bool* fallback) {
  Eigen::Vector2d lw;
  for (int v = 0; v < 2; ++v)
    lw[v] = cells[v] > 0.0 ? log_lik[v] + std::log(cells[v]) : -std::numeric_limits<double>::infinity();
  const double mx = lw.maxCoeff();
  if (fallback) *fallback = !std::isfinite(mx);
  if (std::isfinite(mx)) {
    Eigen::Vector2d pr(std::exp(lw[0] - mx), std::exp(lw[1] - mx));
    return pr / pr.sum();
  }
  // table-only conditional
  if (cells.sum() > 0.0) return cells / cells.sum();
  return Eigen::Vector2d(0.5, 0.5);
}

}  // namespace

Eigen::Vector2d age_conditional(const ModelState& state, const VaDataset& data, int i, bool* fallback) {
  const int y = state.cause[i], b = state.sex[i];
  Eigen::Vector2d ll, cells;
  for (int a = 0; a < 2; ++a) {
    ll[a] = log_symptom_likelihood(state, data, i, y, a, b);
    cells[a] = state.categorical.demog(y, demog_cell(a, b));
  }
  return two_point(ll, cells, fallback);
}

Eigen::Vector2d sex_conditional(const ModelState& state, const VaDataset& data, int i, bool* fallback) {
  const int y = state.cause[i], a = state.age[i];
  Eigen::Vector2d ll, cells;
  for (int b = 0; b < 2; ++b) {
    ll[b] = log_symptom_likelihood(state, data, i, y, a, b);
    cells[b] = state.categorical.demog(y, demog_cell(a, b));
  }
  return two_point(ll, cells, fallback);
}

void impute_demographics(ModelState& state, const VaDataset& data, std::span<const int> active,
                         const RngStream& sweep, NumericalEvents& events) {
  for (int i : active) {
    if (data.age[i] != kMissing && data.sex[i] != kMissing) continue;
    auto rng = step_stream(sweep, StepKey::impute, std::uint64_t(i));
    bool fallback = false;
    if (data.age[i] == kMissing) {
      const auto pr = age_conditional(state, data, i, &fallback);
      if (fallback) ++events.imputation_fallback;
      state.age[i] = rng.uniform() < pr[1] ? 1 : 0;
    }
    if (data.sex[i] == kMissing) {
      const auto pr = sex_conditional(state, data, i, &fallback);
      if (fallback) ++events.imputation_fallback;
      state.sex[i] = rng.uniform() < pr[1] ? 1 : 0;
    }
  }
}

// ---- step 9 ---------------------------------------------------------------

Eigen::VectorXd relevance_cause_conditional(const ModelState& state, const VaDataset& data,
                                            const ChainConfig& config) {
  const int L = state.loadings.L;
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(L);
  double n = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    if (data.split[i] != Split::training) continue;
    counts[data.cause[i]] += 1.0;
    n += 1.0;
  }
  if (config.relevance_cause_weights == RelevanceCauseWeights::fractions && n > 0.0) counts /= n;
  return state.categorical.concentration_cause + counts;
}

// ---- chain ----------------------------------------------------------------

RngStream sweep_stream(std::uint64_t seed, int sweep) { return RngStream(seed).substream({std::uint64_t(sweep)}); }

void gibbs_sweep(ModelState& state, const VaDataset& data, const ChainConfig& config, ChainMode mode, int sweep,
                 NumericalEvents& events, bool predict_targets, Eigen::MatrixXd* target_probs) {
  const auto rng = sweep_stream(config.seed, sweep);
  const bool transductive = mode == ChainMode::fit && config.transductive;
  const auto active = active_rows(data, transductive);

  update_loadings(state, data, active, rng, events);
  update_factors(state, data, active, rng, events);
  update_precisions(state, rng);
  update_latent_z(state, data, active, rng);
  update_demog_probs(state, active, rng);
  impute_demographics(state, data, active, rng, events);

  if (mode == ChainMode::relevance) {
    auto r = step_stream(rng, StepKey::cause_prior);
    state.categorical.cause_prior = sample_dirichlet(relevance_cause_conditional(state, data, config), r);
    return;
  }
  if (!predict_targets) return;

  const auto targets = data.rows(Split::target);
  if (targets.empty()) return;
  if (target_probs) target_probs->resize(Eigen::Index(targets.size()), state.loadings.L);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(state.loadings.L);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const int i = targets[k];
    auto r = step_stream(rng, StepKey::predict, std::uint64_t(i));
    const auto post = predict_cause(state, data, i, config.R, r);
    if (post.fallback) ++events.prediction_fallback;
    state.cause[i] = post.label;
    counts[post.label] += 1.0;
    if (target_probs) target_probs->row(Eigen::Index(k)) = post.probs.transpose();
  }
  if (config.cause_prior_update == CausePriorUpdate::target_labels) {
    auto r = step_stream(rng, StepKey::cause_prior);
    state.categorical.cause_prior = sample_dirichlet(state.categorical.concentration_cause + counts, r);
  }
}

Eigen::VectorXd ChainOutput::csmf_mean() const {
  if (csmf_draws.empty()) return {};
  Eigen::VectorXd m = Eigen::VectorXd::Zero(csmf_draws.front().size());
  for (const auto& d : csmf_draws) m += d;
  return m / double(csmf_draws.size());
}

Eigen::MatrixXd ChainOutput::target_prob_mean() const {
  if (kept_sweeps.empty()) return target_prob_sum;
  return target_prob_sum / double(kept_sweeps.size());
}

ChainOutput run_chain(const VaDataset& data, const ChainConfig& config, ChainMode mode, const SweepObserver& observer) {
  auto init = RngStream(config.seed).substream({~std::uint64_t{0}});
  return run_chain(data, config, mode, initialize_state(data, config, init), observer);
}

ChainOutput run_chain(const VaDataset& data, const ChainConfig& config, ChainMode mode, ModelState state,
                      const SweepObserver& observer) {
  config.validate(data.L);
  ChainOutput out;
  if (mode == ChainMode::fit) out.target_rows = data.rows(Split::target);
  const bool has_targets = !out.target_rows.empty();
  const int L = data.L;
  out.target_prob_sum = Eigen::MatrixXd::Zero(Eigen::Index(out.target_rows.size()), L);
  // labels are only needed every sweep when something downstream reads them
  const bool predict_every_sweep =
      has_targets && (config.transductive || config.cause_prior_update == CausePriorUpdate::target_labels);

  const int total = config.burn_in + config.iterations;
  Eigen::MatrixXd probs;
  std::vector<int> labels(out.target_rows.size());
  for (int s = 0; s < total; ++s) {
    const bool kept = s >= config.burn_in && (s - config.burn_in + 1) % config.thin == 0;
    const bool predict = mode == ChainMode::fit && has_targets && (predict_every_sweep || kept);
    try {
      gibbs_sweep(state, data, config, mode, s, out.events, predict, &probs);
    } catch (const NumericalError& e) {
      throw NumericalError(fmt::format("sweep {}: {}", s, e.what()));
    }
    if (!kept) continue;
    out.kept_sweeps.push_back(s);
    if (mode == ChainMode::fit && has_targets) {
      for (std::size_t k = 0; k < labels.size(); ++k) labels[k] = state.cause[out.target_rows[k]];
      out.csmf_draws.push_back(csmf_draw(labels, L));
      out.target_prob_sum += probs;
    }
    if (config.keep_states) out.snapshots.push_back(state);
    if (observer) observer(s, state, sweep_stream(config.seed, s));
  }
  return out;
}

}  // namespace bfas
