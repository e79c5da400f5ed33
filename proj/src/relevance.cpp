#include "bfas/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include <fmt/format.h>

#include "bfas/errors.hpp"
#include "bfas/predictor.hpp"

namespace bfas {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

double lse2(double a, double b) {
  const double mx = std::max(a, b);
  if (!std::isfinite(mx)) return mx;
  return mx + std::log(std::exp(a - mx) + std::exp(b - mx));
}

double log_mean_exp(const Eigen::VectorXd& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).exp().sum()) - std::log(double(v.size()));
}

void check_predictor(const ModelState& state, int predictor) {
  if (predictor < 0 || predictor >= state.loadings.p + 2)
    throw StructuralError(fmt::format("predictor index {} outside [0, {})", predictor, state.loadings.p + 2));
}

// Running mean/variance.
struct Welford {
  long n = 0;
  double mean = 0.0, m2 = 0.0;
  void add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / double(n);
    m2 += d * (v - mean);
  }
  double variance() const { return n > 1 ? m2 / double(n - 1) : 0.0; }
};

}  // namespace

double entropy(const Eigen::VectorXd& dist) {
  if (dist.size() == 0) throw DomainError("entropy of an empty distribution");
  if ((dist.array() < 0.0).any() || std::abs(dist.sum() - 1.0) > 1e-9)
    throw DomainError("entropy needs a probability vector");
  double h = 0.0;
  for (Eigen::Index k = 0; k < dist.size(); ++k)
    if (dist[k] > 0.0) h -= dist[k] * std::log(dist[k]);
  return h;
}

Eigen::MatrixXd predictor_joint(const ModelState& state, int predictor) {
  check_predictor(state, predictor);
  const int L = state.loadings.L;
  const auto& demog = state.categorical.demog;
  const auto& prior = state.categorical.cause_prior;
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(L, 2);
  for (int y = 0; y < L; ++y) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const double cell = prior[y] * demog(y, demog_cell(a, b));
        if (predictor == kAgePredictor) {
          joint(y, a) += cell;
        } else if (predictor == kSexPredictor) {
          joint(y, b) += cell;
        } else {
          const double q = probit_marginal(state.loadings, y, state.standardizer.covariates(a, b), predictor - 2);
          joint(y, 1) += cell * q;
          joint(y, 0) += cell * (1.0 - q);
        }
      }
    }
  }
  return joint;
}

double mutual_information(const Eigen::MatrixXd& joint) {
  const Eigen::VectorXd row = joint.rowwise().sum();
  const Eigen::RowVectorXd col = joint.colwise().sum();
  double mi = 0.0;
  for (Eigen::Index y = 0; y < joint.rows(); ++y)
    for (Eigen::Index v = 0; v < joint.cols(); ++v)
      if (joint(y, v) > 0.0) mi += joint(y, v) * std::log(joint(y, v) / (row[y] * col[v]));
  return mi;
}

double mutual_information(const ModelState& state, int predictor) {
  return mutual_information(predictor_joint(state, predictor));
}

SymptomLikelihoodTable::SymptomLikelihoodTable(const ModelState& state, Eigen::MatrixXd factor_draws)
    : L_(state.loadings.L), p_(state.loadings.p), R_(int(factor_draws.rows())) {
  if (factor_draws.cols() != 2 * state.K()) throw StructuralError("factor draws must have 2K columns");
  if (R_ < 1) throw DomainError("need at least one factor draw");
  log_p1_.resize(std::size_t(L_) * 4);
  log_p0_.resize(std::size_t(L_) * 4);
  for (int y = 0; y < L_; ++y) {
    for (int c = 0; c < 4; ++c) {
      const auto w = state.standardizer.covariates(c >> 1, c & 1);
      const Eigen::MatrixXd lt = effective_loading(state.loadings, y, w);
      const Eigen::VectorXd mean = state.loadings.B[y] * w.w;
      Eigen::MatrixXd lin = factor_draws * lt.transpose();
      lin.rowwise() += mean.transpose();
      auto& p1 = log_p1_[index(y, c)];
      auto& p0 = log_p0_[index(y, c)];
      p1.resize(R_, p_);
      p0.resize(R_, p_);
      for (int r = 0; r < R_; ++r) {
        for (int j = 0; j < p_; ++j) {
          p1(r, j) = log_std_normal_cdf(lin(r, j));
          p0(r, j) = log_std_normal_cdf(-lin(r, j));
        }
      }
    }
  }
}

double SymptomLikelihoodTable::log_likelihood(int cause, int cell, std::span<const int> x) const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(R_);
  for (int j = 0; j < p_; ++j) s += log_prob(cause, cell, x[std::size_t(j)]).col(j);
  return log_mean_exp(s);
}

CmiEstimate conditional_mutual_information(const ModelState& state, const SymptomLikelihoodTable& table,
                                           int R_tilde, RngStream& rng) {
  if (R_tilde < 1) throw DomainError("R_tilde must be at least 1");
  const int L = table.causes(), p = table.symptoms(), R = table.draws();
  const int n_pred = p + 2;
  const auto& prior = state.categorical.cause_prior;
  const auto& demog = state.categorical.demog;

  Eigen::MatrixXd base(L, 4);
  for (int y = 0; y < L; ++y)
    for (int c = 0; c < 4; ++c) base(y, c) = safe_log(prior[y]) + safe_log(demog(y, c));

  std::vector<Welford> acc(static_cast<std::size_t>(n_pred));
  std::vector<long> skipped(static_cast<std::size_t>(n_pred), 0);
  std::vector<int> x(static_cast<std::size_t>(p));
  Eigen::VectorXd t(R);
  // [cause][0: sampled cell, 1: age flipped, 2: sex flipped]
  std::vector<std::array<Eigen::VectorXd, 3>> sums(static_cast<std::size_t>(L));
  Eigen::MatrixXd lj(L, 3);
  Eigen::MatrixXd J(L, 2);  // column 0: sampled value, column 1: the other value

  auto log_ratio = [&](int y_s, long& skip) -> std::optional<double> {
    const double num = J(y_s, 0);
    if (!std::isfinite(num)) {
      ++skip;
      return std::nullopt;
    }
    double all = kNegInf, col0 = kNegInf;
    for (int y = 0; y < L; ++y) {
      all = lse2(all, lse2(J(y, 0), J(y, 1)));
      col0 = lse2(col0, J(y, 0));
    }
    return num + all - lse2(J(y_s, 0), J(y_s, 1)) - col0;
  };

  for (int sample = 0; sample < R_tilde; ++sample) {
    const int y_s = sample_categorical(prior, rng);
    const int cell = sample_categorical(demog.row(y_s).transpose(), rng);
    const int a = cell >> 1, b = cell & 1;
    const int r_star = std::min(R - 1, int(rng.uniform() * R));
    const auto& p1 = table.log_prob(y_s, cell, 1);
    for (int j = 0; j < p; ++j) x[std::size_t(j)] = rng.uniform() < std::exp(p1(r_star, j)) ? 1 : 0;

    const std::array<int, 3> cells = {cell, demog_cell(1 - a, b), demog_cell(a, 1 - b)};
    for (int y = 0; y < L; ++y) {
      for (int k = 0; k < 3; ++k) {
        auto& sum = sums[std::size_t(y)][std::size_t(k)];
        sum = Eigen::VectorXd::Zero(R);
        for (int j = 0; j < p; ++j) sum += table.log_prob(y, cells[std::size_t(k)], x[std::size_t(j)]).col(j);
        lj(y, k) = base(y, cells[std::size_t(k)]) + log_mean_exp(sum);
      }
    }

    // age
    for (int y = 0; y < L; ++y) { J(y, 0) = lj(y, 0); J(y, 1) = lj(y, 1); }
    if (auto v = log_ratio(y_s, skipped[kAgePredictor])) acc[kAgePredictor].add(*v);
    // sex
    for (int y = 0; y < L; ++y) { J(y, 0) = lj(y, 0); J(y, 1) = lj(y, 2); }
    if (auto v = log_ratio(y_s, skipped[kSexPredictor])) acc[kSexPredictor].add(*v);
    // symptoms: swap one column of the sampled-cell sum
    for (int j = 0; j < p; ++j) {
      const int xj = x[std::size_t(j)];
      for (int y = 0; y < L; ++y) {
        J(y, 0) = lj(y, 0);
        t = sums[std::size_t(y)][0] - table.log_prob(y, cell, xj).col(j) + table.log_prob(y, cell, 1 - xj).col(j);
        J(y, 1) = base(y, cell) + log_mean_exp(t);
      }
      const auto k = std::size_t(symptom_predictor(j));
      if (auto v = log_ratio(y_s, skipped[k])) acc[k].add(*v);
    }
  }

  CmiEstimate out;
  out.cmi.resize(n_pred);
  out.mc_sd.resize(n_pred);
  out.skipped.resize(n_pred);
  for (int k = 0; k < n_pred; ++k) {
    const auto& w = acc[std::size_t(k)];
    out.cmi[k] = w.n > 0 ? w.mean : std::numeric_limits<double>::quiet_NaN();
    out.mc_sd[k] = w.n > 0 ? std::sqrt(w.variance() / double(w.n)) : std::numeric_limits<double>::quiet_NaN();
    out.skipped[k] = double(skipped[std::size_t(k)]) / double(R_tilde);
  }
  return out;
}

CmiEstimate conditional_mutual_information(const ModelState& state, int R, int R_tilde, RngStream& rng) {
  const SymptomLikelihoodTable table(state, draw_factor_samples(R, 2 * state.K(), rng));
  return conditional_mutual_information(state, table, R_tilde, rng);
}

EnumeratedRelevance enumerate_relevance(const ModelState& state, const SymptomLikelihoodTable& table) {
  const int L = table.causes(), p = table.symptoms();
  if (p > 16) throw DomainError("enumeration is limited to 16 symptoms");
  const int n_pred = p + 2;
  const std::size_t n_conf = std::size_t(1) << n_pred;
  const auto& prior = state.categorical.cause_prior;
  const auto& demog = state.categorical.demog;

  // joint[y][c], c = age | sex << 1 | x << 2
  Eigen::MatrixXd joint(L, Eigen::Index(n_conf));
  std::vector<int> x(static_cast<std::size_t>(p));
  for (std::size_t c = 0; c < n_conf; ++c) {
    const int a = int(c & 1), b = int((c >> 1) & 1);
    for (int j = 0; j < p; ++j) x[std::size_t(j)] = int((c >> (j + 2)) & 1);
    for (int y = 0; y < L; ++y) {
      const double w = prior[y] * demog(y, demog_cell(a, b));
      joint(y, Eigen::Index(c)) = w > 0.0 ? w * std::exp(table.log_likelihood(y, demog_cell(a, b), x)) : 0.0;
    }
  }
  joint /= joint.sum();  // absorbs rounding only
  const Eigen::RowVectorXd px = joint.colwise().sum();
  const Eigen::VectorXd py = joint.rowwise().sum();

  EnumeratedRelevance out;
  out.mi.resize(n_pred);
  out.cmi.resize(n_pred);
  out.cmi_rest_given.resize(n_pred);
  for (int y = 0; y < L; ++y)
    for (std::size_t c = 0; c < n_conf; ++c)
      if (joint(y, Eigen::Index(c)) > 0.0)
        out.total_mi += joint(y, Eigen::Index(c)) * std::log(joint(y, Eigen::Index(c)) / (py[y] * px[Eigen::Index(c)]));

  for (int k = 0; k < n_pred; ++k) {
    const std::size_t bit = std::size_t(1) << k;
    Eigen::MatrixXd table_k = Eigen::MatrixXd::Zero(L, 2);
    for (int y = 0; y < L; ++y)
      for (std::size_t c = 0; c < n_conf; ++c) table_k(y, (c & bit) ? 1 : 0) += joint(y, Eigen::Index(c));
    out.mi[k] = mutual_information(table_k);
    const Eigen::RowVectorXd pk = table_k.colwise().sum();

    double cmi = 0.0, rest = 0.0;
    for (int y = 0; y < L; ++y) {
      for (std::size_t c = 0; c < n_conf; ++c) {
        const double pj = joint(y, Eigen::Index(c));
        if (pj <= 0.0) continue;
        const auto ci = Eigen::Index(c), cf = Eigen::Index(c ^ bit);
        const double p_y_rest = pj + joint(y, cf);        // P(y, x~_{-k})
        const double p_rest = px[ci] + px[cf];             // P(x~_{-k})
        cmi += pj * std::log(pj * p_rest / (p_y_rest * px[ci]));
        const int v = (c & bit) ? 1 : 0;
        rest += pj * std::log(pj * pk[v] / (table_k(y, v) * px[ci]));
      }
    }
    out.cmi[k] = cmi;
    out.cmi_rest_given[k] = rest;
  }
  return out;
}

KlByGroup kl_by_group(const ModelState& state, int symptom) {
  if (symptom < 0 || symptom >= state.loadings.p)
    throw StructuralError(fmt::format("symptom index {} outside [0, {})", symptom, state.loadings.p));
  const int L = state.loadings.L;
  const auto& prior = state.categorical.cause_prior;
  const auto& demog = state.categorical.demog;
  KlByGroup out;
  for (int c = 0; c < 4; ++c) {
    Eigen::MatrixXd joint(L, 2);
    double pc = 0.0;
    for (int y = 0; y < L; ++y) {
      const double w = prior[y] * demog(y, c);
      const double q = probit_marginal(state.loadings, y, state.standardizer.covariates(c >> 1, c & 1), symptom);
      joint(y, 1) = w * q;
      joint(y, 0) = w * (1.0 - q);
      pc += w;
    }
    out.cell_prob[std::size_t(c)] = pc;
    out.defined[std::size_t(c)] = pc > 0.0;
    if (!(pc > 0.0)) {
      out.kl[std::size_t(c)] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    out.kl[std::size_t(c)] = mutual_information(joint / pc);
    out.weighted += pc * out.kl[std::size_t(c)];
  }
  return out;
}

SweepRelevance evaluate_relevance(const ModelState& state, int R, int R_tilde, RngStream& rng) {
  const int p = state.loadings.p;
  SweepRelevance out;
  out.cause_entropy = entropy(state.categorical.cause_prior);
  if (!(out.cause_entropy > 0.0))
    throw DomainError("cause entropy is zero; standardized relevance is undefined with a single cause");
  const double h = out.cause_entropy;

  out.mi_std.resize(p + 2);
  for (int k = 0; k < p + 2; ++k) out.mi_std[k] = mutual_information(state, k) / h;

  const auto cmi = conditional_mutual_information(state, R, R_tilde, rng);
  out.cmi_std = cmi.cmi / h;
  out.cmi_mc_sd = cmi.mc_sd / h;
  out.cmi_skipped = cmi.skipped;

  out.kl.resize(p, 4);
  out.kl_weighted.resize(p);
  for (int j = 0; j < p; ++j) {
    const auto kl = kl_by_group(state, j);
    for (int c = 0; c < 4; ++c) out.kl(j, c) = kl.kl[std::size_t(c)];
    out.kl_weighted[j] = kl.weighted;
  }
  return out;
}

void RelevanceSummary::add(const SweepRelevance& sweep) { draws_.push_back(sweep); }

namespace {

template <typename Get>
Eigen::VectorXd vector_mean(const std::vector<SweepRelevance>& draws, Get get) {
  if (draws.empty()) return {};
  Eigen::VectorXd m = Eigen::VectorXd::Zero(get(draws.front()).size());
  for (const auto& d : draws) m += get(d);
  return m / double(draws.size());
}

template <typename Get>
Eigen::VectorXd vector_sd(const std::vector<SweepRelevance>& draws, Get get) {
  if (draws.empty()) return {};
  const Eigen::VectorXd m = vector_mean(draws, get);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m.size());
  if (draws.size() < 2) return v;
  for (const auto& d : draws) v += (get(d) - m).array().square().matrix();
  return (v / double(draws.size() - 1)).cwiseSqrt();
}

// NaN-aware mean/sd over the p x 4 KL tables.
Eigen::MatrixXd kl_moment(const std::vector<SweepRelevance>& draws, bool sd) {
  if (draws.empty()) return {};
  const auto& first = draws.front().kl;
  Eigen::MatrixXd out(first.rows(), first.cols());
  for (Eigen::Index j = 0; j < first.rows(); ++j) {
    for (Eigen::Index c = 0; c < first.cols(); ++c) {
      Welford w;
      for (const auto& d : draws)
        if (std::isfinite(d.kl(j, c))) w.add(d.kl(j, c));
      out(j, c) = w.n == 0 ? std::numeric_limits<double>::quiet_NaN() : (sd ? std::sqrt(w.variance()) : w.mean);
    }
  }
  return out;
}

}  // namespace

Eigen::VectorXd RelevanceSummary::mi_mean() const { return vector_mean(draws_, [](const auto& d) { return d.mi_std; }); }
Eigen::VectorXd RelevanceSummary::mi_sd() const { return vector_sd(draws_, [](const auto& d) { return d.mi_std; }); }
Eigen::VectorXd RelevanceSummary::cmi_mean() const { return vector_mean(draws_, [](const auto& d) { return d.cmi_std; }); }
Eigen::VectorXd RelevanceSummary::cmi_sd() const { return vector_sd(draws_, [](const auto& d) { return d.cmi_std; }); }
Eigen::VectorXd RelevanceSummary::cmi_mc_sd_mean() const {
  return vector_mean(draws_, [](const auto& d) { return d.cmi_mc_sd; });
}
Eigen::VectorXd RelevanceSummary::cmi_skipped_mean() const {
  return vector_mean(draws_, [](const auto& d) { return d.cmi_skipped; });
}
Eigen::MatrixXd RelevanceSummary::kl_mean() const { return kl_moment(draws_, false); }
Eigen::MatrixXd RelevanceSummary::kl_sd() const { return kl_moment(draws_, true); }
Eigen::VectorXd RelevanceSummary::kl_weighted_mean() const {
  return vector_mean(draws_, [](const auto& d) { return d.kl_weighted; });
}
Eigen::VectorXd RelevanceSummary::kl_weighted_sd() const {
  return vector_sd(draws_, [](const auto& d) { return d.kl_weighted; });
}

std::vector<int> descending_ranks(const Eigen::VectorXd& values) {
  std::vector<int> order(std::size_t(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double va = std::isfinite(values[a]) ? values[a] : kNegInf;
    const double vb = std::isfinite(values[b]) ? values[b] : kNegInf;
    return va > vb;
  });
  std::vector<int> ranks(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) ranks[std::size_t(order[r])] = int(r) + 1;
  return ranks;
}

}  // namespace bfas
