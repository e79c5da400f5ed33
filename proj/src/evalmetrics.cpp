#include "bfas/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "bfas/errors.hpp"

namespace bfas {

double csmf_accuracy(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate) {
  if (truth.size() != estimate.size())
    throw DomainError(fmt::format("CSMF lengths differ ({} vs {})", truth.size(), estimate.size()));
  if (truth.size() == 0) throw DomainError("empty CSMF");
  const double denom = 2.0 * (1.0 - truth.minCoeff());
  if (!(denom > 0.0)) throw DomainError("CSMF accuracy is undefined when the true distribution is degenerate");
  return 1.0 - (truth - estimate).cwiseAbs().sum() / denom;
}

std::optional<double> cramers_v(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DomainError("Cramer's V columns differ in length");
  std::map<int, int> ra, cb;
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == kMissing || b[i] == kMissing) continue;
    pairs.emplace_back(a[i], b[i]);
    ra.emplace(a[i], 0);
    cb.emplace(b[i], 0);
  }
  if (ra.size() < 2 || cb.size() < 2) return std::nullopt;
  int k = 0;
  for (auto& [_, idx] : ra) idx = k++;
  k = 0;
  for (auto& [_, idx] : cb) idx = k++;

  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(Eigen::Index(ra.size()), Eigen::Index(cb.size()));
  for (auto [u, v] : pairs) table(ra[u], cb[v]) += 1.0;
  const double n = double(pairs.size());
  const Eigen::VectorXd rows = table.rowwise().sum();
  const Eigen::RowVectorXd cols = table.colwise().sum();
  double chi2 = 0.0;
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    for (Eigen::Index c = 0; c < table.cols(); ++c) {
      const double expected = rows[r] * cols[c] / n;
      const double d = table(r, c) - expected;
      chi2 += d * d / expected;
    }
  }
  const double m = double(std::min(table.rows(), table.cols()) - 1);
  return std::sqrt(std::min(1.0, chi2 / n / m));
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw DomainError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (double(values.size()) - 1.0) * prob;
  const auto lo = std::size_t(std::floor(h));
  const auto hi = std::min(values.size() - 1, lo + 1);
  return values[lo] + (h - double(lo)) * (values[hi] - values[lo]);
}

double interval_coverage(const std::vector<Eigen::VectorXd>& draws, const Eigen::VectorXd& truth, double level) {
  if (draws.size() < 2) throw DomainError("interval coverage needs at least two draws");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("interval level must lie in (0, 1)");
  const auto L = truth.size();
  const double tail = 0.5 * (1.0 - level);
  int covered = 0;
  std::vector<double> column(draws.size());
  for (Eigen::Index y = 0; y < L; ++y) {
    for (std::size_t d = 0; d < draws.size(); ++d) column[d] = draws[d][y];
    const double lo = quantile(column, tail);
    const double hi = quantile(column, 1.0 - tail);
    if (truth[y] >= lo && truth[y] <= hi) ++covered;
  }
  return double(covered) / double(L);
}

CsmfSummary summarize_draws(const std::vector<Eigen::VectorXd>& draws) {
  if (draws.empty()) throw DomainError("no draws to summarize");
  const auto L = draws.front().size();
  CsmfSummary s;
  s.mean = Eigen::VectorXd::Zero(L);
  s.sd = Eigen::VectorXd::Zero(L);
  s.q025.resize(L);
  s.q50.resize(L);
  s.q975.resize(L);
  for (const auto& d : draws) s.mean += d;
  s.mean /= double(draws.size());
  if (draws.size() > 1) {
    for (const auto& d : draws) s.sd += (d - s.mean).array().square().matrix();
    s.sd = (s.sd / double(draws.size() - 1)).cwiseSqrt();
  }
  std::vector<double> column(draws.size());
  for (Eigen::Index y = 0; y < L; ++y) {
    for (std::size_t k = 0; k < draws.size(); ++k) column[k] = draws[k][y];
    s.q025[y] = quantile(column, 0.025);
    s.q50[y] = quantile(column, 0.5);
    s.q975[y] = quantile(column, 0.975);
  }
  return s;
}

EvalReport evaluate_csmf(const std::vector<Eigen::VectorXd>& draws, const Eigen::VectorXd& truth, double level) {
  EvalReport r;
  r.csmf_accuracy = csmf_accuracy(truth, summarize_draws(draws).mean);
  r.coverage = interval_coverage(draws, truth, level);
  return r;
}

Eigen::MatrixXd cramers_v_table(const VaDataset& data, int cause, GroupKind kind, int group_value) {
  const int p = data.p;
  const auto& group = kind == GroupKind::age ? data.age : data.sex;
  std::vector<int> rows;
  for (int i = 0; i < data.n(); ++i)
    if (data.split[i] == Split::training && data.cause[i] == cause && group[i] == group_value) rows.push_back(i);

  std::vector<std::vector<int>> columns(std::size_t(p), std::vector<int>(rows.size()));
  for (int j = 0; j < p; ++j)
    for (std::size_t r = 0; r < rows.size(); ++r)
      columns[std::size_t(j)][r] = data.missing(rows[r], j) ? kMissing : int(data.x(rows[r], j));

  const double nan = std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(p, p, nan);
  for (int j = 0; j < p; ++j) {
    for (int k = j; k < p; ++k) {
      const auto value = cramers_v(columns[std::size_t(j)], columns[std::size_t(k)]);
      v(j, k) = v(k, j) = value.value_or(nan);
    }
  }
  return v;
}

}  // namespace bfas
