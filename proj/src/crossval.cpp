#include "bfas/crossval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "bfas/errors.hpp"

namespace bfas {

namespace {

constexpr int kFoldRetries = 10;

}  // namespace

std::vector<int> stratified_folds(const VaDataset& data, int folds, RngStream& rng) {
  if (folds < 2) throw DomainError("cross-validation needs at least 2 folds");
  std::vector<std::vector<int>> by_cause(std::size_t(data.L));
  for (int i : data.rows(Split::training)) by_cause[std::size_t(data.cause[i])].push_back(i);
  std::vector<int> fold_of_row(std::size_t(data.n()), -1);
  int next = 0;
  for (auto& rows : by_cause) {
    std::shuffle(rows.begin(), rows.end(), rng);
    for (int i : rows) {
      fold_of_row[std::size_t(i)] = next;
      next = (next + 1) % folds;
    }
  }
  return fold_of_row;
}

bool folds_cover_causes(const VaDataset& data, const std::vector<int>& fold_of_row, int folds) {
  Eigen::MatrixXi counts = Eigen::MatrixXi::Zero(folds, data.L);
  for (int i = 0; i < data.n(); ++i)
    if (fold_of_row[std::size_t(i)] >= 0) ++counts(fold_of_row[std::size_t(i)], data.cause[i]);
  const Eigen::RowVectorXi total = counts.colwise().sum();
  for (int f = 0; f < folds; ++f)
    for (int y = 0; y < data.L; ++y)
      if (counts(f, y) > 0 && total(y) == counts(f, y)) return false;
  return true;
}

VaDataset fold_dataset(const VaDataset& data, const std::vector<int>& fold_of_row, int f, std::vector<int>& truth) {
  std::vector<int> train, held;
  for (int i = 0; i < data.n(); ++i) {
    const int fold = fold_of_row[std::size_t(i)];
    if (fold < 0) continue;
    (fold == f ? held : train).push_back(i);
  }
  std::vector<int> order = train;
  order.insert(order.end(), held.begin(), held.end());

  VaDataset out;
  out.p = data.p;
  out.L = data.L;
  out.cause_labels = data.cause_labels;
  out.symptom_names = data.symptom_names;
  out.x.resize(Eigen::Index(order.size()), data.p);
  out.missing.resize(Eigen::Index(order.size()), data.p);
  truth.clear();
  for (std::size_t r = 0; r < order.size(); ++r) {
    const int i = order[r];
    const bool training = r < train.size();
    out.x.row(Eigen::Index(r)) = data.x.row(i);
    out.missing.row(Eigen::Index(r)) = data.missing.row(i);
    out.age.push_back(data.age[std::size_t(i)]);
    out.sex.push_back(data.sex[std::size_t(i)]);
    out.cause.push_back(training ? data.cause[std::size_t(i)] : kMissing);
    out.split.push_back(training ? Split::training : Split::target);
    out.ids.push_back(data.ids.empty() ? std::to_string(i) : data.ids[std::size_t(i)]);
    if (!training) truth.push_back(data.cause[std::size_t(i)]);
  }
  return out;
}

double heldout_log_score(const Eigen::MatrixXd& probs, const std::vector<int>& truth) {
  if (truth.empty()) throw DomainError("held-out fold is empty");
  double sum = 0.0;
  for (std::size_t r = 0; r < truth.size(); ++r)
    sum += std::log(std::max(probs(Eigen::Index(r), truth[r]), std::numeric_limits<double>::min()));
  return sum / double(truth.size());
}

int pick_k(const std::vector<int>& ks, const Eigen::VectorXd& mean_scores) {
  if (ks.empty()) throw DomainError("candidate set for K is empty");
  std::size_t best = 0;
  for (std::size_t c = 1; c < ks.size(); ++c) {
    const double a = mean_scores(Eigen::Index(c)), b = mean_scores(Eigen::Index(best));
    if (a > b || (a == b && ks[c] < ks[best])) best = c;
  }
  return ks[best];
}

SelectKResult select_k(const VaDataset& data, const CvSettings& cv, const ChainConfig& base, RngStream& rng) {
  RngStream fold_rng = rng.substream({0});
  for (int attempt = 0; attempt < kFoldRetries; ++attempt) {
    auto folds = stratified_folds(data, cv.folds, fold_rng);
    if (folds_cover_causes(data, folds, cv.folds)) return select_k(data, cv, base, folds, rng);
  }
  throw DomainError(fmt::format(
      "could not build {} folds in which every held-out cause also appears in training; some cause has too few rows",
      cv.folds));
}

SelectKResult select_k(const VaDataset& data, const CvSettings& cv, const ChainConfig& base,
                       const std::vector<int>& fold_of_row, RngStream& rng) {
  if (cv.candidate_ks.empty()) throw DomainError("candidate set for K is empty");
  if (!folds_cover_causes(data, fold_of_row, cv.folds))
    throw DomainError("a held-out fold contains a cause unseen in its training folds");

  SelectKResult result;
  result.ks = cv.candidate_ks;
  result.fold_of_row = fold_of_row;
  result.fold_scores.resize(Eigen::Index(result.ks.size()), cv.folds);

  for (int f = 0; f < cv.folds; ++f) {
    std::vector<int> truth;
    const VaDataset fold = fold_dataset(data, fold_of_row, f, truth);
    const std::uint64_t seed = rng.substream({1, std::uint64_t(f)})();
    for (std::size_t c = 0; c < result.ks.size(); ++c) {
      ChainConfig config = base;
      config.K = result.ks[c];
      config.iterations = cv.iterations;
      config.burn_in = cv.burn_in;
      config.thin = cv.thin;
      config.R = cv.R;
      config.seed = seed;
      config.transductive = false;
      config.cause_prior_update = CausePriorUpdate::fixed;
      config.keep_states = false;
      const ChainOutput out = run_chain(fold, config, ChainMode::fit);
      result.fold_scores(Eigen::Index(c), f) = heldout_log_score(out.target_prob_mean(), truth);
    }
  }
  result.mean_scores = result.fold_scores.rowwise().mean();
  result.selected = pick_k(result.ks, result.mean_scores);
  return result;
}

}  // namespace bfas
