#include "bfas/commands.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "bfas/errors.hpp"
#include "bfas/ingest.hpp"
#include "bfas/predictor.hpp"
#include "bfas/relevance.hpp"
#include "bfas/snapshot.hpp"

namespace bfas {

namespace {

constexpr std::uint64_t kSelectKStream = 0x5e1ec7;
constexpr const char* kCvScore = "mean held-out log posterior-mean probability of the true cause";

void dump_into(const nlohmann::json& v, std::string& out) {
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, value] : v.items()) {
        if (!first) out += ',';
        first = false;
        out += nlohmann::json(key).dump();
        out += ':';
        dump_into(value, out);
      }
      out += '}';
      break;
    }
    case nlohmann::json::value_t::array: {
      out += '[';
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) out += ',';
        dump_into(v[k], out);
      }
      out += ']';
      break;
    }
    case nlohmann::json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_double(d) : "null";
      break;
    }
    default:
      out += v.dump();
  }
}

nlohmann::json to_json(const Eigen::VectorXd& v) {
  auto a = nlohmann::json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

nlohmann::json to_json(const Eigen::MatrixXd& m) {
  auto a = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
  return a;
}

nlohmann::json to_json(const NumericalEvents& e) {
  return {{"spd_jitter", e.spd_jitter},
          {"imputation_fallback", e.imputation_fallback},
          {"prediction_fallback", e.prediction_fallback}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + '"';
}

std::string cell(double v) { return std::isfinite(v) ? format_double(v) : "NA"; }

void write_text(const std::filesystem::path& dir, const std::string& name, const std::string& contents) {
  write_file_atomic(dir / name, contents);
}

nlohmann::json selection_json(const SelectKResult& s) {
  return {{"candidate_ks", s.ks},
          {"selected", s.selected},
          {"fold_scores", to_json(s.fold_scores)},
          {"mean_scores", to_json(s.mean_scores)},
          {"score", kCvScore}};
}

// w carries standardized age/sex; the demographic table uses the raw cells
nlohmann::json covariate_scaling(const VaDataset& data) {
  const auto sd = Standardizer::from_training(data);
  return {{"scaling", "standardized"},
          {"age_mean", sd.age_mean},
          {"age_sd", sd.age_sd},
          {"sex_mean", sd.sex_mean},
          {"sex_sd", sd.sex_sd}};
}

nlohmann::json ingest_fingerprint(const VaDataset& data) {
  return {{"training_rows", data.count(Split::training)},
          {"target_rows", data.count(Split::target)},
          {"symptoms", data.p},
          {"causes", data.L},
          {"cause_labels", data.cause_labels},
          {"age_missing_rate", data.age_missing_rate()},
          {"sex_missing_rate", data.sex_missing_rate()},
          {"symptom_missing_rate", data.symptom_missing_rate()},
          {"covariates", covariate_scaling(data)}};
}

SelectKResult cross_validate(const VaDataset& data, const RunConfig& config) {
  auto rng = RngStream(config.chain.seed).substream({kSelectKStream});
  return select_k(data, config.cv, config.chain, rng);
}

VaDataset training_only(const RunConfig& config) {
  IngestSpec spec = config.ingest;
  spec.target.reset();
  return ingest(spec).data;
}

}  // namespace

std::string dump_json(const nlohmann::json& doc) {
  std::string out;
  dump_into(doc, out);
  out += '\n';
  return out;
}

FitResult run_fit(const RunConfig& config) {
  const auto& dir = config.out_dir;
  std::filesystem::create_directories(dir);
  const IngestResult in = ingest(config.ingest);
  const VaDataset& data = in.data;

  FitResult result;
  ChainConfig chain = config.chain;
  if (config.select_k_auto) {
    result.selection = cross_validate(data, config);
    chain.K = result.selection->selected;
  }
  result.K = chain.K;

  std::vector<ParameterSnapshot> snapshots;
  SweepObserver observer;
  if (config.save_snapshots)
    observer = [&](int sweep, const ModelState& state, const RngStream&) {
      snapshots.push_back(ParameterSnapshot::from_state(sweep, state));
    };
  const ChainOutput out = run_chain(data, chain, ChainMode::fit, observer);
  result.events = out.events;

  const int L = data.L;
  const bool has_targets = !out.target_rows.empty();
  nlohmann::json posterior = {{"causes", data.cause_labels},
                              {"K", chain.K},
                              {"kept_sweeps", int(out.kept_sweeps.size())},
                              {"target_rows", int(out.target_rows.size())},
                              {"numerical_events", to_json(out.events)}};
  if (has_targets) {
    result.csmf = summarize_draws(out.csmf_draws);
    posterior["mean"] = to_json(result.csmf.mean);
    posterior["sd"] = to_json(result.csmf.sd);
    posterior["q025"] = to_json(result.csmf.q025);
    posterior["q50"] = to_json(result.csmf.q50);
    posterior["q975"] = to_json(result.csmf.q975);
  }
  write_text(dir, "csmf_posterior.json", dump_json(posterior));

  std::ostringstream probs;
  probs << "id";
  for (const auto& label : data.cause_labels) probs << ',' << csv_field(label);
  probs << '\n';
  const Eigen::MatrixXd mean_probs = out.target_prob_mean();
  for (std::size_t k = 0; k < out.target_rows.size(); ++k) {
    probs << csv_field(data.ids[std::size_t(out.target_rows[k])]);
    for (int y = 0; y < L; ++y) probs << ',' << cell(mean_probs(Eigen::Index(k), y));
    probs << '\n';
  }
  write_text(dir, "individual_probs.csv", probs.str());

  std::ostringstream trace;
  trace << "sweep";
  for (const auto& label : data.cause_labels) trace << ',' << csv_field(label);
  trace << '\n';
  for (std::size_t s = 0; s < out.csmf_draws.size(); ++s) {
    trace << out.kept_sweeps[s];
    for (int y = 0; y < L; ++y) trace << ',' << cell(out.csmf_draws[s](y));
    trace << '\n';
  }
  write_text(dir, "chain_trace.csv", trace.str());

  const bool has_truth = has_targets && std::none_of(in.target_truth.begin(), in.target_truth.end(),
                                                     [](int c) { return c == kMissing; });
  if (has_truth) {
    const Eigen::VectorXd truth = csmf_draw(in.target_truth, L);
    result.eval = evaluate_csmf(out.csmf_draws, truth);
    const nlohmann::json report = {{"csmf_accuracy", result.eval->csmf_accuracy},
                                   {"coverage", result.eval->coverage},
                                   {"interval_level", 0.95},
                                   {"true_csmf", to_json(truth)},
                                   {"estimated_csmf", to_json(result.csmf.mean)}};
    write_text(dir, "eval_report.json", dump_json(report));
  }

  if (config.save_snapshots) {
    const auto tmp = dir / "snapshots.bin.tmp";
    write_snapshots(tmp, snapshots);
    std::filesystem::rename(tmp, dir / "snapshots.bin");
  }

  nlohmann::json manifest = {{"software", {{"name", "bfas"}, {"version", kSoftwareVersion}}},
                             {"command", "fit"},
                             {"config", to_key_values(config)},
                             {"resolved_k", chain.K},
                             {"seed", config.chain.seed},
                             {"ingest", ingest_fingerprint(data)},
                             {"numerical_events", to_json(out.events)}};
  if (result.selection) manifest["cross_validation"] = selection_json(*result.selection);
  write_text(dir, "manifest.json", dump_json(manifest));
  return result;
}

void run_relevance(const RunConfig& config) {
  const auto& dir = config.out_dir;
  std::filesystem::create_directories(dir);
  const VaDataset data = training_only(config);
  const std::set<int> observed(data.cause.begin(), data.cause.end());
  if (observed.size() < 2)
    throw DomainError("relevance needs at least two observed causes: with one, H(y) = 0 and standardized MI/CMI "
                      "are undefined");

  ChainConfig chain = config.chain;
  std::optional<SelectKResult> selection;
  if (config.select_k_auto) {
    selection = cross_validate(data, config);
    chain.K = selection->selected;
  }

  RelevanceSummary summary;
  const SweepObserver observer = [&](int, const ModelState& state, const RngStream& sweep) {
    auto rng = step_stream(sweep, StepKey::relevance);
    summary.add(evaluate_relevance(state, chain.R, chain.R_tilde, rng));
  };
  const ChainOutput out = run_chain(data, chain, ChainMode::relevance, observer);

  std::vector<std::string> names = {"age", "sex"};
  names.insert(names.end(), data.symptom_names.begin(), data.symptom_names.end());
  const Eigen::VectorXd mi = summary.mi_mean(), mi_sd = summary.mi_sd();
  const Eigen::VectorXd cmi = summary.cmi_mean(), cmi_sd = summary.cmi_sd();
  const Eigen::VectorXd mc_sd = summary.cmi_mc_sd_mean(), skipped = summary.cmi_skipped_mean();
  const auto mi_rank = descending_ranks(mi), cmi_rank = descending_ranks(cmi);

  std::ostringstream rel;
  rel << "predictor,index,mi_std_mean,mi_std_sd,mi_rank,cmi_std_mean,cmi_std_sd,cmi_rank,cmi_mc_sd,cmi_skipped\n";
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto e = Eigen::Index(k);
    rel << csv_field(names[k]) << ',' << k << ',' << cell(mi(e)) << ',' << cell(mi_sd(e)) << ',' << mi_rank[k] << ','
        << cell(cmi(e)) << ',' << cell(cmi_sd(e)) << ',' << cmi_rank[k] << ',' << cell(mc_sd(e)) << ','
        << cell(skipped(e)) << '\n';
  }
  write_text(dir, "relevance.csv", rel.str());

  const Eigen::MatrixXd kl = summary.kl_mean(), kl_sd = summary.kl_sd();
  const Eigen::VectorXd klw = summary.kl_weighted_mean(), klw_sd = summary.kl_weighted_sd();
  std::ostringstream groups;
  groups << "symptom,group,age,sex,kl_mean,kl_sd\n";
  for (int j = 0; j < data.p; ++j) {
    const auto name = csv_field(data.symptom_names[std::size_t(j)]);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const int c = demog_cell(a, b);
        groups << name << ",cell," << a << ',' << b << ',' << cell(kl(j, c)) << ',' << cell(kl_sd(j, c)) << '\n';
      }
    groups << name << ",weighted,,," << cell(klw(j)) << ',' << cell(klw_sd(j)) << '\n';
  }
  write_text(dir, "kl_groups.csv", groups.str());

  nlohmann::json manifest = {{"software", {{"name", "bfas"}, {"version", kSoftwareVersion}}},
                             {"command", "relevance"},
                             {"config", to_key_values(config)},
                             {"resolved_k", chain.K},
                             {"seed", config.chain.seed},
                             {"kept_sweeps", int(out.kept_sweeps.size())},
                             {"ingest", ingest_fingerprint(data)},
                             {"numerical_events", to_json(out.events)}};
  if (selection) manifest["cross_validation"] = selection_json(*selection);
  write_text(dir, "manifest.json", dump_json(manifest));
}

void run_diagnose(const RunConfig& config) {
  const auto& dir = config.out_dir;
  std::filesystem::create_directories(dir);
  const VaDataset data = training_only(config);
  const int p = data.p;

  std::ostringstream v, diff;
  v << "cause,group,value,symptom_a,symptom_b,cramers_v\n";
  diff << "cause,group,symptom_a,symptom_b,abs_difference\n";
  for (int y = 0; y < data.L; ++y) {
    const auto label = csv_field(data.cause_labels[std::size_t(y)]);
    for (const auto& [kind, name] : {std::pair{GroupKind::age, "age"}, std::pair{GroupKind::sex, "sex"}}) {
      const Eigen::MatrixXd t0 = cramers_v_table(data, y, kind, 0);
      const Eigen::MatrixXd t1 = cramers_v_table(data, y, kind, 1);
      for (int a = 0; a < p; ++a)
        for (int b = a + 1; b < p; ++b) {
          const auto sa = csv_field(data.symptom_names[std::size_t(a)]);
          const auto sb = csv_field(data.symptom_names[std::size_t(b)]);
          v << label << ',' << name << ",0," << sa << ',' << sb << ',' << cell(t0(a, b)) << '\n';
          v << label << ',' << name << ",1," << sa << ',' << sb << ',' << cell(t1(a, b)) << '\n';
          diff << label << ',' << name << ',' << sa << ',' << sb << ',' << cell(std::abs(t0(a, b) - t1(a, b)))
               << '\n';
        }
    }
  }
  write_text(dir, "cramers_v.csv", v.str());
  write_text(dir, "cramers_v_diff.csv", diff.str());

  std::ostringstream props;
  props << "cause,rows,age_0,age_1,age_missing,sex_0,sex_1,sex_missing\n";
  for (int y = 0; y < data.L; ++y) {
    int rows = 0;
    std::array<int, 3> age{}, sex{};
    for (int i : data.rows(Split::training)) {
      if (data.cause[i] != y) continue;
      ++rows;
      ++age[data.age[i] == kMissing ? 2 : data.age[i]];
      ++sex[data.sex[i] == kMissing ? 2 : data.sex[i]];
    }
    // proportions among observed values; missing as a share of all rows
    auto share = [](int part, int whole) { return whole > 0 ? double(part) / whole : std::nan(""); };
    props << csv_field(data.cause_labels[std::size_t(y)]) << ',' << rows << ','
          << cell(share(age[0], age[0] + age[1])) << ',' << cell(share(age[1], age[0] + age[1])) << ','
          << cell(share(age[2], rows)) << ',' << cell(share(sex[0], sex[0] + sex[1])) << ','
          << cell(share(sex[1], sex[0] + sex[1])) << ',' << cell(share(sex[2], rows)) << '\n';
  }
  write_text(dir, "demographic_props.csv", props.str());
}

SelectKResult run_select_k(const RunConfig& config) {
  const auto& dir = config.out_dir;
  std::filesystem::create_directories(dir);
  const VaDataset data = training_only(config);
  const SelectKResult result = cross_validate(data, config);
  nlohmann::json doc = selection_json(result);
  doc["config"] = to_key_values(config);
  doc["software"] = {{"name", "bfas"}, {"version", kSoftwareVersion}};
  write_text(dir, "select_k.json", dump_json(doc));
  return result;
}

EvalReport run_evaluate(const RunConfig& config, const std::filesystem::path& truth_csv) {
  const auto& dir = config.out_dir;
  const CsvTable trace = read_csv(dir / "chain_trace.csv");
  if (trace.header.size() < 2) throw ParseError("chain_trace.csv has no cause columns");
  const std::vector<std::string> labels(trace.header.begin() + 1, trace.header.end());
  const int L = int(labels.size());

  std::vector<Eigen::VectorXd> draws;
  for (std::size_t r = 0; r < trace.rows.size(); ++r) {
    const auto& row = trace.rows[r];
    if (row.size() != trace.header.size()) throw ParseError(fmt::format("chain_trace.csv: row {} is malformed", r + 1));
    Eigen::VectorXd d(L);
    for (int y = 0; y < L; ++y) {
      try {
        d(y) = std::stod(row[std::size_t(y) + 1]);
      } catch (const std::exception&) {
        throw ParseError(fmt::format("chain_trace.csv: row {}, column '{}': not a number", r + 1, labels[std::size_t(y)]));
      }
    }
    draws.push_back(d);
  }
  if (draws.empty()) throw DomainError("chain_trace.csv holds no draws");

  const CsvTable truth_table = read_csv(truth_csv);
  if (truth_table.header.size() < 2) throw ParseError(fmt::format("{}: no cause column", truth_csv.string()));
  std::vector<int> truth;
  for (std::size_t r = 0; r < truth_table.rows.size(); ++r) {
    const auto& label = truth_table.rows[r].at(1);
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end())
      throw ParseError(fmt::format("{}: row {}, column '{}': cause '{}' is not in the label map", truth_csv.string(),
                                   r + 1, truth_table.header[1], label));
    truth.push_back(int(it - labels.begin()));
  }
  const Eigen::VectorXd true_csmf = csmf_draw(truth, L);
  const EvalReport report = evaluate_csmf(draws, true_csmf);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(L);
  for (const auto& d : draws) mean += d;
  mean /= double(draws.size());
  const nlohmann::json doc = {{"csmf_accuracy", report.csmf_accuracy},
                              {"coverage", report.coverage},
                              {"interval_level", 0.95},
                              {"true_csmf", to_json(true_csmf)},
                              {"estimated_csmf", to_json(mean)}};
  std::filesystem::create_directories(dir);
  write_text(dir, "eval_report.json", dump_json(doc));
  return report;
}

}  // namespace bfas
