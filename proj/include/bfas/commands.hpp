#pragma once

// Subcommands behind the CLI. Each one reads its inputs, writes its outputs
// into config.out_dir (atomically, file by file) and returns what it wrote
// in summary form.

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "bfas/config.hpp"
#include "bfas/crossval.hpp"
#include "bfas/evalmetrics.hpp"

namespace bfas {

inline constexpr const char* kSoftwareVersion = "0.1.0";

/// JSON text with every floating-point number at 17 significant digits and
/// non-finite values as null.
std::string dump_json(const nlohmann::json& doc);

struct FitResult {
  int K = 0;
  std::optional<SelectKResult> selection;
  CsmfSummary csmf;
  std::optional<EvalReport> eval;
  NumericalEvents events;
};

/// csmf_posterior.json, individual_probs.csv, chain_trace.csv, manifest.json,
/// eval_report.json when every target row has a true cause, snapshots.bin on request.
FitResult run_fit(const RunConfig& config);

/// relevance.csv and kl_groups.csv from a relevance-mode chain on the training rows.
void run_relevance(const RunConfig& config);

/// cramers_v.csv, cramers_v_diff.csv and demographic_props.csv.
void run_diagnose(const RunConfig& config);

/// select_k.json.
SelectKResult run_select_k(const RunConfig& config);

/// Re-scores chain_trace.csv in out_dir against the causes in `truth_csv`
/// (ingest layout); writes eval_report.json.
EvalReport run_evaluate(const RunConfig& config, const std::filesystem::path& truth_csv);

}  // namespace bfas
