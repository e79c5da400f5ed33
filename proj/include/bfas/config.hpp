#pragma once

// Run configuration. Config files are flat `key = value` text ('#' starts a
// comment); a manifest.json from an earlier run is accepted too and replays
// its resolved settings.
//
// Keys:
//   train, target, out_dir, missing_token, age_cutoff, cause_labels
//   k (an integer, or "auto" to pick it by cross-validation)
//   iterations, burn_in, thin, mc_r, mc_r_tilde, seed, transductive
//   dirichlet_cause_concentration, dirichlet_demog_concentration (comma lists)
//   cause_prior_update (target_labels | fixed)
//   relevance_cause_weights (fractions | counts)
//   candidate_ks, cv_folds, cv_iterations, cv_burn_in, cv_thin, cv_mc_r
//   save_snapshots

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "bfas/gibbs.hpp"
#include "bfas/ingest.hpp"

namespace bfas {

struct CvSettings {
  std::vector<int> candidate_ks = {1, 2, 3, 4, 5};
  int folds = 5;
  int iterations = 2000;
  int burn_in = 500;
  int thin = 10;
  int R = 1000;
};

struct RunConfig {
  ChainConfig chain;
  IngestSpec ingest;
  CvSettings cv;
  bool select_k_auto = false;
  bool save_snapshots = false;
  std::filesystem::path out_dir = "out";
};

using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text);

/// Applies one setting; unknown keys and malformed values throw DomainError.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
void apply_settings(RunConfig& config, const KeyValues& values);

/// Reads a key-value file or a manifest.json.
RunConfig load_config(const std::filesystem::path& path);

/// Every key with its resolved value, doubles at 17 significant digits.
KeyValues to_key_values(const RunConfig& config);

}  // namespace bfas
