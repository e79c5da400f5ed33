// bfas: cause-of-death distributions and predictor relevance from verbal
// autopsy records.

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "bfas/commands.hpp"
#include "bfas/errors.hpp"

namespace {

struct Flags {
  std::string config;
  // flag name -> setting key; filled only when given
  std::map<std::string, std::string> overrides;
  bool transductive = false;
};

void add_common(CLI::App& cmd, Flags& flags) {
  cmd.add_option("--config", flags.config, "key = value config file or an earlier manifest.json");
  const std::pair<const char*, const char*> options[] = {
      {"--train", "train"},         {"--target", "target"},         {"--seed", "seed"},
      {"--k", "k"},                 {"--iterations", "iterations"}, {"--burn-in", "burn_in"},
      {"--thin", "thin"},           {"--mc-r", "mc_r"},             {"--mc-r-tilde", "mc_r_tilde"},
      {"--out-dir", "out_dir"},     {"--missing-token", "missing_token"}, {"--age-cutoff", "age_cutoff"},
  };
  for (const auto& [flag, key] : options) {
    const std::string k = key;
    cmd.add_option_function<std::string>(
        flag, [&flags, k](const std::string& v) { flags.overrides[k] = v; }, fmt::format("sets '{}'", k));
  }
  cmd.add_flag("--transductive", flags.transductive, "let target rows enter the parameter updates");
}

bfas::RunConfig resolve(const Flags& flags) {
  bfas::RunConfig config = flags.config.empty() ? bfas::RunConfig{} : bfas::load_config(flags.config);
  for (const auto& [key, value] : flags.overrides) bfas::apply_setting(config, key, value);
  if (flags.transductive) config.chain.transductive = true;
  if (config.ingest.train.empty()) throw bfas::DomainError("no training file: pass --train or set 'train'");
  return config;
}

void print_events(const bfas::NumericalEvents& e) {
  if (e.spd_jitter || e.imputation_fallback || e.prediction_fallback)
    fmt::print(stderr, "numerical events: spd_jitter={} imputation_fallback={} prediction_fallback={}\n",
               e.spd_jitter, e.imputation_fallback, e.prediction_fallback);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian factor model for verbal autopsy with age/sex-dependent symptom associations"};
  app.set_version_flag("--version", bfas::kSoftwareVersion);
  app.require_subcommand(1);

  Flags fit_flags, rel_flags, diag_flags, sk_flags, eval_flags;
  auto* fit = app.add_subcommand("fit", "estimate the CSMF and individual cause probabilities");
  auto* rel = app.add_subcommand("relevance", "MI, CMI and groupwise KL for every predictor");
  auto* diag = app.add_subcommand("diagnose", "Cramer's V tables and demographic proportions per cause");
  auto* sk = app.add_subcommand("select-k", "choose K by cross-validation");
  auto* ev = app.add_subcommand("evaluate", "score chain_trace.csv in --out-dir against true causes in --target");
  add_common(*fit, fit_flags);
  add_common(*rel, rel_flags);
  add_common(*diag, diag_flags);
  add_common(*sk, sk_flags);
  add_common(*ev, eval_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit->parsed()) {
      const auto config = resolve(fit_flags);
      const auto result = bfas::run_fit(config);
      fmt::print("K = {}; outputs in {}\n", result.K, config.out_dir.string());
      if (result.eval)
        fmt::print("csmf_accuracy = {:.4f}, coverage = {:.3f}\n", result.eval->csmf_accuracy, result.eval->coverage);
      print_events(result.events);
    } else if (rel->parsed()) {
      const auto config = resolve(rel_flags);
      bfas::run_relevance(config);
      fmt::print("outputs in {}\n", config.out_dir.string());
    } else if (diag->parsed()) {
      const auto config = resolve(diag_flags);
      bfas::run_diagnose(config);
      fmt::print("outputs in {}\n", config.out_dir.string());
    } else if (sk->parsed()) {
      const auto config = resolve(sk_flags);
      const auto result = bfas::run_select_k(config);
      fmt::print("selected K = {}\n", result.selected);
    } else if (ev->parsed()) {
      Flags flags = eval_flags;
      const auto target = flags.overrides.find("target");
      if (target == flags.overrides.end()) throw bfas::DomainError("evaluate needs --target with true causes");
      const std::string truth = target->second;
      auto config = flags.config.empty() ? bfas::RunConfig{} : bfas::load_config(flags.config);
      for (const auto& [key, value] : flags.overrides) bfas::apply_setting(config, key, value);
      const auto report = bfas::run_evaluate(config, truth);
      fmt::print("csmf_accuracy = {:.4f}, coverage = {:.3f}\n", report.csmf_accuracy, report.coverage);
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
