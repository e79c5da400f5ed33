#include "bfas/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "bfas/errors.hpp"

namespace bfas {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T v{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (value.empty() || ec != std::errc{} || ptr != end)
    throw DomainError(fmt::format("setting '{}': '{}' is not a valid number", key, value));
  return v;
}

int parse_int(const std::string& key, const std::string& value) { return parse_number<int>(key, value); }

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw DomainError(fmt::format("setting '{}': '{}' is not a valid number", key, value));
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw DomainError(fmt::format("setting '{}': '{}' is not a boolean", key, value));
}

Eigen::VectorXd parse_vector(const std::string& key, const std::string& value) {
  const auto items = split_list(value);
  Eigen::VectorXd v(Eigen::Index(items.size()));
  for (std::size_t k = 0; k < items.size(); ++k) v(Eigen::Index(k)) = parse_double(key, items[k]);
  return v;
}

std::string join_vector(const Eigen::VectorXd& v) {
  std::vector<std::string> parts;
  for (Eigen::Index k = 0; k < v.size(); ++k) parts.push_back(format_double(v(k)));
  return fmt::format("{}", fmt::join(parts, ","));
}

}  // namespace

KeyValues parse_key_values(const std::string& text) {
  KeyValues out;
  std::stringstream ss(text);
  std::string line;
  int number = 0;
  while (std::getline(ss, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(fmt::format("config line {}: expected key = value", number));
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(fmt::format("config line {}: empty key", number));
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  auto& chain = config.chain;
  auto& ingest = config.ingest;
  if (key == "train") {
    ingest.train = value;
  } else if (key == "target") {
    if (value.empty()) ingest.target.reset(); else ingest.target = value;
  } else if (key == "out_dir") {
    config.out_dir = value;
  } else if (key == "missing_token") {
    ingest.missing_token = value;
  } else if (key == "age_cutoff") {
    if (value.empty()) ingest.age_cutoff.reset(); else ingest.age_cutoff = parse_double(key, value);
  } else if (key == "cause_labels") {
    ingest.cause_labels = split_list(value);
  } else if (key == "k") {
    config.select_k_auto = value == "auto";
    if (!config.select_k_auto) chain.K = parse_int(key, value);
  } else if (key == "iterations") {
    chain.iterations = parse_int(key, value);
  } else if (key == "burn_in") {
    chain.burn_in = parse_int(key, value);
  } else if (key == "thin") {
    chain.thin = parse_int(key, value);
  } else if (key == "mc_r") {
    chain.R = parse_int(key, value);
  } else if (key == "mc_r_tilde") {
    chain.R_tilde = parse_int(key, value);
  } else if (key == "seed") {
    chain.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "transductive") {
    chain.transductive = parse_bool(key, value);
  } else if (key == "dirichlet_cause_concentration") {
    chain.dirichlet_cause_concentration = parse_vector(key, value);
  } else if (key == "dirichlet_demog_concentration") {
    const auto v = parse_vector(key, value);
    if (v.size() == 1) {
      chain.dirichlet_demog_concentration.setConstant(v(0));
    } else if (v.size() == 4) {
      chain.dirichlet_demog_concentration = v;
    } else {
      throw DomainError("setting 'dirichlet_demog_concentration': expected 1 or 4 values");
    }
  } else if (key == "cause_prior_update") {
    if (value == "target_labels") chain.cause_prior_update = CausePriorUpdate::target_labels;
    else if (value == "fixed") chain.cause_prior_update = CausePriorUpdate::fixed;
    else throw DomainError(fmt::format("setting 'cause_prior_update': unknown value '{}'", value));
  } else if (key == "relevance_cause_weights") {
    if (value == "fractions") chain.relevance_cause_weights = RelevanceCauseWeights::fractions;
    else if (value == "counts") chain.relevance_cause_weights = RelevanceCauseWeights::counts;
    else throw DomainError(fmt::format("setting 'relevance_cause_weights': unknown value '{}'", value));
  } else if (key == "candidate_ks") {
    config.cv.candidate_ks.clear();
    for (const auto& item : split_list(value)) config.cv.candidate_ks.push_back(parse_int(key, item));
    if (config.cv.candidate_ks.empty()) throw DomainError("setting 'candidate_ks': empty list");
  } else if (key == "cv_folds") {
    config.cv.folds = parse_int(key, value);
  } else if (key == "cv_iterations") {
    config.cv.iterations = parse_int(key, value);
  } else if (key == "cv_burn_in") {
    config.cv.burn_in = parse_int(key, value);
  } else if (key == "cv_thin") {
    config.cv.thin = parse_int(key, value);
  } else if (key == "cv_mc_r") {
    config.cv.R = parse_int(key, value);
  } else if (key == "save_snapshots") {
    config.save_snapshots = parse_bool(key, value);
  } else {
    throw DomainError(fmt::format("unknown setting '{}'", key));
  }
}

void apply_settings(RunConfig& config, const KeyValues& values) {
  for (const auto& [key, value] : values) apply_setting(config, key, value);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  RunConfig config;
  if (path.extension() == ".json") {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
    }
    const auto& settings = doc.contains("config") ? doc.at("config") : doc;
    if (!settings.is_object()) throw ParseError(fmt::format("{}: expected an object of settings", path.string()));
    for (const auto& [key, value] : settings.items())
      apply_setting(config, key, value.is_string() ? value.get<std::string>() : value.dump());
  } else {
    try {
      apply_settings(config, parse_key_values(text));
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
    }
  }
  return config;
}

KeyValues to_key_values(const RunConfig& config) {
  const auto& chain = config.chain;
  const auto& ingest = config.ingest;
  KeyValues kv;
  kv["train"] = ingest.train.string();
  kv["target"] = ingest.target ? ingest.target->string() : "";
  kv["out_dir"] = config.out_dir.string();
  kv["missing_token"] = ingest.missing_token;
  kv["age_cutoff"] = ingest.age_cutoff ? format_double(*ingest.age_cutoff) : "";
  kv["cause_labels"] = fmt::format("{}", fmt::join(ingest.cause_labels, ","));
  kv["k"] = config.select_k_auto ? "auto" : std::to_string(chain.K);
  kv["iterations"] = std::to_string(chain.iterations);
  kv["burn_in"] = std::to_string(chain.burn_in);
  kv["thin"] = std::to_string(chain.thin);
  kv["mc_r"] = std::to_string(chain.R);
  kv["mc_r_tilde"] = std::to_string(chain.R_tilde);
  kv["seed"] = std::to_string(chain.seed);
  kv["transductive"] = chain.transductive ? "true" : "false";
  kv["dirichlet_cause_concentration"] = join_vector(chain.dirichlet_cause_concentration);
  kv["dirichlet_demog_concentration"] = join_vector(chain.dirichlet_demog_concentration);
  kv["cause_prior_update"] = chain.cause_prior_update == CausePriorUpdate::fixed ? "fixed" : "target_labels";
  kv["relevance_cause_weights"] = chain.relevance_cause_weights == RelevanceCauseWeights::counts ? "counts" : "fractions";
  kv["candidate_ks"] = fmt::format("{}", fmt::join(config.cv.candidate_ks, ","));
  kv["cv_folds"] = std::to_string(config.cv.folds);
  kv["cv_iterations"] = std::to_string(config.cv.iterations);
  kv["cv_burn_in"] = std::to_string(config.cv.burn_in);
  kv["cv_thin"] = std::to_string(config.cv.thin);
  kv["cv_mc_r"] = std::to_string(config.cv.R);
  kv["save_snapshots"] = config.save_snapshots ? "true" : "false";
  return kv;
}

}  // namespace bfas
