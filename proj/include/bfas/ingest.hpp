#pragma once

// CSV ingestion. Layout: a header row, then columns
//   id, cause, age, sex, symptom_1, ..., symptom_p
// Symptom, age and sex cells are 0, 1 or the missing token. With an age
// cutoff the age column holds raw ages and age >= cutoff maps to 1 ("late").
// The cause column is required on training rows and optional (ground truth)
// on target rows.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bfas/model.hpp"

namespace bfas {

struct IngestSpec {
  std::filesystem::path train;
  std::optional<std::filesystem::path> target;
  std::string missing_token = ".";
  std::optional<double> age_cutoff;
  /// Fixed label map; empty means the sorted distinct training labels.
  std::vector<std::string> cause_labels;
};

struct IngestResult {
  VaDataset data;
  /// Ground-truth cause per target row (in target order), kMissing if absent.
  std::vector<int> target_truth;
};

IngestResult ingest(const IngestSpec& spec);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path);
std::vector<std::string> split_csv_line(const std::string& line);

/// Writes training and target rows back out in the ingest layout.
void write_dataset_csv(const VaDataset& data, const std::vector<int>& target_truth,
                       const std::filesystem::path& train, const std::filesystem::path& target,
                       const std::string& missing_token = ".");

/// Writes `contents` to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// 17 significant digits.
std::string format_double(double v);

}  // namespace bfas
