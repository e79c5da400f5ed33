#include "bfas/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "bfas/errors.hpp"

namespace bfas {

namespace {

constexpr int kFixedColumns = 4;  // id, cause, age, sex

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::optional<long> parse_integer(const std::string& s) {
  long v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
  return v;
}

std::optional<double> parse_real(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

struct CellContext {
  const std::filesystem::path& file;
  std::size_t row;  // 1-based data row (header excluded)
  const std::string& column;
};

[[noreturn]] void fail(const CellContext& at, const std::string& what) {
  throw ParseError(fmt::format("{}: row {}, column '{}': {}", at.file.string(), at.row, at.column, what));
}

int parse_binary(const std::string& cell, const std::string& missing_token, const CellContext& at) {
  if (cell == missing_token) return kMissing;
  if (cell == "0") return 0;
  if (cell == "1") return 1;
  fail(at, fmt::format("unrecognized value '{}' (expected 0, 1 or '{}')", cell, missing_token));
}

int parse_age(const std::string& cell, const IngestSpec& spec, const CellContext& at) {
  if (cell == spec.missing_token) return kMissing;
  if (!spec.age_cutoff) {
    if (cell == "0") return 0;
    if (cell == "1") return 1;
    fail(at, fmt::format("age '{}' is not binary; supply an age cutoff to dichotomize raw ages", cell));
  }
  const auto v = parse_real(cell);
  if (!v) fail(at, fmt::format("age '{}' is not a number", cell));
  return *v >= *spec.age_cutoff ? 1 : 0;
}

std::vector<std::string> derive_labels(const CsvTable& train, const std::string& missing_token) {
  std::set<std::string> seen;
  for (const auto& row : train.rows)
    if (!row[1].empty() && row[1] != missing_token) seen.insert(row[1]);
  std::vector<std::string> labels(seen.begin(), seen.end());
  const bool numeric = std::all_of(labels.begin(), labels.end(), [](const auto& s) { return parse_integer(s).has_value(); });
  if (numeric)
    std::sort(labels.begin(), labels.end(), [](const auto& a, const auto& b) { return *parse_integer(a) < *parse_integer(b); });
  return labels;
}

void append_rows(const CsvTable& table, const std::filesystem::path& file, Split split, const IngestSpec& spec,
                 const std::vector<std::string>& labels, VaDataset& data, std::vector<int>& truth,
                 std::vector<std::vector<std::uint8_t>>& x, std::vector<std::vector<std::uint8_t>>& miss) {
  const int p = data.p;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() != table.header.size())
      throw ParseError(fmt::format("{}: row {} has {} fields, header has {}", file.string(), r + 1, row.size(),
                                   table.header.size()));
    data.ids.push_back(row[0]);

    int cause = kMissing;
    const std::string& label = row[1];
    if (!label.empty() && label != spec.missing_token) {
      const auto it = std::find(labels.begin(), labels.end(), label);
      if (it == labels.end()) fail({file, r + 1, table.header[1]}, fmt::format("cause '{}' is not in the label map", label));
      cause = int(it - labels.begin());
    } else if (split == Split::training) {
      fail({file, r + 1, table.header[1]}, "training row has no cause");
    }
    if (split == Split::training) {
      data.cause.push_back(cause);
    } else {
      data.cause.push_back(kMissing);
      truth.push_back(cause);
    }
    data.split.push_back(split);
    data.age.push_back(parse_age(row[2], spec, {file, r + 1, table.header[2]}));
    data.sex.push_back(parse_binary(row[3], spec.missing_token, {file, r + 1, table.header[3]}));

    std::vector<std::uint8_t> xr(std::size_t(p), 0), mr(std::size_t(p), 0);
    for (int j = 0; j < p; ++j) {
      const auto col = std::size_t(kFixedColumns + j);
      const int v = parse_binary(row[col], spec.missing_token, {file, r + 1, table.header[col]});
      if (v == kMissing) mr[std::size_t(j)] = 1; else xr[std::size_t(j)] = std::uint8_t(v);
    }
    x.push_back(std::move(xr));
    miss.push_back(std::move(mr));
  }
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        field += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(trim(field));
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open {}", path.string()));
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(fmt::format("{}: missing header row", path.string()));
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    t.rows.push_back(split_csv_line(line));
  }
  return t;
}

IngestResult ingest(const IngestSpec& spec) {
  const CsvTable train = read_csv(spec.train);
  if (train.header.size() <= std::size_t(kFixedColumns))
    throw ParseError(fmt::format("{}: need id, cause, age, sex and at least one symptom column", spec.train.string()));
  std::optional<CsvTable> target;
  // a zero-byte target file means fit-only
  if (spec.target && !(std::filesystem::exists(*spec.target) && std::filesystem::file_size(*spec.target) == 0)) {
    target = read_csv(*spec.target);
    if (target->header != train.header)
      throw ParseError(fmt::format("{}: header does not match the training file", spec.target->string()));
  }

  IngestResult result;
  VaDataset& data = result.data;
  data.p = int(train.header.size()) - kFixedColumns;
  data.symptom_names.assign(train.header.begin() + kFixedColumns, train.header.end());
  data.cause_labels = spec.cause_labels.empty() ? derive_labels(train, spec.missing_token) : spec.cause_labels;
  data.L = int(data.cause_labels.size());

  std::vector<std::vector<std::uint8_t>> x, miss;
  append_rows(train, spec.train, Split::training, spec, data.cause_labels, data, result.target_truth, x, miss);
  if (target) append_rows(*target, *spec.target, Split::target, spec, data.cause_labels, data, result.target_truth, x, miss);

  const int n = int(x.size());
  data.x.resize(n, data.p);
  data.missing.resize(n, data.p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < data.p; ++j) {
      data.x(i, j) = x[std::size_t(i)][std::size_t(j)];
      data.missing(i, j) = miss[std::size_t(i)][std::size_t(j)];
    }
  data.validate();
  return result;
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", tmp.string()));
    out << contents;
    if (!out) throw std::runtime_error(fmt::format("failed writing {}", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

void write_dataset_csv(const VaDataset& data, const std::vector<int>& target_truth,
                       const std::filesystem::path& train, const std::filesystem::path& target,
                       const std::string& missing_token) {
  std::ostringstream head;
  head << "id,cause,age,sex";
  for (const auto& s : data.symptom_names) head << ',' << s;
  head << '\n';

  auto cell = [&](int v) { return v == kMissing ? missing_token : std::to_string(v); };
  std::ostringstream tr, tg;
  tr << head.str();
  tg << head.str();
  std::size_t t = 0;
  for (int i = 0; i < data.n(); ++i) {
    const bool training = data.split[i] == Split::training;
    auto& out = training ? tr : tg;
    int cause = data.cause[i];
    if (!training) cause = t < target_truth.size() ? target_truth[t++] : kMissing;
    out << data.ids[std::size_t(i)] << ',' << (cause == kMissing ? std::string() : data.cause_labels[std::size_t(cause)])
        << ',' << cell(data.age[i]) << ',' << cell(data.sex[i]);
    for (int j = 0; j < data.p; ++j) out << ',' << (data.missing(i, j) ? missing_token : std::to_string(int(data.x(i, j))));
    out << '\n';
  }
  write_file_atomic(train, tr.str());
  write_file_atomic(target, tg.str());
}

}  // namespace bfas
