#include "bfas/snapshot.hpp"

#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "bfas/errors.hpp"

namespace bfas {

namespace {

constexpr char kMagic[8] = {'B', 'F', 'A', 'S', 'S', 'N', 'A', 'P'};

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ParseError("snapshot file is truncated");
  return v;
}

// row-major regardless of Eigen's storage order
void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put(out, m(r, c));
}

Eigen::MatrixXd get_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = get<double>(in);
  return m;
}

}  // namespace

ParameterSnapshot ParameterSnapshot::from_state(std::int64_t sweep, const ModelState& state) {
  return {sweep, state.loadings, state.precisions, state.categorical.demog, state.categorical.cause_prior};
}

void write_snapshots(const std::filesystem::path& path, const std::vector<ParameterSnapshot>& snapshots) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot open {} for writing", path.string()));
  out.write(kMagic, sizeof kMagic);
  put(out, kSnapshotVersion);
  const auto& first = snapshots.empty() ? Loadings{} : snapshots.front().loadings;
  put(out, std::int32_t(first.L));
  put(out, std::int32_t(first.p));
  put(out, std::int32_t(first.K));
  put(out, std::uint64_t(snapshots.size()));
  for (const auto& s : snapshots) {
    const auto& l = s.loadings;
    if (l.L != first.L || l.p != first.p || l.K != first.K) throw StructuralError("snapshots disagree in shape");
    put(out, s.sweep);
    for (const auto& b : l.B) put_matrix(out, b);
    for (const auto& lam : l.Lambda) put_matrix(out, lam);
    for (const auto& c : l.C)
      for (const auto& cq : c) put_matrix(out, cq);
    put_matrix(out, s.precisions.phi_B);
    put_matrix(out, s.precisions.phi_Lambda);
    put_matrix(out, s.precisions.phi_C);
    put_matrix(out, s.demog);
    put_matrix(out, s.cause_prior);
  }
  if (!out) throw std::runtime_error(fmt::format("failed writing {}", path.string()));
}

std::vector<ParameterSnapshot> read_snapshots(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(fmt::format("cannot open {}", path.string()));
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw ParseError(fmt::format("{} is not a snapshot file", path.string()));
  const auto version = get<std::uint32_t>(in);
  if (version != kSnapshotVersion) throw ParseError(fmt::format("unsupported snapshot version {}", version));
  const int L = get<std::int32_t>(in), p = get<std::int32_t>(in), K = get<std::int32_t>(in);
  const auto count = get<std::uint64_t>(in);

  std::vector<ParameterSnapshot> out;
  out.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    ParameterSnapshot s;
    s.sweep = get<std::int64_t>(in);
    s.loadings = Loadings::zeros(L, p, K);
    for (auto& b : s.loadings.B) b = get_matrix(in, p, 3);
    for (auto& lam : s.loadings.Lambda) lam = get_matrix(in, p, K);
    for (auto& c : s.loadings.C)
      for (auto& cq : c) cq = get_matrix(in, p, K);
    s.precisions.phi_B = get_matrix(in, p, 3);
    s.precisions.phi_Lambda = get_matrix(in, p, 1);
    s.precisions.phi_C = get_matrix(in, p, 3);
    s.demog = get_matrix(in, L, 4);
    s.cause_prior = get_matrix(in, L, 1);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace bfas
