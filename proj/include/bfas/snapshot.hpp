#pragma once

// Binary file of kept parameter states.
//
// Layout (native little-endian, no padding):
//   char[8]  magic "BFASSNAP"
//   uint32   format version (1)
//   int32    L, p, K
//   uint64   number of snapshots
// then per snapshot:
//   int64    sweep index
//   float64  B        for each cause: p x 3, row-major
//   float64  Lambda   for each cause: p x K, row-major
//   float64  C        for each cause, for q = 1..3: p x K, row-major
//   float64  phi_B    p x 3, row-major
//   float64  phi_Lambda  p
//   float64  phi_C    p x 3, row-major
//   float64  demog    L x 4, row-major
//   float64  cause_prior  L
// The latent z and factors are not stored.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "bfas/model.hpp"

namespace bfas {

inline constexpr std::uint32_t kSnapshotVersion = 1;

struct ParameterSnapshot {
  std::int64_t sweep = 0;
  Loadings loadings;
  ShrinkagePrecisions precisions;
  Eigen::MatrixXd demog;
  Eigen::VectorXd cause_prior;

  static ParameterSnapshot from_state(std::int64_t sweep, const ModelState& state);
};

void write_snapshots(const std::filesystem::path& path, const std::vector<ParameterSnapshot>& snapshots);
std::vector<ParameterSnapshot> read_snapshots(const std::filesystem::path& path);

}  // namespace bfas
