#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "shockduct/duct.hpp"
#include "shockduct/periodic.hpp"

namespace shockduct {

inline constexpr std::uint32_t kSnapshotVersion = 1;

/// Fixed binary layout, little endian: "SHKD", u32 version, i64 d, i64 n_xi,
/// i64 n_perp, f64 L, f64 t, f64 frame_speed, then rho and the d momentum
/// components as row-major f64 arrays of n_xi * n_perp^(d-1) values.
/// Periodic states use the same layout with n_xi = n_perp = n, L = 0.5.
struct SnapshotData {
  std::uint32_t version = kSnapshotVersion;
  int d = 2;
  int n_xi = 0;
  int n_perp = 0;
  double L = 0.0;
  double t = 0.0;
  double frame_speed = 0.0;
  std::vector<double> q;

  std::size_t points() const;
};

void write_snapshot(const std::filesystem::path& path, const SnapshotData& snap);
/// Throws Io on a bad magic, a version mismatch or a truncated file.
SnapshotData read_snapshot(const std::filesystem::path& path);

SnapshotData to_snapshot(const DuctState& state);
DuctState duct_from_snapshot(const SnapshotData& snap, std::int64_t step);

SnapshotData to_snapshot(const PeriodicState& state);
PeriodicState periodic_from_snapshot(const SnapshotData& snap, double mean_rho,
                                     const std::array<double, 3>& mean_m, std::int64_t step);

}  // namespace shockduct
