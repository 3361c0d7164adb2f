#pragma once

#include <cstddef>
#include <cstdint>

namespace shockduct {

/// Node-centered moving-frame grid on [-L, L] x T^(d-1). Storage is
/// row-major [xi][x2][x3], so each xi column is a contiguous transverse block.
struct DuctGrid {
  int d = 2;
  int n_xi = 512;
  int n_perp = 32;
  double L = 40.0;

  double dxi() const { return 2.0 * L / static_cast<double>(n_xi - 1); }
  double xi(int j) const { return -L + static_cast<double>(j) * dxi(); }
  double dperp() const { return 1.0 / static_cast<double>(n_perp); }
  /// Number of transverse nodes per xi column.
  std::size_t perp_count() const {
    std::size_t c = 1;
    for (int a = 1; a < d; ++a) c *= static_cast<std::size_t>(n_perp);
    return c;
  }
  std::size_t points() const { return static_cast<std::size_t>(n_xi) * perp_count(); }
  /// Transverse volume element (the torus has unit measure).
  double perp_weight() const { return 1.0 / static_cast<double>(perp_count()); }

  void validate() const;
};

}  // namespace shockduct
