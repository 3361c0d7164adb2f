#pragma once

#include <map>
#include <memory>
#include <span>
#include <vector>

#include "shockduct/grid.hpp"
#include "shockduct/spectral.hpp"

namespace shockduct {

/// Derivatives on the duct grid: finite differences along xi, Fourier
/// differentiation across the torus. Fields are flat [xi][perp] arrays.
class DuctDerivatives {
 public:
  explicit DuctDerivatives(const DuctGrid& grid);
  ~DuctDerivatives();

  const DuctGrid& grid() const { return grid_; }

  /// d/dxi: 4th-order central for 2 <= j <= n-3, 2nd-order central at
  /// j = 1 and n-2, one-sided 2nd order at the two ends.
  void dxi(const double* f, double* out) const;
  std::vector<double> dxi(std::span<const double> f) const;

  /// out[f * (d-1) + a] = d/dx_{a+2} of in[f], for `count` fields.
  /// Nyquist entries are dropped. No-op for d = 1.
  void grad_perp(const double* in, int count, double* out);

  /// Transverse divergence of groups of d-1 fields:
  /// out[g] = sum_a d/dx_{a+2} in[g * (d-1) + a].
  void div_perp(const double* in, int groups, double* out);

  /// Exact transverse mean of each xi column.
  std::vector<double> perp_mean(std::span<const double> f) const;

 private:
  BatchedRealFFT& plan(int fields);

  DuctGrid grid_;
  std::size_t P_;
  std::size_t N_;
  std::vector<int> perp_shape_;
  HalfSpectrumGrid half_;
  std::map<int, std::unique_ptr<BatchedRealFFT>> plans_;
  std::vector<cplx> scratch_;
};

}  // namespace shockduct
