#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "shockduct/grid.hpp"
#include "shockduct/hybrid.hpp"

namespace shockduct {

/// flat: transverse mean per xi column; sharp: field - flat.
struct ModeSplit {
  std::vector<double> flat;
  std::vector<double> sharp;
};

ModeSplit split_modes(const DuctGrid& grid, std::span<const double> field);

/// Broadcasts a column profile back onto the full grid.
std::vector<double> broadcast_flat(const DuctGrid& grid, std::span<const double> flat);

/// Cumulative trapezoid from the left end with spacing h.
std::vector<double> cumulative_trapezoid(std::span<const double> f, double h);

struct AntiDerivativePair {
  std::vector<double> Phi;
  std::vector<double> Psi1;
  /// Values at the right end (the total masses).
  double residual_phi = 0.0;
  double residual_psi = 0.0;
};

/// Anti-derivatives of the zero modes. Throws ZeroMassViolation if either
/// endpoint exceeds 100 * tolerance; smaller residuals are only reported.
AntiDerivativePair antiderivative(const DuctGrid& grid, std::span<const double> flat_phi,
                                  std::span<const double> flat_psi1, double tolerance);

/// ||f||_L2 / ||grad_perp f||_L2 for a field with zero transverse mean.
/// Throws Domain if the gradient vanishes while the field does not.
double poincare_ratio(DuctDerivatives& ops, std::span<const double> sharp);

/// Columns xi, phi_flat, psi1_flat, Phi, Psi1.
void write_zero_mode_csv(const std::filesystem::path& path, const DuctGrid& grid,
                         std::span<const double> phi_flat, std::span<const double> psi1_flat,
                         const AntiDerivativePair& anti);

}  // namespace shockduct
