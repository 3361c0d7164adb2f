#pragma once

#include <span>
#include <vector>

#include "shockduct/fit.hpp"
#include "shockduct/grid.hpp"
#include "shockduct/hybrid.hpp"
#include "shockduct/periodic.hpp"
#include "shockduct/profile.hpp"

namespace shockduct {

/// Composite field on the duct grid at time t. The density blends the
/// backgrounds with eta(xi - X), the momentum with eta(xi - Y).
struct AnsatzField {
  DuctGrid grid;
  double t = 0.0;
  double X = 0.0;
  double Y = 0.0;
  std::vector<double> rho;
  std::vector<std::vector<double>> m;  // d components
  std::vector<std::vector<double>> u;  // m / rho
};

/// Source terms of the ansatz equations, each a field on the duct grid.
/// F3 is stored row-major: F3[i * d + k].
struct AnsatzSources {
  std::vector<std::vector<double>> F1;
  std::vector<double> f2;
  std::vector<std::vector<double>> F3;
  std::vector<std::vector<double>> f4;
};

/// Backgrounds sampled on the duct grid (with gradients for the sources).
struct SampledBackgrounds {
  BackgroundSampler::Fields minus;
  BackgroundSampler::Fields plus;
};

SampledBackgrounds sample_backgrounds(BackgroundSampler& sampler, const PeriodicState& minus,
                                      const PeriodicState& plus, double s, bool gradients);

/// Throws AnsatzOutOfRange if the density leaves [rho_bar_plus / 2, 2 rho_bar_minus].
AnsatzField build_ansatz(const DuctGrid& grid, double t, const SampledBackgrounds& bg,
                         const Profile& profile, double X, double Y);

/// F1, f2, F3, f4 at shifts (X, Y) with velocities (Xp, Yp). Background
/// gradients must have been sampled.
AnsatzSources source_terms(const DuctGrid& grid, const SampledBackgrounds& bg,
                           const Profile& profile, double X, double Y, double Xp, double Yp);

/// g1 = div F1 + f2 and g2_k = sum_i d_i F3_ik + f4_k.
struct AnsatzErrors {
  std::vector<double> g1;
  std::vector<std::vector<double>> g2;
};

AnsatzErrors assemble_errors(DuctDerivatives& ops, const AnsatzSources& src);

/// L2 norms and L2 norms of all first derivatives of g1 and g2.
struct ErrorNorms {
  double g1_l2 = 0.0;
  double g2_l2 = 0.0;
  double g1_h1 = 0.0;
  double g2_h1 = 0.0;
};

ErrorNorms error_norms(DuctDerivatives& ops, const AnsatzErrors& err);

/// Fits ||g1|| and ||g2|| (L2 plus gradient) against amplitude * exp(-rate t).
struct ErrorNormFit {
  ExponentialFit g1;
  ExponentialFit g2;
};

ErrorNormFit ansatz_error_norms(std::span<const double> t, std::span<const ErrorNorms> norms,
                                const FitWindow& window = {});

/// L2 norm on the duct: trapezoid in xi, exact mean across.
double duct_l2(const DuctGrid& grid, std::span<const double> f);
double duct_sup(std::span<const double> f);

}  // namespace shockduct
