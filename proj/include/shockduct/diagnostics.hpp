#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "shockduct/ansatz.hpp"
#include "shockduct/duct.hpp"
#include "shockduct/fit.hpp"
#include "shockduct/hybrid.hpp"
#include "shockduct/modes.hpp"
#include "shockduct/profile.hpp"

namespace shockduct {

/// phi = rho - rho~, psi = m - m~, zeta = u - u~.
struct PerturbationFields {
  std::vector<double> phi;
  std::vector<std::vector<double>> psi;
  std::vector<std::vector<double>> zeta;
};

PerturbationFields perturbation_fields(const DuctState& state, const AnsatzField& ansatz);

struct NormSet {
  double l2 = 0.0;
  double h1 = 0.0;
  double linf = 0.0;
  double w1inf = 0.0;
};

/// Norms of a (vector) field: L2 and H1 sum over components, sup norms take
/// the max over components and, for W1inf, over all first derivatives.
NormSet discrete_norms(DuctDerivatives& ops, const std::vector<std::span<const double>>& fields);
NormSet discrete_norms(DuctDerivatives& ops, std::span<const double> field);

struct EnergyWeights {
  double A1 = 10.0;
  double A2 = 1.0;
};

/// E(t) of the non-zero modes. rho_s / u1_s are the profile shifted by
/// x_inf, sampled per xi column.
double energy_functional(DuctDerivatives& ops, std::span<const double> phi_sharp,
                         const std::vector<std::vector<double>>& psi_sharp,
                         const std::vector<std::vector<double>>& zeta_sharp,
                         const Profile& profile, double x_inf, const EnergyWeights& w);

/// Crossing of the transverse mean of rho through (rho_bar_minus +
/// rho_bar_plus) / 2, linearly interpolated. Throws MultiCrossing.
double shock_location(const DuctState& state, const ShockTriple& triple);
double shock_location(const DuctGrid& grid, std::span<const double> rho, double level);

struct AlphaProfile {
  std::vector<double> xi;
  std::vector<double> alpha;
  /// min over xi of alpha - p'(rho_s) / 2.
  double margin = 0.0;
  double min_alpha = 0.0;
};

AlphaProfile alpha_coefficient(const Profile& profile);

struct DiagnosticsSample {
  double t = 0.0;
  NormSet full;   // (phi, zeta)
  NormSet sharp;  // non-zero modes of (phi, zeta)
  double anti_l2 = 0.0;
  double energy = 0.0;
  double location = 0.0;
  bool location_ok = false;
  double mass_phi = 0.0;
  double mass_psi1 = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  double X = 0.0, Y = 0.0, Xp = 0.0, Yp = 0.0;
  double bg_sup = 0.0;
  double sponge_dev = 0.0;
  double rho_min = 0.0, rho_max = 0.0;
};

struct DiagnosticsSeries {
  std::vector<DiagnosticsSample> samples;
  double X_inf = 0.0;
  double Y_inf = 0.0;
  double Y_inf_p = 0.0;
  double X0 = 0.0, Y0 = 0.0;
  double dxi = 0.0;
  double rho_bar_minus = 0.0, rho_bar_plus = 0.0;
};

struct VerdictTolerances {
  double sharp_r2 = 0.95;
  double energy_r2 = 0.9;
  double w1inf_ratio = 0.10;
  double w1inf_reference_time = 5.0;
  double location_cells = 2.0;
  double mass_drift_rate = 1e-6;
  /// Relative floor below which samples are excluded from decay fits. E is
  /// quadratic in the perturbation and is fitted against the square.
  double fit_floor = 1e-10;
  double fit_t_begin = 0.0;
};

struct Verdict {
  std::string claim;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct VerdictReport {
  std::vector<Verdict> verdicts;
  ExponentialFit sharp_fit;
  ExponentialFit energy_fit;
  ExponentialFit source_fit;
  double mass_drift = 0.0;
  double w1inf_ratio = 0.0;
  double location_offset = 0.0;
  bool all_pass() const;
};

/// Claims (a) non-zero-mode decay, (b) W1inf ratio, (c) shock location,
/// (d) zero-mass drift, (e) energy decay.
VerdictReport theorem_verdict(const DiagnosticsSeries& series, const VerdictTolerances& tol);

/// Larger |slope| of least-squares lines through the zero-mode masses
/// M(t) = (int phi_flat, int psi1_flat).
double zero_mass_drift(const DiagnosticsSeries& series);
/// max |M(t) - M(0)| over the series.
double zero_mass_offset(const DiagnosticsSeries& series);

void write_series_csv(const std::filesystem::path& path, const DiagnosticsSeries& series);
DiagnosticsSeries read_series_csv(const std::filesystem::path& path);

}  // namespace shockduct
