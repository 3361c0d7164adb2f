#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "shockduct/gas.hpp"

namespace shockduct {

struct ProfileSpec {
  /// Integration stops once |rho_s - rho_bar_pm| <= eps_tail * delta on both sides.
  double eps_tail = 1e-12;
  /// Local relative tolerance of the adaptive stepper.
  double rtol = 1e-10;
  /// Uniform output spacing; 0 picks 0.002 / (fastest linearized tail rate).
  double h = 0.0;
  /// Position where eta = 1/2.
  double center = 0.0;
  /// Half-width beyond which the tail is declared unreachable.
  double max_extent = 1e5;
};

/// Viscous 2-shock profile sampled on a uniform grid symmetric about
/// spec.center. Samples beyond the grid are the exact far-field constants.
struct Profile {
  ShockTriple triple;
  GasModel gas;
  double j = 0.0;  // rho (u1 - s)
  double K = 0.0;  // j u1 + p(rho), constant along the profile
  double h = 0.0;
  double center = 0.0;
  /// Linearized decay rates of u1_s - u1_bar at each end.
  double lin_rate_minus = 0.0;
  double lin_rate_plus = 0.0;
  /// Achieved max |rho_s - rho_bar| / delta at the two grid ends.
  double cutoff_minus = 0.0;
  double cutoff_plus = 0.0;

  std::vector<double> xi;
  std::vector<double> rho_s;
  std::vector<double> m1_s;
  std::vector<double> u1_s;
  std::vector<double> eta;
  std::vector<double> eta_p;
  std::vector<double> eta_pp;
  std::vector<double> u1_p;
  std::vector<double> u1_pp;

  std::size_t size() const { return xi.size(); }
  double xi_min() const { return xi.front(); }
  double xi_max() const { return xi.back(); }
};

/// (1/mu_tilde) [ j u1 + p(j / (u1 - s)) - K ].
double profile_rhs(double u1, const ShockTriple& triple, const GasModel& gas);

Profile solve_profile(const ShockTriple& triple, const GasModel& gas,
                      const ProfileSpec& spec = {});

struct TailRates {
  double rate_minus = 0.0;
  double rate_plus = 0.0;
  /// Smaller of the two R^2 values.
  double r2 = 0.0;
};

/// Decay rate of |u1_s'| on the outer 30% of each half of the grid.
TailRates tail_rates(const Profile& profile);

/// Same fit on raw samples: xi (ascending, straddling the center) and the
/// magnitude to fit. Exposed for synthetic checks.
TailRates tail_rates(std::span<const double> xi, std::span<const double> magnitude,
                     double center = 0.0);

struct ProfileSample {
  double rho = 0.0;
  double m1 = 0.0;
  double u1 = 0.0;
  double eta = 0.0;
  double eta_p = 0.0;
  double eta_pp = 0.0;
};

/// Monotone piecewise-cubic evaluation; far-field constants outside the grid.
ProfileSample eval_profile(const Profile& profile, double xi);

/// Integral of eta' over the real line: trapezoid on the grid plus the
/// exponential tail beyond each end.
double eta_prime_integral(const Profile& profile);

/// CSV with columns xi, rho_s, m1_s, u1_s, eta, eta_p, eta_pp.
void write_profile_csv(const Profile& profile, const std::filesystem::path& path);

}  // namespace shockduct
