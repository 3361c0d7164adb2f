#pragma once

#include <array>

namespace shockduct {

/// Isentropic gas p(rho) = rho^gamma with shear viscosity mu and second
/// viscosity lambda. mu_tilde = 2 mu + lambda is the normal viscosity that
/// appears in the 1D profile equation.
struct GasModel {
  double gamma = 1.4;
  double mu = 0.1;
  double lambda = 0.1;

  double mu_tilde() const { return 2.0 * mu + lambda; }

  /// Throws ErrorKind::Domain when any invariant is violated.
  void validate() const;
};

double pressure(double rho, const GasModel& gas);
/// p'(rho) = gamma rho^(gamma-1).
double pressure_derivative(double rho, const GasModel& gas);
double sound_speed(double rho, const GasModel& gas);

/// Far-field states of a 2-shock and its speed. The velocities are normal
/// components; transverse velocities are zero for a planar shock.
struct ShockTriple {
  double rho_minus = 0.0;
  double rho_plus = 0.0;
  double u1_minus = 0.0;
  double u1_plus = 0.0;
  double s = 0.0;

  double delta() const;
  double m1_minus() const { return rho_minus * u1_minus; }
  double m1_plus() const { return rho_plus * u1_plus; }

  double jump_rho() const { return rho_plus - rho_minus; }
  double jump_m1() const { return m1_plus() - m1_minus(); }
  /// [u1 m1] + [p]
  double jump_momentum_flux(const GasModel& gas) const;
  /// Mass flux through the shock, rho (u1 - s); equal on both sides.
  double mass_flux() const { return rho_minus * (u1_minus - s); }
};

/// Signed residuals of both Rankine-Hugoniot relations.
std::array<double, 2> rh_residuals(const ShockTriple& t, const GasModel& gas);

/// Normalized-frame 2-shock (u1_minus = -u1_plus > 0) connecting
/// rho_minus > rho_plus. Closed form, no root finding.
ShockTriple solve_shock(double rho_minus, double rho_plus,
                        const GasModel& gas);

/// (s - lambda_+(+), lambda_+(-) - s, s - lambda_-(-)); all positive iff
/// the triple is an admissible Lax 2-shock.
std::array<double, 3> check_lax(const ShockTriple& t, const GasModel& gas);

/// Galilean boost by speed a: u1 -> u1 - a, s -> s - a.
ShockTriple galilean_shift(const ShockTriple& t, double a);

struct FlowState {
  double rho = 1.0;
  std::array<double, 3> u{0.0, 0.0, 0.0};
};
FlowState galilean_shift(const FlowState& state, double a);

}  // namespace shockduct
