#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "shockduct/fit.hpp"
#include "shockduct/gas.hpp"
#include "shockduct/grid.hpp"
#include "shockduct/periodic.hpp"
#include "shockduct/profile.hpp"
#include "shockduct/spectral.hpp"

namespace shockduct {

/// Trapezoid in xi and exact transverse mean of a field on the duct grid.
double integrate_duct(const DuctGrid& grid, std::span<const double> field);

/// (X0, Y0) = (-int phi0 / [rho], -int psi01 / [m1]).
std::pair<double, double> initial_shifts(const DuctGrid& grid, std::span<const double> phi0_bar,
                                         std::span<const double> psi01_bar,
                                         const ShockTriple& triple);

struct ShiftSpec {
  /// Quadrature window: nodes where eta' >= eps_window * delta^2.
  double eps_window = 1e-10;
};

/// Fourier coefficients (k = 0..kmax) of the transverse means of the four
/// background jump densities entering the L-integrals.
struct JumpLines {
  std::vector<cplx> m1;    // m1+ - m1-
  std::vector<cplx> rho;   // rho+ - rho-
  std::vector<cplx> flux;  // (u1 m1 + p)+ - (u1 m1 + p)-
  std::vector<cplx> u1;    // u1+ - u1-

  static JumpLines blend(const JumpLines& a, const JumpLines& b, double wa, double wb);
};

/// L-quadratures against the shifted profile. Two routes are provided:
/// a precomputed transform of the eta-weights (fast) and direct node
/// quadrature with trigonometric interpolation of the backgrounds.
class ShiftQuadrature {
 public:
  ShiftQuadrature(const Profile& profile, int n_bg, const ShiftSpec& spec = {});

  JumpLines lines(const PeriodicState& minus, const PeriodicState& plus) const;

  /// (L1, L2, L3) at shift d and time t, given the lines at time t.
  std::array<double, 3> L(const JumpLines& lines, double t, double d) const;
  std::array<double, 3> L_direct(const PeriodicState& minus, const PeriodicState& plus, double t,
                                 double d) const;

  double window_lo() const { return xi_.front(); }
  double window_hi() const { return xi_.back(); }
  std::size_t window_size() const { return xi_.size(); }
  /// Sum of the eta' weights (the discrete integral of eta').
  double eta_prime_mass() const { return H1_[0].real(); }
  double s() const { return s_; }
  double mu_tilde() const { return mu_tilde_; }
  const ShockTriple& triple() const { return triple_; }
  const GasModel& gas() const { return gas_; }

 private:
  ShockTriple triple_;
  GasModel gas_;
  double s_;
  double mu_tilde_;
  int n_bg_;
  int kmax_;
  std::vector<double> xi_;
  std::vector<double> w1_;  // trapezoid weight * eta'
  std::vector<double> w2_;  // trapezoid weight * eta''
  std::vector<cplx> H1_;
  std::vector<cplx> H2_;
};

/// X' = -s + L1/L2 at (X, t); Y' = -s + L3/L1 at (Y, t). Throws
/// SingularDenominator if L2 or L1 lose more than 95% of the jump.
std::pair<double, double> shift_velocities(const ShiftQuadrature& q, const JumpLines& lines,
                                           double t, double X, double Y);

struct ShiftCurves {
  std::vector<double> t, X, Y, Xp, Yp;
  double X0 = 0.0, Y0 = 0.0;
  double X_inf = 0.0, Y_inf = 0.0;
  double Y_inf_p = 0.0;
  /// Fit of |X'| + |Y'|.
  ExponentialFit speed_fit;
  double sup_speed = 0.0;
};

/// RK4 on the shift ODEs in lockstep with the backgrounds. L at the stage
/// midpoint uses linear interpolation of the lines.
class ShiftIntegrator {
 public:
  ShiftIntegrator(const ShiftQuadrature& q, double X0, double Y0, double t0);
  void step(const JumpLines& now, const JumpLines& next, double dt);
  double t() const { return t_; }
  double X() const { return X_; }
  double Y() const { return Y_; }

 private:
  const ShiftQuadrature* q_;
  double t_, X_, Y_;
};

/// Integrand of Y_inf_p at one time: transverse-and-x1 integral over T^d of
/// the background flux deviations.
double y_infinity_integrand(const PeriodicState& minus, const PeriodicState& plus,
                            const GasModel& gas);

struct YInfinity {
  double value = 0.0;      // (integral + tail) / [m1]
  double integral = 0.0;   // time integral up to the last sample
  double tail = 0.0;       // extrapolated integral beyond the last sample
  double tail_rate = 0.0;  // fitted decay rate of |integrand| (0 if below floor)
};

/// Trapezoid in time plus exponential extrapolation of the tail. Throws
/// TailUnbounded if the integrand is not decaying at the end of the record.
YInfinity y_infinity_periodic(std::span<const double> t, std::span<const double> integrand,
                              const ShockTriple& triple);

struct ShiftRun {
  ShiftCurves curves;
  std::vector<double> yinf_t;
  std::vector<double> yinf_integrand;
  std::vector<double> bg_sup_t;
  std::vector<double> bg_sup;  // max of both backgrounds' perturbation sup-norms
  YInfinity yinf;
  ExponentialFit bg_fit;
};

/// Evolves both backgrounds to T with step dt and integrates the shift
/// curves alongside. Curves are recorded every `sample_every` steps.
ShiftRun integrate_shifts(double X0, double Y0, PeriodicState minus, PeriodicState plus,
                          const Profile& profile, double T, double dt, int sample_every,
                          const ShiftSpec& spec = {});

/// int psi01 - s int phi0 - [m1] Y_inf_p.
double zero_mass_residual(double mass_phi0, double mass_psi01, double Y_inf_p,
                          const ShockTriple& triple);

/// Smooth compactly supported bump exp(-1/(1-r^2)), r = (xi - center)/half_width,
/// scaled to unit discrete mass on the grid (constant in x_perp).
std::vector<double> unit_mass_bump(const DuctGrid& grid, double center, double half_width);

/// Adds c * unit_mass_bump to psi01 so that zero_mass_residual vanishes.
/// Returns c.
double adjust_to_zero_mass(const DuctGrid& grid, std::span<const double> phi0_bar,
                           std::vector<double>& psi01_bar, double Y_inf_p,
                           const ShockTriple& triple, double center = 0.0,
                           double half_width = 3.0);

}  // namespace shockduct
