#include "shockduct/gas.hpp"

#include <cmath>
#include <string>

#include "shockduct/error.hpp"

namespace shockduct {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::ZeroStrength: return "ZeroStrength";
    case ErrorKind::Orientation: return "OrientationError";
    case ErrorKind::NotAdmissible: return "NotAdmissible";
    case ErrorKind::Pole: return "PoleError";
    case ErrorKind::TailTruncation: return "TailTruncation";
    case ErrorKind::InsufficientTail: return "InsufficientTail";
    case ErrorKind::AmplitudeTooLarge: return "AmplitudeTooLarge";
    case ErrorKind::BlowupDetected: return "BlowupDetected";
    case ErrorKind::SingularDenominator: return "SingularDenominator";
    case ErrorKind::TailUnbounded: return "TailUnbounded";
    case ErrorKind::AnsatzOutOfRange: return "AnsatzOutOfRange";
    case ErrorKind::BoundaryContamination: return "BoundaryContamination";
    case ErrorKind::ZeroMassViolation: return "ZeroMassViolation";
    case ErrorKind::MultiCrossing: return "MultiCrossing";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Io: return "IoError";
  }
  return "Error";
}

void GasModel::validate() const {
  if (!(gamma > 1.0)) {
    throw Error(ErrorKind::Domain, "gamma must exceed 1, got " + std::to_string(gamma));
  }
  if (!(mu > 0.0)) {
    throw Error(ErrorKind::Domain, "mu must be positive, got " + std::to_string(mu));
  }
  if (!(mu + lambda >= 0.0)) {
    throw Error(ErrorKind::Domain, "mu + lambda must be nonnegative");
  }
}

double pressure(double rho, const GasModel& gas) {
  if (!(rho > 0.0)) {
    throw Error(ErrorKind::Domain, "pressure of nonpositive density " + std::to_string(rho));
  }
  return std::pow(rho, gas.gamma);
}

double pressure_derivative(double rho, const GasModel& gas) {
  if (!(rho > 0.0)) {
    throw Error(ErrorKind::Domain, "p'(rho) of nonpositive density " + std::to_string(rho));
  }
  return gas.gamma * std::pow(rho, gas.gamma - 1.0);
}

double sound_speed(double rho, const GasModel& gas) {
  return std::sqrt(pressure_derivative(rho, gas));
}

double ShockTriple::delta() const { return std::abs(rho_plus - rho_minus); }

double ShockTriple::jump_momentum_flux(const GasModel& gas) const {
  return (u1_plus * m1_plus() - u1_minus * m1_minus()) +
         (pressure(rho_plus, gas) - pressure(rho_minus, gas));
}

std::array<double, 2> rh_residuals(const ShockTriple& t, const GasModel& gas) {
  const double r1 = -t.s * t.jump_rho() + t.jump_m1();
  const double r2 = -t.s * t.jump_m1() + t.jump_momentum_flux(gas);
  return {r1, r2};
}

ShockTriple solve_shock(double rho_minus, double rho_plus, const GasModel& gas) {
  gas.validate();
  if (!(rho_minus > 0.0) || !(rho_plus > 0.0)) {
    throw Error(ErrorKind::Domain, "shock densities must be positive");
  }
  if (rho_minus == rho_plus) {
    throw Error(ErrorKind::ZeroStrength, "rho_minus == rho_plus");
  }
  if (rho_minus < rho_plus) {
    throw Error(ErrorKind::Orientation,
                "2-shock requires rho_minus > rho_plus (swap states or use the 1-family)");
  }
  // With u1_minus = a = -u1_plus the mass relation gives
  // s = -a (rho+ + rho-) / (rho+ - rho-), and the momentum relation reduces to
  // a^2 = [p][rho] / (4 rho+ rho-).
  const double dp = pressure(rho_plus, gas) - pressure(rho_minus, gas);
  const double drho = rho_plus - rho_minus;
  const double a = std::sqrt(dp * drho / (4.0 * rho_plus * rho_minus));
  ShockTriple t;
  t.rho_minus = rho_minus;
  t.rho_plus = rho_plus;
  t.u1_minus = a;
  t.u1_plus = -a;
  t.s = -a * (rho_plus + rho_minus) / drho;
  return t;
}

std::array<double, 3> check_lax(const ShockTriple& t, const GasModel& gas) {
  const double c_plus = sound_speed(t.rho_plus, gas);
  const double c_minus = sound_speed(t.rho_minus, gas);
  return {t.s - (t.u1_plus + c_plus), (t.u1_minus + c_minus) - t.s,
          t.s - (t.u1_minus - c_minus)};
}

ShockTriple galilean_shift(const ShockTriple& t, double a) {
  ShockTriple out = t;
  out.u1_minus -= a;
  out.u1_plus -= a;
  out.s -= a;
  return out;
}

FlowState galilean_shift(const FlowState& state, double a) {
  FlowState out = state;
  out.u[0] -= a;
  return out;
}

}  // namespace shockduct
