#include "shockduct/shift.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "shockduct/error.hpp"

namespace shockduct {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double frac(double x) { return x - std::floor(x); }
}  // namespace

double integrate_duct(const DuctGrid& grid, std::span<const double> field) {
  const std::size_t P = grid.perp_count();
  if (field.size() != grid.points()) {
    throw Error(ErrorKind::Domain, "integrate_duct: field size does not match grid");
  }
  double total = 0.0;
  for (int j = 0; j < grid.n_xi; ++j) {
    double col = 0.0;
    for (std::size_t p = 0; p < P; ++p) col += field[static_cast<std::size_t>(j) * P + p];
    const double w = (j == 0 || j == grid.n_xi - 1) ? 0.5 : 1.0;
    total += w * col;
  }
  return total * grid.dxi() * grid.perp_weight();
}

std::pair<double, double> initial_shifts(const DuctGrid& grid, std::span<const double> phi0_bar,
                                         std::span<const double> psi01_bar,
                                         const ShockTriple& triple) {
  if (triple.jump_rho() == 0.0 || triple.jump_m1() == 0.0) {
    throw Error(ErrorKind::ZeroStrength, "initial_shifts needs nonzero jumps");
  }
  const double X0 = -integrate_duct(grid, phi0_bar) / triple.jump_rho();
  const double Y0 = -integrate_duct(grid, psi01_bar) / triple.jump_m1();
  return {X0, Y0};
}

JumpLines JumpLines::blend(const JumpLines& a, const JumpLines& b, double wa, double wb) {
  auto mix = [&](const std::vector<cplx>& x, const std::vector<cplx>& y) {
    std::vector<cplx> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = wa * x[i] + wb * y[i];
    return out;
  };
  return {mix(a.m1, b.m1), mix(a.rho, b.rho), mix(a.flux, b.flux), mix(a.u1, b.u1)};
}

ShiftQuadrature::ShiftQuadrature(const Profile& profile, int n_bg, const ShiftSpec& spec)
    : triple_(profile.triple),
      gas_(profile.gas),
      s_(profile.triple.s),
      mu_tilde_(profile.gas.mu_tilde()),
      n_bg_(n_bg),
      kmax_((n_bg - 1) / 2) {
  const double delta = triple_.delta();
  const double thr = spec.eps_window * delta * delta;
  const std::size_t n = profile.size();
  std::size_t lo = n, hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (profile.eta_p[i] >= thr) {
      lo = std::min(lo, i);
      hi = std::max(hi, i);
    }
  }
  if (lo >= hi) throw Error(ErrorKind::TailTruncation, "empty quadrature window");
  if (lo == 0 || hi == n - 1) {
    std::ostringstream os;
    os << "quadrature window (eta' >= " << thr
       << ") reaches the end of the profile grid; resolve the profile tails further";
    throw Error(ErrorKind::TailTruncation, os.str());
  }
  for (std::size_t i = lo; i <= hi; ++i) {
    const double h = profile.xi[std::min(i + 1, n - 1)] - profile.xi[i];
    const double w = (i == lo || i == hi) ? 0.5 * h : h;
    xi_.push_back(profile.xi[i]);
    w1_.push_back(w * profile.eta_p[i]);
    w2_.push_back(w * profile.eta_pp[i]);
  }
  H1_.assign(static_cast<std::size_t>(kmax_ + 1), cplx(0.0, 0.0));
  H2_.assign(H1_.size(), cplx(0.0, 0.0));
  for (int k = 0; k <= kmax_; ++k) {
    cplx a1 = 0.0, a2 = 0.0;
    for (std::size_t q = 0; q < xi_.size(); ++q) {
      const double ang = kTwoPi * k * xi_[q];
      const cplx e(std::cos(ang), std::sin(ang));
      a1 += w1_[q] * e;
      a2 += w2_[q] * e;
    }
    H1_[k] = a1;
    H2_[k] = a2;
  }
  // The integral of eta'' over the line is exactly zero.
  H2_[0] = 0.0;
}

namespace {

/// Transverse means of the four jump densities on the background x1 grid.
std::array<std::vector<double>, 4> jump_line_values(const PeriodicState& minus,
                                                    const PeriodicState& plus,
                                                    const GasModel& gas) {
  if (minus.d != plus.d || minus.n != plus.n) {
    throw Error(ErrorKind::Domain, "backgrounds must share a grid");
  }
  const int n = minus.n;
  const std::size_t N = minus.points();
  const std::size_t P = N / static_cast<std::size_t>(n);
  std::array<std::vector<double>, 4> g;
  for (auto& v : g) v.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double a[4] = {0, 0, 0, 0};
    for (std::size_t p = 0; p < P; ++p) {
      const std::size_t idx = static_cast<std::size_t>(i) * P + p;
      const double rp = plus.q[idx], rm = minus.q[idx];
      const double mp = plus.q[N + idx], mm = minus.q[N + idx];
      const double up = mp / rp, um = mm / rm;
      a[0] += mp - mm;
      a[1] += rp - rm;
      a[2] += (up * mp + pressure(rp, gas)) - (um * mm + pressure(rm, gas));
      a[3] += up - um;
    }
    for (int f = 0; f < 4; ++f) g[f][i] = a[f] / static_cast<double>(P);
  }
  return g;
}

std::vector<cplx> line_coefficients(const std::vector<double>& g, int kmax) {
  const int n = static_cast<int>(g.size());
  std::vector<cplx> c(static_cast<std::size_t>(kmax + 1));
  for (int k = 0; k <= kmax; ++k) {
    cplx acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double ang = -kTwoPi * k * static_cast<double>(i) / n;
      acc += g[i] * cplx(std::cos(ang), std::sin(ang));
    }
    c[k] = acc * ((k == 0 ? 1.0 : 2.0) / n);
  }
  return c;
}

}  // namespace

JumpLines ShiftQuadrature::lines(const PeriodicState& minus, const PeriodicState& plus) const {
  if (minus.n != n_bg_) throw Error(ErrorKind::Domain, "background grid size mismatch");
  const auto g = jump_line_values(minus, plus, gas_);
  return {line_coefficients(g[0], kmax_), line_coefficients(g[1], kmax_),
          line_coefficients(g[2], kmax_), line_coefficients(g[3], kmax_)};
}

std::array<double, 3> ShiftQuadrature::L(const JumpLines& lines, double t, double d) const {
  const double a = frac(s_ * t + d);
  double L1 = 0.0, L2 = 0.0, L3 = 0.0;
  for (int k = 0; k <= kmax_; ++k) {
    const double ang = kTwoPi * k * a;
    const cplx e(std::cos(ang), std::sin(ang));
    const cplx h1 = e * H1_[k];
    L1 += (lines.m1[k] * h1).real();
    L2 += (lines.rho[k] * h1).real();
    L3 += (lines.flux[k] * h1).real() + mu_tilde_ * (lines.u1[k] * e * H2_[k]).real();
  }
  return {L1, L2, L3};
}

std::array<double, 3> ShiftQuadrature::L_direct(const PeriodicState& minus,
                                                const PeriodicState& plus, double t,
                                                double d) const {
  const auto g = jump_line_values(minus, plus, gas_);
  const int n = minus.n;
  // Trigonometric interpolant of the sampled line at x.
  auto interp = [&](const std::vector<double>& vals, double x) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      double kern = 1.0;
      const double diff = x - static_cast<double>(i) / n;
      for (int k = 1; k <= kmax_; ++k) kern += 2.0 * std::cos(kTwoPi * k * diff);
      acc += vals[i] * kern;
    }
    return acc / n;
  };
  double mean_u1 = 0.0;
  for (double v : g[3]) mean_u1 += v;
  mean_u1 /= n;
  const double a = frac(s_ * t + d);
  double L1 = 0.0, L2 = 0.0, L3 = 0.0;
  for (std::size_t q = 0; q < xi_.size(); ++q) {
    const double x = frac(xi_[q] + a);
    L1 += w1_[q] * interp(g[0], x);
    L2 += w1_[q] * interp(g[1], x);
    L3 += w1_[q] * interp(g[2], x) + mu_tilde_ * w2_[q] * (interp(g[3], x) - mean_u1);
  }
  return {L1, L2, L3};
}

std::pair<double, double> shift_velocities(const ShiftQuadrature& q, const JumpLines& lines,
                                           double t, double X, double Y) {
  const ShockTriple& tr = q.triple();
  const auto LX = q.L(lines, t, X);
  const auto LY = q.L(lines, t, Y);
  const double mass = q.eta_prime_mass();
  if (!(LX[1] / (tr.jump_rho() * mass) > 0.05)) {
    throw Error(ErrorKind::SingularDenominator, "L2 collapsed (periodic amplitude too large)");
  }
  if (!(LY[0] / (tr.jump_m1() * mass) > 0.05)) {
    throw Error(ErrorKind::SingularDenominator, "L1 collapsed (periodic amplitude too large)");
  }
  return {-q.s() + LX[0] / LX[1], -q.s() + LY[2] / LY[0]};
}

ShiftIntegrator::ShiftIntegrator(const ShiftQuadrature& q, double X0, double Y0, double t0)
    : q_(&q), t_(t0), X_(X0), Y_(Y0) {}

void ShiftIntegrator::step(const JumpLines& now, const JumpLines& next, double dt) {
  const JumpLines mid = JumpLines::blend(now, next, 0.5, 0.5);
  const auto k1 = shift_velocities(*q_, now, t_, X_, Y_);
  const auto k2 = shift_velocities(*q_, mid, t_ + 0.5 * dt, X_ + 0.5 * dt * k1.first,
                                   Y_ + 0.5 * dt * k1.second);
  const auto k3 = shift_velocities(*q_, mid, t_ + 0.5 * dt, X_ + 0.5 * dt * k2.first,
                                   Y_ + 0.5 * dt * k2.second);
  const auto k4 =
      shift_velocities(*q_, next, t_ + dt, X_ + dt * k3.first, Y_ + dt * k3.second);
  X_ += dt / 6.0 * (k1.first + 2.0 * k2.first + 2.0 * k3.first + k4.first);
  Y_ += dt / 6.0 * (k1.second + 2.0 * k2.second + 2.0 * k3.second + k4.second);
  t_ += dt;
}

double y_infinity_integrand(const PeriodicState& minus, const PeriodicState& plus,
                            const GasModel& gas) {
  const std::size_t N = minus.points();
  auto side = [&](const PeriodicState& s) {
    const double rbar = s.mean_rho;
    const double mbar = s.mean_m[0];
    const double base = mbar * mbar / rbar + pressure(rbar, gas);
    double acc = 0.0;
    for (std::size_t p = 0; p < N; ++p) {
      const double r = s.q[p];
      const double m = s.q[N + p];
      acc += (m * m / r + pressure(r, gas)) - base;
    }
    return acc / static_cast<double>(N);
  };
  return side(plus) - side(minus);
}

YInfinity y_infinity_periodic(std::span<const double> t, std::span<const double> I,
                              const ShockTriple& triple) {
  if (t.size() != I.size() || t.size() < 2) {
    throw Error(ErrorKind::Domain, "y_infinity_periodic needs a time series");
  }
  YInfinity out;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    out.integral += 0.5 * (t[i + 1] - t[i]) * (I[i] + I[i + 1]);
  }
  double peak = 0.0;
  for (double v : I) peak = std::max(peak, std::abs(v));
  // Round-off level of the integrand, relative to the flux scale.
  const double noise = 1e-13 * std::abs(triple.s * triple.jump_m1());
  const double floor = std::max(1e-12 * peak, noise);
  if (peak > noise && std::abs(I.back()) > floor) {
    const std::size_t start = t.size() - std::max<std::size_t>(t.size() * 3 / 10, 2);
    std::vector<double> ts, ys;
    for (std::size_t i = start; i < t.size(); ++i) {
      ts.push_back(t[i]);
      ys.push_back(std::abs(I[i]));
    }
    FitWindow w;
    w.min_points = 2;
    const ExponentialFit f = fit_exponential(ts, ys, w);
    if (!f.ok || !(f.rate > 0.0)) {
      throw Error(ErrorKind::TailUnbounded, "Y_inf_p integrand is not decaying");
    }
    out.tail_rate = f.rate;
    out.tail = I.back() / f.rate;
  }
  out.value = (out.integral + out.tail) / triple.jump_m1();
  return out;
}

ShiftRun integrate_shifts(double X0, double Y0, PeriodicState minus, PeriodicState plus,
                          const Profile& profile, double T, double dt, int sample_every,
                          const ShiftSpec& spec) {
  if (!(dt > 0.0) || !(T >= 0.0) || sample_every < 1) {
    throw Error(ErrorKind::Domain, "integrate_shifts: bad time stepping");
  }
  const GasModel& gas = profile.gas;
  ShiftQuadrature quad(profile, minus.n, spec);
  PeriodicSolver solver(gas, minus.d, minus.n);
  ShiftIntegrator integ(quad, X0, Y0, 0.0);
  ShiftRun run;
  ShiftCurves& c = run.curves;
  c.X0 = X0;
  c.Y0 = Y0;

  const auto nsteps = static_cast<std::int64_t>(std::llround(T / dt));
  JumpLines now = quad.lines(minus, plus);
  auto record = [&](const JumpLines& lines) {
    const auto [xp, yp] = shift_velocities(quad, lines, integ.t(), integ.X(), integ.Y());
    c.t.push_back(integ.t());
    c.X.push_back(integ.X());
    c.Y.push_back(integ.Y());
    c.Xp.push_back(xp);
    c.Yp.push_back(yp);
    run.bg_sup_t.push_back(integ.t());
    run.bg_sup.push_back(std::max(perturbation_sup(minus), perturbation_sup(plus)));
  };
  record(now);
  run.yinf_t.push_back(0.0);
  run.yinf_integrand.push_back(y_infinity_integrand(minus, plus, gas));
  for (std::int64_t n = 1; n <= nsteps; ++n) {
    solver.step(minus, dt);
    solver.step(plus, dt);
    JumpLines next = quad.lines(minus, plus);
    integ.step(now, next, dt);
    now = std::move(next);
    run.yinf_t.push_back(minus.t);
    run.yinf_integrand.push_back(y_infinity_integrand(minus, plus, gas));
    if (n % sample_every == 0 || n == nsteps) record(now);
  }

  std::vector<double> speed(c.t.size());
  for (std::size_t i = 0; i < c.t.size(); ++i) {
    speed[i] = std::abs(c.Xp[i]) + std::abs(c.Yp[i]);
    c.sup_speed = std::max(c.sup_speed, speed[i]);
  }
  FitWindow w;
  w.floor = 1e-10 * c.sup_speed;
  w.min_points = 5;
  c.speed_fit = fit_exponential(c.t, speed, w);
  FitWindow wb;
  wb.floor = 1e-10 * (run.bg_sup.empty() ? 0.0 : run.bg_sup.front());
  wb.min_points = 5;
  run.bg_fit = fit_exponential(run.bg_sup_t, run.bg_sup, wb);

  run.yinf = y_infinity_periodic(run.yinf_t, run.yinf_integrand, profile.triple);
  c.Y_inf_p = run.yinf.value;
  c.X_inf = c.X.back();
  c.Y_inf = c.Y.back();
  return run;
}

double zero_mass_residual(double mass_phi0, double mass_psi01, double Y_inf_p,
                          const ShockTriple& triple) {
  return mass_psi01 - triple.s * mass_phi0 - triple.jump_m1() * Y_inf_p;
}

std::vector<double> unit_mass_bump(const DuctGrid& grid, double center, double half_width) {
  if (!(half_width > 0.0)) throw Error(ErrorKind::Domain, "bump half width must be positive");
  const std::size_t P = grid.perp_count();
  std::vector<double> b(grid.points(), 0.0);
  for (int j = 0; j < grid.n_xi; ++j) {
    const double r = (grid.xi(j) - center) / half_width;
    const double v = std::abs(r) < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0;
    for (std::size_t p = 0; p < P; ++p) b[static_cast<std::size_t>(j) * P + p] = v;
  }
  const double mass = integrate_duct(grid, b);
  if (!(mass > 0.0)) throw Error(ErrorKind::Domain, "bump not resolved by the grid");
  for (double& v : b) v /= mass;
  return b;
}

double adjust_to_zero_mass(const DuctGrid& grid, std::span<const double> phi0_bar,
                           std::vector<double>& psi01_bar, double Y_inf_p,
                           const ShockTriple& triple, double center, double half_width) {
  const double r = zero_mass_residual(integrate_duct(grid, phi0_bar),
                                      integrate_duct(grid, psi01_bar), Y_inf_p, triple);
  const auto bump = unit_mass_bump(grid, center, half_width);
  for (std::size_t i = 0; i < psi01_bar.size(); ++i) psi01_bar[i] -= r * bump[i];
  return -r;
}

}  // namespace shockduct
