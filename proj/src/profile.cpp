#include "shockduct/profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "shockduct/error.hpp"
#include "shockduct/fit.hpp"

namespace shockduct {

namespace {

/// f(u) - f(u_end) written in the deviation y = u - u_end so that it keeps
/// full relative accuracy as y -> 0. Uses f(u_end) = 0.
struct TailRhs {
  double u_end;
  double rho_end;
  double p_end;
  double rel;  // u_end - s
  double j;
  double gamma;
  double mu_tilde;

  double q(double y) const { return y / rel; }
  double rho_minus_end(double y) const {
    const double qq = q(y);
    return -rho_end * qq / (1.0 + qq);
  }
  double operator()(double y) const {
    const double dp = p_end * std::expm1(-gamma * std::log1p(q(y)));
    return (j * y + dp) / mu_tilde;
  }
};

TailRhs make_tail(const ShockTriple& t, const GasModel& gas, bool plus) {
  TailRhs r{};
  r.u_end = plus ? t.u1_plus : t.u1_minus;
  r.rho_end = plus ? t.rho_plus : t.rho_minus;
  r.p_end = pressure(r.rho_end, gas);
  r.rel = r.u_end - t.s;
  r.j = t.mass_flux();
  r.gamma = gas.gamma;
  r.mu_tilde = gas.mu_tilde();
  return r;
}

/// Dormand-Prince 5(4) on a scalar autonomous ODE over [0, H].
class Dopri {
 public:
  Dopri(std::function<double(double)> f, double rtol) : f_(std::move(f)), rtol_(rtol) {}

  double advance(double y, double H) {
    double t = 0.0;
    double dt = std::min(step_, H);
    int guard = 0;
    while (t < H) {
      if (++guard > 1000000) {
        throw Error(ErrorKind::TailTruncation, "profile stepper failed to make progress");
      }
      const bool last = t + dt >= H;
      const double hh = last ? H - t : dt;
      double err = 0.0;
      const double ynew = stage(y, hh, err);
      const double scale = rtol_ * std::max(std::abs(y), std::abs(ynew)) + 1e-300;
      const double ratio = err / scale;
      if (ratio <= 1.0) {
        t = last ? H : t + hh;
        y = ynew;
        const double fac = ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
        if (!last || hh == dt) dt = hh * fac;
        if (dt < 1e-14 * H) {
          throw Error(ErrorKind::TailTruncation, "profile step underflow");
        }
        step_ = dt;
      } else {
        dt = hh * std::max(0.2, 0.9 * std::pow(ratio, -0.25));
        if (dt < 1e-14 * H) {
          throw Error(ErrorKind::TailTruncation, "profile step underflow");
        }
      }
    }
    return y;
  }

 private:
  double stage(double y, double h, double& err) const {
    const double k1 = f_(y);
    const double k2 = f_(y + h * (1.0 / 5.0) * k1);
    const double k3 = f_(y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
    const double k4 = f_(y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
    const double k5 = f_(y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                                  64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
    const double k6 = f_(y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 +
                                  46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                                  5103.0 / 18656.0 * k5));
    const double y5 = y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 -
                               2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6);
    const double k7 = f_(y5);
    const double y4 = y + h * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 +
                               393.0 / 640.0 * k4 - 92097.0 / 339200.0 * k5 +
                               187.0 / 2100.0 * k6 + 1.0 / 40.0 * k7);
    err = std::abs(y5 - y4);
    return y5;
  }

  std::function<double(double)> f_;
  double rtol_;
  double step_ = 1e-3;
};

/// Deviations y_k = u(center +- k h) - u_end, k = 0..n, until the density
/// cutoff is met, then continued to at least min_count nodes.
std::vector<double> integrate_side(const TailRhs& rhs, double y0, double h, double sign,
                                   double cutoff, std::size_t max_count, double rtol) {
  Dopri stepper([&](double y) { return sign * rhs(y); }, rtol);
  std::vector<double> ys{y0};
  double y = y0;
  while (std::abs(rhs.rho_minus_end(y)) > cutoff) {
    if (ys.size() > max_count) {
      std::ostringstream os;
      os << "tail cutoff not reached within max_extent; achieved |rho - rho_bar| = "
         << std::abs(rhs.rho_minus_end(y));
      throw Error(ErrorKind::TailTruncation, os.str());
    }
    y = stepper.advance(y, h);
    ys.push_back(y);
  }
  return ys;
}

void extend_side(std::vector<double>& ys, const TailRhs& rhs, double h, double sign,
                 std::size_t count, double rtol) {
  Dopri stepper([&](double y) { return sign * rhs(y); }, rtol);
  double y = ys.back();
  while (ys.size() < count) {
    y = stepper.advance(y, h);
    ys.push_back(y);
  }
}

}  // namespace

double profile_rhs(double u1, const ShockTriple& t, const GasModel& gas) {
  if (u1 == t.s) {
    throw Error(ErrorKind::Pole, "profile_rhs evaluated at u1 = s");
  }
  const double lo = std::min(t.u1_plus, t.u1_minus);
  const double hi = std::max(t.u1_plus, t.u1_minus);
  const double slack = 1e-14 * (std::abs(lo) + std::abs(hi));
  if (u1 < lo - slack || u1 > hi + slack) {
    throw Error(ErrorKind::Domain, "profile_rhs: u1 outside [u1_plus, u1_minus]");
  }
  const double j = t.mass_flux();
  const double K = j * t.u1_minus + pressure(t.rho_minus, gas);
  return (j * u1 + pressure(j / (u1 - t.s), gas) - K) / gas.mu_tilde();
}

Profile solve_profile(const ShockTriple& t, const GasModel& gas, const ProfileSpec& spec) {
  gas.validate();
  const auto lax = check_lax(t, gas);
  if (!(lax[0] > 0.0 && lax[1] > 0.0 && lax[2] > 0.0)) {
    throw Error(ErrorKind::NotAdmissible, "triple violates the Lax entropy condition");
  }
  const auto rh = rh_residuals(t, gas);
  const double scale = 1.0 + std::abs(t.s) * t.delta();
  if (std::abs(rh[0]) > 1e-10 * scale || std::abs(rh[1]) > 1e-10 * scale) {
    throw Error(ErrorKind::NotAdmissible, "triple violates Rankine-Hugoniot");
  }
  if (!(spec.eps_tail > 0.0) || !(spec.rtol > 0.0) || spec.h < 0.0) {
    throw Error(ErrorKind::Domain, "invalid profile spec");
  }

  Profile P;
  P.triple = t;
  P.gas = gas;
  P.center = spec.center;
  P.j = t.mass_flux();
  P.K = P.j * t.u1_minus + pressure(t.rho_minus, gas);

  const TailRhs plus = make_tail(t, gas, true);
  const TailRhs minus = make_tail(t, gas, false);
  auto fprime = [&](double rho) {
    return P.j - pressure_derivative(rho, gas) * rho * rho / P.j;
  };
  const double mt = gas.mu_tilde();
  P.lin_rate_plus = std::abs(fprime(t.rho_plus)) / mt;
  P.lin_rate_minus = std::abs(fprime(t.rho_minus)) / mt;
  P.h = spec.h > 0.0 ? spec.h : 0.002 / std::max(P.lin_rate_plus, P.lin_rate_minus);

  const double rho_mid = 0.5 * (t.rho_minus + t.rho_plus);
  const double u_mid = t.s + P.j / rho_mid;
  const double cutoff = spec.eps_tail * t.delta();
  const auto max_count = static_cast<std::size_t>(spec.max_extent / P.h) + 1;

  auto yp = integrate_side(plus, u_mid - t.u1_plus, P.h, 1.0, cutoff, max_count, spec.rtol);
  auto ym = integrate_side(minus, u_mid - t.u1_minus, P.h, -1.0, cutoff, max_count, spec.rtol);
  const std::size_t count = std::max(yp.size(), ym.size());
  extend_side(yp, plus, P.h, 1.0, count, spec.rtol);
  extend_side(ym, minus, P.h, -1.0, count, spec.rtol);

  const std::size_t n = 2 * count - 1;
  P.xi.resize(n);
  P.rho_s.resize(n);
  P.m1_s.resize(n);
  P.u1_s.resize(n);
  P.eta.resize(n);
  P.eta_p.resize(n);
  P.eta_pp.resize(n);
  P.u1_p.resize(n);
  P.u1_pp.resize(n);
  const double drho = t.jump_rho();
  const std::size_t mid = count - 1;

  auto fill = [&](std::size_t i, const TailRhs& side, double y, bool is_plus) {
    const double dev = side.rho_minus_end(y);
    const double rho = side.rho_end + dev;
    const double u = side.u_end + y;
    P.rho_s[i] = rho;
    P.u1_s[i] = u;
    P.m1_s[i] = t.s * rho + P.j;
    P.eta[i] = is_plus ? 1.0 + dev / drho : dev / drho;
    const double up = side(y);
    const double upp = fprime(rho) * up / mt;
    const double rp = -(rho * rho / P.j) * up;
    const double rpp = -(2.0 * rho * rp / P.j) * up - (rho * rho / P.j) * upp;
    P.u1_p[i] = up;
    P.u1_pp[i] = upp;
    P.eta_p[i] = rp / drho;
    P.eta_pp[i] = rpp / drho;
  };

  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t ip = mid + k;
    const std::size_t im = mid - k;
    P.xi[ip] = spec.center + static_cast<double>(k) * P.h;
    P.xi[im] = spec.center - static_cast<double>(k) * P.h;
    fill(ip, plus, yp[k], true);
    if (k > 0) fill(im, minus, ym[k], false);
  }
  P.eta[mid] = 0.5;
  P.rho_s[mid] = rho_mid;

  P.cutoff_minus = std::abs(P.rho_s.front() - t.rho_minus) / t.delta();
  P.cutoff_plus = std::abs(P.rho_s.back() - t.rho_plus) / t.delta();
  return P;
}

TailRates tail_rates(std::span<const double> xi, std::span<const double> magnitude,
                     double center) {
  if (xi.size() != magnitude.size()) {
    throw Error(ErrorKind::Domain, "tail_rates: size mismatch");
  }
  std::vector<double> left_x, left_y, right_x, right_y;
  double xmin = 0.0, xmax = 0.0;
  for (double x : xi) {
    xmin = std::min(xmin, x - center);
    xmax = std::max(xmax, x - center);
  }
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double r = xi[i] - center;
    const double m = std::abs(magnitude[i]);
    if (!(m > 0.0) || !std::isfinite(m)) continue;
    if (r < 0.0 && r <= 0.7 * xmin) {
      left_x.push_back(-r);
      left_y.push_back(std::log(m));
    } else if (r > 0.0 && r >= 0.7 * xmax) {
      right_x.push_back(r);
      right_y.push_back(std::log(m));
    }
  }
  if (left_x.size() < 10 || right_x.size() < 10) {
    throw Error(ErrorKind::InsufficientTail,
                "need at least 10 samples in each tail, got " + std::to_string(left_x.size()) +
                    " and " + std::to_string(right_x.size()));
  }
  const LinearFit lf = fit_linear(left_x, left_y);
  const LinearFit rf = fit_linear(right_x, right_y);
  return TailRates{-lf.slope, -rf.slope, std::min(lf.r2, rf.r2)};
}

TailRates tail_rates(const Profile& p) { return tail_rates(p.xi, p.u1_p, p.center); }

ProfileSample eval_profile(const Profile& p, double x) {
  const ShockTriple& t = p.triple;
  if (!(x >= p.xi.front())) {
    return {t.rho_minus, t.m1_minus(), t.u1_minus, 0.0, 0.0, 0.0};
  }
  if (!(x <= p.xi.back())) {
    return {t.rho_plus, t.m1_plus(), t.u1_plus, 1.0, 0.0, 0.0};
  }
  const std::size_t last = p.xi.size() - 1;
  auto i = static_cast<std::size_t>((x - p.xi.front()) / p.h);
  i = std::min(i, last - 1);
  const double h = p.xi[i + 1] - p.xi[i];
  const double s = std::clamp((x - p.xi[i]) / h, 0.0, 1.0);

  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;

  // Fritsch-Carlson limiter on the node slopes of eta.
  double m0 = p.eta_p[i] * h;
  double m1 = p.eta_p[i + 1] * h;
  const double de = p.eta[i + 1] - p.eta[i];
  if (de > 0.0) {
    const double a = m0 / de, b = m1 / de;
    const double r = a * a + b * b;
    if (r > 9.0) {
      const double tau = 3.0 / std::sqrt(r);
      m0 *= tau;
      m1 *= tau;
    }
  }
  ProfileSample out;
  out.eta = std::clamp(h00 * p.eta[i] + h10 * m0 + h01 * p.eta[i + 1] + h11 * m1, 0.0, 1.0);
  out.eta_p = h00 * p.eta_p[i] + h10 * h * p.eta_pp[i] + h01 * p.eta_p[i + 1] +
              h11 * h * p.eta_pp[i + 1];
  out.eta_pp = (1.0 - s) * p.eta_pp[i] + s * p.eta_pp[i + 1];
  out.rho = t.rho_minus + t.jump_rho() * out.eta;
  out.m1 = t.s * out.rho + p.j;
  out.u1 = out.m1 / out.rho;
  return out;
}

double eta_prime_integral(const Profile& p) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < p.xi.size(); ++i) {
    sum += 0.5 * (p.xi[i + 1] - p.xi[i]) * (p.eta_p[i] + p.eta_p[i + 1]);
  }
  sum += p.eta_p.front() / p.lin_rate_minus;
  sum += p.eta_p.back() / p.lin_rate_plus;
  return sum;
}

void write_profile_csv(const Profile& p, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string());
  out.precision(17);
  out << "xi,rho_s,m1_s,u1_s,eta,eta_p,eta_pp\n";
  for (std::size_t i = 0; i < p.xi.size(); ++i) {
    out << p.xi[i] << ',' << p.rho_s[i] << ',' << p.m1_s[i] << ',' << p.u1_s[i] << ','
        << p.eta[i] << ',' << p.eta_p[i] << ',' << p.eta_pp[i] << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

}  // namespace shockduct
