#include "shockduct/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "shockduct/error.hpp"

namespace shockduct {

namespace {

struct EtaColumn {
  double eta = 0.0;
  double eta_p = 0.0;
};

std::vector<EtaColumn> eta_columns(const DuctGrid& grid, const Profile& profile, double shift) {
  std::vector<EtaColumn> out(static_cast<std::size_t>(grid.n_xi));
  for (int j = 0; j < grid.n_xi; ++j) {
    const ProfileSample s = eval_profile(profile, grid.xi(j) - shift);
    out[static_cast<std::size_t>(j)] = {s.eta, s.eta_p};
  }
  return out;
}

void check_sampled(const SampledBackgrounds& bg, const DuctGrid& grid, bool gradients) {
  const std::size_t N = grid.points();
  for (const auto* f : {&bg.minus, &bg.plus}) {
    if (f->q.size() != static_cast<std::size_t>(grid.d + 1) || f->q[0].size() != N) {
      throw Error(ErrorKind::Domain, "backgrounds were not sampled on this duct grid");
    }
    if (gradients && f->grad.size() != f->q.size()) {
      throw Error(ErrorKind::Domain, "source terms need sampled background gradients");
    }
  }
}

}  // namespace

SampledBackgrounds sample_backgrounds(BackgroundSampler& sampler, const PeriodicState& minus,
                                      const PeriodicState& plus, double s, bool gradients) {
  if (std::abs(minus.t - plus.t) > 1e-12 * std::max(1.0, std::abs(minus.t))) {
    throw Error(ErrorKind::Domain, "backgrounds are at different times");
  }
  const double offset = s * minus.t;
  return {sampler.sample(minus, offset, gradients), sampler.sample(plus, offset, gradients)};
}

AnsatzField build_ansatz(const DuctGrid& grid, double t, const SampledBackgrounds& bg,
                         const Profile& profile, double X, double Y) {
  check_sampled(bg, grid, false);
  const int d = grid.d;
  const std::size_t P = grid.perp_count();
  const auto ex = eta_columns(grid, profile, X);
  const auto ey = eta_columns(grid, profile, Y);
  AnsatzField a;
  a.grid = grid;
  a.t = t;
  a.X = X;
  a.Y = Y;
  a.rho.resize(grid.points());
  a.m.assign(static_cast<std::size_t>(d), std::vector<double>(grid.points()));
  a.u = a.m;
  const double lo = 0.5 * profile.triple.rho_plus;
  const double hi = 2.0 * profile.triple.rho_minus;
  for (int j = 0; j < grid.n_xi; ++j) {
    const double hx = ex[static_cast<std::size_t>(j)].eta;
    const double hy = ey[static_cast<std::size_t>(j)].eta;
    for (std::size_t p = 0; p < P; ++p) {
      const std::size_t i = static_cast<std::size_t>(j) * P + p;
      const double r = bg.minus.q[0][i] * (1.0 - hx) + bg.plus.q[0][i] * hx;
      if (!(r >= lo && r <= hi)) {
        std::ostringstream os;
        os << "ansatz density " << r << " at xi = " << grid.xi(j) << " outside [" << lo << ", "
           << hi << "]";
        throw Error(ErrorKind::AnsatzOutOfRange, os.str());
      }
      a.rho[i] = r;
      for (int k = 0; k < d; ++k) {
        const double m = bg.minus.q[1 + k][i] * (1.0 - hy) + bg.plus.q[1 + k][i] * hy;
        a.m[k][i] = m;
        a.u[k][i] = m / r;
      }
    }
  }
  return a;
}

AnsatzSources source_terms(const DuctGrid& grid, const SampledBackgrounds& bg,
                           const Profile& profile, double X, double Y, double Xp, double Yp) {
  check_sampled(bg, grid, true);
  const int d = grid.d;
  const std::size_t P = grid.perp_count();
  const std::size_t N = grid.points();
  const GasModel& gas = profile.gas;
  const double mu = gas.mu, ml = gas.mu + gas.lambda, s = profile.triple.s;
  const auto ex = eta_columns(grid, profile, X);
  const auto ey = eta_columns(grid, profile, Y);

  AnsatzSources S;
  S.F1.assign(static_cast<std::size_t>(d), std::vector<double>(N));
  S.f2.assign(N, 0.0);
  S.F3.assign(static_cast<std::size_t>(d * d), std::vector<double>(N));
  S.f4.assign(static_cast<std::size_t>(d), std::vector<double>(N));

  // Per point scratch: background velocity gradients du[i][k] = d_i u_k.
  double rm, rp, mm[3], mp[3], um[3], up[3], dum[3][3], dup[3][3];
  double drt[3], dmt[3][3], dut[3][3], mt[3], ut[3];
  for (int j = 0; j < grid.n_xi; ++j) {
    const double hx = ex[static_cast<std::size_t>(j)].eta;
    const double hxp = ex[static_cast<std::size_t>(j)].eta_p;
    const double hy = ey[static_cast<std::size_t>(j)].eta;
    const double hyp = ey[static_cast<std::size_t>(j)].eta_p;
    for (std::size_t p = 0; p < P; ++p) {
      const std::size_t n = static_cast<std::size_t>(j) * P + p;
      rm = bg.minus.q[0][n];
      rp = bg.plus.q[0][n];
      const double rt = rm * (1.0 - hx) + rp * hx;
      for (int k = 0; k < d; ++k) {
        mm[k] = bg.minus.q[1 + k][n];
        mp[k] = bg.plus.q[1 + k][n];
        um[k] = mm[k] / rm;
        up[k] = mp[k] / rp;
        mt[k] = mm[k] * (1.0 - hy) + mp[k] * hy;
        ut[k] = mt[k] / rt;
      }
      for (int i = 0; i < d; ++i) {
        const double grm = bg.minus.grad[0][i][n], grp = bg.plus.grad[0][i][n];
        drt[i] = grm * (1.0 - hx) + grp * hx + (i == 0 ? (rp - rm) * hxp : 0.0);
        for (int k = 0; k < d; ++k) {
          const double gmm = bg.minus.grad[1 + k][i][n], gmp = bg.plus.grad[1 + k][i][n];
          dum[i][k] = (gmm - um[k] * grm) / rm;
          dup[i][k] = (gmp - up[k] * grp) / rp;
          dmt[i][k] = gmm * (1.0 - hy) + gmp * hy + (i == 0 ? (mp[k] - mm[k]) * hyp : 0.0);
        }
      }
      for (int i = 0; i < d; ++i) {
        for (int k = 0; k < d; ++k) dut[i][k] = (dmt[i][k] - ut[k] * drt[i]) / rt;
      }
      double divm = 0.0, divp = 0.0, divt = 0.0;
      for (int k = 0; k < d; ++k) {
        divm += dum[k][k];
        divp += dup[k][k];
        divt += dut[k][k];
      }
      const double pm = pressure(rm, gas), pp = pressure(rp, gas);
      const double pdef = pm * (1.0 - hy) + pp * hy - pressure(rt, gas);
      const double vdef = divm * (1.0 - hy) + divp * hy - divt;

      for (int k = 0; k < d; ++k) S.F1[k][n] = (mp[k] - mm[k]) * (hx - hy);
      S.f2[n] = ((rp - rm) * (s + Xp) - (mp[0] - mm[0])) * hxp;
      for (int i = 0; i < d; ++i) {
        for (int k = 0; k < d; ++k) {
          double v = um[i] * mm[k] * (1.0 - hy) + up[i] * mp[k] * hy - ut[i] * mt[k];
          v -= mu * (dum[i][k] * (1.0 - hy) + dup[i][k] * hy - dut[i][k]);
          if (i == k) v += pdef - ml * vdef;
          S.F3[static_cast<std::size_t>(i * d + k)][n] = v;
        }
      }
      for (int k = 0; k < d; ++k) {
        double b = (mp[k] - mm[k]) * (s + Yp) - (up[0] * mp[k] - um[0] * mm[k]);
        b += mu * (dup[0][k] - dum[0][k]);
        if (k == 0) b += -(pp - pm) + ml * (divp - divm);
        S.f4[k][n] = b * hyp;
      }
    }
  }
  return S;
}

AnsatzErrors assemble_errors(DuctDerivatives& ops, const AnsatzSources& src) {
  const DuctGrid& grid = ops.grid();
  const int d = grid.d;
  const std::size_t N = grid.points();
  AnsatzErrors e;
  e.g1 = src.f2;
  std::vector<double> tmp(N);
  ops.dxi(src.F1[0].data(), tmp.data());
  for (std::size_t n = 0; n < N; ++n) e.g1[n] += tmp[n];
  e.g2 = src.f4;
  for (int k = 0; k < d; ++k) {
    ops.dxi(src.F3[static_cast<std::size_t>(k)].data(), tmp.data());
    for (std::size_t n = 0; n < N; ++n) e.g2[k][n] += tmp[n];
  }
  if (d > 1) {
    // Groups of transverse components: F1_a, then F3_ak for each k.
    const int dm = d - 1;
    std::vector<double> in(static_cast<std::size_t>((d + 1) * dm) * N);
    auto slot = [&](int g, int a) { return in.data() + static_cast<std::size_t>(g * dm + a) * N; };
    for (int a = 0; a < dm; ++a) {
      std::copy(src.F1[1 + a].begin(), src.F1[1 + a].end(), slot(0, a));
      for (int k = 0; k < d; ++k) {
        const auto& f = src.F3[static_cast<std::size_t>((1 + a) * d + k)];
        std::copy(f.begin(), f.end(), slot(1 + k, a));
      }
    }
    std::vector<double> out(static_cast<std::size_t>(d + 1) * N);
    ops.div_perp(in.data(), d + 1, out.data());
    for (std::size_t n = 0; n < N; ++n) e.g1[n] += out[n];
    for (int k = 0; k < d; ++k) {
      const double* o = out.data() + static_cast<std::size_t>(1 + k) * N;
      for (std::size_t n = 0; n < N; ++n) e.g2[k][n] += o[n];
    }
  }
  return e;
}

double duct_l2(const DuctGrid& grid, std::span<const double> f) {
  const std::size_t P = grid.perp_count();
  double total = 0.0;
  for (int j = 0; j < grid.n_xi; ++j) {
    double col = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
      const double v = f[static_cast<std::size_t>(j) * P + p];
      col += v * v;
    }
    total += (j == 0 || j == grid.n_xi - 1 ? 0.5 : 1.0) * col;
  }
  return std::sqrt(total * grid.dxi() * grid.perp_weight());
}

double duct_sup(std::span<const double> f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

namespace {

/// Sum of squared L2 norms of the field and of its first derivatives.
std::pair<double, double> l2_and_grad2(DuctDerivatives& ops, std::span<const double> f) {
  const DuctGrid& grid = ops.grid();
  const double l2 = duct_l2(grid, f);
  double g2 = 0.0;
  const auto dx = ops.dxi(f);
  g2 += std::pow(duct_l2(grid, dx), 2);
  if (grid.d > 1) {
    std::vector<double> gp(static_cast<std::size_t>(grid.d - 1) * f.size());
    ops.grad_perp(f.data(), 1, gp.data());
    for (int a = 0; a < grid.d - 1; ++a) {
      g2 += std::pow(duct_l2(grid, std::span<const double>(gp).subspan(a * f.size(), f.size())), 2);
    }
  }
  return {l2 * l2, g2};
}

}  // namespace

ErrorNorms error_norms(DuctDerivatives& ops, const AnsatzErrors& err) {
  ErrorNorms out;
  const auto [a, b] = l2_and_grad2(ops, err.g1);
  out.g1_l2 = std::sqrt(a);
  out.g1_h1 = std::sqrt(a + b);
  double l2 = 0.0, h1 = 0.0;
  for (const auto& g : err.g2) {
    const auto [c, e] = l2_and_grad2(ops, g);
    l2 += c;
    h1 += c + e;
  }
  out.g2_l2 = std::sqrt(l2);
  out.g2_h1 = std::sqrt(h1);
  return out;
}

ErrorNormFit ansatz_error_norms(std::span<const double> t, std::span<const ErrorNorms> norms,
                                const FitWindow& window) {
  std::vector<double> a(norms.size()), b(norms.size());
  for (std::size_t i = 0; i < norms.size(); ++i) {
    a[i] = norms[i].g1_h1;
    b[i] = norms[i].g2_h1;
  }
  return {fit_exponential(t, a, window), fit_exponential(t, b, window)};
}

}  // namespace shockduct
