#include "shockduct/duct.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "shockduct/error.hpp"

namespace shockduct {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void validate_localized(const LocalizedPerturbationSpec& spec, const DuctGrid& grid) {
  for (std::size_t b = 0; b < spec.bumps.size(); ++b) {
    const Bump& x = spec.bumps[b];
    const std::string where = "localized.bumps[" + std::to_string(b) + "]";
    if (x.component < 0 || x.component > grid.d) {
      throw Error(ErrorKind::Config, where + ".component must be in [0, d]");
    }
    if (!(x.width > 0.0)) throw Error(ErrorKind::Config, where + ".width must be positive");
    if (x.mode != 0 && grid.d < 2) {
      throw Error(ErrorKind::Config, where + ".mode must be 0 when d = 1");
    }
    if (2 * std::abs(x.mode) >= grid.n_perp && grid.d > 1) {
      throw Error(ErrorKind::Config, where + ".mode is not resolved by grid.n_perp");
    }
    if (std::abs(x.center) + 4.5 * x.width > 0.5 * grid.L) {
      throw Error(ErrorKind::Config, where + " support |center| + 4.5 width exceeds L/2");
    }
    if (!std::isfinite(x.amplitude)) {
      throw Error(ErrorKind::Config, where + ".amplitude must be finite");
    }
  }
}

std::vector<std::vector<double>> sample_localized(const LocalizedPerturbationSpec& spec,
                                                  const DuctGrid& grid) {
  validate_localized(spec, grid);
  const std::size_t P = grid.perp_count();
  const std::size_t stride = grid.d > 2 ? static_cast<std::size_t>(grid.n_perp) : 1;
  std::vector<std::vector<double>> out(static_cast<std::size_t>(grid.d + 1),
                                       std::vector<double>(grid.points(), 0.0));
  for (const Bump& b : spec.bumps) {
    std::vector<double> g(P, 1.0);
    if (b.mode != 0) {
      for (std::size_t p = 0; p < P; ++p) {
        const double x2 = static_cast<double>(p / stride) * grid.dperp();
        const double arg = kTwoPi * std::abs(b.mode) * x2;
        g[p] = b.mode > 0 ? std::cos(arg) : std::sin(arg);
      }
    }
    for (int j = 0; j < grid.n_xi; ++j) {
      const double z = (grid.xi(j) - b.center) / b.width;
      const double a = b.amplitude * std::exp(-z * z);
      for (std::size_t p = 0; p < P; ++p) {
        out[b.component][static_cast<std::size_t>(j) * P + p] += a * g[p];
      }
    }
  }
  return out;
}

DuctState init_duct(const Profile& profile, BackgroundSampler& sampler,
                    const PeriodicState& minus,
                    const std::vector<std::vector<double>>& localized) {
  const DuctGrid& grid = sampler.grid();
  const int d = grid.d;
  const std::size_t P = grid.perp_count();
  const std::size_t N = grid.points();
  if (localized.size() != static_cast<std::size_t>(d + 1)) {
    throw Error(ErrorKind::Domain, "init_duct: localized fields need d + 1 components");
  }
  if (minus.t != 0.0) throw Error(ErrorKind::Domain, "init_duct: background must be at t = 0");
  const auto bg = sampler.sample(minus, 0.0, false);
  DuctState st;
  st.grid = grid;
  st.frame_speed = profile.triple.s;
  st.q.assign(static_cast<std::size_t>(d + 1) * N, 0.0);
  const double floor = 0.5 * profile.triple.rho_plus;
  for (int j = 0; j < grid.n_xi; ++j) {
    const ProfileSample ps = eval_profile(profile, grid.xi(j));
    for (std::size_t p = 0; p < P; ++p) {
      const std::size_t n = static_cast<std::size_t>(j) * P + p;
      const double r = ps.rho + (bg.q[0][n] - minus.mean_rho) + localized[0][n];
      if (!(r >= floor)) {
        std::ostringstream os;
        os << "initial density " << r << " at xi = " << grid.xi(j) << " below " << floor;
        throw Error(ErrorKind::AmplitudeTooLarge, os.str());
      }
      st.q[n] = r;
      for (int k = 0; k < d; ++k) {
        const double base = k == 0 ? ps.m1 : 0.0;
        st.q[static_cast<std::size_t>(1 + k) * N + n] =
            base + (bg.q[1 + k][n] - minus.mean_m[k]) + localized[1 + k][n];
      }
    }
  }
  return st;
}

FrozenBoundary::FrozenBoundary(const DuctState& state) : ref_(state) {}

void FrozenBoundary::values(double, std::span<const int> cols,
                            std::vector<std::vector<double>>& out) {
  const std::size_t P = ref_.grid.perp_count();
  const int nf = ref_.grid.d + 1;
  out.resize(static_cast<std::size_t>(nf));
  for (int c = 0; c < nf; ++c) {
    out[c].resize(cols.size() * P);
    const auto f = ref_.field(c);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      std::copy_n(f.begin() + static_cast<long>(static_cast<std::size_t>(cols[i]) * P), P,
                  out[c].begin() + static_cast<long>(i * P));
    }
  }
}

DuctSolver::DuctSolver(const GasModel& gas, const DuctGrid& grid, double s, double rho_ref,
                       const DuctSolverSpec& spec)
    : gas_(gas), grid_(grid), s_(s), spec_(spec), ops_(grid) {
  gas_.validate();
  if (!(rho_ref > 0.0)) throw Error(ErrorKind::Domain, "rho_ref must be positive");
  if (spec.sponge < 1 || 2 * spec.sponge + 8 > grid.n_xi) {
    throw Error(ErrorKind::Config, "solver.sponge must be at least 1 and leave an interior");
  }
  if (!(spec.dissipation >= 0.0)) {
    throw Error(ErrorKind::Config, "solver.dissipation must be nonnegative");
  }
  nu_ad_ = spec.dissipation * gas_.mu_tilde() / rho_ref;
  for (int j = 0; j < spec.sponge; ++j) sponge_cols_.push_back(j);
  for (int j = grid.n_xi - spec.sponge; j < grid.n_xi; ++j) sponge_cols_.push_back(j);
  const std::size_t N = grid.points();
  const int d = grid.d;
  const std::size_t nd = static_cast<std::size_t>(d);
  u_.resize(nd * N);
  p_.resize(N);
  du_.resize(nd * N);
  gu_.resize(nd * static_cast<std::size_t>(std::max(d - 1, 0)) * N);
  div_.resize(N);
  flux_.resize(N);
  tflux_.resize(static_cast<std::size_t>((d + 1) * std::max(d - 1, 0)) * N);
  tdiv_.resize(static_cast<std::size_t>(d + 1) * N);
  tmp_.resize(N);
  const std::size_t total = static_cast<std::size_t>(d + 1) * N;
  k1_.resize(total);
  k2_.resize(total);
  k3_.resize(total);
  k4_.resize(total);
  stage_.resize(total);
}

std::vector<int> DuctSolver::watch_columns() const {
  return {spec_.sponge, grid_.n_xi - 1 - spec_.sponge};
}

void DuctSolver::rhs(std::span<const double> q, std::span<double> dq) {
  const int d = grid_.d;
  const int dm = d - 1;
  const std::size_t N = grid_.points();
  const double mu = gas_.mu, ml = gas_.mu + gas_.lambda;
  const double* rho = q.data();
  auto m = [&](int k) { return q.data() + static_cast<std::size_t>(1 + k) * N; };
  auto U = [&](int k) { return u_.data() + static_cast<std::size_t>(k) * N; };
  auto DU = [&](int k) { return du_.data() + static_cast<std::size_t>(k) * N; };
  // d_{a+2} u_k
  auto GU = [&](int k, int a) { return gu_.data() + static_cast<std::size_t>(k * dm + a) * N; };

  for (int k = 0; k < d; ++k) {
    const double* mk = m(k);
    double* uk = U(k);
    for (std::size_t n = 0; n < N; ++n) uk[n] = mk[n] / rho[n];
  }
  for (std::size_t n = 0; n < N; ++n) p_[n] = pressure(rho[n], gas_);
  for (int k = 0; k < d; ++k) ops_.dxi(U(k), DU(k));
  if (dm > 0) ops_.grad_perp(u_.data(), d, gu_.data());
  for (std::size_t n = 0; n < N; ++n) div_[n] = du_[n];
  for (int a = 0; a < dm; ++a) {
    const double* g = GU(a + 1, a);
    for (std::size_t n = 0; n < N; ++n) div_[n] += g[n];
  }
  // d_j u_i with j = 0 along xi.
  auto dU = [&](int i, int j) { return j == 0 ? DU(i) : GU(i, j - 1); };

  // Transverse fluxes grouped for the divergence: group 0 carries m_a, group
  // 1 + i carries F_{i,a}.
  if (dm > 0) {
    auto slot = [&](int g, int a) {
      return tflux_.data() + static_cast<std::size_t>(g * dm + a) * N;
    };
    for (int a = 0; a < dm; ++a) {
      const int j = a + 1;
      std::copy(m(j), m(j) + N, slot(0, a));
      for (int i = 0; i < d; ++i) {
        double* out = slot(1 + i, a);
        const double* mi = m(i);
        const double* uj = U(j);
        const double* g = dU(i, j);
        for (std::size_t n = 0; n < N; ++n) out[n] = mi[n] * uj[n] - mu * g[n];
        if (i == j) {
          for (std::size_t n = 0; n < N; ++n) out[n] += p_[n] - ml * div_[n];
        }
      }
    }
    ops_.div_perp(tflux_.data(), d + 1, tdiv_.data());
  } else {
    std::fill(tdiv_.begin(), tdiv_.end(), 0.0);
  }

  // Along xi: d/dxi (s q - flux along x1).
  {
    const double* m0 = m(0);
    for (std::size_t n = 0; n < N; ++n) flux_[n] = s_ * rho[n] - m0[n];
    ops_.dxi(flux_.data(), dq.data());
    for (std::size_t n = 0; n < N; ++n) dq[n] -= tdiv_[n];
  }
  for (int i = 0; i < d; ++i) {
    const double* mi = m(i);
    const double* u0 = U(0);
    const double* g = dU(i, 0);
    for (std::size_t n = 0; n < N; ++n) flux_[n] = s_ * mi[n] - (mi[n] * u0[n] - mu * g[n]);
    if (i == 0) {
      for (std::size_t n = 0; n < N; ++n) flux_[n] -= p_[n] - ml * div_[n];
    }
    double* out = dq.data() + static_cast<std::size_t>(1 + i) * N;
    ops_.dxi(flux_.data(), out);
    const double* t = tdiv_.data() + static_cast<std::size_t>(1 + i) * N;
    for (std::size_t n = 0; n < N; ++n) out[n] -= t[n];
  }

  // Sixth-difference dissipation on columns with a full stencil.
  if (nu_ad_ > 0.0) {
    const std::size_t P = grid_.perp_count();
    const double h = grid_.dxi();
    const double sigma = nu_ad_ / (64.0 * h * h);
    const int nx = grid_.n_xi;
    for (int c = 0; c <= d; ++c) {
      const double* f = q.data() + static_cast<std::size_t>(c) * N;
      double* out = dq.data() + static_cast<std::size_t>(c) * N;
      for (int j = 3; j <= nx - 4; ++j) {
        const double* a = f + static_cast<std::size_t>(j) * P;
        double* o = out + static_cast<std::size_t>(j) * P;
        const long sP = static_cast<long>(P);
        for (std::size_t p = 0; p < P; ++p) {
          const double* x = a + p;
          const double d6 = x[-3 * sP] - 6.0 * x[-2 * sP] + 15.0 * x[-sP] - 20.0 * x[0] +
                            15.0 * x[sP] - 6.0 * x[2 * sP] + x[3 * sP];
          o[p] += sigma * d6;
        }
      }
    }
  }
}

void DuctSolver::clamp(std::vector<double>& q, double t, BoundaryData& boundary) {
  boundary.values(t, sponge_cols_, clamp_buf_);
  const std::size_t P = grid_.perp_count();
  const std::size_t N = grid_.points();
  for (int c = 0; c <= grid_.d; ++c) {
    for (std::size_t i = 0; i < sponge_cols_.size(); ++i) {
      std::copy_n(clamp_buf_[c].begin() + static_cast<long>(i * P), P,
                  q.begin() + static_cast<long>(static_cast<std::size_t>(c) * N +
                                                static_cast<std::size_t>(sponge_cols_[i]) * P));
    }
  }
}

void DuctSolver::step(DuctState& st, double dt, BoundaryData& boundary) {
  const std::size_t M = st.q.size();
  const double t = st.t;
  try {
    rhs(st.q, k1_);
    for (std::size_t i = 0; i < M; ++i) stage_[i] = st.q[i] + 0.5 * dt * k1_[i];
    clamp(stage_, t + 0.5 * dt, boundary);
    rhs(stage_, k2_);
    for (std::size_t i = 0; i < M; ++i) stage_[i] = st.q[i] + 0.5 * dt * k2_[i];
    clamp(stage_, t + 0.5 * dt, boundary);
    rhs(stage_, k3_);
    for (std::size_t i = 0; i < M; ++i) stage_[i] = st.q[i] + dt * k3_[i];
    clamp(stage_, t + dt, boundary);
    rhs(stage_, k4_);
  } catch (const Error& e) {
    // A stage density that is no longer positive surfaces as a pressure domain error.
    if (e.kind() != ErrorKind::Domain) throw;
    std::ostringstream os;
    os << "duct blow-up within step " << st.step + 1 << " (t = " << t << "): " << e.what();
    throw Error(ErrorKind::BlowupDetected, os.str());
  }
  for (std::size_t i = 0; i < M; ++i) {
    st.q[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }
  clamp(st.q, t + dt, boundary);
  st.t = t + dt;
  ++st.step;
  const std::size_t N = st.points();
  for (std::size_t i = 0; i < M; ++i) {
    if (!std::isfinite(st.q[i]) || (i < N && !(st.q[i] > 0.0))) {
      std::ostringstream os;
      os << "duct blow-up at step " << st.step << " (t = " << st.t << ")";
      throw Error(ErrorKind::BlowupDetected, os.str());
    }
  }
}

double DuctSolver::stable_dt(const DuctState& st, double cfl) const {
  const std::size_t N = st.points();
  const int d = grid_.d;
  double vmax = 0.0, rmin = 1e300;
  for (std::size_t n = 0; n < N; ++n) {
    const double r = st.q[n];
    double speed = 0.0;
    for (int k = 0; k < d; ++k) {
      const double u = st.q[static_cast<std::size_t>(1 + k) * N + n] / r - (k == 0 ? s_ : 0.0);
      speed = std::max(speed, std::abs(u));
    }
    vmax = std::max(vmax, speed + sound_speed(r, gas_));
    rmin = std::min(rmin, r);
  }
  double D = grid_.dxi();
  if (d > 1) D = std::min(D, grid_.dperp());
  return cfl * std::min(D / vmax, D * D * rmin / gas_.mu_tilde());
}

double column_deviation(const DuctState& state, std::span<const int> cols,
                        const std::vector<std::vector<double>>& ref) {
  const std::size_t P = state.grid.perp_count();
  double worst = 0.0;
  for (int c = 0; c <= state.grid.d; ++c) {
    const auto f = state.field(c);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      for (std::size_t p = 0; p < P; ++p) {
        const double v = f[static_cast<std::size_t>(cols[i]) * P + p];
        worst = std::max(worst, std::abs(v - ref[c][i * P + p]));
      }
    }
  }
  return worst;
}

}  // namespace shockduct
