#include "shockduct/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "shockduct/error.hpp"

namespace shockduct {

PerturbationFields perturbation_fields(const DuctState& state, const AnsatzField& ansatz) {
  const std::size_t N = state.points();
  const int d = state.grid.d;
  if (ansatz.rho.size() != N) {
    throw Error(ErrorKind::Domain, "perturbation_fields: state and ansatz grids differ");
  }
  PerturbationFields out;
  out.phi.resize(N);
  out.psi.assign(static_cast<std::size_t>(d), std::vector<double>(N));
  out.zeta = out.psi;
  const auto rho = state.rho();
  for (std::size_t n = 0; n < N; ++n) out.phi[n] = rho[n] - ansatz.rho[n];
  for (int k = 0; k < d; ++k) {
    const auto m = state.m(k);
    for (std::size_t n = 0; n < N; ++n) {
      out.psi[k][n] = m[n] - ansatz.m[k][n];
      out.zeta[k][n] = m[n] / rho[n] - ansatz.u[k][n];
    }
  }
  return out;
}

NormSet discrete_norms(DuctDerivatives& ops, const std::vector<std::span<const double>>& fields) {
  const DuctGrid& grid = ops.grid();
  const std::size_t N = grid.points();
  const int dm = grid.d - 1;
  NormSet out;
  double l2 = 0.0, h1 = 0.0;
  std::vector<double> dx(N), gp(static_cast<std::size_t>(std::max(dm, 0)) * N);
  for (const auto& f : fields) {
    if (f.size() != N) throw Error(ErrorKind::Domain, "discrete_norms: field size mismatch");
    const double a = std::pow(duct_l2(grid, f), 2);
    l2 += a;
    h1 += a;
    out.linf = std::max(out.linf, duct_sup(f));
    ops.dxi(f.data(), dx.data());
    h1 += std::pow(duct_l2(grid, dx), 2);
    out.w1inf = std::max(out.w1inf, duct_sup(dx));
    if (dm > 0) {
      ops.grad_perp(f.data(), 1, gp.data());
      for (int c = 0; c < dm; ++c) {
        std::span<const double> g(gp.data() + static_cast<std::size_t>(c) * N, N);
        h1 += std::pow(duct_l2(grid, g), 2);
        out.w1inf = std::max(out.w1inf, duct_sup(g));
      }
    }
  }
  out.l2 = std::sqrt(l2);
  out.h1 = std::sqrt(h1);
  out.w1inf = std::max(out.w1inf, out.linf);
  return out;
}

NormSet discrete_norms(DuctDerivatives& ops, std::span<const double> field) {
  return discrete_norms(ops, std::vector<std::span<const double>>{field});
}

namespace {

/// Duct integral of f with a per-column weight.
double column_weighted_integral(const DuctGrid& grid, std::span<const double> f,
                                std::span<const double> w) {
  const std::size_t P = grid.perp_count();
  double total = 0.0;
  for (int j = 0; j < grid.n_xi; ++j) {
    double col = 0.0;
    for (std::size_t p = 0; p < P; ++p) col += f[static_cast<std::size_t>(j) * P + p];
    total += (j == 0 || j == grid.n_xi - 1 ? 0.5 : 1.0) * w[static_cast<std::size_t>(j)] * col;
  }
  return total * grid.dxi() * grid.perp_weight();
}

/// All first derivatives of f: [d/dxi, d/dx2, ...], each of size N.
std::vector<std::vector<double>> gradient(DuctDerivatives& ops, std::span<const double> f) {
  const DuctGrid& grid = ops.grid();
  const std::size_t N = grid.points();
  std::vector<std::vector<double>> g(static_cast<std::size_t>(grid.d), std::vector<double>(N));
  ops.dxi(f.data(), g[0].data());
  if (grid.d > 1) {
    std::vector<double> gp(static_cast<std::size_t>(grid.d - 1) * N);
    ops.grad_perp(f.data(), 1, gp.data());
    for (int a = 0; a < grid.d - 1; ++a) {
      std::copy_n(gp.begin() + static_cast<long>(static_cast<std::size_t>(a) * N), N,
                  g[static_cast<std::size_t>(a + 1)].begin());
    }
  }
  return g;
}

}  // namespace

double energy_functional(DuctDerivatives& ops, std::span<const double> phi_sharp,
                         const std::vector<std::vector<double>>& psi_sharp,
                         const std::vector<std::vector<double>>& zeta_sharp,
                         const Profile& profile, double x_inf, const EnergyWeights& w) {
  const DuctGrid& grid = ops.grid();
  const std::size_t N = grid.points();
  const int d = grid.d;
  const GasModel& gas = profile.gas;
  const double mt = gas.mu_tilde();
  std::vector<double> rs(static_cast<std::size_t>(grid.n_xi)), pp(rs.size()), vis(rs.size());
  for (int j = 0; j < grid.n_xi; ++j) {
    const double r = eval_profile(profile, grid.xi(j) - x_inf).rho;
    rs[static_cast<std::size_t>(j)] = r;
    pp[static_cast<std::size_t>(j)] = std::abs(pressure_derivative(r, gas));
    vis[static_cast<std::size_t>(j)] = mt / (2.0 * r);
  }
  const std::vector<double> one(rs.size(), 1.0);
  std::vector<double> sq(N);
  auto sqr = [&](std::span<const double> f) {
    for (std::size_t n = 0; n < N; ++n) sq[n] = f[n] * f[n];
    return std::span<const double>(sq);
  };
  double E = w.A1 * column_weighted_integral(grid, sqr(phi_sharp), pp);
  for (int k = 0; k < d; ++k) E += w.A1 * column_weighted_integral(grid, sqr(psi_sharp[k]), one);
  const auto gphi = gradient(ops, phi_sharp);
  for (int k = 0; k < d; ++k) {
    E += w.A2 * column_weighted_integral(grid, sqr(gphi[k]), vis);
    for (std::size_t n = 0; n < N; ++n) sq[n] = psi_sharp[k][n] * gphi[k][n];
    E += w.A2 * column_weighted_integral(grid, sq, one);
  }
  for (int k = 0; k < d; ++k) {
    const auto gz = gradient(ops, zeta_sharp[k]);
    for (int i = 0; i < d; ++i) E += column_weighted_integral(grid, sqr(gz[i]), rs);
  }
  return E;
}

double shock_location(const DuctGrid& grid, std::span<const double> rho, double level) {
  const auto flat = split_modes(grid, rho).flat;
  int found = -1, count = 0;
  for (int j = 0; j + 1 < grid.n_xi; ++j) {
    const double a = flat[static_cast<std::size_t>(j)] - level;
    const double b = flat[static_cast<std::size_t>(j + 1)] - level;
    if ((a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0)) {
      ++count;
      found = j;
    }
  }
  if (count != 1) {
    throw Error(ErrorKind::MultiCrossing,
                "density zero mode crosses the mid level " + std::to_string(count) + " times");
  }
  const double a = flat[static_cast<std::size_t>(found)];
  const double b = flat[static_cast<std::size_t>(found + 1)];
  return grid.xi(found) + (level - a) / (b - a) * grid.dxi();
}

double shock_location(const DuctState& state, const ShockTriple& triple) {
  return shock_location(state.grid, state.rho(), 0.5 * (triple.rho_minus + triple.rho_plus));
}

AlphaProfile alpha_coefficient(const Profile& profile) {
  AlphaProfile a;
  a.xi = profile.xi;
  a.alpha.resize(profile.size());
  a.margin = std::numeric_limits<double>::infinity();
  a.min_alpha = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double pp = pressure_derivative(profile.rho_s[i], profile.gas);
    const double u = profile.u1_s[i];
    a.alpha[i] = pp - u * u;
    a.margin = std::min(a.margin, a.alpha[i] - 0.5 * pp);
    a.min_alpha = std::min(a.min_alpha, a.alpha[i]);
  }
  return a;
}

bool VerdictReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

double zero_mass_drift(const DiagnosticsSeries& series) {
  if (series.samples.size() < 2) return 0.0;
  std::vector<double> t, a, b;
  for (const auto& s : series.samples) {
    t.push_back(s.t);
    a.push_back(s.mass_phi);
    b.push_back(s.mass_psi1);
  }
  return std::max(std::abs(fit_linear(t, a).slope), std::abs(fit_linear(t, b).slope));
}

double zero_mass_offset(const DiagnosticsSeries& series) {
  if (series.samples.empty()) return 0.0;
  const auto& s0 = series.samples.front();
  double worst = 0.0;
  for (const auto& s : series.samples) {
    worst = std::max({worst, std::abs(s.mass_phi - s0.mass_phi),
                      std::abs(s.mass_psi1 - s0.mass_psi1)});
  }
  return worst;
}

namespace {

ExponentialFit fit_series(const DiagnosticsSeries& series, double (*get)(const DiagnosticsSample&),
                          const VerdictTolerances& tol, double floor) {
  std::vector<double> t, y;
  double peak = 0.0;
  for (const auto& s : series.samples) {
    if (s.t < tol.fit_t_begin) continue;
    t.push_back(s.t);
    y.push_back(get(s));
    peak = std::max(peak, y.back());
  }
  FitWindow w;
  w.floor = floor * peak;
  return fit_exponential(t, y, w);
}

std::string fit_detail(const ExponentialFit& f) {
  std::ostringstream os;
  os << "rate " << f.rate << ", R^2 " << f.r2 << ", " << f.used << " samples";
  return os.str();
}

}  // namespace

VerdictReport theorem_verdict(const DiagnosticsSeries& series, const VerdictTolerances& tol) {
  VerdictReport r;
  if (series.samples.empty()) throw Error(ErrorKind::Domain, "theorem_verdict: empty series");
  const auto& last = series.samples.back();

  r.sharp_fit =
      fit_series(series, [](const DiagnosticsSample& s) { return s.sharp.linf; }, tol, tol.fit_floor);
  r.verdicts.push_back({"a_nonzero_mode_decay",
                        r.sharp_fit.ok && r.sharp_fit.rate > 0.0 && r.sharp_fit.r2 >= tol.sharp_r2,
                        r.sharp_fit.r2, tol.sharp_r2, fit_detail(r.sharp_fit)});

  const DiagnosticsSample* ref = &series.samples.front();
  for (const auto& s : series.samples) {
    if (std::abs(s.t - tol.w1inf_reference_time) < std::abs(ref->t - tol.w1inf_reference_time)) {
      ref = &s;
    }
  }
  r.w1inf_ratio = ref->full.w1inf > 0.0 ? last.full.w1inf / ref->full.w1inf : 0.0;
  {
    std::ostringstream os;
    os << "W1inf(" << last.t << ") = " << last.full.w1inf << ", W1inf(" << ref->t
       << ") = " << ref->full.w1inf;
    r.verdicts.push_back({"b_w1inf_decay", r.w1inf_ratio <= tol.w1inf_ratio, r.w1inf_ratio,
                          tol.w1inf_ratio, os.str()});
  }

  r.location_offset = last.location - series.X_inf;
  {
    const double thr = tol.location_cells * series.dxi;
    std::ostringstream os;
    os << "location " << last.location << ", X_inf " << series.X_inf << ", dxi " << series.dxi;
    r.verdicts.push_back({"c_shock_location", last.location_ok && std::abs(r.location_offset) <= thr,
                          std::abs(r.location_offset), thr, os.str()});
  }

  r.mass_drift = zero_mass_drift(series);
  r.verdicts.push_back({"d_zero_mass_drift", r.mass_drift <= tol.mass_drift_rate, r.mass_drift,
                        tol.mass_drift_rate, "least-squares slope of M(t); max |M(t) - M(0)| = " +
                            std::to_string(zero_mass_offset(series))});

  r.energy_fit = fit_series(series, [](const DiagnosticsSample& s) { return s.energy; }, tol,
                            tol.fit_floor * tol.fit_floor);
  double emin = std::numeric_limits<double>::infinity();
  for (const auto& s : series.samples) emin = std::min(emin, s.energy);
  {
    std::ostringstream os;
    os << "min E " << emin << ", " << fit_detail(r.energy_fit);
    r.verdicts.push_back({"e_energy_decay",
                          emin >= 0.0 && r.energy_fit.ok && r.energy_fit.rate > 0.0 &&
                              r.energy_fit.r2 >= tol.energy_r2,
                          r.energy_fit.r2, tol.energy_r2, os.str()});
  }

  r.source_fit =
      fit_series(series, [](const DiagnosticsSample& s) { return s.g1 + s.g2; }, tol, tol.fit_floor);
  return r;
}

namespace {

const char* kSeriesHeader =
    "t,full_l2,full_h1,full_linf,full_w1inf,sharp_l2,sharp_h1,sharp_linf,sharp_w1inf,anti_l2,"
    "energy,location,location_ok,mass_phi,mass_psi1,g1,g2,X,Y,Xp,Yp,bg_sup,sponge_dev,rho_min,"
    "rho_max";

}  // namespace

void write_series_csv(const std::filesystem::path& path, const DiagnosticsSeries& series) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  os << std::setprecision(17) << kSeriesHeader << '\n';
  for (const auto& s : series.samples) {
    os << s.t << ',' << s.full.l2 << ',' << s.full.h1 << ',' << s.full.linf << ','
       << s.full.w1inf << ',' << s.sharp.l2 << ',' << s.sharp.h1 << ',' << s.sharp.linf << ','
       << s.sharp.w1inf << ',' << s.anti_l2 << ',' << s.energy << ',' << s.location << ','
       << (s.location_ok ? 1 : 0) << ',' << s.mass_phi << ',' << s.mass_psi1 << ',' << s.g1
       << ',' << s.g2 << ',' << s.X << ',' << s.Y << ',' << s.Xp << ',' << s.Yp << ','
       << s.bg_sup << ',' << s.sponge_dev << ',' << s.rho_min << ',' << s.rho_max << '\n';
  }
}

DiagnosticsSeries read_series_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::string line;
  std::getline(is, line);
  if (line != kSeriesHeader) throw Error(ErrorKind::Io, path.string() + ": unexpected header");
  DiagnosticsSeries series;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 25) throw Error(ErrorKind::Io, path.string() + ": malformed row");
    DiagnosticsSample s;
    s.t = v[0];
    s.full = {v[1], v[2], v[3], v[4]};
    s.sharp = {v[5], v[6], v[7], v[8]};
    s.anti_l2 = v[9];
    s.energy = v[10];
    s.location = v[11];
    s.location_ok = v[12] != 0.0;
    s.mass_phi = v[13];
    s.mass_psi1 = v[14];
    s.g1 = v[15];
    s.g2 = v[16];
    s.X = v[17];
    s.Y = v[18];
    s.Xp = v[19];
    s.Yp = v[20];
    s.bg_sup = v[21];
    s.sponge_dev = v[22];
    s.rho_min = v[23];
    s.rho_max = v[24];
    series.samples.push_back(s);
  }
  return series;
}

}  // namespace shockduct
