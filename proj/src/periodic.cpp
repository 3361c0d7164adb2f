#include "shockduct/periodic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "shockduct/error.hpp"

namespace shockduct {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t ipow(int n, int d) {
  std::size_t r = 1;
  for (int a = 0; a < d; ++a) r *= static_cast<std::size_t>(n);
  return r;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

void DuctGrid::validate() const {
  if (d < 1 || d > 3) throw Error(ErrorKind::Config, "grid.d must be 1, 2 or 3");
  if (n_xi < 16) throw Error(ErrorKind::Config, "grid.n_xi must be at least 16");
  if (d > 1 && n_perp < 4) throw Error(ErrorKind::Config, "grid.n_perp must be at least 4");
  if (!(L > 0.0)) throw Error(ErrorKind::Config, "grid.L must be positive");
}

PerturbationSpec random_perturbation(std::uint64_t seed, int n_modes, int d, int kmax,
                                     double amplitude) {
  if (d < 1 || d > 3 || kmax < 1 || n_modes < 0) {
    throw Error(ErrorKind::Domain, "random_perturbation: bad arguments");
  }
  std::mt19937_64 rng(seed);
  PerturbationSpec spec;
  spec.amplitude = amplitude;
  std::set<std::array<int, 3>> used;
  const int span = 2 * kmax + 1;
  std::size_t available = 1;
  for (int a = 0; a < d; ++a) available *= static_cast<std::size_t>(span);
  // k and -k describe the same real mode.
  if (static_cast<std::size_t>(n_modes) > (available - 1) / 2) {
    throw Error(ErrorKind::Domain, "random_perturbation: too many modes for kmax");
  }
  while (static_cast<int>(spec.modes.size()) < n_modes) {
    std::array<int, 3> k{0, 0, 0};
    for (int a = 0; a < d; ++a) {
      k[a] = static_cast<int>(rng() % static_cast<std::uint64_t>(span)) - kmax;
    }
    const std::array<int, 3> neg{-k[0], -k[1], -k[2]};
    if (k == std::array<int, 3>{0, 0, 0} || used.count(k) || used.count(neg)) continue;
    used.insert(k);
    FourierMode mode;
    mode.k = k;
    for (int c = 0; c <= d; ++c) {
      mode.coef[c] = {2.0 * uniform01(rng) - 1.0, 2.0 * uniform01(rng) - 1.0};
    }
    spec.modes.push_back(mode);
  }
  for (int c = 0; c <= d; ++c) {
    double total = 0.0;
    for (const auto& m : spec.modes) total += std::abs(m.coef[c]);
    if (total > 0.0) {
      for (auto& m : spec.modes) m.coef[c] /= total;
    }
  }
  return spec;
}

std::size_t PeriodicState::points() const { return ipow(n, d); }

PeriodicState init_periodic(double mean_rho, const std::array<double, 3>& mean_m,
                            const PerturbationSpec& spec, int d, int n) {
  if (!(mean_rho > 0.0)) throw Error(ErrorKind::Domain, "mean density must be positive");
  if (d < 1 || d > 3 || n < 4) throw Error(ErrorKind::Domain, "bad periodic grid");
  for (const auto& mode : spec.modes) {
    bool zero = true;
    for (int a = 0; a < 3; ++a) {
      if (mode.k[a] != 0) zero = false;
      if (a >= d && mode.k[a] != 0) {
        throw Error(ErrorKind::Domain, "mode wavevector has components beyond d");
      }
      if (3 * std::abs(mode.k[a]) > n) {
        throw Error(ErrorKind::Domain, "mode wavenumber not resolved by the 2/3 rule");
      }
    }
    if (zero) throw Error(ErrorKind::Domain, "zero mode not allowed in a perturbation");
  }
  PeriodicState s;
  s.d = d;
  s.n = n;
  s.mean_rho = mean_rho;
  s.mean_m = {0.0, 0.0, 0.0};
  for (int i = 0; i < d; ++i) s.mean_m[i] = mean_m[i];
  const std::size_t N = s.points();
  s.q.assign(static_cast<std::size_t>(d + 1) * N, 0.0);
  std::array<int, 3> idx{0, 0, 0};
  for (std::size_t p = 0; p < N; ++p) {
    std::size_t rem = p;
    for (int a = d - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % static_cast<std::size_t>(n));
      rem /= static_cast<std::size_t>(n);
    }
    std::array<double, 4> val{};
    for (const auto& mode : spec.modes) {
      double phase = 0.0;
      for (int a = 0; a < d; ++a) {
        phase += kTwoPi * mode.k[a] * static_cast<double>(idx[a]) / static_cast<double>(n);
      }
      const cplx e(std::cos(phase), std::sin(phase));
      for (int c = 0; c <= d; ++c) val[c] += (mode.coef[c] * e).real();
    }
    s.q[p] = mean_rho + spec.amplitude * val[0];
    for (int i = 0; i < d; ++i) s.q[(1 + i) * N + p] = s.mean_m[i] + spec.amplitude * val[1 + i];
  }
  const double rmin = *std::min_element(s.q.begin(), s.q.begin() + static_cast<long>(N));
  if (rmin < 0.5 * mean_rho) {
    std::ostringstream os;
    os << "min density " << rmin << " below half the mean " << mean_rho;
    throw Error(ErrorKind::AmplitudeTooLarge, os.str());
  }
  return s;
}

PeriodicSolver::PeriodicSolver(const GasModel& gas, int d, int n) : gas_(gas), d_(d), n_(n) {
  gas_.validate();
  if (d < 1 || d > 3 || n < 4) throw Error(ErrorKind::Domain, "bad periodic grid");
  const std::vector<int> shape(static_cast<std::size_t>(d), n);
  fwd_ = std::make_unique<BatchedRealFFT>(shape, 2 * d + d * (d + 1) / 2);
  bwd_ = std::make_unique<BatchedRealFFT>(shape, d + 1);
  spec_grid_ = make_half_spectrum(shape);
}

PeriodicSolver::~PeriodicSolver() = default;

void PeriodicSolver::rhs(const PeriodicState& s, std::vector<double>& dq) {
  const int d = d_;
  const std::size_t N = s.points();
  double* in = fwd_->real();
  // Block layout: m_j (d), u_j (d), then F_ij for i <= j.
  auto blk = [&](int b) { return in + static_cast<std::size_t>(b) * N; };
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) pairs.emplace_back(i, j);
  const double gamma = gas_.gamma;

#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < N; ++p) {
    const double rho = s.q[p];
    const double pr = std::pow(rho, gamma);
    double u[3] = {0, 0, 0}, m[3] = {0, 0, 0};
    for (int j = 0; j < d; ++j) {
      m[j] = s.q[(1 + j) * N + p];
      u[j] = m[j] / rho;
      blk(j)[p] = m[j];
      blk(d + j)[p] = u[j];
    }
    for (std::size_t b = 0; b < pairs.size(); ++b) {
      const auto [i, j] = pairs[b];
      blk(2 * d + static_cast<int>(b))[p] = m[i] * u[j] + (i == j ? pr : 0.0);
    }
  }
  fwd_->forward();

  const std::size_t S = spec_grid_.size();
  const cplx* fs = fwd_->spec();
  cplx* out = bwd_->spec();
  auto sblk = [&](int b) { return fs + static_cast<std::size_t>(b) * S; };
  auto pair_index = [&](int i, int j) {
    if (i > j) std::swap(i, j);
    // Index of (i, j) in the upper-triangular ordering.
    return i * d - i * (i - 1) / 2 + (j - i);
  };
  const double mu = gas_.mu;
  const double ml = gas_.mu + gas_.lambda;
  const cplx I(0.0, 1.0);

#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < S; ++k) {
    const double mask = spec_grid_.dealias[k];
    double kap[3] = {0, 0, 0};
    double k2 = 0.0;
    for (int a = 0; a < d; ++a) {
      kap[a] = kTwoPi * spec_grid_.k[a][k];
      k2 += kap[a] * kap[a];
    }
    cplx cont = 0.0;
    cplx kdotu = 0.0;
    for (int j = 0; j < d; ++j) {
      cont -= I * kap[j] * sblk(j)[k];
      kdotu += kap[j] * sblk(d + j)[k];
    }
    out[k] = mask * cont;
    for (int i = 0; i < d; ++i) {
      cplx acc = 0.0;
      for (int j = 0; j < d; ++j) acc -= I * kap[j] * sblk(2 * d + pair_index(i, j))[k];
      acc -= mu * k2 * sblk(d + i)[k] + ml * kap[i] * kdotu;
      out[static_cast<std::size_t>(1 + i) * S + k] = mask * acc;
    }
  }
  bwd_->backward();
  dq.assign(bwd_->real(), bwd_->real() + static_cast<std::size_t>(d + 1) * N);
}

void PeriodicSolver::step(PeriodicState& s, double dt) {
  const std::size_t M = s.q.size();
  tmp_.resize(M);
  rhs(s, k1_);
  PeriodicState stage = s;
  for (std::size_t i = 0; i < M; ++i) stage.q[i] = s.q[i] + 0.5 * dt * k1_[i];
  rhs(stage, k2_);
  for (std::size_t i = 0; i < M; ++i) stage.q[i] = s.q[i] + 0.5 * dt * k2_[i];
  rhs(stage, k3_);
  for (std::size_t i = 0; i < M; ++i) stage.q[i] = s.q[i] + dt * k3_[i];
  rhs(stage, k4_);
  for (std::size_t i = 0; i < M; ++i) {
    s.q[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }
  s.t += dt;
  s.step += 1;
  const std::size_t N = s.points();
  for (std::size_t p = 0; p < M; ++p) {
    if (!std::isfinite(s.q[p]) || (p < N && !(s.q[p] > 0.0))) {
      std::ostringstream os;
      os << "periodic state invalid at step " << s.step << " (t = " << s.t << ")";
      throw Error(ErrorKind::BlowupDetected, os.str());
    }
  }
}

double PeriodicSolver::stable_dt(const PeriodicState& s, double cfl) const {
  const std::size_t N = s.points();
  const double dx = 1.0 / static_cast<double>(n_);
  double adv = 0.0;
  double rmin = s.q[0];
  for (std::size_t p = 0; p < N; ++p) {
    const double rho = s.q[p];
    rmin = std::min(rmin, rho);
    double u2 = 0.0;
    for (int j = 0; j < d_; ++j) {
      const double u = s.q[(1 + j) * N + p] / rho;
      u2 += u * u;
    }
    adv = std::max(adv, std::sqrt(u2) + sound_speed(rho, gas_));
  }
  return cfl * std::min(dx / adv, dx * dx * rmin / gas_.mu_tilde());
}

PeriodicState step_periodic(const PeriodicState& state, double dt, const GasModel& gas) {
  PeriodicSolver solver(gas, state.d, state.n);
  PeriodicState out = state;
  solver.step(out, dt);
  return out;
}

std::vector<double> perturbation_sup_fields(const PeriodicState& s) {
  const std::size_t N = s.points();
  std::vector<double> out(static_cast<std::size_t>(s.d + 1), 0.0);
  for (int c = 0; c <= s.d; ++c) {
    const double mean = c == 0 ? s.mean_rho : s.mean_m[c - 1];
    double mx = 0.0;
    for (std::size_t p = 0; p < N; ++p) mx = std::max(mx, std::abs(s.q[c * N + p] - mean));
    out[c] = mx;
  }
  return out;
}

double perturbation_sup(const PeriodicState& s) {
  const auto f = perturbation_sup_fields(s);
  return *std::max_element(f.begin(), f.end());
}

std::vector<double> field_means(const PeriodicState& s) {
  const std::size_t N = s.points();
  std::vector<double> out(static_cast<std::size_t>(s.d + 1), 0.0);
  for (int c = 0; c <= s.d; ++c) {
    double sum = 0.0;
    for (std::size_t p = 0; p < N; ++p) sum += s.q[c * N + p];
    out[c] = sum / static_cast<double>(N);
  }
  return out;
}

ExponentialFit measure_decay(std::span<const double> t, std::span<const double> sup_norm,
                             const FitWindow& window) {
  return fit_exponential(t, sup_norm, window);
}

void spectral_gradient(const PeriodicState& s, std::vector<double>& grads) {
  const int d = s.d;
  const int nf = d + 1;
  const std::size_t N = s.points();
  const std::vector<int> shape(static_cast<std::size_t>(d), s.n);
  BatchedRealFFT fwd(shape, nf);
  BatchedRealFFT bwd(shape, nf * d);
  const HalfSpectrumGrid g = make_half_spectrum(shape);
  std::copy(s.q.begin(), s.q.end(), fwd.real());
  fwd.forward();
  const std::size_t S = g.size();
  const cplx I(0.0, 1.0);
  for (int c = 0; c < nf; ++c) {
    for (int j = 0; j < d; ++j) {
      cplx* out = bwd.spec() + static_cast<std::size_t>(c * d + j) * S;
      const cplx* in = fwd.spec() + static_cast<std::size_t>(c) * S;
      for (std::size_t k = 0; k < S; ++k) {
        out[k] = g.no_nyquist[k] * I * (kTwoPi * g.k[j][k]) * in[k];
      }
    }
  }
  bwd.backward();
  grads.assign(bwd.real(), bwd.real() + static_cast<std::size_t>(nf * d) * N);
}

BackgroundSampler::BackgroundSampler(int d, int n_bg, const DuctGrid& grid)
    : d_(d), n_(n_bg), grid_(grid) {
  if (grid.d != d) throw Error(ErrorKind::Domain, "background and duct dimensions differ");
  bg_perp_ = ipow(n_bg, d - 1);
}

BackgroundSampler::~BackgroundSampler() = default;

namespace {

/// Trigonometric resampling of complex data along one axis of a row-major
/// array: dims[axis] goes from n_from to n_to. Nyquist content is dropped.
std::vector<cplx> resample_axis(const std::vector<cplx>& in, std::vector<int>& dims, int axis,
                                int n_to) {
  const int n_from = dims[axis];
  std::size_t outer = 1, inner = 1;
  for (int a = 0; a < axis; ++a) outer *= static_cast<std::size_t>(dims[a]);
  for (std::size_t a = static_cast<std::size_t>(axis) + 1; a < dims.size(); ++a)
    inner *= static_cast<std::size_t>(dims[a]);
  const int kmax = (n_from - 1) / 2;
  // Matrix M[t][s] = (1/n_from) sum_k exp(2 pi i k (x_t - y_s)).
  std::vector<cplx> M(static_cast<std::size_t>(n_to) * n_from);
  for (int t = 0; t < n_to; ++t) {
    for (int s = 0; s < n_from; ++s) {
      const double diff = static_cast<double>(t) / n_to - static_cast<double>(s) / n_from;
      double acc = 1.0;
      for (int k = 1; k <= kmax; ++k) acc += 2.0 * std::cos(kTwoPi * k * diff);
      M[static_cast<std::size_t>(t) * n_from + s] = acc / n_from;
    }
  }
  std::vector<cplx> out(outer * static_cast<std::size_t>(n_to) * inner);
  for (std::size_t o = 0; o < outer; ++o) {
    for (int t = 0; t < n_to; ++t) {
      for (std::size_t i = 0; i < inner; ++i) {
        cplx acc = 0.0;
        for (int s = 0; s < n_from; ++s) {
          acc += M[static_cast<std::size_t>(t) * n_from + s] *
                 in[(o * n_from + s) * inner + i];
        }
        out[(o * n_to + t) * inner + i] = acc;
      }
    }
  }
  dims[axis] = n_to;
  return out;
}

}  // namespace

BackgroundSampler::Lines BackgroundSampler::transform(
    const std::vector<std::span<const double>>& fields) {
  const int nf = static_cast<int>(fields.size());
  const int n = n_;
  const std::size_t perp_bg = bg_perp_;
  const int half = n / 2 + 1;
  const int kmax = (n - 1) / 2;

  if (!fft_ || fft_fields_ != nf) {
    fft_ = std::make_unique<BatchedRealFFT>(std::vector<int>{n}, nf * static_cast<int>(perp_bg));
    fft_fields_ = nf;
  }
  double* r = fft_->real();
  for (int f = 0; f < nf; ++f) {
    for (int i1 = 0; i1 < n; ++i1) {
      for (std::size_t p = 0; p < perp_bg; ++p) {
        r[(static_cast<std::size_t>(f) * perp_bg + p) * n + i1] =
            fields[f][static_cast<std::size_t>(i1) * perp_bg + p];
      }
    }
  }
  fft_->forward();

  Lines out;
  out.kmax = kmax;
  out.perp = grid_.perp_count();
  out.c.resize(static_cast<std::size_t>(nf));
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int f = 0; f < nf; ++f) {
    std::vector<cplx> c(static_cast<std::size_t>(kmax + 1) * perp_bg);
    for (int k = 0; k <= kmax; ++k) {
      const double w = (k == 0 ? 1.0 : 2.0) * inv_n;
      for (std::size_t p = 0; p < perp_bg; ++p) {
        c[static_cast<std::size_t>(k) * perp_bg + p] =
            w * fft_->spec()[(static_cast<std::size_t>(f) * perp_bg + p) * half + k];
      }
    }
    if (d_ > 1 && grid_.n_perp != n) {
      std::vector<int> dims{kmax + 1};
      for (int a = 1; a < d_; ++a) dims.push_back(n);
      for (int a = 1; a < d_; ++a) c = resample_axis(c, dims, a, grid_.n_perp);
    }
    out.c[f] = std::move(c);
  }
  return out;
}

BackgroundSampler::Lines BackgroundSampler::combine(std::span<const Lines* const> lines,
                                                    std::span<const double> weights) {
  Lines out;
  out.kmax = lines[0]->kmax;
  out.perp = lines[0]->perp;
  out.c.resize(lines[0]->c.size());
  for (std::size_t f = 0; f < out.c.size(); ++f) {
    out.c[f].assign(lines[0]->c[f].size(), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto& src = lines[i]->c[f];
      const double w = weights[i];
      for (std::size_t e = 0; e < src.size(); ++e) out.c[f][e] += w * src[e];
    }
  }
  return out;
}

std::vector<std::vector<double>> BackgroundSampler::evaluate(const Lines& lines, double offset,
                                                             std::span<const int> cols) const {
  std::vector<int> all;
  if (cols.empty()) {
    all.resize(static_cast<std::size_t>(grid_.n_xi));
    for (int j = 0; j < grid_.n_xi; ++j) all[j] = j;
    cols = all;
  }
  const int kmax = lines.kmax;
  const std::size_t perp_out = lines.perp;
  const std::size_t nf = lines.c.size();
  std::vector<std::vector<double>> out(nf, std::vector<double>(cols.size() * perp_out, 0.0));
#pragma omp parallel for schedule(static)
  for (std::size_t ci = 0; ci < cols.size(); ++ci) {
    double x1 = grid_.xi(cols[ci]) + offset;
    x1 -= std::floor(x1);
    std::vector<double> cw(static_cast<std::size_t>(kmax + 1)), sw(cw.size());
    for (int k = 0; k <= kmax; ++k) {
      const double ang = kTwoPi * k * x1;
      cw[k] = std::cos(ang);
      sw[k] = std::sin(ang);
    }
    for (std::size_t f = 0; f < nf; ++f) {
      double* dst = out[f].data() + ci * perp_out;
      const cplx* src = lines.c[f].data();
      for (int k = 0; k <= kmax; ++k) {
        const cplx* row = src + static_cast<std::size_t>(k) * perp_out;
        const double c = cw[k], s = sw[k];
        for (std::size_t p = 0; p < perp_out; ++p) {
          dst[p] += row[p].real() * c - row[p].imag() * s;
        }
      }
    }
  }
  return out;
}

std::vector<std::vector<double>> BackgroundSampler::sample_raw(
    const std::vector<std::vector<double>>& fields, double offset, std::span<const int> cols) {
  std::vector<std::span<const double>> views(fields.begin(), fields.end());
  return evaluate(transform(views), offset, cols);
}

BackgroundSampler::Fields BackgroundSampler::sample(const PeriodicState& state, double offset,
                                                    bool gradients, std::span<const int> cols) {
  if (state.d != d_ || state.n != n_) {
    throw Error(ErrorKind::Domain, "BackgroundSampler: state shape mismatch");
  }
  const std::size_t N = state.points();
  const int nf = d_ + 1;
  std::vector<std::vector<double>> fields;
  for (int c = 0; c < nf; ++c) {
    fields.emplace_back(state.q.begin() + static_cast<long>(c * N),
                        state.q.begin() + static_cast<long>((c + 1) * N));
  }
  if (gradients) {
    std::vector<double> g;
    spectral_gradient(state, g);
    for (int b = 0; b < nf * d_; ++b) {
      fields.emplace_back(g.begin() + static_cast<long>(b * N),
                          g.begin() + static_cast<long>((b + 1) * N));
    }
  }
  auto sampled = sample_raw(fields, offset, cols);
  Fields out;
  out.cols = cols.empty() ? static_cast<std::size_t>(grid_.n_xi) : cols.size();
  out.perp = grid_.perp_count();
  for (int c = 0; c < nf; ++c) out.q.push_back(std::move(sampled[c]));
  if (gradients) {
    out.grad.resize(static_cast<std::size_t>(nf));
    for (int c = 0; c < nf; ++c) {
      for (int j = 0; j < d_; ++j) out.grad[c].push_back(std::move(sampled[nf + c * d_ + j]));
    }
  }
  return out;
}

}  // namespace shockduct
