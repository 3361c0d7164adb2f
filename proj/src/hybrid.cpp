#include "shockduct/hybrid.hpp"

#include <algorithm>
#include <numbers>

#include "shockduct/error.hpp"

namespace shockduct {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

DuctDerivatives::DuctDerivatives(const DuctGrid& grid)
    : grid_(grid), P_(grid.perp_count()), N_(grid.points()) {
  grid_.validate();
  if (grid_.d > 1) {
    perp_shape_.assign(static_cast<std::size_t>(grid_.d - 1), grid_.n_perp);
    half_ = make_half_spectrum(perp_shape_);
  }
}

DuctDerivatives::~DuctDerivatives() = default;

BatchedRealFFT& DuctDerivatives::plan(int fields) {
  auto& p = plans_[fields];
  if (!p) p = std::make_unique<BatchedRealFFT>(perp_shape_, fields * grid_.n_xi);
  return *p;
}

void DuctDerivatives::dxi(const double* f, double* out) const {
  const int n = grid_.n_xi;
  const std::size_t P = P_;
  const double h = grid_.dxi();
  const double c1 = 2.0 / (3.0 * h), c2 = 1.0 / (12.0 * h), e = 0.5 / h;
  auto col = [&](int j) { return f + static_cast<std::size_t>(j) * P; };
  {
    const double *a = col(0), *b = col(1), *c = col(2);
    double* o = out;
    for (std::size_t p = 0; p < P; ++p) o[p] = e * (-3.0 * a[p] + 4.0 * b[p] - c[p]);
  }
  {
    const double *a = col(0), *c = col(2);
    double* o = out + P;
    for (std::size_t p = 0; p < P; ++p) o[p] = e * (c[p] - a[p]);
  }
  for (int j = 2; j <= n - 3; ++j) {
    const double *m2 = col(j - 2), *m1 = col(j - 1), *p1 = col(j + 1), *p2 = col(j + 2);
    double* o = out + static_cast<std::size_t>(j) * P;
    for (std::size_t p = 0; p < P; ++p) o[p] = c1 * (p1[p] - m1[p]) - c2 * (p2[p] - m2[p]);
  }
  {
    const double *a = col(n - 3), *c = col(n - 1);
    double* o = out + static_cast<std::size_t>(n - 2) * P;
    for (std::size_t p = 0; p < P; ++p) o[p] = e * (c[p] - a[p]);
  }
  {
    const double *a = col(n - 3), *b = col(n - 2), *c = col(n - 1);
    double* o = out + static_cast<std::size_t>(n - 1) * P;
    for (std::size_t p = 0; p < P; ++p) o[p] = e * (3.0 * c[p] - 4.0 * b[p] + a[p]);
  }
}

std::vector<double> DuctDerivatives::dxi(std::span<const double> f) const {
  if (f.size() != N_) throw Error(ErrorKind::Domain, "dxi: field size mismatch");
  std::vector<double> out(N_);
  dxi(f.data(), out.data());
  return out;
}

void DuctDerivatives::grad_perp(const double* in, int count, double* out) {
  const int dm = grid_.d - 1;
  if (dm == 0 || count == 0) return;
  BatchedRealFFT& fwd = plan(count);
  std::copy(in, in + static_cast<std::size_t>(count) * N_, fwd.real());
  fwd.forward();
  const std::size_t S = fwd.spec_block();
  const std::size_t blocks = static_cast<std::size_t>(count) * static_cast<std::size_t>(grid_.n_xi);
  scratch_.assign(fwd.spec(), fwd.spec() + blocks * S);
  BatchedRealFFT& bwd = plan(count * dm);
  const cplx I(0.0, 1.0);
  const std::size_t n_xi = static_cast<std::size_t>(grid_.n_xi);
  for (int f = 0; f < count; ++f) {
    for (int a = 0; a < dm; ++a) {
      for (std::size_t j = 0; j < n_xi; ++j) {
        const cplx* src = scratch_.data() + (static_cast<std::size_t>(f) * n_xi + j) * S;
        cplx* dst = bwd.spec() + ((static_cast<std::size_t>(f * dm + a)) * n_xi + j) * S;
        for (std::size_t k = 0; k < S; ++k) {
          dst[k] = half_.no_nyquist[k] * I * (kTwoPi * half_.k[a][k]) * src[k];
        }
      }
    }
  }
  bwd.backward();
  std::copy(bwd.real(), bwd.real() + static_cast<std::size_t>(count * dm) * N_, out);
}

void DuctDerivatives::div_perp(const double* in, int groups, double* out) {
  const int dm = grid_.d - 1;
  if (groups == 0) return;
  if (dm == 0) {
    std::fill(out, out + static_cast<std::size_t>(groups) * N_, 0.0);
    return;
  }
  BatchedRealFFT& fwd = plan(groups * dm);
  std::copy(in, in + static_cast<std::size_t>(groups * dm) * N_, fwd.real());
  fwd.forward();
  const std::size_t S = fwd.spec_block();
  const std::size_t n_xi = static_cast<std::size_t>(grid_.n_xi);
  scratch_.assign(fwd.spec(), fwd.spec() + static_cast<std::size_t>(groups * dm) * n_xi * S);
  BatchedRealFFT& bwd = plan(groups);
  const cplx I(0.0, 1.0);
  for (int g = 0; g < groups; ++g) {
    for (std::size_t j = 0; j < n_xi; ++j) {
      cplx* dst = bwd.spec() + (static_cast<std::size_t>(g) * n_xi + j) * S;
      for (std::size_t k = 0; k < S; ++k) {
        cplx acc = 0.0;
        for (int a = 0; a < dm; ++a) {
          const cplx* src =
              scratch_.data() + (static_cast<std::size_t>(g * dm + a) * n_xi + j) * S;
          acc += (kTwoPi * half_.k[a][k]) * src[k];
        }
        dst[k] = half_.no_nyquist[k] * I * acc;
      }
    }
  }
  bwd.backward();
  std::copy(bwd.real(), bwd.real() + static_cast<std::size_t>(groups) * N_, out);
}

std::vector<double> DuctDerivatives::perp_mean(std::span<const double> f) const {
  if (f.size() != N_) throw Error(ErrorKind::Domain, "perp_mean: field size mismatch");
  std::vector<double> out(static_cast<std::size_t>(grid_.n_xi));
  for (int j = 0; j < grid_.n_xi; ++j) {
    double acc = 0.0;
    const double* c = f.data() + static_cast<std::size_t>(j) * P_;
    for (std::size_t p = 0; p < P_; ++p) acc += c[p];
    out[static_cast<std::size_t>(j)] = acc / static_cast<double>(P_);
  }
  return out;
}

}  // namespace shockduct
