#include "shockduct/modes.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "shockduct/ansatz.hpp"
#include "shockduct/error.hpp"

namespace shockduct {

ModeSplit split_modes(const DuctGrid& grid, std::span<const double> field) {
  if (field.size() != grid.points()) {
    throw Error(ErrorKind::Domain, "split_modes: field size mismatch");
  }
  const std::size_t P = grid.perp_count();
  ModeSplit out;
  out.flat.resize(static_cast<std::size_t>(grid.n_xi));
  out.sharp.resize(field.size());
  for (int j = 0; j < grid.n_xi; ++j) {
    const double* c = field.data() + static_cast<std::size_t>(j) * P;
    double acc = 0.0;
    for (std::size_t p = 0; p < P; ++p) acc += c[p];
    const double mean = acc / static_cast<double>(P);
    out.flat[static_cast<std::size_t>(j)] = mean;
    for (std::size_t p = 0; p < P; ++p) {
      out.sharp[static_cast<std::size_t>(j) * P + p] = c[p] - mean;
    }
  }
  return out;
}

std::vector<double> broadcast_flat(const DuctGrid& grid, std::span<const double> flat) {
  const std::size_t P = grid.perp_count();
  std::vector<double> out(grid.points());
  for (int j = 0; j < grid.n_xi; ++j) {
    for (std::size_t p = 0; p < P; ++p) {
      out[static_cast<std::size_t>(j) * P + p] = flat[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

std::vector<double> cumulative_trapezoid(std::span<const double> f, double h) {
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t j = 1; j < f.size(); ++j) out[j] = out[j - 1] + 0.5 * h * (f[j - 1] + f[j]);
  return out;
}

AntiDerivativePair antiderivative(const DuctGrid& grid, std::span<const double> flat_phi,
                                  std::span<const double> flat_psi1, double tolerance) {
  const auto n = static_cast<std::size_t>(grid.n_xi);
  if (flat_phi.size() != n || flat_psi1.size() != n) {
    throw Error(ErrorKind::Domain, "antiderivative: zero modes must have n_xi samples");
  }
  AntiDerivativePair a;
  a.Phi = cumulative_trapezoid(flat_phi, grid.dxi());
  a.Psi1 = cumulative_trapezoid(flat_psi1, grid.dxi());
  a.residual_phi = a.Phi.back();
  a.residual_psi = a.Psi1.back();
  const double worst = std::max(std::abs(a.residual_phi), std::abs(a.residual_psi));
  if (worst > 100.0 * tolerance) {
    std::ostringstream os;
    os << "zero-mode mass " << worst << " exceeds 100 x tolerance " << tolerance;
    throw Error(ErrorKind::ZeroMassViolation, os.str());
  }
  return a;
}

double poincare_ratio(DuctDerivatives& ops, std::span<const double> sharp) {
  const DuctGrid& grid = ops.grid();
  if (sharp.size() != grid.points()) {
    throw Error(ErrorKind::Domain, "poincare_ratio: field size mismatch");
  }
  if (grid.d < 2) throw Error(ErrorKind::Domain, "poincare_ratio needs a transverse torus");
  const int dm = grid.d - 1;
  std::vector<double> g(static_cast<std::size_t>(dm) * sharp.size());
  ops.grad_perp(sharp.data(), 1, g.data());
  const double num = duct_l2(grid, sharp);
  double den2 = 0.0;
  for (int a = 0; a < dm; ++a) {
    den2 += std::pow(
        duct_l2(grid, std::span<const double>(g).subspan(a * sharp.size(), sharp.size())), 2);
  }
  const double den = std::sqrt(den2);
  if (den == 0.0) {
    if (num == 0.0) return 0.0;
    throw Error(ErrorKind::Domain, "poincare_ratio: nonzero field with zero transverse gradient");
  }
  return num / den;
}

void write_zero_mode_csv(const std::filesystem::path& path, const DuctGrid& grid,
                         std::span<const double> phi_flat, std::span<const double> psi1_flat,
                         const AntiDerivativePair& anti) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  os << std::setprecision(17) << "xi,phi_flat,psi1_flat,Phi,Psi1\n";
  for (int j = 0; j < grid.n_xi; ++j) {
    const auto i = static_cast<std::size_t>(j);
    os << grid.xi(j) << ',' << phi_flat[i] << ',' << psi1_flat[i] << ',' << anti.Phi[i] << ','
       << anti.Psi1[i] << '\n';
  }
}

}  // namespace shockduct
