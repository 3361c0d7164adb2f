#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "shockduct/gas.hpp"
#include "shockduct/grid.hpp"
#include "shockduct/hybrid.hpp"
#include "shockduct/periodic.hpp"
#include "shockduct/profile.hpp"

namespace shockduct {

/// Conservative fields on the moving-frame duct, q = [rho | m1 | ... | md].
struct DuctState {
  DuctGrid grid;
  double t = 0.0;
  std::int64_t step = 0;
  double frame_speed = 0.0;
  std::vector<double> q;

  std::size_t points() const { return grid.points(); }
  std::span<double> field(int c) { return {q.data() + c * points(), points()}; }
  std::span<const double> field(int c) const { return {q.data() + c * points(), points()}; }
  std::span<const double> rho() const { return field(0); }
  std::span<const double> m(int k) const { return field(1 + k); }
};

/// Separable Gaussian bump A exp(-((xi - center) / width)^2) * g(x2), added
/// to field `component` (0 = rho, k = m_k). g = 1 for mode 0,
/// cos(2 pi mode x2) for mode > 0 and sin(2 pi |mode| x2) for mode < 0.
struct Bump {
  int component = 0;
  double amplitude = 0.0;
  double center = 0.0;
  double width = 1.0;
  int mode = 0;
};

struct LocalizedPerturbationSpec {
  std::vector<Bump> bumps;
};

/// Throws Config if a bump's effective support |center| + 4.5 width (where the
/// Gaussian is below 2e-9 of its peak) leaves
/// [-L/2, L/2] or its component or mode is invalid for the grid.
void validate_localized(const LocalizedPerturbationSpec& spec, const DuctGrid& grid);

/// Bump fields on the duct grid: out[c] for c = 0..d.
std::vector<std::vector<double>> sample_localized(const LocalizedPerturbationSpec& spec,
                                                  const DuctGrid& grid);

/// Unshifted profile + periodic perturbation (v0, w0) + localized fields.
/// minus is the minus background at t = 0 (its deviation from the mean is
/// the periodic perturbation). Throws AmplitudeTooLarge if rho drops below
/// rho_bar_plus / 2.
DuctState init_duct(const Profile& profile, BackgroundSampler& sampler,
                    const PeriodicState& minus,
                    const std::vector<std::vector<double>>& localized);

/// Values imposed on the sponge columns.
class BoundaryData {
 public:
  virtual ~BoundaryData() = default;
  /// out[c][i * perp + p] for each column cols[i], at time t.
  virtual void values(double t, std::span<const int> cols,
                      std::vector<std::vector<double>>& out) = 0;
};

/// Holds the columns of a fixed state (a stationary ansatz).
class FrozenBoundary : public BoundaryData {
 public:
  explicit FrozenBoundary(const DuctState& state);
  void values(double t, std::span<const int> cols,
              std::vector<std::vector<double>>& out) override;

 private:
  DuctState ref_;
};

struct DuctSolverSpec {
  /// Artificial dissipation coefficient relative to mu_tilde / rho_ref.
  double dissipation = 0.1;
  /// Columns overwritten at each end.
  int sponge = 3;
};

/// Method-of-lines solver in the frame moving with speed s.
class DuctSolver {
 public:
  DuctSolver(const GasModel& gas, const DuctGrid& grid, double s, double rho_ref,
             const DuctSolverSpec& spec = {});

  void rhs(std::span<const double> q, std::span<double> dq);
  /// RK4 step; sponge columns are overwritten at every stage time. Throws
  /// BlowupDetected on NaN or nonpositive density.
  void step(DuctState& state, double dt, BoundaryData& boundary);
  /// cfl * min(D / (|u - s| + c), D^2 rho_min / mu_tilde), D = min grid spacing.
  double stable_dt(const DuctState& state, double cfl) const;

  const std::vector<int>& sponge_columns() const { return sponge_cols_; }
  /// First interior columns next to each sponge.
  std::vector<int> watch_columns() const;
  double dissipation_coefficient() const { return nu_ad_; }

 private:
  void clamp(std::vector<double>& q, double t, BoundaryData& boundary);

  GasModel gas_;
  DuctGrid grid_;
  double s_;
  double nu_ad_;
  DuctSolverSpec spec_;
  DuctDerivatives ops_;
  std::vector<int> sponge_cols_;
  std::vector<std::vector<double>> clamp_buf_;
  std::vector<double> u_, p_, du_, gu_, div_, flux_, tflux_, tdiv_, tmp_;
  std::vector<double> k1_, k2_, k3_, k4_, stage_;
};

/// Max |q - ref| over the given columns, all fields.
double column_deviation(const DuctState& state, std::span<const int> cols,
                        const std::vector<std::vector<double>>& ref);

}  // namespace shockduct
