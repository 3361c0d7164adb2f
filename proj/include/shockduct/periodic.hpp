#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "shockduct/fit.hpp"
#include "shockduct/gas.hpp"
#include "shockduct/grid.hpp"
#include "shockduct/spectral.hpp"

namespace shockduct {

/// One Fourier term: field_c(x) += amplitude * Re(coef[c] exp(2 pi i k.x)),
/// components ordered (rho, m1, m2, m3).
struct FourierMode {
  std::array<int, 3> k{0, 0, 0};
  std::array<cplx, 4> coef{};
};

struct PerturbationSpec {
  double amplitude = 0.0;
  std::vector<FourierMode> modes;
};

/// Random band-limited spec: n_modes distinct nonzero wavevectors with
/// |k_j| <= kmax. Coefficients are normalized so that each field's
/// coefficient magnitudes sum to one, which bounds every field by amplitude.
PerturbationSpec random_perturbation(std::uint64_t seed, int n_modes, int d, int kmax,
                                     double amplitude);

/// Conservative fields on the unit torus T^d, flat storage
/// q = [rho | m1 | ... | md], each block row-major [x1][x2][x3].
struct PeriodicState {
  int d = 2;
  int n = 32;
  double t = 0.0;
  std::int64_t step = 0;
  double mean_rho = 1.0;
  std::array<double, 3> mean_m{0.0, 0.0, 0.0};
  std::vector<double> q;

  std::size_t points() const;
  std::span<double> rho() { return {q.data(), points()}; }
  std::span<const double> rho() const { return {q.data(), points()}; }
  std::span<double> m(int i) { return {q.data() + (1 + i) * points(), points()}; }
  std::span<const double> m(int i) const { return {q.data() + (1 + i) * points(), points()}; }
  std::span<double> field(int c) { return {q.data() + c * points(), points()}; }
  std::span<const double> field(int c) const { return {q.data() + c * points(), points()}; }
  int fields() const { return d + 1; }
};

/// mean + sampled perturbation. Throws AmplitudeTooLarge if min rho < mean/2.
PeriodicState init_periodic(double mean_rho, const std::array<double, 3>& mean_m,
                            const PerturbationSpec& spec, int d, int n);

/// Pseudo-spectral RK4 solver for the isentropic system on T^d.
class PeriodicSolver {
 public:
  PeriodicSolver(const GasModel& gas, int d, int n);
  ~PeriodicSolver();

  /// Time derivative of state.q.
  void rhs(const PeriodicState& state, std::vector<double>& dq);
  /// One RK4 step. Throws BlowupDetected on NaN or nonpositive density.
  void step(PeriodicState& state, double dt);
  /// cfl * min(dx / (|u| + c), dx^2 rho_min / mu_tilde).
  double stable_dt(const PeriodicState& state, double cfl) const;

  const GasModel& gas() const { return gas_; }
  int d() const { return d_; }
  int n() const { return n_; }

 private:
  GasModel gas_;
  int d_;
  int n_;
  std::unique_ptr<BatchedRealFFT> fwd_;
  std::unique_ptr<BatchedRealFFT> bwd_;
  HalfSpectrumGrid spec_grid_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// Convenience wrapper creating a solver for one step.
PeriodicState step_periodic(const PeriodicState& state, double dt, const GasModel& gas);

/// Max over fields and points of |q - mean|.
double perturbation_sup(const PeriodicState& state);
/// Per-field max |q_c - mean_c|.
std::vector<double> perturbation_sup_fields(const PeriodicState& state);
/// Grid means of each field.
std::vector<double> field_means(const PeriodicState& state);

/// Log-linear fit of the sup-norm history.
ExponentialFit measure_decay(std::span<const double> t, std::span<const double> sup_norm,
                             const FitWindow& window = {});

/// Spectrally differentiated copy: out = d/dx_axis of field c.
void spectral_gradient(const PeriodicState& state, std::vector<double>& grads);

/// Evaluates periodic backgrounds on the duct grid: at duct node (xi, xperp)
/// the value is the trigonometric interpolant at x1 = xi + offset.
class BackgroundSampler {
 public:
  BackgroundSampler(int d, int n_bg, const DuctGrid& grid);
  ~BackgroundSampler();

  struct Fields {
    std::size_t cols = 0;
    std::size_t perp = 0;
    /// [rho, m1..md], each [cols][perp].
    std::vector<std::vector<double>> q;
    /// grad[c][j] = d/dx_j of field c (empty unless requested).
    std::vector<std::vector<std::vector<double>>> grad;
  };

  /// Samples at the xi node indices in `cols` (all columns if empty).
  Fields sample(const PeriodicState& state, double offset, bool gradients,
                std::span<const int> cols = {});
  /// x1-Fourier coefficients of fields given on the background grid,
  /// resampled to the duct's transverse grid: c[f][k * perp + p].
  struct Lines {
    int kmax = 0;
    std::size_t perp = 0;
    std::vector<std::vector<cplx>> c;
  };
  Lines transform(const std::vector<std::span<const double>>& fields);
  /// Linear combination sum_i w_i lines_i (all with equal shape).
  static Lines combine(std::span<const Lines* const> lines, std::span<const double> weights);
  std::vector<std::vector<double>> evaluate(const Lines& lines, double offset,
                                            std::span<const int> cols) const;

  /// transform + evaluate.
  std::vector<std::vector<double>> sample_raw(const std::vector<std::vector<double>>& fields,
                                              double offset, std::span<const int> cols);

  const DuctGrid& grid() const { return grid_; }

 private:
  int d_;
  int n_;
  DuctGrid grid_;
  std::size_t bg_perp_;
  std::unique_ptr<BatchedRealFFT> fft_;
  int fft_fields_ = 0;
};

}  // namespace shockduct
