#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "shockduct/ansatz.hpp"
#include "shockduct/config.hpp"
#include "shockduct/diagnostics.hpp"
#include "shockduct/duct.hpp"
#include "shockduct/hybrid.hpp"
#include "shockduct/periodic.hpp"
#include "shockduct/profile.hpp"
#include "shockduct/shift.hpp"

namespace shockduct {

/// Sponge values from the ansatz. Within one step [t0, t0 + dt] the
/// backgrounds and shifts are cubic Hermite interpolants built from their
/// values and time derivatives at both ends.
class AnsatzBoundary : public BoundaryData {
 public:
  AnsatzBoundary(const Profile& profile, BackgroundSampler& sampler);

  struct End {
    /// Lines of [q, dq/dt] for each background.
    const BackgroundSampler::Lines* minus = nullptr;
    const BackgroundSampler::Lines* plus = nullptr;
    double X = 0.0, Xp = 0.0, Y = 0.0, Yp = 0.0;
  };
  void set_interval(double t0, double dt, const End& a, const End& b);

  void values(double t, std::span<const int> cols,
              std::vector<std::vector<double>>& out) override;

 private:
  const Profile* profile_;
  BackgroundSampler* sampler_;
  int nf_;
  double t0_ = 0.0, dt_ = 0.0;
  End a_, b_;
  BackgroundSampler::Lines work_;
};

/// Quantities fixed at initialization.
struct InitialData {
  double X0 = 0.0;
  double Y0 = 0.0;
  double mass_phi0 = 0.0;
  double mass_psi01 = 0.0;
  /// Bump coefficient added to psi01 by the zero-mass adjustment (0 if off).
  double adjust_coef = 0.0;
  /// zero_mass_residual before and after the adjustment.
  double residual_before = 0.0;
  double residual_after = 0.0;
  YInfinity yinf;
  /// Time reached by the background-only pass that produced yinf.
  double prepass_T = 0.0;
};

/// Backgrounds, shifts and duct in lockstep with a fixed step.
class Simulation {
 public:
  explicit Simulation(const RunConfig& cfg);
  /// Restores from a checkpoint manifest; the run configuration is read
  /// from the manifest.
  explicit Simulation(const std::filesystem::path& manifest);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  void step();
  DiagnosticsSample sample();

  /// Writes <dir>/<stem>.json plus three snapshot files next to it.
  std::filesystem::path write_checkpoint(const std::filesystem::path& dir,
                                         const std::string& stem) const;

  const RunConfig& config() const { return cfg_; }
  const ShockTriple& triple() const { return triple_; }
  const Profile& profile() const { return profile_; }
  const InitialData& initial() const { return init_; }
  const DuctState& duct() const { return duct_; }
  const PeriodicState& minus() const { return minus_; }
  const PeriodicState& plus() const { return plus_; }
  double t() const { return duct_.t; }
  std::int64_t step_index() const { return duct_.step; }
  double dt() const { return dt_; }
  std::int64_t total_steps() const { return n_steps_; }
  double X() const { return shift_->X(); }
  double Y() const { return shift_->Y(); }
  double Xp() const { return Xp_; }
  double Yp() const { return Yp_; }
  /// Running time integral of the Y_inf_p integrand along the run.
  double yinf_running() const { return yinf_running_; }
  /// Worst relative violation of |f|^2 = |f_flat|^2 + |f_sharp|^2 so far.
  double split_defect() const { return split_defect_; }
  /// Range of E / |(phi#, psi#)|^2_H1 over the samples taken.
  double energy_ratio_min() const { return e_ratio_min_; }
  double energy_ratio_max() const { return e_ratio_max_; }
  /// First sample time at which the zero-mode masses exceeded 100 x the
  /// zero-mass tolerance, or -1.
  double zero_mass_flag_time() const { return zero_mass_flag_t_; }
  DuctDerivatives& ops() { return *ops_; }

 private:
  void build_common();
  void refresh_current();
  BackgroundSampler::Lines time_lines(const PeriodicState& state);

  RunConfig cfg_;
  ShockTriple triple_;
  Profile profile_;
  InitialData init_;
  double dt_ = 0.0;
  std::int64_t n_steps_ = 0;

  PeriodicState minus_, plus_;
  DuctState duct_;
  std::unique_ptr<PeriodicSolver> bg_solver_;
  std::unique_ptr<BackgroundSampler> sampler_;
  std::unique_ptr<ShiftQuadrature> quad_;
  std::unique_ptr<ShiftIntegrator> shift_;
  std::unique_ptr<DuctSolver> solver_;
  std::unique_ptr<DuctDerivatives> ops_;
  std::unique_ptr<AnsatzBoundary> boundary_;

  JumpLines jl_now_;
  BackgroundSampler::Lines minus_now_, plus_now_;
  double Xp_ = 0.0, Yp_ = 0.0;
  double yinf_running_ = 0.0;
  double yinf_last_ = 0.0;
  double split_defect_ = 0.0;
  double e_ratio_min_ = 0.0, e_ratio_max_ = 0.0;
  double zero_mass_flag_t_ = -1.0;
  std::vector<double> dq_;
};

struct RunOptions {
  bool write_outputs = true;
  /// Checkpoint manifest to resume from (empty for a fresh run).
  std::filesystem::path restart;
  /// Called after every diagnostics sample.
  std::function<void(const Simulation&, const DiagnosticsSample&)> on_sample;
};

struct RunResult {
  DiagnosticsSeries series;
  VerdictReport verdict;
  nlohmann::json report;
  std::vector<std::filesystem::path> checkpoints;
};

/// Full run to cfg.time.T with diagnostics every output_every and
/// checkpoints every snapshot_every. Writes series.csv, shifts.csv,
/// zero_mode.csv, profile.csv and report.json into cfg.out_dir.
RunResult run_simulation(const RunConfig& cfg, const RunOptions& opts = {});

/// Series metadata, verdicts and report for a finished set of samples.
nlohmann::json make_report(const Simulation& sim, const DiagnosticsSeries& series,
                           const VerdictReport& verdict);

nlohmann::json verdict_json(const VerdictReport& report);

}  // namespace shockduct
