#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "shockduct/diagnostics.hpp"
#include "shockduct/duct.hpp"
#include "shockduct/gas.hpp"
#include "shockduct/grid.hpp"
#include "shockduct/periodic.hpp"
#include "shockduct/profile.hpp"
#include "shockduct/shift.hpp"

namespace shockduct {

struct PeriodicConfig {
  int n = 32;
  double amplitude = 0.02;
  std::uint64_t seed = 7;
  int n_modes = 4;
  int kmax = 1;
  /// Explicit modes; when non-empty they replace the random draw.
  std::vector<FourierMode> modes;
};

struct LocalizedConfig {
  LocalizedPerturbationSpec spec;
  bool zero_mass_adjust = true;
  double adjust_center = 0.0;
  double adjust_half_width = 3.0;
};

struct TimeConfig {
  double T = 60.0;
  double cfl = 0.25;
  double output_every = 0.25;
  double snapshot_every = 5.0;
};

struct ToleranceConfig {
  VerdictTolerances verdict;
  /// Zero-mode mass tolerance handed to the anti-derivative construction.
  double zero_mass = 1e-6;
  /// BoundaryContamination fires when the deviation next to a sponge
  /// exceeds factor * max(background perturbation, floor).
  double contamination_factor = 10.0;
  double contamination_floor = 1e-4;
};

struct RunConfig {
  GasModel gas;
  double rho_minus = 1.2;
  double rho_plus = 1.0;
  DuctGrid grid;
  ProfileSpec profile;
  PeriodicConfig periodic;
  LocalizedConfig localized;
  ShiftSpec shift;
  DuctSolverSpec solver;
  TimeConfig time;
  ToleranceConfig tolerances;
  EnergyWeights weights;
  std::string out_dir = "out";
};

/// Default localized bumps: a transverse-constant bump pair shaped like a
/// small profile shift plus two transverse modes.
LocalizedPerturbationSpec default_bumps(double s);
RunConfig default_config();

nlohmann::json to_json(const RunConfig& cfg);
/// Unknown keys and type mismatches raise Config errors naming the field path.
RunConfig from_json(const nlohmann::json& j);

/// Applies "a.b.c=value" to an existing leaf; value is parsed as JSON when
/// possible, otherwise taken as a string.
void apply_override(nlohmann::json& tree, const std::string& assignment);

/// Re-validates every module constraint with field-path messages.
void validate(const RunConfig& cfg);

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);
void save_config(const RunConfig& cfg, const std::filesystem::path& path);

/// Periodic perturbation spec implied by the config (random or explicit).
PerturbationSpec periodic_spec(const RunConfig& cfg);

}  // namespace shockduct
