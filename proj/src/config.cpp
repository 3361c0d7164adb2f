#include "shockduct/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "shockduct/error.hpp"

namespace shockduct {

using nlohmann::json;

LocalizedPerturbationSpec default_bumps(double s) {
  LocalizedPerturbationSpec spec;
  spec.bumps.push_back({0, 0.02, 0.0, 2.0, 0});
  spec.bumps.push_back({1, 0.02 * s, 0.0, 2.0, 0});
  spec.bumps.push_back({0, 0.02, 3.0, 1.5, 1});
  spec.bumps.push_back({2, 0.02, -3.0, 1.5, -1});
  return spec;
}

RunConfig default_config() {
  RunConfig cfg;
  const ShockTriple t = solve_shock(cfg.rho_minus, cfg.rho_plus, cfg.gas);
  cfg.localized.spec = default_bumps(t.s);
  return cfg;
}

json to_json(const RunConfig& c) {
  json j;
  j["gas"] = {{"gamma", c.gas.gamma}, {"mu", c.gas.mu}, {"lambda", c.gas.lambda}};
  j["shock"] = {{"rho_minus", c.rho_minus}, {"rho_plus", c.rho_plus}};
  j["grid"] = {{"d", c.grid.d}, {"n_xi", c.grid.n_xi}, {"n_perp", c.grid.n_perp}, {"L", c.grid.L}};
  j["profile"] = {{"eps_tail", c.profile.eps_tail},
                  {"rtol", c.profile.rtol},
                  {"h", c.profile.h},
                  {"max_extent", c.profile.max_extent}};
  json modes = json::array();
  for (const auto& m : c.periodic.modes) {
    json coef = json::array();
    for (const auto& z : m.coef) coef.push_back({z.real(), z.imag()});
    modes.push_back({{"k", {m.k[0], m.k[1], m.k[2]}}, {"coef", coef}});
  }
  j["periodic"] = {{"n", c.periodic.n},         {"amplitude", c.periodic.amplitude},
                   {"seed", c.periodic.seed},   {"n_modes", c.periodic.n_modes},
                   {"kmax", c.periodic.kmax},   {"modes", modes}};
  json bumps = json::array();
  for (const auto& b : c.localized.spec.bumps) {
    bumps.push_back({{"component", b.component},
                     {"amplitude", b.amplitude},
                     {"center", b.center},
                     {"width", b.width},
                     {"mode", b.mode}});
  }
  j["localized"] = {{"bumps", bumps},
                    {"zero_mass_adjust", c.localized.zero_mass_adjust},
                    {"adjust_center", c.localized.adjust_center},
                    {"adjust_half_width", c.localized.adjust_half_width}};
  j["shift"] = {{"eps_window", c.shift.eps_window}};
  j["solver"] = {{"dissipation", c.solver.dissipation}, {"sponge", c.solver.sponge}};
  j["time"] = {{"T", c.time.T},
               {"cfl", c.time.cfl},
               {"output_every", c.time.output_every},
               {"snapshot_every", c.time.snapshot_every}};
  const auto& v = c.tolerances.verdict;
  j["tolerances"] = {{"sharp_r2", v.sharp_r2},
                     {"energy_r2", v.energy_r2},
                     {"w1inf_ratio", v.w1inf_ratio},
                     {"w1inf_reference_time", v.w1inf_reference_time},
                     {"location_cells", v.location_cells},
                     {"mass_drift_rate", v.mass_drift_rate},
                     {"fit_floor", v.fit_floor},
                     {"fit_t_begin", v.fit_t_begin},
                     {"zero_mass", c.tolerances.zero_mass},
                     {"contamination_factor", c.tolerances.contamination_factor},
                     {"contamination_floor", c.tolerances.contamination_floor}};
  j["weights"] = {{"A1", c.weights.A1}, {"A2", c.weights.A2}};
  j["output"] = {{"dir", c.out_dir}};
  return j;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::Config, path + ": " + msg);
}

/// Reads keys of one JSON object, remembering which were consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) fail(key_path(k), "unknown key");
    }
  }

  std::string key_path(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  const json* find(const std::string& k) {
    seen_.insert(k);
    auto it = j_.find(k);
    return it == j_.end() ? nullptr : &*it;
  }

  void num(const std::string& k, double& out) {
    if (const json* v = find(k)) {
      if (!v->is_number()) fail(key_path(k), "expected a number");
      out = v->get<double>();
    }
  }
  void integer(const std::string& k, int& out) {
    if (const json* v = find(k)) {
      if (!v->is_number_integer()) fail(key_path(k), "expected an integer");
      out = v->get<int>();
    }
  }
  void uint64(const std::string& k, std::uint64_t& out) {
    if (const json* v = find(k)) {
      if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() &&
                                      v->get<long long>() < 0)) {
        fail(key_path(k), "expected a nonnegative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }
  void boolean(const std::string& k, bool& out) {
    if (const json* v = find(k)) {
      if (!v->is_boolean()) fail(key_path(k), "expected true or false");
      out = v->get<bool>();
    }
  }
  void str(const std::string& k, std::string& out) {
    if (const json* v = find(k)) {
      if (!v->is_string()) fail(key_path(k), "expected a string");
      out = v->get<std::string>();
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

RunConfig from_json(const json& j) {
  RunConfig c = default_config();
  Section root(j, "");
  if (const json* g = root.find("gas")) {
    Section s(*g, "gas");
    s.num("gamma", c.gas.gamma);
    s.num("mu", c.gas.mu);
    s.num("lambda", c.gas.lambda);
  }
  if (const json* g = root.find("shock")) {
    Section s(*g, "shock");
    s.num("rho_minus", c.rho_minus);
    s.num("rho_plus", c.rho_plus);
  }
  if (const json* g = root.find("grid")) {
    Section s(*g, "grid");
    s.integer("d", c.grid.d);
    s.integer("n_xi", c.grid.n_xi);
    s.integer("n_perp", c.grid.n_perp);
    s.num("L", c.grid.L);
  }
  if (const json* g = root.find("profile")) {
    Section s(*g, "profile");
    s.num("eps_tail", c.profile.eps_tail);
    s.num("rtol", c.profile.rtol);
    s.num("h", c.profile.h);
    s.num("max_extent", c.profile.max_extent);
  }
  if (const json* g = root.find("periodic")) {
    Section s(*g, "periodic");
    s.integer("n", c.periodic.n);
    s.num("amplitude", c.periodic.amplitude);
    s.uint64("seed", c.periodic.seed);
    s.integer("n_modes", c.periodic.n_modes);
    s.integer("kmax", c.periodic.kmax);
    if (const json* ms = s.find("modes")) {
      if (!ms->is_array()) fail("periodic.modes", "expected an array");
      c.periodic.modes.clear();
      for (std::size_t i = 0; i < ms->size(); ++i) {
        const std::string p = "periodic.modes[" + std::to_string(i) + "]";
        Section m((*ms)[i], p);
        FourierMode mode;
        const json* k = m.find("k");
        if (!k || !k->is_array() || k->size() != 3) fail(p + ".k", "expected three integers");
        for (int a = 0; a < 3; ++a) {
          if (!(*k)[a].is_number_integer()) fail(p + ".k", "expected three integers");
          mode.k[a] = (*k)[a].get<int>();
        }
        const json* cf = m.find("coef");
        if (!cf || !cf->is_array() || cf->size() > 4) {
          fail(p + ".coef", "expected up to four [re, im] pairs");
        }
        for (std::size_t q = 0; q < cf->size(); ++q) {
          const json& z = (*cf)[q];
          if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number()) {
            fail(p + ".coef[" + std::to_string(q) + "]", "expected [re, im]");
          }
          mode.coef[q] = {z[0].get<double>(), z[1].get<double>()};
        }
        c.periodic.modes.push_back(mode);
      }
    }
  }
  if (const json* g = root.find("localized")) {
    Section s(*g, "localized");
    if (const json* bs = s.find("bumps")) {
      if (!bs->is_array()) fail("localized.bumps", "expected an array");
      c.localized.spec.bumps.clear();
      for (std::size_t i = 0; i < bs->size(); ++i) {
        Section b((*bs)[i], "localized.bumps[" + std::to_string(i) + "]");
        Bump bump;
        b.integer("component", bump.component);
        b.num("amplitude", bump.amplitude);
        b.num("center", bump.center);
        b.num("width", bump.width);
        b.integer("mode", bump.mode);
        c.localized.spec.bumps.push_back(bump);
      }
    }
    s.boolean("zero_mass_adjust", c.localized.zero_mass_adjust);
    s.num("adjust_center", c.localized.adjust_center);
    s.num("adjust_half_width", c.localized.adjust_half_width);
  }
  if (const json* g = root.find("shift")) {
    Section s(*g, "shift");
    s.num("eps_window", c.shift.eps_window);
  }
  if (const json* g = root.find("solver")) {
    Section s(*g, "solver");
    s.num("dissipation", c.solver.dissipation);
    s.integer("sponge", c.solver.sponge);
  }
  if (const json* g = root.find("time")) {
    Section s(*g, "time");
    s.num("T", c.time.T);
    s.num("cfl", c.time.cfl);
    s.num("output_every", c.time.output_every);
    s.num("snapshot_every", c.time.snapshot_every);
  }
  if (const json* g = root.find("tolerances")) {
    Section s(*g, "tolerances");
    auto& v = c.tolerances.verdict;
    s.num("sharp_r2", v.sharp_r2);
    s.num("energy_r2", v.energy_r2);
    s.num("w1inf_ratio", v.w1inf_ratio);
    s.num("w1inf_reference_time", v.w1inf_reference_time);
    s.num("location_cells", v.location_cells);
    s.num("mass_drift_rate", v.mass_drift_rate);
    s.num("fit_floor", v.fit_floor);
    s.num("fit_t_begin", v.fit_t_begin);
    s.num("zero_mass", c.tolerances.zero_mass);
    s.num("contamination_factor", c.tolerances.contamination_factor);
    s.num("contamination_floor", c.tolerances.contamination_floor);
  }
  if (const json* g = root.find("weights")) {
    Section s(*g, "weights");
    s.num("A1", c.weights.A1);
    s.num("A2", c.weights.A2);
  }
  if (const json* g = root.find("output")) {
    Section s(*g, "output");
    s.str("dir", c.out_dir);
  }
  return c;
}

void apply_override(json& tree, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorKind::Config, "override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json* node = &tree;
  std::stringstream ss(key);
  std::string part, walked;
  while (std::getline(ss, part, '.')) {
    walked = walked.empty() ? part : walked + "." + part;
    if (node->is_object()) {
      auto it = node->find(part);
      if (it == node->end()) fail(walked, "unknown key");
      node = &*it;
    } else if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(part);
      } catch (const std::exception&) {
        fail(walked, "expected an array index");
      }
      if (idx >= node->size()) fail(walked, "index out of range");
      node = &(*node)[idx];
    } else {
      fail(walked, "is a leaf and has no children");
    }
  }
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  *node = value;
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const std::string& path, const std::string& msg) {
    if (!ok) fail(path, msg);
  };
  require(c.gas.gamma > 1.0, "gas.gamma", "must exceed 1");
  require(c.gas.mu > 0.0, "gas.mu", "must be positive");
  require(c.gas.mu + c.gas.lambda >= 0.0, "gas.lambda", "mu + lambda must be nonnegative");
  require(c.rho_plus > 0.0, "shock.rho_plus", "must be positive");
  require(c.rho_minus > c.rho_plus, "shock.rho_minus",
          "must exceed shock.rho_plus (Lax 2-shock orientation)");
  c.grid.validate();
  require(c.profile.eps_tail > 0.0 && c.profile.eps_tail < 1e-3, "profile.eps_tail",
          "must lie in (0, 1e-3)");
  require(c.profile.rtol > 0.0 && c.profile.rtol < 1e-4, "profile.rtol", "must lie in (0, 1e-4)");
  require(c.profile.h >= 0.0, "profile.h", "must be nonnegative (0 selects automatically)");
  require(c.profile.max_extent > 0.0, "profile.max_extent", "must be positive");
  require(c.periodic.n >= 8 && c.periodic.n % 2 == 0, "periodic.n", "must be an even integer >= 8");
  require(c.periodic.amplitude >= 0.0, "periodic.amplitude", "must be nonnegative");
  require(c.periodic.kmax >= 1 && 3 * c.periodic.kmax <= c.periodic.n, "periodic.kmax",
          "must satisfy 1 <= kmax <= n/3");
  require(c.periodic.n_modes >= 0, "periodic.n_modes", "must be nonnegative");
  for (std::size_t i = 0; i < c.periodic.modes.size(); ++i) {
    const auto& m = c.periodic.modes[i];
    const std::string p = "periodic.modes[" + std::to_string(i) + "].k";
    require(m.k != std::array<int, 3>{0, 0, 0}, p, "zero wavevector is not allowed");
    for (int a = 0; a < 3; ++a) {
      require(a < c.grid.d || m.k[a] == 0, p, "has a component beyond the dimension");
      require(3 * std::abs(m.k[a]) <= c.periodic.n, p, "is not resolved by periodic.n");
    }
  }
  validate_localized(c.localized.spec, c.grid);
  require(c.localized.adjust_half_width > 0.0, "localized.adjust_half_width", "must be positive");
  require(std::abs(c.localized.adjust_center) + c.localized.adjust_half_width <= 0.5 * c.grid.L,
          "localized.adjust_center", "bump support must lie inside [-L/2, L/2]");
  require(c.shift.eps_window > 0.0 && c.shift.eps_window < 1e-2, "shift.eps_window",
          "must lie in (0, 1e-2)");
  require(c.solver.dissipation >= 0.0 && c.solver.dissipation <= 1.0, "solver.dissipation",
          "must lie in [0, 1]");
  require(c.solver.sponge >= 1 && 2 * c.solver.sponge + 8 <= c.grid.n_xi, "solver.sponge",
          "must be at least 1 and leave an interior");
  require(c.time.T > 0.0, "time.T", "must be positive");
  require(c.time.cfl > 0.0 && c.time.cfl <= 0.4, "time.cfl", "must lie in (0, 0.4]");
  require(c.time.output_every > 0.0, "time.output_every", "must be positive");
  require(c.time.snapshot_every > 0.0, "time.snapshot_every", "must be positive");
  const auto& v = c.tolerances.verdict;
  require(v.sharp_r2 > 0.0 && v.sharp_r2 <= 1.0, "tolerances.sharp_r2", "must lie in (0, 1]");
  require(v.energy_r2 > 0.0 && v.energy_r2 <= 1.0, "tolerances.energy_r2", "must lie in (0, 1]");
  require(v.w1inf_ratio > 0.0, "tolerances.w1inf_ratio", "must be positive");
  require(v.w1inf_reference_time >= 0.0 && v.w1inf_reference_time <= c.time.T,
          "tolerances.w1inf_reference_time", "must lie in [0, time.T]");
  require(v.location_cells > 0.0, "tolerances.location_cells", "must be positive");
  require(v.mass_drift_rate > 0.0, "tolerances.mass_drift_rate", "must be positive");
  require(v.fit_floor >= 0.0 && v.fit_floor < 1.0, "tolerances.fit_floor", "must lie in [0, 1)");
  require(c.tolerances.zero_mass > 0.0, "tolerances.zero_mass", "must be positive");
  require(c.tolerances.contamination_factor > 0.0, "tolerances.contamination_factor",
          "must be positive");
  require(c.tolerances.contamination_floor >= 0.0, "tolerances.contamination_floor",
          "must be nonnegative");
  require(c.weights.A2 >= 1.0, "weights.A2", "must be at least 1");
  require(c.weights.A1 > c.weights.A2, "weights.A1", "must exceed weights.A2");
  require(!c.out_dir.empty(), "output.dir", "must not be empty");
  // Shock admissibility is checked with the solved triple.
  try {
    const ShockTriple t = solve_shock(c.rho_minus, c.rho_plus, c.gas);
    const auto lax = check_lax(t, c.gas);
    for (double m : lax) require(m > 0.0, "shock", "states do not form a Lax 2-shock");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    fail("shock", e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  json tree = to_json(default_config());
  if (!path.empty()) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorKind::Io, "cannot read config " + path.string());
    json user;
    try {
      user = json::parse(is);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::Config, path.string() + ": " + e.what());
    }
    // Validate keys first, then merge over the defaults.
    (void)from_json(user);
    tree.merge_patch(user);
  }
  for (const auto& o : overrides) apply_override(tree, o);
  RunConfig cfg = from_json(tree);
  validate(cfg);
  return cfg;
}

void save_config(const RunConfig& cfg, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  os << to_json(cfg).dump(2) << '\n';
}

PerturbationSpec periodic_spec(const RunConfig& cfg) {
  if (!cfg.periodic.modes.empty()) {
    PerturbationSpec s;
    s.amplitude = cfg.periodic.amplitude;
    s.modes = cfg.periodic.modes;
    return s;
  }
  return random_perturbation(cfg.periodic.seed, cfg.periodic.n_modes, cfg.grid.d,
                             cfg.periodic.kmax, cfg.periodic.amplitude);
}

}  // namespace shockduct
