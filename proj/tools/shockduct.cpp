#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "shockduct/config.hpp"
#include "shockduct/error.hpp"
#include "shockduct/simulation.hpp"
#include "shockduct/snapshot.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace shockduct;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  long long seed = -1;
};

RunConfig make_config(const Common& o) {
  std::vector<std::string> sets = o.sets;
  if (!o.out.empty()) sets.push_back("output.dir=\"" + o.out + "\"");
  if (o.seed >= 0) sets.push_back("periodic.seed=" + std::to_string(o.seed));
  RunConfig cfg = load_config(o.config, sets);
  fs::create_directories(cfg.out_dir);
  save_config(cfg, fs::path(cfg.out_dir) / "config.json");
  return cfg;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write " + path.string());
  os << j.dump(2) << '\n';
}

json fit_json(const ExponentialFit& f) {
  return {{"rate", f.rate}, {"amplitude", f.amplitude}, {"r2", f.r2}, {"used", f.used},
          {"ok", f.ok}};
}

int cmd_profile(const Common& o, const std::vector<double>& deltas) {
  const RunConfig cfg = make_config(o);
  const fs::path out(cfg.out_dir);
  std::vector<double> ds = deltas;
  if (ds.empty()) ds.push_back(cfg.rho_minus - cfg.rho_plus);
  json rep = json::array();
  for (double delta : ds) {
    const ShockTriple tr = solve_shock(cfg.rho_minus, cfg.rho_minus - delta, cfg.gas);
    const Profile p = solve_profile(tr, cfg.gas, cfg.profile);
    const TailRates r = tail_rates(p);
    std::ostringstream name;
    name << "profile";
    if (deltas.size() > 0) name << "_delta_" << delta;
    name << ".csv";
    write_profile_csv(p, out / name.str());
    const AlphaProfile a = alpha_coefficient(p);
    rep.push_back({{"delta", delta},
                   {"s", tr.s},
                   {"file", name.str()},
                   {"points", p.size()},
                   {"h", p.h},
                   {"xi_min", p.xi_min()},
                   {"xi_max", p.xi_max()},
                   {"eta_prime_integral", eta_prime_integral(p)},
                   {"lin_rate_minus", p.lin_rate_minus},
                   {"lin_rate_plus", p.lin_rate_plus},
                   {"fit_rate_minus", r.rate_minus},
                   {"fit_rate_plus", r.rate_plus},
                   {"fit_r2", r.r2},
                   {"alpha_margin", a.margin}});
    std::printf("delta %.4g: s = %.6f, %zu points, tail rates %.4f / %.4f (fit r2 %.4f)\n",
                delta, tr.s, p.size(), r.rate_minus, r.rate_plus, r.r2);
  }
  write_json(out / "profile_report.json", rep);
  return 0;
}

int cmd_periodic(const Common& o) {
  const RunConfig cfg = make_config(o);
  const fs::path out(cfg.out_dir);
  const ShockTriple tr = solve_shock(cfg.rho_minus, cfg.rho_plus, cfg.gas);
  const int d = cfg.grid.d, n = cfg.periodic.n;
  const PerturbationSpec spec = periodic_spec(cfg);
  PeriodicState bg[2] = {init_periodic(tr.rho_minus, {tr.m1_minus(), 0, 0}, spec, d, n),
                         init_periodic(tr.rho_plus, {tr.m1_plus(), 0, 0}, spec, d, n)};
  PeriodicSolver solver(cfg.gas, d, n);
  double dt = std::min(solver.stable_dt(bg[0], cfg.time.cfl), solver.stable_dt(bg[1], cfg.time.cfl));
  const auto steps = static_cast<long long>(std::ceil(cfg.time.T / dt));
  dt = cfg.time.T / static_cast<double>(steps);
  const auto every = std::max(1LL, std::llround(cfg.time.output_every / dt));
  const auto m0 = field_means(bg[0]), p0 = field_means(bg[1]);

  std::ofstream csv(out / "periodic.csv");
  csv << std::setprecision(17) << "t,sup_minus,sup_plus,mean_drift\n";
  std::vector<double> ts, sup;
  double drift = 0.0;
  auto record = [&] {
    const auto m = field_means(bg[0]), p = field_means(bg[1]);
    double dr = 0.0;
    for (std::size_t c = 0; c < m.size(); ++c) {
      dr = std::max({dr, std::abs(m[c] - m0[c]), std::abs(p[c] - p0[c])});
    }
    if (bg[0].t >= 1.0) drift = std::max(drift, dr / bg[0].t);
    const double a = perturbation_sup(bg[0]), b = perturbation_sup(bg[1]);
    csv << bg[0].t << ',' << a << ',' << b << ',' << dr << '\n';
    ts.push_back(bg[0].t);
    sup.push_back(std::max(a, b));
  };
  record();
  for (long long k = 1; k <= steps; ++k) {
    solver.step(bg[0], dt);
    solver.step(bg[1], dt);
    if (k % every == 0 || k == steps) record();
  }
  FitWindow w;
  w.floor = cfg.tolerances.verdict.fit_floor * sup.front();
  const ExponentialFit fit = measure_decay(ts, sup, w);
  write_snapshot(out / "periodic_minus.shkd", to_snapshot(bg[0]));
  write_snapshot(out / "periodic_plus.shkd", to_snapshot(bg[1]));
  write_json(out / "periodic_report.json",
             {{"dt", dt}, {"steps", steps}, {"mean_drift_rate", drift}, {"decay", fit_json(fit)}});
  std::printf("decay rate %.4f (r2 %.4f), mean drift %.3e per unit time\n", fit.rate, fit.r2,
              drift);
  return 0;
}

int cmd_shift(const Common& o) {
  const RunConfig cfg = make_config(o);
  const fs::path out(cfg.out_dir);
  const ShockTriple tr = solve_shock(cfg.rho_minus, cfg.rho_plus, cfg.gas);
  const Profile prof = solve_profile(tr, cfg.gas, cfg.profile);
  const int d = cfg.grid.d, n = cfg.periodic.n;
  const PerturbationSpec spec = periodic_spec(cfg);
  PeriodicState mi = init_periodic(tr.rho_minus, {tr.m1_minus(), 0, 0}, spec, d, n);
  PeriodicState pl = init_periodic(tr.rho_plus, {tr.m1_plus(), 0, 0}, spec, d, n);
  PeriodicSolver solver(cfg.gas, d, n);
  double dt = std::min(solver.stable_dt(mi, cfg.time.cfl), solver.stable_dt(pl, cfg.time.cfl));
  const auto steps = static_cast<long long>(std::ceil(cfg.time.T / dt));
  dt = cfg.time.T / static_cast<double>(steps);
  const auto loc = sample_localized(cfg.localized.spec, cfg.grid);
  const auto [X0, Y0] = initial_shifts(cfg.grid, loc[0], loc[1], tr);
  const int every = static_cast<int>(std::max(1LL, std::llround(cfg.time.output_every / dt)));
  const ShiftRun run = integrate_shifts(X0, Y0, mi, pl, prof, cfg.time.T, dt, every, cfg.shift);
  const ShiftCurves& c = run.curves;
  std::ofstream csv(out / "shifts.csv");
  csv << std::setprecision(17) << "t,X,Y,Xp,Yp\n";
  for (std::size_t i = 0; i < c.t.size(); ++i) {
    csv << c.t[i] << ',' << c.X[i] << ',' << c.Y[i] << ',' << c.Xp[i] << ',' << c.Yp[i] << '\n';
  }
  write_json(out / "shift_report.json",
             {{"X0", c.X0},
              {"Y0", c.Y0},
              {"X_T", c.X_inf},
              {"Y_T", c.Y_inf},
              {"Y_inf_p", c.Y_inf_p},
              {"Y_inf_p_tail", run.yinf.tail},
              {"speed_fit", fit_json(c.speed_fit)},
              {"background_fit", fit_json(run.bg_fit)}});
  std::printf("X(T) - X0 = %.3e, Y(T) - Y0 = %.6e, Y_inf_p = %.6e\n", c.X_inf - c.X0,
              c.Y_inf - c.Y0, c.Y_inf_p);
  return 0;
}

void print_verdict(const VerdictReport& r) {
  for (const auto& v : r.verdicts) {
    std::printf("%-4s %-28s value %-12.4g threshold %-12.4g %s\n", v.pass ? "PASS" : "FAIL",
                v.claim.c_str(), v.value, v.threshold, v.detail.c_str());
  }
}

int cmd_simulate(const Common& o, const std::string& restart) {
  RunOptions opts;
  RunConfig cfg;
  if (restart.empty()) {
    cfg = make_config(o);
  } else {
    opts.restart = restart;
  }
  opts.on_sample = [](const Simulation& sim, const DiagnosticsSample& s) {
    std::printf("t %8.3f  sharp Linf %.3e  E %.3e  X %.6f  Y %.6f\n", s.t, s.sharp.linf,
                s.energy, s.X, s.Y);
    (void)sim;
    std::fflush(stdout);
  };
  const RunResult res = run_simulation(cfg, opts);
  print_verdict(res.verdict);
  return res.verdict.all_pass() ? 0 : 1;
}

/// Re-evaluates the verdicts from a finished run directory.
int cmd_verify(const Common& o, const std::vector<std::string>& dirs) {
  std::vector<std::string> targets = dirs;
  if (targets.empty()) targets.push_back(o.out.empty() ? "out" : o.out);
  bool all = true;
  for (const auto& dir : targets) {
    const fs::path p(dir);
    std::ifstream is(p / "report.json");
    if (!is) throw Error(ErrorKind::Io, "missing " + (p / "report.json").string());
    const json rep = json::parse(is);
    const RunConfig cfg = from_json(rep.at("config"));
    DiagnosticsSeries series = read_series_csv(p / "series.csv");
    const json& sh = rep.at("shifts");
    series.X0 = sh.at("X0").get<double>();
    series.Y0 = sh.at("Y0").get<double>();
    series.X_inf = sh.at("X_inf").get<double>();
    series.Y_inf = sh.at("Y_inf").get<double>();
    series.Y_inf_p = sh.at("Y_inf_p").get<double>();
    series.dxi = cfg.grid.dxi();
    series.rho_bar_minus = rep.at("shock").at("rho_minus").get<double>();
    series.rho_bar_plus = rep.at("shock").at("rho_plus").get<double>();

    // The final location is re-measured from the last stored snapshot.
    fs::path last;
    for (const auto& e : fs::directory_iterator(p)) {
      const auto name = e.path().filename().string();
      if (name.rfind("snap_", 0) == 0 && e.path().extension() == ".json" &&
          (last.empty() || e.path().filename() > last.filename())) {
        last = e.path();
      }
    }
    if (last.empty()) throw Error(ErrorKind::Io, "no snapshots in " + p.string());
    std::ifstream ms(last);
    const json man = json::parse(ms);
    if (man.value("version", 0u) != kSnapshotVersion) {
      throw Error(ErrorKind::Io, last.string() + ": snapshot version mismatch");
    }
    const DuctState st = duct_from_snapshot(
        read_snapshot(p / man.at("duct").get<std::string>()), man.at("step").get<std::int64_t>());
    const ShockTriple tr = solve_shock(cfg.rho_minus, cfg.rho_plus, cfg.gas);
    if (!series.samples.empty() && std::abs(series.samples.back().t - st.t) < 1e-9) {
      try {
        series.samples.back().location = shock_location(st, tr);
        series.samples.back().location_ok = true;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::MultiCrossing) throw;
        series.samples.back().location_ok = false;
      }
    }
    const VerdictReport r = theorem_verdict(series, cfg.tolerances.verdict);
    std::printf("%s\n", p.string().c_str());
    print_verdict(r);
    all = all && r.all_pass();
  }
  return all ? 0 : 1;
}

int cmd_report(const Common& o, const std::vector<std::string>& dirs) {
  std::vector<std::string> targets = dirs;
  if (targets.empty()) targets.push_back(o.out.empty() ? "out" : o.out);
  for (const auto& dir : targets) {
    std::ifstream is(fs::path(dir) / "report.json");
    if (!is) throw Error(ErrorKind::Io, "missing report.json in " + dir);
    const json rep = json::parse(is);
    const json& sh = rep.at("shifts");
    std::printf("%s\n", dir.c_str());
    std::printf("  X0 %.6g  X_inf %.6g  Y_inf %.6g  Y_inf_p %.6g\n", sh.at("X0").get<double>(),
                sh.at("X_inf").get<double>(), sh.at("Y_inf").get<double>(),
                sh.at("Y_inf_p").get<double>());
    for (const auto& v : rep.at("verdict").at("verdicts")) {
      std::printf("  %-4s %-28s %.4g (threshold %.4g)\n", v.at("pass").get<bool>() ? "PASS" : "FAIL",
                  v.at("claim").get<std::string>().c_str(), v.at("value").get<double>(),
                  v.at("threshold").get<double>());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Planar viscous shock stability in a periodic duct"};
  app.require_subcommand(1);
  Common o;
  auto add_common = [&](CLI::App* c) {
    c->add_option("--config", o.config, "Run configuration (JSON)");
    c->add_option("--set", o.sets, "Override a config leaf, key.path=value")->take_all();
    c->add_option("--out", o.out, "Output directory");
    c->add_option("--seed", o.seed, "Seed of the periodic perturbation");
  };
  std::vector<double> deltas;
  std::string restart;
  std::vector<std::string> dirs;

  auto* prof = app.add_subcommand("profile", "Solve the viscous profile");
  add_common(prof);
  prof->add_option("--deltas", deltas, "Shock strengths to sweep (rho_plus = rho_minus - delta)")
      ->delimiter(',');
  auto* per = app.add_subcommand("periodic", "Evolve the periodic backgrounds");
  add_common(per);
  auto* sh = app.add_subcommand("shift", "Integrate the shift curves");
  add_common(sh);
  auto* sim = app.add_subcommand("simulate", "Full duct run with diagnostics");
  add_common(sim);
  sim->add_option("--restart", restart, "Checkpoint manifest to resume from");
  auto* ver = app.add_subcommand("verify", "Re-evaluate verdicts of finished runs");
  add_common(ver);
  ver->add_option("dirs", dirs, "Run directories");
  auto* rep = app.add_subcommand("report", "Summarize finished runs");
  add_common(rep);
  rep->add_option("dirs", dirs, "Run directories");

  CLI11_PARSE(app, argc, argv);
  configure_threads();
  try {
    if (*prof) return cmd_profile(o, deltas);
    if (*per) return cmd_periodic(o);
    if (*sh) return cmd_shift(o);
    if (*sim) return cmd_simulate(o, restart);
    if (*ver) return cmd_verify(o, dirs);
    if (*rep) return cmd_report(o, dirs);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
