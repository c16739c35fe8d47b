/* Copyright 2026 The nvdnp Authors.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "nvdnp/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

#include "nvdnp/parallel.hpp"

namespace nvdnp {

using nlohmann::json;

void to_json(nlohmann::json& j, const SystemParams& p) {
  j = json{{"d_g_mhz", p.d_g},         {"d_e_mhz", p.d_e},
           {"q_mhz", p.q},             {"gamma_e_mhz_per_g", p.gamma_e},
           {"gamma_n_mhz_per_g", p.gamma_n}, {"a_par_mhz", p.a_par},
           {"a_perp_mhz", p.a_perp},   {"c_par_mhz", p.c_par},
           {"c_perp_mhz", p.c_perp},   {"strain_e_mhz", p.strain_e}};
}

void from_json(const nlohmann::json& j, SystemParams& p) {
  j.at("d_g_mhz").get_to(p.d_g);
  j.at("d_e_mhz").get_to(p.d_e);
  j.at("q_mhz").get_to(p.q);
  j.at("gamma_e_mhz_per_g").get_to(p.gamma_e);
  j.at("gamma_n_mhz_per_g").get_to(p.gamma_n);
  j.at("a_par_mhz").get_to(p.a_par);
  j.at("a_perp_mhz").get_to(p.a_perp);
  j.at("c_par_mhz").get_to(p.c_par);
  j.at("c_perp_mhz").get_to(p.c_perp);
  j.at("strain_e_mhz").get_to(p.strain_e);
}

void to_json(nlohmann::json& j, const RateModel& r) {
  j = json{{"gamma_rad_mhz", r.gamma_rad},
           {"gamma_isc0_mhz", r.gamma_isc0},
           {"gamma_iscpm_mhz", r.gamma_iscpm},
           {"gamma_s0_mhz", r.gamma_s0},
           {"gamma_spm_mhz", r.gamma_spm},
           {"epsilon", r.epsilon},
           {"w", r.w},
           {"gamma_ion_mhz", r.gamma_ion},
           {"pump_mirrors_leakage", r.pump_mirrors_leakage},
           {"recombine_equal_split", r.recombine_equal_split}};
}

void from_json(const nlohmann::json& j, RateModel& r) {
  j.at("gamma_rad_mhz").get_to(r.gamma_rad);
  j.at("gamma_isc0_mhz").get_to(r.gamma_isc0);
  j.at("gamma_iscpm_mhz").get_to(r.gamma_iscpm);
  j.at("gamma_s0_mhz").get_to(r.gamma_s0);
  j.at("gamma_spm_mhz").get_to(r.gamma_spm);
  j.at("epsilon").get_to(r.epsilon);
  j.at("w").get_to(r.w);
  j.at("gamma_ion_mhz").get_to(r.gamma_ion);
  j.at("pump_mirrors_leakage").get_to(r.pump_mirrors_leakage);
  j.at("recombine_equal_split").get_to(r.recombine_equal_split);
}

void to_json(nlohmann::json& j, const FieldConfig& f) {
  j = json{{"b_gauss", f.b_gauss}, {"theta_deg", f.theta_deg}};
}

void from_json(const nlohmann::json& j, FieldConfig& f) {
  j.at("b_gauss").get_to(f.b_gauss);
  j.at("theta_deg").get_to(f.theta_deg);
}

}  // namespace nvdnp

namespace nvdnp::cli {

namespace {

using nlohmann::json;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

void write_sidecar(const CommonConfig& common, const std::string& command,
                   const json& config, const json& outputs, double seconds) {
  json record;
  record["command"] = command;
  record["config"] = config;
  record["outputs"] = outputs;
  record["tool_version"] = kToolVersion;
  record["duration_seconds"] = seconds;
  std::ofstream f(common.sidecar_path(), std::ios::binary);
  if (!f)
    throw std::invalid_argument("cannot open for writing: " +
                                common.sidecar_path());
  f << record.dump(2) << "\n";
}

RiseTimeProtocol protocol_from(const TimeGrid& grid, bool adaptive) {
  if (!grid.explicit_times.empty())
    throw std::invalid_argument(
        "rise-time scans use a uniform window (--t-stop/--t-count), not "
        "explicit times");
  RiseTimeProtocol proto;
  proto.count = grid.count;
  proto.initial_stop = grid.stop;
  proto.adaptive = adaptive;
  return proto;
}

}  // namespace

std::vector<double> TimeGrid::materialize() const {
  if (!explicit_times.empty()) return explicit_times;
  if (count < 1) throw std::invalid_argument("time grid needs count >= 1");
  if (!(stop > start) || start < 0.0)
    throw std::invalid_argument("time grid needs 0 <= start < stop");
  std::vector<double> ts(count);
  if (count == 1) {
    ts[0] = start;
    return ts;
  }
  const double dt = (stop - start) / (count - 1);
  for (int i = 0; i < count; ++i) ts[i] = start + i * dt;
  ts.back() = stop;
  return ts;
}

void to_json(json& j, const TimeGrid& g) {
  j = json{{"start_us", g.start},
           {"stop_us", g.stop},
           {"count", g.count},
           {"explicit_times_us", g.explicit_times}};
}

void from_json(const json& j, TimeGrid& g) {
  j.at("start_us").get_to(g.start);
  j.at("stop_us").get_to(g.stop);
  j.at("count").get_to(g.count);
  j.at("explicit_times_us").get_to(g.explicit_times);
}

static void to_json(json& j, const SystemParams& p) {
  j = json{{"d_g_mhz", p.d_g},         {"d_e_mhz", p.d_e},
           {"q_mhz", p.q},             {"gamma_e_mhz_per_g", p.gamma_e},
           {"gamma_n_mhz_per_g", p.gamma_n}, {"a_par_mhz", p.a_par},
           {"a_perp_mhz", p.a_perp},   {"c_par_mhz", p.c_par},
           {"c_perp_mhz", p.c_perp},   {"strain_e_mhz", p.strain_e}};
}

static void from_json(const json& j, SystemParams& p) {
  j.at("d_g_mhz").get_to(p.d_g);
  j.at("d_e_mhz").get_to(p.d_e);
  j.at("q_mhz").get_to(p.q);
  j.at("gamma_e_mhz_per_g").get_to(p.gamma_e);
  j.at("gamma_n_mhz_per_g").get_to(p.gamma_n);
  j.at("a_par_mhz").get_to(p.a_par);
  j.at("a_perp_mhz").get_to(p.a_perp);
  j.at("c_par_mhz").get_to(p.c_par);
  j.at("c_perp_mhz").get_to(p.c_perp);
  j.at("strain_e_mhz").get_to(p.strain_e);
}

static void to_json(json& j, const RateModel& r) {
  j = json{{"gamma_rad_mhz", r.gamma_rad},
           {"gamma_isc0_mhz", r.gamma_isc0},
           {"gamma_iscpm_mhz", r.gamma_iscpm},
           {"gamma_s0_mhz", r.gamma_s0},
           {"gamma_spm_mhz", r.gamma_spm},
           {"epsilon", r.epsilon},
           {"w", r.w},
           {"gamma_ion_mhz", r.gamma_ion},
           {"pump_mirrors_leakage", r.pump_mirrors_leakage},
           {"recombine_equal_split", r.recombine_equal_split}};
}

static void from_json(const json& j, RateModel& r) {
  j.at("gamma_rad_mhz").get_to(r.gamma_rad);
  j.at("gamma_isc0_mhz").get_to(r.gamma_isc0);
  j.at("gamma_iscpm_mhz").get_to(r.gamma_iscpm);
  j.at("gamma_s0_mhz").get_to(r.gamma_s0);
  j.at("gamma_spm_mhz").get_to(r.gamma_spm);
  j.at("epsilon").get_to(r.epsilon);
  j.at("w").get_to(r.w);
  j.at("gamma_ion_mhz").get_to(r.gamma_ion);
  j.at("pump_mirrors_leakage").get_to(r.pump_mirrors_leakage);
  j.at("recombine_equal_split").get_to(r.recombine_equal_split);
}

static void to_json(json& j, const FieldConfig& f) {
  j = json{{"b_gauss", f.b_gauss}, {"theta_deg", f.theta_deg}};
}

static void from_json(const json& j, FieldConfig& f) {
  j.at("b_gauss").get_to(f.b_gauss);
  j.at("theta_deg").get_to(f.theta_deg);
}

void to_json(json& j, const CommonConfig& c) {
  j = json{{"params", c.params},   {"rates", c.rates}, {"workers", c.workers},
           {"seed", c.seed},       {"out_csv", c.out_csv},
           {"out_json", c.out_json}};
}

void from_json(const json& j, CommonConfig& c) {
  j.at("params").get_to(c.params);
  j.at("rates").get_to(c.rates);
  j.at("workers").get_to(c.workers);
  j.at("seed").get_to(c.seed);
  j.at("out_csv").get_to(c.out_csv);
  j.at("out_json").get_to(c.out_json);
}

void to_json(json& j, const SimulateConfig& c) {
  j = json{{"common", c.common}, {"field", c.field}, {"grid", c.grid}};
}
void from_json(const json& j, SimulateConfig& c) {
  j.at("common").get_to(c.common);
  j.at("field").get_to(c.field);
  j.at("grid").get_to(c.grid);
}

void to_json(json& j, const SteadyScanConfig& c) {
  j = json{{"common", c.common},
           {"b_grid_gauss", c.b_grid},
           {"thetas_deg", c.thetas_deg}};
}
void from_json(const json& j, SteadyScanConfig& c) {
  j.at("common").get_to(c.common);
  j.at("b_grid_gauss").get_to(c.b_grid);
  j.at("thetas_deg").get_to(c.thetas_deg);
}

void to_json(json& j, const FitCperpConfig& c) {
  j = json{{"common", c.common},
           {"trace_files", c.trace_files},
           {"c_min_mhz", c.c_min},
           {"c_max_mhz", c.c_max},
           {"c_step_mhz", c.c_step},
           {"refine_step_mhz", c.refine_step},
           {"refine_halfwidth_mhz", c.refine_halfwidth}};
}
void from_json(const json& j, FitCperpConfig& c) {
  j.at("common").get_to(c.common);
  j.at("trace_files").get_to(c.trace_files);
  j.at("c_min_mhz").get_to(c.c_min);
  j.at("c_max_mhz").get_to(c.c_max);
  j.at("c_step_mhz").get_to(c.c_step);
  j.at("refine_step_mhz").get_to(c.refine_step);
  j.at("refine_halfwidth_mhz").get_to(c.refine_halfwidth);
}

void to_json(json& j, const CalibrateConfig& c) {
  j = json{{"common", c.common},
           {"nu_plus_mhz", c.nu_plus},
           {"nu_minus_mhz", c.nu_minus},
           {"steady_file", c.steady_file}};
}
void from_json(const json& j, CalibrateConfig& c) {
  j.at("common").get_to(c.common);
  j.at("nu_plus_mhz").get_to(c.nu_plus);
  j.at("nu_minus_mhz").get_to(c.nu_minus);
  j.at("steady_file").get_to(c.steady_file);
}

void to_json(json& j, const PowerScanConfig& c) {
  j = json{{"common", c.common},
           {"field", c.field},
           {"w_grid", c.w_grid},
           {"grid", c.grid},
           {"adaptive_window", c.adaptive_window}};
}
void from_json(const json& j, PowerScanConfig& c) {
  j.at("common").get_to(c.common);
  j.at("field").get_to(c.field);
  j.at("w_grid").get_to(c.w_grid);
  j.at("grid").get_to(c.grid);
  j.at("adaptive_window").get_to(c.adaptive_window);
}

void to_json(json& j, const IonizationScanConfig& c) {
  j = json{{"common", c.common},
           {"theta_deg", c.theta_deg},
           {"gamma_grid_mhz", c.gamma_grid},
           {"b_grid_gauss", c.b_grid},
           {"grid", c.grid},
           {"adaptive_window", c.adaptive_window}};
}
void from_json(const json& j, IonizationScanConfig& c) {
  j.at("common").get_to(c.common);
  j.at("theta_deg").get_to(c.theta_deg);
  j.at("gamma_grid_mhz").get_to(c.gamma_grid);
  j.at("b_grid_gauss").get_to(c.b_grid);
  j.at("grid").get_to(c.grid);
  j.at("adaptive_window").get_to(c.adaptive_window);
}

void cmd_simulate(const SimulateConfig& cfg) {
  Stopwatch clock;
  const std::vector<double> ts = cfg.grid.materialize();
  const PolarizationTrace trace =
      dnp_sequence(cfg.common.params, cfg.field, cfg.common.rates, ts);

  CsvTable t;
  t.header = {"t_us", "p_plus1", "p_zero", "p_minus1"};
  for (size_t i = 0; i < trace.times.size(); ++i)
    t.rows.push_back(
        {trace.times[i], trace.p_plus1[i], trace.p_zero[i], trace.p_minus1[i]});
  write_csv(cfg.common.out_csv, t);

  json outputs{{"csv", cfg.common.out_csv},
               {"rows", trace.times.size()},
               {"p_plus1_final", trace.p_plus1.back()}};
  write_sidecar(cfg.common, "simulate", json(cfg), outputs, clock.seconds());
}

void cmd_steady_scan(const SteadyScanConfig& cfg) {
  Stopwatch clock;
  if (cfg.b_grid.empty() || cfg.thetas_deg.empty())
    throw std::invalid_argument("steady-scan needs a B grid and a theta list");

  struct Task {
    double theta, b;
  };
  std::vector<Task> tasks;
  for (double theta : cfg.thetas_deg)
    for (double b : cfg.b_grid) tasks.push_back({theta, b});
  std::sort(tasks.begin(), tasks.end(), [](const Task& x, const Task& y) {
    return x.theta != y.theta ? x.theta < y.theta : x.b < y.b;
  });

  std::vector<std::array<double, 3>> results(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), cfg.common.workers, [&](int i) {
    const FieldConfig f{tasks[i].b, tasks[i].theta};
    const HamiltonianSet h = build_hamiltonian(cfg.common.params, f);
    const DensityState ss =
        steady_state(assemble_liouvillian(h, build_jumps(cfg.common.rates)));
    results[i] = populations(ss);
  });

  CsvTable t;
  t.header = {"b_gauss", "theta_deg", "p_plus1", "p_zero", "p_minus1"};
  for (size_t i = 0; i < tasks.size(); ++i)
    t.rows.push_back({tasks[i].b, tasks[i].theta, results[i][0], results[i][1],
                      results[i][2]});
  write_csv(cfg.common.out_csv, t);

  json outputs{{"csv", cfg.common.out_csv}, {"rows", tasks.size()}};
  write_sidecar(cfg.common, "steady-scan", json(cfg), outputs, clock.seconds());
}

void cmd_fit_cperp(const FitCperpConfig& cfg) {
  Stopwatch clock;
  if (cfg.trace_files.empty())
    throw std::invalid_argument("fit-cperp needs at least one trace file");
  if (!(cfg.c_step > 0.0) || !(cfg.c_max > cfg.c_min))
    throw std::invalid_argument("fit-cperp: malformed scan grid");

  auto make_grid = [](double lo, double hi, double step) {
    std::vector<double> g;
    for (double c = lo; c <= hi + 1e-9; c += step) g.push_back(c);
    return g;
  };

  std::vector<ScanResult> scans;
  json scan_report = json::array();
  for (const std::string& file : cfg.trace_files) {
    const ExperimentTrace trace = read_trace_csv(file);
    for (NuclearComponent comp :
         {NuclearComponent::PlusOne, NuclearComponent::Zero}) {
      ScanResult coarse =
          chi2_scan(trace, cfg.common.params, cfg.common.rates,
                    make_grid(cfg.c_min, cfg.c_max, cfg.c_step), comp,
                    cfg.common.workers);
      // refine around the coarse minimum, then merge the point sets
      const ScanMinimum coarse_min = locate_scan_minimum(coarse);
      const ScanResult fine =
          chi2_scan(trace, cfg.common.params, cfg.common.rates,
                    make_grid(coarse_min.c_perp - cfg.refine_halfwidth,
                              coarse_min.c_perp + cfg.refine_halfwidth,
                              cfg.refine_step),
                    comp, cfg.common.workers);
      for (const ScanPoint& p : fine.points) coarse.points.push_back(p);
      std::sort(coarse.points.begin(), coarse.points.end(),
                [](const ScanPoint& a, const ScanPoint& b) {
                  return a.c_perp < b.c_perp;
                });
      json entry{{"file", file},
                 {"component", to_string(comp)},
                 {"b_gauss", trace.field.b_gauss},
                 {"theta_deg", trace.field.theta_deg}};
      scan_report.push_back(entry);
      scans.push_back(std::move(coarse));
    }
  }

  const CperpEstimate est = estimate_cperp(std::move(scans));

  CsvTable t;
  t.header = {"scan", "c_perp_mhz", "chi2"};
  for (size_t s = 0; s < est.scans.size(); ++s)
    for (const ScanPoint& p : est.scans[s].points)
      if (p.ok) t.rows.push_back({static_cast<double>(s), p.c_perp, p.chi2});
  write_csv(cfg.common.out_csv, t);

  for (size_t s = 0; s < est.minima.size(); ++s) {
    scan_report[s]["c_perp_best_mhz"] = est.minima[s].c_perp;
    scan_report[s]["width_mhz"] = est.minima[s].width;
    scan_report[s]["chi2_min"] = est.minima[s].chi2_min;
  }
  json outputs{{"csv", cfg.common.out_csv},
               {"scans", scan_report},
               {"c_perp_best_mhz", est.c_perp_best},
               {"uncertainty_mhz", est.uncertainty}};
  write_sidecar(cfg.common, "fit-cperp", json(cfg), outputs, clock.seconds());
  printf("c_perp = %s +- %s MHz (%zu scans)\n",
         format_double(est.c_perp_best).c_str(),
         format_double(est.uncertainty).c_str(), est.minima.size());
}

void cmd_calibrate(const CalibrateConfig& cfg) {
  Stopwatch clock;
  const bool have_nu = cfg.nu_plus != 0.0 || cfg.nu_minus != 0.0;
  const bool have_steady = !cfg.steady_file.empty();
  if (!have_nu && !have_steady)
    throw std::invalid_argument(
        "calibrate needs --nu-plus/--nu-minus and/or --steady-data");

  json outputs;
  double theta_stage1 = -1.0;
  if (have_nu) {
    const FieldConfig stage1 =
        calibrate_field(cfg.nu_plus, cfg.nu_minus, cfg.common.params);
    theta_stage1 = stage1.theta_deg;
    outputs["stage1"] = {{"b_gauss", stage1.b_gauss},
                         {"theta_deg", stage1.theta_deg}};
  }

  std::string theta_source = "transition frequencies";
  if (have_steady) {
    const std::vector<SteadyDatum> data = read_steady_csv(cfg.steady_file);
    const double theta =
        calibrate_angle(data, cfg.common.params, cfg.common.rates);
    outputs["stage2"] = {{"theta_deg", theta}};
    theta_source = "steady-state refinement";
  }
  outputs["theta_source"] = theta_source;

  // the sidecar is the report here; no CSV payload
  CsvTable t;
  t.header = {"b_gauss", "theta_deg"};
  if (have_nu)
    t.rows.push_back({outputs["stage1"]["b_gauss"].get<double>(),
                      have_steady ? outputs["stage2"]["theta_deg"].get<double>()
                                  : theta_stage1});
  else
    t.rows.push_back({0.0, outputs["stage2"]["theta_deg"].get<double>()});
  write_csv(cfg.common.out_csv, t);
  write_sidecar(cfg.common, "calibrate", json(cfg), outputs, clock.seconds());
}

void cmd_power_scan(const PowerScanConfig& cfg) {
  Stopwatch clock;
  if (cfg.w_grid.empty())
    throw std::invalid_argument("power-scan needs a W grid");
  for (double w : cfg.w_grid)
    if (!(w > 0.0))
      throw std::invalid_argument("power-scan W values must be positive");

  const RiseTimeProtocol proto = protocol_from(cfg.grid, cfg.adaptive_window);
  std::vector<RiseTimes> taus(cfg.w_grid.size());
  parallel_for(static_cast<int>(cfg.w_grid.size()), cfg.common.workers,
               [&](int i) {
                 RateModel r = cfg.common.rates;
                 r.w = cfg.w_grid[i];
                 taus[i] = fitted_rise_times(cfg.common.params, cfg.field, r, proto);
               });

  CsvTable t;
  t.header = {"w", "tau_plus1_us", "tau_zero_us", "tau_minus1_us"};
  json windows = json::array();
  for (size_t i = 0; i < cfg.w_grid.size(); ++i) {
    t.rows.push_back(
        {cfg.w_grid[i], taus[i].tau_plus1, taus[i].tau_zero, taus[i].tau_minus1});
    windows.push_back(taus[i].window);
  }
  write_csv(cfg.common.out_csv, t);

  json outputs{{"csv", cfg.common.out_csv},
               {"rows", cfg.w_grid.size()},
               {"fit_windows_us", windows}};
  write_sidecar(cfg.common, "power-scan", json(cfg), outputs, clock.seconds());
}

void cmd_ionization_scan(const IonizationScanConfig& cfg) {
  Stopwatch clock;
  if (cfg.gamma_grid.empty() || cfg.b_grid.empty())
    throw std::invalid_argument("ionization-scan needs gamma and B grids");
  for (double g : cfg.gamma_grid)
    if (!(g >= 0.0))
      throw std::invalid_argument("ionization rates must be >= 0");

  const RiseTimeProtocol proto = protocol_from(cfg.grid, cfg.adaptive_window);
  struct Task {
    double b, gamma;
  };
  std::vector<Task> tasks;
  for (double b : cfg.b_grid)
    for (double g : cfg.gamma_grid) tasks.push_back({b, g});

  std::vector<double> tau1(tasks.size());
  parallel_for(static_cast<int>(tasks.size()), cfg.common.workers, [&](int i) {
    RateModel r = cfg.common.rates;
    r.gamma_ion = tasks[i].gamma;
    const FieldConfig f{tasks[i].b, cfg.theta_deg};
    // run the 24-level space also for gamma_ion = 0 (baseline row)
    tau1[i] = fitted_rise_times(cfg.common.params, f, r, proto, true).tau_plus1;
  });

  CsvTable t;
  t.header = {"gamma_ion_mhz", "b_gauss", "tau_plus1_us"};
  for (size_t i = 0; i < tasks.size(); ++i)
    t.rows.push_back({tasks[i].gamma, tasks[i].b, tau1[i]});
  write_csv(cfg.common.out_csv, t);

  json outputs{{"csv", cfg.common.out_csv}, {"rows", tasks.size()}};
  write_sidecar(cfg.common, "ionization-scan", json(cfg), outputs,
                clock.seconds());
}

}  // namespace nvdnp::cli
