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
#include <CLI11.hpp>

#include "nvdnp/cli.hpp"

namespace {

using namespace nvdnp;
using namespace nvdnp::cli;

void add_common(CLI::App* cmd, CommonConfig& c) {
  cmd->add_option("--d-g", c.params.d_g, "Ground zero-field splitting [MHz]");
  cmd->add_option("--d-e", c.params.d_e, "Excited zero-field splitting [MHz]");
  cmd->add_option("--q", c.params.q, "Nuclear quadrupole [MHz]");
  cmd->add_option("--gamma-e", c.params.gamma_e, "Electron gyromagnetic ratio [MHz/G]");
  cmd->add_option("--gamma-n", c.params.gamma_n, "Nuclear gyromagnetic ratio [MHz/G]");
  cmd->add_option("--a-par", c.params.a_par, "Ground longitudinal hyperfine [MHz]");
  cmd->add_option("--a-perp", c.params.a_perp, "Ground transverse hyperfine [MHz]");
  cmd->add_option("--c-par", c.params.c_par, "Excited longitudinal hyperfine [MHz]");
  cmd->add_option("--c-perp", c.params.c_perp, "Excited transverse hyperfine [MHz]");
  cmd->add_option("--strain-e", c.params.strain_e, "Ground strain parameter [MHz]");

  cmd->add_option("--gamma-rad", c.rates.gamma_rad, "Radiative decay rate [MHz]");
  cmd->add_option("--gamma-isc0", c.rates.gamma_isc0, "ISC rate, m_s=0 [MHz]");
  cmd->add_option("--gamma-iscpm", c.rates.gamma_iscpm, "ISC rate, m_s=+-1 [MHz]");
  cmd->add_option("--gamma-s0", c.rates.gamma_s0, "Singlet decay to m_s=0 [MHz]");
  cmd->add_option("--gamma-spm", c.rates.gamma_spm, "Singlet decay to m_s=+-1 [MHz]");
  cmd->add_option("--epsilon", c.rates.epsilon, "Spin non-conserving fraction");
  cmd->add_option("--w", c.rates.w, "Pump parameter W");
  cmd->add_option("--gamma-ion", c.rates.gamma_ion, "Ionization rate [MHz]");
  cmd->add_flag("!--no-pump-leak-mirror", c.rates.pump_mirrors_leakage,
                "Do not mirror the leakage family in the pump");
  cmd->add_flag("!--recombine-ms0-only", c.rates.recombine_equal_split,
                "Recombine into m_s=0 only instead of the equal split");

  cmd->add_option("--workers", c.workers, "Worker thread count")
      ->envname("NVDNP_WORKERS");
  cmd->add_option("--seed", c.seed, "Random seed echoed into the record");
  cmd->add_option("--out", c.out_csv, "Output CSV path");
  cmd->add_option("--json", c.out_json, "Sidecar JSON path (default <out>.json)");
}

void add_time_grid(CLI::App* cmd, TimeGrid& g) {
  cmd->add_option("--t-start", g.start, "First readout time [us]");
  cmd->add_option("--t-stop", g.stop, "Last readout time [us]");
  cmd->add_option("--t-count", g.count, "Number of readout times");
  cmd->add_option("--times", g.explicit_times,
                  "Explicit readout times [us], overrides the uniform grid");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lindblad simulator and estimation toolkit for optical "
               "nuclear-spin polarization of the NV-14N system"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI config file");
  app.set_version_flag("--version", kToolVersion);

  SimulateConfig sim;
  auto* c_sim = app.add_subcommand(
      "simulate", "Polarization build-up trace after the swap sequence");
  add_common(c_sim, sim.common);
  c_sim->add_option("--b", sim.field.b_gauss, "Field magnitude [G]");
  c_sim->add_option("--theta", sim.field.theta_deg, "Field angle [deg]");
  add_time_grid(c_sim, sim.grid);

  SteadyScanConfig sscan;
  sscan.common.out_csv = "steady.csv";
  auto* c_sscan = app.add_subcommand(
      "steady-scan", "Steady-state populations over a (B, theta) grid");
  add_common(c_sscan, sscan.common);
  double b_min = 200.0, b_max = 520.0, b_step = 10.0;
  c_sscan->add_option("--b-min", b_min, "B grid start [G]");
  c_sscan->add_option("--b-max", b_max, "B grid stop [G]");
  c_sscan->add_option("--b-step", b_step, "B grid step [G]");
  c_sscan->add_option("--b-list", sscan.b_grid, "Explicit B values [G]");
  c_sscan
      ->add_option("--thetas", sscan.thetas_deg, "Angle list [deg]")
      ->required();

  FitCperpConfig fit;
  fit.common.out_csv = "cperp_scan.csv";
  auto* c_fit = app.add_subcommand(
      "fit-cperp", "Chi-squared estimation of c_perp from measured traces");
  add_common(c_fit, fit.common);
  c_fit->add_option("files", fit.trace_files, "Trace CSV files")->required();
  c_fit->add_option("--c-min", fit.c_min, "Scan grid start [MHz]");
  c_fit->add_option("--c-max", fit.c_max, "Scan grid stop [MHz]");
  c_fit->add_option("--c-step", fit.c_step, "Coarse scan step [MHz]");
  c_fit->add_option("--refine-step", fit.refine_step, "Refinement step [MHz]");
  c_fit->add_option("--refine-halfwidth", fit.refine_halfwidth,
                    "Refinement half width [MHz]");

  CalibrateConfig cal;
  cal.common.out_csv = "calibration.csv";
  auto* c_cal = app.add_subcommand(
      "calibrate", "Field magnitude and angle from nu+- and steady data");
  add_common(c_cal, cal.common);
  c_cal->add_option("--nu-plus", cal.nu_plus, "m_s=0->+1 transition [MHz]");
  c_cal->add_option("--nu-minus", cal.nu_minus, "m_s=0->-1 transition [MHz]");
  c_cal->add_option("--steady-data", cal.steady_file,
                    "CSV of b_gauss,p_plus1,p_zero steady observations");

  PowerScanConfig pow;
  pow.common.out_csv = "power_scan.csv";
  auto* c_pow = app.add_subcommand(
      "power-scan", "Polarization time constants versus pump parameter W");
  add_common(c_pow, pow.common);
  c_pow->add_option("--b", pow.field.b_gauss, "Field magnitude [G]");
  c_pow->add_option("--theta", pow.field.theta_deg, "Field angle [deg]");
  c_pow->add_option("--w-list", pow.w_grid, "Pump parameter values")->required();
  add_time_grid(c_pow, pow.grid);
  c_pow->add_flag("!--fixed-window", pow.adaptive_window,
                  "Fit on the given window as-is instead of extending it to "
                  "cover the rise");

  IonizationScanConfig ion;
  ion.common.out_csv = "ionization_scan.csv";
  auto* c_ion = app.add_subcommand(
      "ionization-scan",
      "Rise time versus ionization rate on the 24-level model");
  add_common(c_ion, ion.common);
  c_ion->add_option("--theta", ion.theta_deg, "Field angle [deg]");
  c_ion->add_option("--gamma-list", ion.gamma_grid, "Ionization rates [MHz]")
      ->required();
  c_ion->add_option("--b-list", ion.b_grid, "Field magnitudes [G]")->required();
  add_time_grid(c_ion, ion.grid);
  c_ion->add_flag("!--fixed-window", ion.adaptive_window,
                  "Fit on the given window as-is instead of extending it to "
                  "cover the rise");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (c_sscan->parsed() && sscan.b_grid.empty()) {
    if (!(b_step > 0.0) || !(b_max >= b_min)) {
      fprintf(stderr, "error: malformed B grid\n");
      return nvdnp::cli::kExitUsage;
    }
    for (double b = b_min; b <= b_max + 1e-9; b += b_step)
      sscan.b_grid.push_back(b);
  }

  return run_guarded([&] {
    if (c_sim->parsed()) cmd_simulate(sim);
    if (c_sscan->parsed()) cmd_steady_scan(sscan);
    if (c_fit->parsed()) cmd_fit_cperp(fit);
    if (c_cal->parsed()) cmd_calibrate(cal);
    if (c_pow->parsed()) cmd_power_scan(pow);
    if (c_ion->parsed()) cmd_ionization_scan(ion);
  });
}
