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
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "nvdnp/csv.hpp"
#include "nvdnp/estimation.hpp"

namespace nvdnp {

// Serialization of the core parameter bundles (ADL hooks for nlohmann).
void to_json(nlohmann::json& j, const SystemParams& p);
void from_json(const nlohmann::json& j, SystemParams& p);
void to_json(nlohmann::json& j, const RateModel& r);
void from_json(const nlohmann::json& j, RateModel& r);
void to_json(nlohmann::json& j, const FieldConfig& f);
void from_json(const nlohmann::json& j, FieldConfig& f);

}  // namespace nvdnp

namespace nvdnp::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// exit codes: 0 success, 2 usage/config error, 3 numerical invariant failure
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Uniform time grid unless explicit times are given.
struct TimeGrid {
  TimeGrid() = default;
  TimeGrid(double start_us, double stop_us, int n)
      : start(start_us), stop(stop_us), count(n) {}

  double start = 0.0;
  double stop = 20.0;
  int count = 51;
  std::vector<double> explicit_times;

  std::vector<double> materialize() const;
};

/// Options shared by every command: model overrides, worker count, seed and
/// output paths. The JSON sidecar defaults to "<out_csv>.json".
struct CommonConfig {
  SystemParams params;
  RateModel rates;
  int workers = 1;
  std::uint64_t seed = 1;
  std::string out_csv = "out.csv";
  std::string out_json;

  std::string sidecar_path() const {
    return out_json.empty() ? out_csv + ".json" : out_json;
  }
};

struct SimulateConfig {
  CommonConfig common;
  FieldConfig field{348.0, 1.5};
  TimeGrid grid;
};

struct SteadyScanConfig {
  CommonConfig common;
  std::vector<double> b_grid;
  std::vector<double> thetas_deg;
};

struct FitCperpConfig {
  CommonConfig common;
  std::vector<std::string> trace_files;
  double c_min = -45.0;
  double c_max = -5.0;
  double c_step = 1.0;
  double refine_step = 0.25;
  double refine_halfwidth = 3.0;
};

struct CalibrateConfig {
  CommonConfig common;
  double nu_plus = 0.0;   // MHz; 0 means not given
  double nu_minus = 0.0;
  std::string steady_file;
};

struct PowerScanConfig {
  CommonConfig common;
  FieldConfig field{249.0, 2.1};
  std::vector<double> w_grid;
  TimeGrid grid{0.0, 30.0, 61};
  bool adaptive_window = true;
};

struct IonizationScanConfig {
  CommonConfig common;
  double theta_deg = 1.0;
  std::vector<double> gamma_grid;
  std::vector<double> b_grid;
  TimeGrid grid{0.0, 100.0, 101};
  bool adaptive_window = true;
};

// Config echo / replay serialization.
void to_json(nlohmann::json& j, const TimeGrid& g);
void from_json(const nlohmann::json& j, TimeGrid& g);
void to_json(nlohmann::json& j, const CommonConfig& c);
void from_json(const nlohmann::json& j, CommonConfig& c);
void to_json(nlohmann::json& j, const SimulateConfig& c);
void from_json(const nlohmann::json& j, SimulateConfig& c);
void to_json(nlohmann::json& j, const SteadyScanConfig& c);
void from_json(const nlohmann::json& j, SteadyScanConfig& c);
void to_json(nlohmann::json& j, const FitCperpConfig& c);
void from_json(const nlohmann::json& j, FitCperpConfig& c);
void to_json(nlohmann::json& j, const CalibrateConfig& c);
void from_json(const nlohmann::json& j, CalibrateConfig& c);
void to_json(nlohmann::json& j, const PowerScanConfig& c);
void from_json(const nlohmann::json& j, PowerScanConfig& c);
void to_json(nlohmann::json& j, const IonizationScanConfig& c);
void from_json(const nlohmann::json& j, IonizationScanConfig& c);

/// Each command writes its CSV output plus a JSON ResultRecord sidecar
/// (command name, resolved config, outputs, tool version, wall time) and
/// throws std::invalid_argument / std::domain_error on bad configuration or
/// std::runtime_error on numerical invariant failures.
void cmd_simulate(const SimulateConfig& cfg);
void cmd_steady_scan(const SteadyScanConfig& cfg);
void cmd_fit_cperp(const FitCperpConfig& cfg);
void cmd_calibrate(const CalibrateConfig& cfg);
void cmd_power_scan(const PowerScanConfig& cfg);
void cmd_ionization_scan(const IonizationScanConfig& cfg);

/// Maps exceptions onto the documented process exit codes.
template <typename Fn>
int run_guarded(Fn&& fn) {
  try {
    fn();
    return 0;
  } catch (const std::invalid_argument& e) {
    fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::domain_error& e) {
    fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
}

}  // namespace nvdnp::cli
