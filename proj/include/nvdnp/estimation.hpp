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

#include <span>
#include <string>
#include <vector>

#include "nvdnp/evolution.hpp"
#include "nvdnp/types.hpp"

namespace nvdnp {

/// A measured polarization trace with its calibrated field. sigma is the
/// per-point uncertainty; empty means uniform weighting.
struct ExperimentTrace {
  FieldConfig field;
  std::vector<double> times;
  std::vector<double> p_plus1;
  std::vector<double> p_zero;
  std::vector<double> sigma;

  void validate() const;
};

/// Parameters of the exponential model y = p0 - a exp(-t / tau).
struct ExpFit {
  double p0 = 0.0;
  double a = 0.0;
  double tau = 0.0;  // us, > 0
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  int iterations = 0;
  double residual_norm = 0.0;
};

/// Weighted least squares via Levenberg-Marquardt damped Gauss-Newton.
/// Initial guess: p0 from the last sample, a from the total change, tau from
/// the half-change time. Converges when the relative step drops below 1e-10;
/// throws on non-convergence or constant data. Requires >= 4 points.
ExpFit fit_exponential(std::span<const double> times,
                       std::span<const double> values,
                       std::span<const double> sigma = {});

enum class NuclearComponent { PlusOne, Zero };

std::string to_string(NuclearComponent c);

/// One grid point of a chi-squared scan. Simulation failures annotate the
/// point (ok = false) instead of aborting the scan.
struct ScanPoint {
  double c_perp = 0.0;
  double chi2 = 0.0;
  bool ok = true;
  std::string message;
};

/// Result of scanning one trace against one nuclear component.
struct ScanResult {
  std::vector<ScanPoint> points;
  NuclearComponent component = NuclearComponent::PlusOne;
  FieldConfig field;
  int n_times = 0;
};

/// Mean squared residuals between the measured component and dnp_sequence
/// run at the trace's time stamps, for each grid value of c_perp. The
/// m_i = -1 component is not fitted (its measured amplitude is too small).
ScanResult chi2_scan(const ExperimentTrace& data, const SystemParams& p,
                     const RateModel& r, std::span<const double> c_grid,
                     NuclearComponent component, int workers = 1);

/// Continuum minimizer and curvature width of one scan, from a quartic fit
/// in a +-6 MHz window around the discrete minimum.
struct ScanMinimum {
  double c_perp = 0.0;
  double width = 0.0;  // curvature-based 1 sigma
  double chi2_min = 0.0;
};

ScanMinimum locate_scan_minimum(const ScanResult& scan);

/// Pooled estimate over scans: inverse-variance weighted mean of the per-scan
/// minimizers; uncertainty is the weighted standard deviation (the single
/// scan's own width when only one scan is given). A scan whose discrete
/// minimum sits on the grid boundary throws (the grid must be widened).
struct CperpEstimate {
  double c_perp_best = 0.0;
  double uncertainty = 0.0;
  std::vector<ScanResult> scans;
  std::vector<ScanMinimum> minima;
};

CperpEstimate estimate_cperp(std::vector<ScanResult> scans);

/// Inverts nu+-(B, theta) for (B, theta) by Newton iteration on the
/// characteristic-cubic transition frequencies, seeded from the aligned-field
/// solution. Convergence to |delta nu| < 1e-6 MHz.
FieldConfig calibrate_field(double nu_plus, double nu_minus,
                            const SystemParams& p);

/// Fit protocol for rise/decay time constants of simulated traces. The
/// readout window is extended until it covers at least eight fitted time
/// constants, since a window clipping the rise biases tau low (relevant at
/// weak pumping, where the rise stretches over hundreds of us).
struct RiseTimeProtocol {
  int count = 61;              // readout points per window
  double initial_stop = 30.0;  // us
  double window_cap = 3000.0;  // us
  bool adaptive = true;
};

struct RiseTimes {
  double tau_plus1 = 0.0;
  double tau_zero = 0.0;
  double tau_minus1 = 0.0;
  double window = 0.0;  // final readout window, us
};

RiseTimes fitted_rise_times(const SystemParams& p, const FieldConfig& f,
                            const RateModel& r, const RiseTimeProtocol& proto,
                            bool force_nv0 = false);

/// One steady-state observation used for the angle refinement.
struct SteadyDatum {
  double b_gauss = 0.0;
  double p_plus1_inf = 0.0;
  double p_zero_inf = 0.0;
};

/// Minimizes the mean squared residual between measured and model
/// steady-state populations over theta in [0, theta_max] degrees (grid
/// pre-scan at 0.1 degree steps plus golden-section refinement). A minimum on
/// the upper boundary is out-of-model and throws.
double calibrate_angle(std::span<const SteadyDatum> data,
                       const SystemParams& p, const RateModel& r,
                       double theta_max_deg = 5.0);

}  // namespace nvdnp
