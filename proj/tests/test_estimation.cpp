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
#include <doctest.h>

#include <limits>
#include <random>

#include "nvdnp/estimation.hpp"

using namespace nvdnp;

namespace {

std::vector<double> exp_model(std::span<const double> ts, double p0, double a,
                              double tau) {
  std::vector<double> ys;
  for (double t : ts) ys.push_back(p0 - a * std::exp(-t / tau));
  return ys;
}

std::vector<double> uniform_times(double start, double stop, int n) {
  std::vector<double> ts(n);
  for (int i = 0; i < n; ++i) ts[i] = start + (stop - start) * i / (n - 1);
  return ts;
}

ExperimentTrace synthetic_trace(double b, double theta, double c_perp,
                                std::span<const double> ts) {
  SystemParams p;
  p.c_perp = c_perp;
  ExperimentTrace trace;
  trace.field = FieldConfig{b, theta};
  const PolarizationTrace sim = dnp_sequence(p, trace.field, RateModel{}, ts);
  trace.times = sim.times;
  trace.p_plus1 = sim.p_plus1;
  trace.p_zero = sim.p_zero;
  return trace;
}

}  // namespace

TEST_CASE("exponential fit recovers exact synthetic parameters") {
  const auto ts = uniform_times(0.0, 15.0, 40);
  const auto ys = exp_model(ts, 0.9, 0.5, 2.3);
  const ExpFit fit = fit_exponential(ts, ys);
  CHECK(fit.p0 == doctest::Approx(0.9).epsilon(1e-8));
  CHECK(fit.a == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(fit.tau == doctest::Approx(2.3).epsilon(1e-8));
}

TEST_CASE("exponential fit under gaussian noise: monte-carlo tau spread") {
  const auto ts = uniform_times(0.0, 15.0, 30);
  const auto clean = exp_model(ts, 0.9, 0.5, 2.3);
  std::mt19937_64 rng(424242);
  std::normal_distribution<double> noise(0.0, 0.01);
  int within = 0;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> ys = clean;
    for (double& y : ys) y += noise(rng);
    const ExpFit fit = fit_exponential(ts, ys);
    if (std::abs(fit.tau - 2.3) <= 0.15 * 2.3) ++within;
  }
  CHECK(within == 100);
}

TEST_CASE("decaying data fits with negative amplitude and the same tau") {
  const auto ts = uniform_times(0.0, 12.0, 25);
  const auto ys = exp_model(ts, 0.2, -0.6, 3.1);  // decaying: a < 0
  const ExpFit fit = fit_exponential(ts, ys);
  CHECK(fit.a == doctest::Approx(-0.6).epsilon(1e-7));
  CHECK(fit.tau == doctest::Approx(3.1).epsilon(1e-7));
}

TEST_CASE("exponential fit rejects degenerate input") {
  const auto ts = uniform_times(0.0, 5.0, 3);
  CHECK_THROWS_AS(fit_exponential(ts, std::vector<double>{1.0, 2.0, 3.0}),
                  std::invalid_argument);
  const auto ts2 = uniform_times(0.0, 5.0, 10);
  CHECK_THROWS_AS(fit_exponential(ts2, std::vector<double>(10, 0.5)),
                  std::invalid_argument);
}

TEST_CASE("weighting enters the covariance but not the estimate scale") {
  const auto ts = uniform_times(0.0, 15.0, 24);
  auto ys = exp_model(ts, 0.8, 0.4, 2.0);
  ys[5] += 0.01;
  ys[11] -= 0.01;
  const std::vector<double> s1(ts.size(), 0.02), s2(ts.size(), 0.04);
  const ExpFit f1 = fit_exponential(ts, ys, s1);
  const ExpFit f2 = fit_exponential(ts, ys, s2);
  CHECK(f1.tau == doctest::Approx(f2.tau).epsilon(1e-7));
}

TEST_CASE("chi2 scan orders candidate couplings by fit quality") {
  const auto ts = uniform_times(0.5, 12.0, 12);
  const ExperimentTrace data = synthetic_trace(252.0, 1.7, -23.0, ts);
  const std::vector<double> grid{-40.0, -23.0, -15.0};
  const ScanResult scan =
      chi2_scan(data, SystemParams{}, RateModel{}, grid, NuclearComponent::PlusOne);

  REQUIRE(scan.points.size() == 3);
  for (const ScanPoint& p : scan.points) {
    CHECK(p.ok);
    CHECK(p.chi2 >= 0.0);
  }
  CHECK(scan.points[1].chi2 < scan.points[0].chi2);  // -23 beats -40
  CHECK(scan.points[1].chi2 < scan.points[2].chi2);  // -23 beats -15

  SUBCASE("scaling all sigmas leaves the ranking unchanged") {
    ExperimentTrace noisy = data;
    noisy.sigma.assign(noisy.times.size(), 0.02);
    const ScanResult s1 = chi2_scan(noisy, SystemParams{}, RateModel{}, grid,
                                    NuclearComponent::PlusOne);
    for (double& s : noisy.sigma) s *= 2.0;
    const ScanResult s2 = chi2_scan(noisy, SystemParams{}, RateModel{}, grid,
                                    NuclearComponent::PlusOne);
    for (int k = 0; k < 3; ++k)
      CHECK(s1.points[k].chi2 == doctest::Approx(4.0 * s2.points[k].chi2));
  }
}

TEST_CASE("simulation failures annotate the grid point instead of aborting") {
  ExperimentTrace data;
  data.field = FieldConfig{348.0, 1.5};
  data.times = {0.5, 2.0, 5.0, 9.0};
  data.p_plus1 = {0.3, 0.35, 0.4, 0.42};
  data.p_zero = {0.5, 0.45, 0.42, 0.4};
  const std::vector<double> grid{-23.0,
                                 std::numeric_limits<double>::quiet_NaN()};
  const ScanResult scan =
      chi2_scan(data, SystemParams{}, RateModel{}, grid, NuclearComponent::Zero);
  CHECK(scan.points[0].ok);
  CHECK_FALSE(scan.points[1].ok);
  CHECK_FALSE(scan.points[1].message.empty());
  CHECK(std::isnan(scan.points[1].chi2));
}

TEST_CASE("sequence evaluation is independent of grid slicing") {
  // stepping through the grid equals evaluating each time from scratch
  SystemParams p;
  p.c_perp = -23.0;
  const FieldConfig f{348.0, 1.5};
  const std::vector<double> grid{0.7, 2.9, 6.1};
  const PolarizationTrace joint = dnp_sequence(p, f, RateModel{}, grid);
  for (size_t i = 0; i < grid.size(); ++i) {
    const PolarizationTrace single =
        dnp_sequence(p, f, RateModel{}, std::vector<double>{grid[i]});
    CHECK(single.p_plus1[0] == doctest::Approx(joint.p_plus1[i]).epsilon(1e-9));
  }
}

TEST_CASE("scan minimum location on an analytic curve") {
  ScanResult scan;
  scan.n_times = 20;
  // quartic with minimum at -22.4
  for (double c = -30.0; c <= -15.0; c += 1.0) {
    const double x = c + 22.4;
    scan.points.push_back({c, 0.001 + 0.002 * x * x + 1e-5 * x * x * x * x,
                           true, ""});
  }
  const ScanMinimum m = locate_scan_minimum(scan);
  CHECK(m.c_perp == doctest::Approx(-22.4).epsilon(1e-3));
  CHECK(m.width > 0.0);

  SUBCASE("boundary minimum is rejected") {
    ScanResult bad;
    bad.n_times = 20;
    for (double c = -30.0; c <= -15.0; c += 1.0)
      bad.points.push_back({c, 1.0 + c, true, ""});  // decreasing, min at edge
    CHECK_THROWS_AS(locate_scan_minimum(bad), std::runtime_error);
  }
}

TEST_CASE("estimate_cperp recovers the generating coupling from one scan") {
  const auto ts = uniform_times(0.5, 12.0, 10);
  const ExperimentTrace data = synthetic_trace(252.0, 1.7, -23.0, ts);
  std::vector<double> grid;
  for (double c = -30.0; c <= -16.0; c += 1.0) grid.push_back(c);
  ScanResult scan = chi2_scan(data, SystemParams{}, RateModel{}, grid,
                              NuclearComponent::PlusOne);
  const CperpEstimate est = estimate_cperp({scan});
  CHECK(std::abs(est.c_perp_best - (-23.0)) <= 1.0);

  SUBCASE("identical scans pool to a tighter uncertainty") {
    const CperpEstimate pooled = estimate_cperp({scan, scan, scan});
    CHECK(pooled.c_perp_best == doctest::Approx(est.c_perp_best).epsilon(1e-9));
    CHECK(pooled.uncertainty <= est.uncertainty);
  }
}

TEST_CASE("field calibration") {
  const SystemParams p;
  SUBCASE("aligned-field inversion") {
    const FieldConfig f = calibrate_field(3576.104, 2163.896, p);
    CHECK(f.b_gauss == doctest::Approx(252.0).epsilon(1e-9));
    CHECK(f.theta_deg == doctest::Approx(0.0));
  }
  SUBCASE("round trip through the forward model") {
    const auto [np, nm] =
        ground_transition_frequencies(p, FieldConfig{348.0, 1.5});
    const FieldConfig f = calibrate_field(np, nm, p);
    CHECK(std::abs(f.b_gauss - 348.0) < 0.01);
    CHECK(std::abs(f.theta_deg - 1.5) < 0.01);
  }
  SUBCASE("degenerate and out-of-band inputs are rejected") {
    CHECK_THROWS_AS(calibrate_field(2870.0, 2870.0, p), std::invalid_argument);
    CHECK_THROWS_AS(calibrate_field(2163.896, 3576.104, p), std::invalid_argument);
    CHECK_THROWS_AS(calibrate_field(9000.0, 2000.0, p), std::invalid_argument);
  }
}

TEST_CASE("angle calibration from steady-state populations") {
  const SystemParams p;
  const RateModel r;
  auto steady_at = [&](double b, double theta) {
    const DensityState ss = steady_state(assemble_liouvillian(
        build_hamiltonian(p, FieldConfig{b, theta}), build_jumps(r)));
    const auto pops = populations(ss);
    return SteadyDatum{b, pops[0], pops[1]};
  };

  SUBCASE("synthetic data at 1.7 degrees") {
    const std::vector<SteadyDatum> data{steady_at(252.0, 1.7)};
    const double theta = calibrate_angle(data, p, r);
    CHECK(std::abs(theta - 1.7) <= 0.1);
  }
  SUBCASE("aligned data lands at the lower boundary") {
    const std::vector<SteadyDatum> data{steady_at(411.0, 0.0)};
    const double theta = calibrate_angle(data, p, r);
    CHECK(theta <= 0.1);
  }
  SUBCASE("population monotonicity in theta makes the minimum unique") {
    double prev = 2.0;
    for (double theta : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
      const SteadyDatum d = steady_at(411.0, theta);
      CHECK(d.p_plus1_inf < prev);
      prev = d.p_plus1_inf;
    }
  }
}

TEST_CASE("experiment trace validation names the offending row") {
  ExperimentTrace t;
  t.field = FieldConfig{252.0, 1.7};
  t.times = {0.0, 1.0, 0.5};
  t.p_plus1 = {0.3, 0.4, 0.5};
  t.p_zero = {0.5, 0.4, 0.3};
  try {
    t.validate();
    FAIL("expected a validation error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
}
