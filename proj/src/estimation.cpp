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
#include "nvdnp/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nvdnp/parallel.hpp"

namespace nvdnp {

void ExperimentTrace::validate() const {
  field.validate();
  if (times.size() < 1) throw std::invalid_argument("trace has no samples");
  if (p_plus1.size() != times.size() || p_zero.size() != times.size())
    throw std::invalid_argument("trace column lengths disagree");
  if (!sigma.empty() && sigma.size() != times.size())
    throw std::invalid_argument("sigma column length disagrees");
  for (size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && !(times[i] > times[i - 1]))
      throw std::invalid_argument("trace times must be strictly increasing (row " +
                                  std::to_string(i + 1) + ")");
    if (!(times[i] >= 0.0))
      throw std::invalid_argument("trace times must be >= 0 (row " +
                                  std::to_string(i + 1) + ")");
    for (double v : {p_plus1[i], p_zero[i]})
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("probabilities must lie in [0, 1] (row " +
                                    std::to_string(i + 1) + ")");
    if (!sigma.empty() && !(sigma[i] > 0.0))
      throw std::invalid_argument("sigma must be positive (row " +
                                  std::to_string(i + 1) + ")");
  }
}

std::string to_string(NuclearComponent c) {
  return c == NuclearComponent::PlusOne ? "plus1" : "zero";
}

ExpFit fit_exponential(std::span<const double> times,
                       std::span<const double> values,
                       std::span<const double> sigma) {
  const int n = static_cast<int>(times.size());
  if (n < 4 || values.size() != times.size())
    throw std::invalid_argument("fit_exponential needs >= 4 (t, y) samples");
  if (!sigma.empty() && sigma.size() != times.size())
    throw std::invalid_argument("sigma length disagrees with samples");

  const auto [ymin_it, ymax_it] = std::minmax_element(values.begin(), values.end());
  if (*ymax_it - *ymin_it <= 1e-14)
    throw std::invalid_argument("fit_exponential: constant data is degenerate");

  auto weight = [&](int i) { return sigma.empty() ? 1.0 : 1.0 / sigma[i]; };

  // initialization: asymptote from the last sample, amplitude from the total
  // change, tau from the time of half change
  double p0 = values[n - 1];
  double a = p0 - values[0];
  double tau = (times[n - 1] - times[0]) / 3.0;
  for (int i = 1; i < n; ++i)
    if (std::abs(values[i] - values[0]) >= 0.5 * std::abs(a) &&
        times[i] > times[0]) {
      tau = times[i] - times[0];
      break;
    }
  if (!(tau > 0.0)) tau = 1.0;
  if (a == 0.0) a = 0.5 * (*ymax_it - *ymin_it);

  // damped Gauss-Newton on (p0, a, log tau); log keeps tau positive
  double log_tau = std::log(tau);
  double lambda = 1e-3;
  auto cost_of = [&](double p0_, double a_, double lt_) {
    const double tau_ = std::exp(lt_);
    double c = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = (p0_ - a_ * std::exp(-times[i] / tau_) - values[i]) * weight(i);
      c += r * r;
    }
    return c;
  };

  double cost = cost_of(p0, a, log_tau);
  int iter = 0;
  bool converged = false;
  Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
  for (; iter < 200; ++iter) {
    const double tau_cur = std::exp(log_tau);
    Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
    jtj.setZero();
    for (int i = 0; i < n; ++i) {
      const double wgt = weight(i);
      const double e = std::exp(-times[i] / tau_cur);
      const double r = (p0 - a * e - values[i]) * wgt;
      Eigen::Vector3d row(wgt, -e * wgt, -a * e * times[i] / tau_cur * wgt);
      jtj += row * row.transpose();
      jtr += row * r;
    }
    Eigen::Matrix3d damped = jtj;
    damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
    const Eigen::Vector3d step = damped.ldlt().solve(-jtr);
    const double trial_cost = cost_of(p0 + step[0], a + step[1], log_tau + step[2]);
    if (trial_cost <= cost) {
      p0 += step[0];
      a += step[1];
      log_tau += step[2];
      const double scale =
          std::max({std::abs(p0), std::abs(a), std::abs(log_tau), 1.0});
      const bool small_step = step.cwiseAbs().maxCoeff() < 1e-10 * scale;
      cost = trial_cost;
      lambda = std::max(lambda * 0.3, 1e-12);
      if (small_step) {
        converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e12)
        throw std::runtime_error("fit_exponential: damping exhausted");
    }
  }
  if (!converged && iter == 200)
    throw std::runtime_error("fit_exponential did not converge in 200 iterations");

  ExpFit fit;
  fit.p0 = p0;
  fit.a = a;
  fit.tau = std::exp(log_tau);
  fit.iterations = iter;
  fit.residual_norm = std::sqrt(cost);
  const double dof = std::max(n - 3, 1);
  const double s2 = cost / dof;
  Eigen::Matrix3d cov = jtj.inverse() * s2;
  // back-transform the log-tau coordinate
  cov.row(2) *= fit.tau;
  cov.col(2) *= fit.tau;
  fit.covariance = cov;
  return fit;
}

ScanResult chi2_scan(const ExperimentTrace& data, const SystemParams& p,
                     const RateModel& r, std::span<const double> c_grid,
                     NuclearComponent component, int workers) {
  data.validate();
  if (c_grid.empty()) throw std::invalid_argument("chi2_scan: empty grid");

  const std::vector<double>& measured =
      component == NuclearComponent::PlusOne ? data.p_plus1 : data.p_zero;
  const int n = static_cast<int>(data.times.size());

  ScanResult result;
  result.component = component;
  result.field = data.field;
  result.n_times = n;
  result.points.resize(c_grid.size());

  parallel_for(static_cast<int>(c_grid.size()), workers, [&](int k) {
    ScanPoint& pt = result.points[k];
    pt.c_perp = c_grid[k];
    try {
      SystemParams pk = p;
      pk.c_perp = c_grid[k];
      const PolarizationTrace sim = dnp_sequence(pk, data.field, r, data.times);
      const std::vector<double>& model =
          component == NuclearComponent::PlusOne ? sim.p_plus1 : sim.p_zero;
      double chi2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double s = data.sigma.empty() ? 1.0 : data.sigma[i];
        const double res = (model[i] - measured[i]) / s;
        chi2 += res * res;
      }
      pt.chi2 = chi2 / n;
    } catch (const std::exception& e) {
      pt.ok = false;
      pt.chi2 = std::numeric_limits<double>::quiet_NaN();
      pt.message = e.what();
    }
  });
  return result;
}

ScanMinimum locate_scan_minimum(const ScanResult& scan) {
  std::vector<const ScanPoint*> pts;
  for (const ScanPoint& p : scan.points)
    if (p.ok) pts.push_back(&p);
  if (pts.size() < 3)
    throw std::runtime_error("scan has fewer than 3 valid points");
  std::sort(pts.begin(), pts.end(),
            [](auto* a, auto* b) { return a->c_perp < b->c_perp; });

  size_t imin = 0;
  for (size_t i = 1; i < pts.size(); ++i)
    if (pts[i]->chi2 < pts[imin]->chi2) imin = i;
  if (imin == 0 || imin + 1 == pts.size())
    throw std::runtime_error(
        "scan minimum sits on the grid boundary; widen the c_perp grid");

  // quartic fit in a +-6 MHz window around the discrete minimum
  const double c0 = pts[imin]->c_perp;
  std::vector<double> xs, ys;
  for (auto* p : pts)
    if (std::abs(p->c_perp - c0) <= 6.0 + 1e-12) {
      xs.push_back(p->c_perp - c0);
      ys.push_back(p->chi2);
    }
  const int deg = xs.size() >= 7 ? 4 : 2;
  Eigen::MatrixXd vand(xs.size(), deg + 1);
  Eigen::VectorXd rhs(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    double pw = 1.0;
    for (int j = 0; j <= deg; ++j) {
      vand(i, j) = pw;
      pw *= xs[i];
    }
    rhs(i) = ys[i];
  }
  const Eigen::VectorXd coef = vand.colPivHouseholderQr().solve(rhs);

  auto deriv1 = [&](double x) {
    double v = 0.0;
    for (int j = deg; j >= 1; --j) v = v * x + j * coef[j];
    return v;
  };
  auto deriv2 = [&](double x) {
    double v = 0.0;
    for (int j = deg; j >= 2; --j) v = v * x + j * (j - 1) * coef[j];
    return v;
  };
  auto value = [&](double x) {
    double v = 0.0;
    for (int j = deg; j >= 0; --j) v = v * x + coef[j];
    return v;
  };

  double x = 0.0;  // Newton from the discrete minimum
  for (int it = 0; it < 60; ++it) {
    const double d2 = deriv2(x);
    if (d2 <= 0.0) break;
    const double step = deriv1(x) / d2;
    x -= step;
    if (std::abs(step) < 1e-12) break;
  }
  const double half_window = std::abs(xs.front()) > std::abs(xs.back())
                                 ? std::abs(xs.front())
                                 : std::abs(xs.back());
  if (!(std::abs(x) <= half_window) || deriv2(x) <= 0.0) {
    // fall back to the discrete minimum with a second-difference curvature
    const double dl = pts[imin]->c_perp - pts[imin - 1]->c_perp;
    const double dr = pts[imin + 1]->c_perp - pts[imin]->c_perp;
    const double curv = 2.0 *
                        (pts[imin - 1]->chi2 * dr + pts[imin + 1]->chi2 * dl -
                         pts[imin]->chi2 * (dl + dr)) /
                        (dl * dr * (dl + dr));
    ScanMinimum m;
    m.c_perp = c0;
    m.chi2_min = pts[imin]->chi2;
    m.width = curv > 0.0
                  ? std::sqrt(2.0 * std::max(m.chi2_min, 1e-300) /
                              (scan.n_times * curv))
                  : 0.5 * (dl + dr);
    return m;
  }

  ScanMinimum m;
  m.c_perp = c0 + x;
  m.chi2_min = std::max(value(x), 0.0);
  const double curv = deriv2(x);
  m.width = std::sqrt(2.0 * std::max(m.chi2_min, 1e-300) / (scan.n_times * curv));
  return m;
}

CperpEstimate estimate_cperp(std::vector<ScanResult> scans) {
  if (scans.empty()) throw std::invalid_argument("estimate_cperp: no scans");

  CperpEstimate est;
  est.scans = std::move(scans);
  est.minima.reserve(est.scans.size());
  for (const ScanResult& s : est.scans) est.minima.push_back(locate_scan_minimum(s));

  // floor the widths entering the weights: noiseless scans collapse to
  // zero curvature width, which must not produce infinite weights
  auto weight_of = [](const ScanMinimum& m) {
    const double w = std::max(m.width, 1e-9);
    return 1.0 / (w * w);
  };
  double wsum = 0.0, mean = 0.0;
  for (const ScanMinimum& m : est.minima) {
    wsum += weight_of(m);
    mean += weight_of(m) * m.c_perp;
  }
  mean /= wsum;
  est.c_perp_best = mean;

  if (est.minima.size() == 1) {
    est.uncertainty = est.minima[0].width;
  } else {
    double var = 0.0;
    for (const ScanMinimum& m : est.minima)
      var += weight_of(m) * (m.c_perp - mean) * (m.c_perp - mean);
    est.uncertainty = std::sqrt(var / wsum);
  }
  return est;
}

RiseTimes fitted_rise_times(const SystemParams& p, const FieldConfig& f,
                            const RateModel& r, const RiseTimeProtocol& proto,
                            bool force_nv0) {
  if (proto.count < 4 || !(proto.initial_stop > 0.0))
    throw std::invalid_argument("rise-time protocol needs count >= 4, stop > 0");
  DnpOptions opt;
  opt.force_nv0 = force_nv0;

  double stop = proto.initial_stop;
  for (;;) {
    std::vector<double> grid(proto.count);
    for (int i = 0; i < proto.count; ++i)
      grid[i] = stop * i / (proto.count - 1);
    const PolarizationTrace trace = dnp_sequence(p, f, r, grid, opt);
    const double tau = fit_exponential(trace.times, trace.p_plus1).tau;
    if (!proto.adaptive || tau <= stop / 8.0 || stop >= proto.window_cap) {
      RiseTimes out;
      out.tau_plus1 = tau;
      out.tau_zero = fit_exponential(trace.times, trace.p_zero).tau;
      out.tau_minus1 = fit_exponential(trace.times, trace.p_minus1).tau;
      out.window = stop;
      return out;
    }
    stop = std::min(proto.window_cap, std::max(stop * 2.0, tau * 10.0));
  }
}

FieldConfig calibrate_field(double nu_plus, double nu_minus,
                            const SystemParams& p) {
  if (!(nu_plus > nu_minus))
    throw std::invalid_argument(
        "calibrate_field: nu_plus must exceed nu_minus (degenerate or swapped "
        "input)");
  const double band = p.gamma_e * 900.0;
  for (double nu : {nu_plus, nu_minus})
    if (nu < p.d_g - band || nu > p.d_g + band)
      throw std::invalid_argument(
          "calibrate_field: frequency outside the physical band");

  auto forward = [&](double b, double theta) {
    return ground_transition_frequencies(p, FieldConfig{b, theta});
  };

  double b = (nu_plus - nu_minus) / (2.0 * p.gamma_e);
  if (!(b > 0.0) || b >= 900.0)
    throw std::domain_error("calibrate_field: seed field outside (0, 900) G");

  // The theta information lives in (nu+ + nu-)/2 - d_g = -(3/2) lambda_0; a
  // perturbative inversion of the cubic's smallest root seeds the angle.
  const double s_data = 0.5 * (nu_plus + nu_minus) - p.d_g;
  double theta = 0.0;
  const double zb = p.gamma_e * b;
  if (s_data > 1e-9 && zb < p.d_g) {
    const double sin2 =
        s_data * (p.d_g * p.d_g - zb * zb) / (1.5 * p.d_g * zb * zb);
    theta = rad_to_deg(std::asin(std::sqrt(std::clamp(sin2, 0.0, 1.0))));
  }
  if (s_data <= 1e-9) {
    // aligned field: nu+- = d_g +- gamma_e B exactly
    return FieldConfig{b, 0.0};
  }

  const double hb = 1e-4, ht = 1e-4;
  for (int it = 0; it < 60; ++it) {
    const auto [fp, fm] = forward(b, theta);
    const double r1 = fp - nu_plus, r2 = fm - nu_minus;
    if (std::abs(r1) < 1e-6 && std::abs(r2) < 1e-6) return FieldConfig{b, theta};

    const auto [fp_b, fm_b] = forward(b + hb, theta);
    const double tplus = std::min(theta + ht, 90.0);
    const auto [fp_t, fm_t] = forward(b, tplus);
    Eigen::Matrix2d jac;
    jac << (fp_b - fp) / hb, (fp_t - fp) / (tplus - theta),
        (fm_b - fm) / hb, (fm_t - fm) / (tplus - theta);
    const Eigen::Vector2d step = jac.fullPivLu().solve(Eigen::Vector2d(-r1, -r2));
    if (!step.allFinite())
      throw std::domain_error("calibrate_field: singular Jacobian");
    double scale = 1.0;
    while (scale > 1e-6 &&
           (b + scale * step[0] <= 0.0 || b + scale * step[0] >= 900.0 ||
            theta + scale * step[1] < 0.0 || theta + scale * step[1] > 90.0))
      scale *= 0.5;
    b += scale * step[0];
    theta += scale * step[1];
  }
  throw std::domain_error(
      "calibrate_field: no solution in the physical domain (Newton did not "
      "converge)");
}

double calibrate_angle(std::span<const SteadyDatum> data,
                       const SystemParams& p, const RateModel& r,
                       double theta_max_deg) {
  if (data.empty()) throw std::invalid_argument("calibrate_angle: no data");

  auto chi2_at = [&](double theta) {
    double acc = 0.0;
    for (const SteadyDatum& d : data) {
      const HamiltonianSet h =
          build_hamiltonian(p, FieldConfig{d.b_gauss, theta});
      const DensityState ss =
          steady_state(assemble_liouvillian(h, build_jumps(r)));
      const auto pops = populations(ss);
      acc += (pops[0] - d.p_plus1_inf) * (pops[0] - d.p_plus1_inf) +
             (pops[1] - d.p_zero_inf) * (pops[1] - d.p_zero_inf);
    }
    return acc / (2.0 * data.size());
  };

  // 0.1 degree pre-scan, then golden-section refinement between neighbors
  const double step = 0.1;
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  const int n_grid = static_cast<int>(std::round(theta_max_deg / step)) + 1;
  std::vector<double> grid_vals(n_grid);
  for (int i = 0; i < n_grid; ++i) {
    grid_vals[i] = chi2_at(i * step);
    if (grid_vals[i] < best_val) {
      best_val = grid_vals[i];
      best = i;
    }
  }
  if (best == n_grid - 1)
    throw std::domain_error(
        "calibrate_angle: minimum at the theta upper bound; the model is out "
        "of its validity range");

  double lo = std::max(0.0, (best - 1) * step);
  double hi = std::min(theta_max_deg, (best + 1) * step);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = chi2_at(x1), f2 = chi2_at(x2);
  while (hi - lo > 1e-4) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = chi2_at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = chi2_at(x2);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace nvdnp
