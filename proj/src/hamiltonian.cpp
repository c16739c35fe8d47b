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
#include "nvdnp/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nvdnp {

namespace {

bool all_finite(std::initializer_list<double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

void SystemParams::validate() const {
  if (!all_finite({d_g, d_e, q, gamma_e, gamma_n, a_par, a_perp, c_par, c_perp,
                   strain_e}))
    throw std::invalid_argument("system parameters must be finite");
  if (d_g <= 0.0 || d_e <= 0.0)
    throw std::invalid_argument("zero-field splittings must be positive");
}

void FieldConfig::validate() const {
  if (!all_finite({b_gauss, theta_deg}))
    throw std::invalid_argument("field configuration must be finite");
  if (b_gauss < 0.0) throw std::invalid_argument("field magnitude must be >= 0");
  if (theta_deg < 0.0 || theta_deg > 90.0)
    throw std::invalid_argument("theta must lie in [0, 90] degrees");
}

HamiltonianSet build_hamiltonian(const SystemParams& p, const FieldConfig& f,
                                 const BasisLayout& layout) {
  p.validate();
  f.validate();
  const SpinOps s = spin1_ops();
  const double theta = deg_to_rad(f.theta_deg);
  const double bx = f.b_gauss * std::sin(theta);
  const double bz = f.b_gauss * std::cos(theta);

  const Matrix3 zeeman_shape = bx * s.sx + bz * s.sz;  // per unit gyromagnetic ratio
  const Matrix3 quadrupole = p.q * (s.sz * s.sz);
  const Matrix3 nuclear = quadrupole + p.gamma_n * zeeman_shape;

  auto triplet_block = [&](double d, double par, double perp) {
    Matrix3 electron = d * (s.sz * s.sz) + p.gamma_e * zeeman_shape;
    Matrix h = kron(electron, s.id3) + kron(s.id3, nuclear);
    h += par * kron(s.sz, s.sz) +
         perp * (kron(s.sx, s.sx) + kron(s.sy, s.sy));
    return h;
  };

  const int d = layout.dim();
  Matrix h = Matrix::Zero(d, d);
  h.block(0, 0, 9, 9) = triplet_block(p.d_g, p.a_par, p.a_perp);
  if (p.strain_e != 0.0)
    h.block(0, 0, 9, 9) +=
        p.strain_e * kron(Matrix3(s.sx * s.sx - s.sy * s.sy), s.id3);
  h.block(9, 9, 9, 9) = triplet_block(p.d_e, p.c_par, p.c_perp);
  h.block(18, 18, 3, 3) = nuclear;
  if (layout.with_nv0()) h.block(21, 21, 3, 3) = nuclear;

  return HamiltonianSet{std::move(h), layout};
}

double eslac_field(const SystemParams& p) {
  if (p.gamma_e <= 0.0)
    throw std::invalid_argument("gamma_e must be positive");
  return p.d_e / p.gamma_e;
}

std::array<double, 3> solve_cubic(const SystemParams& p, double b_gauss,
                                  double theta_deg) {
  const double d = p.d_g;
  const double zb = p.gamma_e * b_gauss;
  const double theta = deg_to_rad(theta_deg);
  // l^3 + a2 l^2 + a1 l + a0
  const double a2 = -2.0 * d;
  const double a1 = d * d - zb * zb;
  const double a0 = 0.5 * d * zb * zb * (1.0 - std::cos(2.0 * theta));

  // depressed form t^3 + pt + q with l = t - a2/3
  const double shift = -a2 / 3.0;
  const double pc = a1 - a2 * a2 / 3.0;
  const double qc = a0 - a1 * a2 / 3.0 + 2.0 * a2 * a2 * a2 / 27.0;

  const double coeff_scale =
      std::max({std::abs(a0), std::abs(a1), std::abs(a2), 1.0});

  std::array<double, 3> roots;
  if (pc >= 0.0) {
    // p >= 0 admits three real roots only in the degenerate p = q = 0 case.
    if (std::abs(pc) > 1e-12 * coeff_scale || std::abs(qc) > 1e-12 * coeff_scale)
      throw std::domain_error("characteristic cubic has complex roots");
    return {shift, shift, shift};
  }
  const double m = 2.0 * std::sqrt(-pc / 3.0);
  double arg = 3.0 * qc / (pc * m);
  if (arg < -1.0 - 1e-8 || arg > 1.0 + 1e-8)
    throw std::domain_error("characteristic cubic has complex roots");
  arg = std::clamp(arg, -1.0, 1.0);  // discriminant boundary (double roots)
  const double phi = std::acos(arg) / 3.0;
  constexpr double third_turn = 2.0 * std::numbers::pi / 3.0;
  for (int k = 0; k < 3; ++k)
    roots[k] = shift + m * std::cos(phi - third_turn * k);

  // The trigonometric roots lose half the digits near a double root. Polish
  // the best-conditioned root by Newton, then deflate and solve the remaining
  // quadratic in closed form, which stays exact through degeneracies.
  auto fval = [&](double r) { return ((r + a2) * r + a1) * r + a0; };
  auto fder = [&](double r) { return (3.0 * r + 2.0 * a2) * r + a1; };
  double best = roots[0];
  for (double r : roots)
    if (std::abs(fder(r)) > std::abs(fder(best))) best = r;
  for (int it = 0; it < 3; ++it) {
    const double der = fder(best);
    if (der == 0.0) break;
    const double step = fval(best) / der;
    if (!std::isfinite(step) || std::abs(step) > 1.0) break;
    best -= step;
    if (std::abs(step) < 1e-14 * std::max(std::abs(best), 1.0)) break;
  }

  const double b1 = a2 + best;
  const double b0 = a1 + best * b1;
  double disc = b1 * b1 - 4.0 * b0;
  if (disc < 0.0) {
    if (disc < -1e-10 * coeff_scale)
      throw std::domain_error("characteristic cubic has complex roots");
    disc = 0.0;
  }
  const double sq = std::sqrt(disc);
  const double s = -0.5 * (b1 + std::copysign(sq, b1));
  roots = {best, s, s != 0.0 ? b0 / s : -0.5 * b1};

  std::sort(roots.begin(), roots.end());
  return roots;
}

std::pair<double, double> ground_transition_frequencies(const SystemParams& p,
                                                        const FieldConfig& f) {
  f.validate();
  if (f.b_gauss >= 900.0)
    throw std::domain_error(
        "transition-frequency extraction requires B < 900 G, away from the "
        "ground-state anticrossing");
  const auto roots = solve_cubic(p, f.b_gauss, f.theta_deg);
  // Away from the anticrossing the lowest eigenvalue is the m_s = 0 level;
  // nu_plus pairs with the larger transition (m_s = +1 at theta = 0).
  return {roots[2] - roots[0], roots[1] - roots[0]};
}

}  // namespace nvdnp
