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

#include <array>
#include <utility>

#include "nvdnp/spin_core.hpp"
#include "nvdnp/types.hpp"

namespace nvdnp {

/// Physical constants of the NV- + 14N two-spin model. All frequencies in
/// MHz, gyromagnetic ratios in MHz/G. c_perp is the free parameter of the
/// model; the remaining values default to the established constants.
struct SystemParams {
  double d_g = 2870.0;        // ground-state zero-field splitting
  double d_e = 1420.0;        // excited-state zero-field splitting
  double q = -4.945;          // nuclear quadrupole
  double gamma_e = 2.802;     // electron gyromagnetic ratio, MHz/G
  double gamma_n = -0.000308; // nuclear gyromagnetic ratio, MHz/G
  double a_par = -2.162;      // ground longitudinal hyperfine
  double a_perp = -2.62;      // ground transverse hyperfine
  double c_par = -40.0;       // excited longitudinal hyperfine
  double c_perp = -23.0;      // excited transverse hyperfine (free parameter)
  double strain_e = 0.0;      // ground-state strain, enters as E(Sx^2 - Sy^2)

  void validate() const;
};

/// Static magnetic field: magnitude in Gauss and polar angle to the NV axis
/// in degrees. The field vector is B (sin theta, 0, cos theta); the azimuth
/// is a gauge choice for this axially symmetric model and is fixed to zero.
struct FieldConfig {
  double b_gauss = 0.0;
  double theta_deg = 0.0;

  void validate() const;
};

/// Block-diagonal Hamiltonian over the composite basis, in MHz. There are no
/// coherent inter-manifold terms; optical transitions enter only as jumps.
struct HamiltonianSet {
  Matrix h_total;
  BasisLayout layout;
};

/// Ground, excited and singlet (plus Nv0 when present) blocks for the given
/// parameters and field. Ground and excited blocks share the form
/// D Sz^2 + ge S.B + Q Iz^2 + par Sz Iz + perp (Sx Ix + Sy Iy) + gn I.B;
/// Singlet/Nv0 carry the nuclear-only part Q Iz^2 + gn I.B.
HamiltonianSet build_hamiltonian(const SystemParams& p, const FieldConfig& f,
                                 const BasisLayout& layout = BasisLayout{});

/// Aligned-field excited-state level-anticrossing center, D_e / gamma_e.
double eslac_field(const SystemParams& p);

/// Roots of the ground-state electronic characteristic cubic
///   l^3 - 2 D l^2 + (D^2 - (ge B)^2) l + (D/2)(ge B)^2 (1 - cos 2 theta) = 0
/// sorted ascending, computed in closed trigonometric form plus one Newton
/// polish per root. Throws std::domain_error if the discriminant signals
/// complex roots (cannot occur for physical inputs).
std::array<double, 3> solve_cubic(const SystemParams& p, double b_gauss,
                                  double theta_deg);

/// Ground-state spin transition frequencies (nu_plus, nu_minus) from the
/// electronic-only ground Hamiltonian (hyperfine neglected, strain zero).
/// nu_plus is the larger transition, identified with m_s = +1 at theta = 0.
/// Requires B < 900 G, far from the ground-state anticrossing.
std::pair<double, double> ground_transition_frequencies(const SystemParams& p,
                                                        const FieldConfig& f);

}  // namespace nvdnp
