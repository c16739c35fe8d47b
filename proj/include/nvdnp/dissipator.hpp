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

#include <vector>

#include "nvdnp/hamiltonian.hpp"
#include "nvdnp/spin_core.hpp"
#include "nvdnp/types.hpp"

namespace nvdnp {

/// Optical and intersystem-crossing rate table plus pump and ionization
/// parameters. Rates in MHz (= 1/us); epsilon and w are dimensionless.
struct RateModel {
  double gamma_rad = 63.0;   // spin-conserving radiative decay, per channel
  double gamma_isc0 = 12.0;  // ISC from excited m_s = 0
  double gamma_iscpm = 80.0; // ISC from excited m_s = +-1
  double gamma_s0 = 3.3;     // singlet -> ground m_s = 0
  double gamma_spm = 2.4;    // singlet -> ground m_s = +-1, per channel
  double epsilon = 0.01;     // spin non-conserving fraction of gamma_rad
  double w = 1.0;            // pump over radiative-decay rate ratio
  double gamma_ion = 0.0;    // ionization-recombination rate (24-level model)

  // Pumping mirrors decay channel-for-channel scaled by w, including the
  // epsilon-leakage family; set false to pump through the spin-conserving
  // channels only.
  bool pump_mirrors_leakage = true;
  // Recombination from Nv0 splits gamma_ion equally over the three ground
  // m_s states; set false to recombine into m_s = 0 only.
  bool recombine_equal_split = true;

  void validate() const;
};

/// One incoherent transition, realized as sqrt(rate) |target><source|.
struct Jump {
  BasisIndex source;
  BasisIndex target;
  double rate = 0.0;
};

using JumpSet = std::vector<Jump>;

/// Enumerates the jump channels of the rate model per nuclear projection:
/// spin-conserving radiative decay, epsilon leakage, ISC, singlet decay,
/// optical pumping (decay channels mirrored, scaled by w) and, for
/// gamma_ion > 0, ionization to Nv0 and recombination back to the ground
/// manifold. Every channel conserves m_i; channels with zero rate are
/// omitted.
JumpSet build_jumps(const RateModel& r, const BasisLayout& layout = BasisLayout{});

/// Vectorized generator of the master equation, column-stacking convention,
/// units 1/us with the Hamiltonian in MHz. Stored sparse; dense() realizes
/// the full matrix.
struct Liouvillian {
  SparseMatrix op;
  BasisLayout layout;

  int dim() const { return layout.dim(); }
  Matrix dense() const { return Matrix(op); }
};

/// -i 2 pi (I (x) H - H^T (x) I) + sum_k [ conj(L_k) (x) L_k
///   - 1/2 (I (x) L_k^+ L_k + (L_k^+ L_k)^T (x) I) ]
/// under vec(A rho B) = (B^T (x) A) vec(rho).
Liouvillian assemble_liouvillian(const HamiltonianSet& h, const JumpSet& jumps);

}  // namespace nvdnp
