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
#include <map>
#include <span>
#include <vector>

#include "nvdnp/dissipator.hpp"
#include "nvdnp/hamiltonian.hpp"
#include "nvdnp/types.hpp"

namespace nvdnp {

/// Density matrix over the composite basis. Valid states are Hermitian to
/// 1e-9, unit trace to 1e-9 and positive semidefinite to -1e-8.
struct DensityState {
  Matrix rho;
};

/// Throws std::runtime_error when the state violates its invariants.
void assert_density_invariants(const DensityState& s, const char* where);

/// Relative populations of the ground m_s = 0 hyperfine triple,
/// (p_plus1, p_zero, p_minus1), normalized within that triple.
std::array<double, 3> populations(const DensityState& s,
                                  const BasisLayout& layout = BasisLayout{});

/// Unitary permutation exchanging the |0,+1>_g and |0,0>_g levels (the RF pi
/// pulse of the measurement sequence, taken as instantaneous and perfect).
DensityState apply_pi_swap(const DensityState& s,
                           const BasisLayout& layout = BasisLayout{});

/// Time series of the ground m_s = 0 hyperfine populations.
struct PolarizationTrace {
  std::vector<double> times;
  std::vector<double> p_plus1;
  std::vector<double> p_zero;
  std::vector<double> p_minus1;
};

/// Applies exp(L t) by scaling-and-squaring matrix exponentials on the
/// invariant sub-blocks of the generator. The optical jump structure never
/// couples distinct manifold-pair sectors of vec(rho): the intra-manifold
/// sector (populations and within-manifold coherences) and each ordered
/// inter-manifold coherence sector evolve autonomously, so the exponential
/// factorizes exactly. Step exponentials are cached by time step, which makes
/// uniform-grid propagation one exponential plus matrix-vector products.
///
/// A Propagator is cheap to build and not thread-safe; use one instance per
/// thread against the shared immutable Liouvillian.
class Propagator {
 public:
  explicit Propagator(const Liouvillian& liouville);

  DensityState apply(const DensityState& rho0, double t_us);

  const BasisLayout& layout() const { return layout_; }

 private:
  struct Sector {
    std::vector<int> vec_idx;          // global vec indices of this sector
    Matrix gen;                        // restricted generator
    std::map<uint64_t, Matrix> cache;  // exp(gen * t) keyed by bits of t
  };

  const Matrix& step_matrix(Sector& s, double t);

  BasisLayout layout_;
  std::vector<Sector> sectors_;
  std::vector<int> sector_of_;  // vec index -> sector id
  std::vector<int> pos_in_sector_;
};

/// exp(L t) applied to vec(rho0); the result is re-Hermitized and its
/// invariants asserted.
DensityState propagate(const Liouvillian& liouville, const DensityState& rho0,
                       double t_us);

/// Kernel of the generator normalized to unit trace, solved as a bordered
/// linear system on the intra-manifold sector. The kernel must be
/// one-dimensional; a degenerate kernel (multiple steady states) throws
/// std::runtime_error. Uniqueness is checked by deflated inverse iteration:
/// the second-smallest kernel-candidate eigenvalue must exceed 1e-6 in
/// magnitude of its real part.
DensityState steady_state(const Liouvillian& liouville);

struct DnpOptions {
  double relax_us = 1.0;   // pump-off interval emptying excited/singlet levels
  bool force_nv0 = false;  // run in the 24-level space even at gamma_ion = 0
};

/// The measurement sequence: pump to the steady state, pump-off relaxation,
/// instantaneous pi swap of |0,+1>_g / |0,0>_g, then pumped evolution read
/// out at each time of the grid (strictly increasing, >= 0).
PolarizationTrace dnp_sequence(const SystemParams& p, const FieldConfig& f,
                               const RateModel& r,
                               std::span<const double> t_grid_us,
                               const DnpOptions& opt = {});

}  // namespace nvdnp
