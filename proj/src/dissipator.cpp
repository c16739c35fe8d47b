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
#include "nvdnp/dissipator.hpp"

#include <stdexcept>

namespace nvdnp {

namespace {

constexpr int kSpinProjections[3] = {1, 0, -1};

}  // namespace

void RateModel::validate() const {
  for (double r : {gamma_rad, gamma_isc0, gamma_iscpm, gamma_s0, gamma_spm,
                   epsilon, w, gamma_ion})
    if (!(r >= 0.0) || !std::isfinite(r))
      throw std::invalid_argument("rates, epsilon and w must be finite and >= 0");
}

JumpSet build_jumps(const RateModel& r, const BasisLayout& layout) {
  r.validate();
  if (r.gamma_ion > 0.0 && !layout.with_nv0())
    throw std::invalid_argument("gamma_ion > 0 requires the 24-level layout");

  JumpSet jumps;
  auto emit = [&](BasisIndex src, BasisIndex dst, double rate) {
    if (rate > 0.0) jumps.push_back({src, dst, rate});
  };

  for (int mi : kSpinProjections) {
    auto g = [&](int ms) { return BasisIndex{Manifold::Ground, ms, mi}; };
    auto e = [&](int ms) { return BasisIndex{Manifold::Excited, ms, mi}; };
    const BasisIndex s{Manifold::Singlet, 0, mi};

    for (int ms : kSpinProjections) {
      // radiative decay, spin-conserving plus epsilon leakage
      emit(e(ms), g(ms), r.gamma_rad);
      for (int msp : kSpinProjections)
        if (msp != ms) emit(e(ms), g(msp), r.epsilon * r.gamma_rad);
      // intersystem crossing into the singlet
      emit(e(ms), s, ms == 0 ? r.gamma_isc0 : r.gamma_iscpm);
      // singlet decay back to the ground triplet
      emit(s, g(ms), ms == 0 ? r.gamma_s0 : r.gamma_spm);
      // optical pumping mirrors the radiative families scaled by w
      emit(g(ms), e(ms), r.w * r.gamma_rad);
      if (r.pump_mirrors_leakage)
        for (int msp : kSpinProjections)
          if (msp != ms) emit(g(ms), e(msp), r.w * r.epsilon * r.gamma_rad);
    }

    if (r.gamma_ion > 0.0) {
      const BasisIndex n{Manifold::Nv0, 0, mi};
      for (int ms : kSpinProjections) emit(e(ms), n, r.gamma_ion);
      if (r.recombine_equal_split) {
        for (int ms : kSpinProjections) emit(n, g(ms), r.gamma_ion / 3.0);
      } else {
        emit(n, g(0), r.gamma_ion);
      }
    }
  }
  return jumps;
}

Liouvillian assemble_liouvillian(const HamiltonianSet& h, const JumpSet& jumps) {
  const BasisLayout& layout = h.layout;
  const int d = layout.dim();
  if (h.h_total.rows() != d || h.h_total.cols() != d)
    throw std::invalid_argument("hamiltonian dimension does not match layout");

  using Triplet = Eigen::Triplet<Complex>;
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(d) * d * 4);

  // vec index of entry (row, col) under column stacking
  auto at = [d](int row, int col) { return col * d + row; };

  // coherent part: -i 2 pi (I (x) H - H^T (x) I)
  const Complex minus_i_2pi = -imag_unit * two_pi;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      const Complex hab = h.h_total(a, b);
      if (hab == Complex(0, 0)) continue;
      for (int c = 0; c < d; ++c) {
        trip.emplace_back(at(a, c), at(b, c), minus_i_2pi * hab);
        trip.emplace_back(at(c, b), at(c, a), -minus_i_2pi * hab);
      }
    }

  // jumps: gain conj(L)(x)L plus anticommutator damping, all rank-one here
  for (const Jump& j : jumps) {
    const int src = layout.flat_index(j.source);
    const int dst = layout.flat_index(j.target);
    if (src == dst) throw std::invalid_argument("jump endpoints must differ");
    trip.emplace_back(at(dst, dst), at(src, src), Complex(j.rate, 0));
    for (int c = 0; c < d; ++c) {
      trip.emplace_back(at(src, c), at(src, c), Complex(-0.5 * j.rate, 0));
      trip.emplace_back(at(c, src), at(c, src), Complex(-0.5 * j.rate, 0));
    }
  }

  SparseMatrix op(d * d, d * d);
  op.setFromTriplets(trip.begin(), trip.end());
  op.makeCompressed();
  return Liouvillian{std::move(op), layout};
}

}  // namespace nvdnp
