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
#include "nvdnp/spin_core.hpp"

#include <cmath>

namespace nvdnp {

namespace {

// Row/column position of projection m within a spin-1 block, basis +1,0,-1.
int m_pos(int m) { return 1 - m; }

bool valid_m(int m) { return m == 1 || m == 0 || m == -1; }

}  // namespace

SpinOps spin1_ops() {
  SpinOps ops;
  const double r = 1.0 / std::sqrt(2.0);
  ops.sx << 0, r, 0, r, 0, r, 0, r, 0;
  ops.sy << Complex(0, 0), Complex(0, -r), Complex(0, 0),  //
      Complex(0, r), Complex(0, 0), Complex(0, -r),        //
      Complex(0, 0), Complex(0, r), Complex(0, 0);
  ops.sz << 1, 0, 0, 0, 0, 0, 0, 0, -1;
  ops.id3 = Matrix3::Identity();
  return ops;
}

std::string to_string(Manifold m) {
  switch (m) {
    case Manifold::Ground: return "ground";
    case Manifold::Excited: return "excited";
    case Manifold::Singlet: return "singlet";
    case Manifold::Nv0: return "nv0";
  }
  return "?";
}

int BasisLayout::block_offset(Manifold m) const {
  switch (m) {
    case Manifold::Ground: return 0;
    case Manifold::Excited: return 9;
    case Manifold::Singlet: return 18;
    case Manifold::Nv0:
      if (!with_nv0_)
        throw std::out_of_range("nv0 manifold not present in 21-level layout");
      return 21;
  }
  throw std::out_of_range("unknown manifold");
}

int BasisLayout::block_size(Manifold m) const {
  return (m == Manifold::Ground || m == Manifold::Excited) ? 9 : 3;
}

int BasisLayout::flat_index(const BasisIndex& b) const {
  if (!valid_m(b.m_i)) throw std::out_of_range("m_i must be +1, 0 or -1");
  const int off = block_offset(b.manifold);
  if (b.manifold == Manifold::Ground || b.manifold == Manifold::Excited) {
    if (!valid_m(b.m_s)) throw std::out_of_range("m_s must be +1, 0 or -1");
    return off + 3 * m_pos(b.m_s) + m_pos(b.m_i);
  }
  return off + m_pos(b.m_i);
}

BasisIndex BasisLayout::basis_of(int index) const {
  if (index < 0 || index >= dim())
    throw std::out_of_range("flat index out of range for layout");
  BasisIndex b;
  if (index < 18) {
    b.manifold = index < 9 ? Manifold::Ground : Manifold::Excited;
    const int r = index % 9;
    b.m_s = 1 - r / 3;
    b.m_i = 1 - r % 3;
  } else {
    b.manifold = index < 21 ? Manifold::Singlet : Manifold::Nv0;
    b.m_s = 0;
    b.m_i = 1 - index % 3;
  }
  return b;
}

Matrix embed(const Matrix3& op_electron, const Matrix3& op_nucleus,
             Manifold manifold, const BasisLayout& layout) {
  const int d = layout.dim();
  Matrix out = Matrix::Zero(d, d);
  const int off = layout.block_offset(manifold);
  if (manifold == Manifold::Ground || manifold == Manifold::Excited) {
    out.block(off, off, 9, 9) = kron(op_electron, op_nucleus);
  } else {
    if (!op_electron.isIdentity(1e-14))
      throw std::invalid_argument(
          "singlet/nv0 blocks carry no electron spin; electronic operator "
          "must be the identity");
    out.block(off, off, 3, 3) = op_nucleus;
  }
  return out;
}

}  // namespace nvdnp
