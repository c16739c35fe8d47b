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

#include <stdexcept>
#include <string>

#include "nvdnp/types.hpp"

namespace nvdnp {

/// Dimensionless spin-1 operators in the ordered basis m = +1, 0, -1.
struct SpinOps {
  Matrix3 sx, sy, sz, id3;
};

SpinOps spin1_ops();

/// Electronic/charge manifolds of the NV- + 14N level scheme. Ground and
/// Excited carry electron (S=1) x nucleus (I=1) product states; Singlet and
/// Nv0 carry only the nuclear triplet.
enum class Manifold { Ground, Excited, Singlet, Nv0 };

std::string to_string(Manifold m);

/// One composite basis state. m_s is meaningful only for Ground/Excited.
struct BasisIndex {
  Manifold manifold = Manifold::Ground;
  int m_s = 0;
  int m_i = 0;

  friend bool operator==(const BasisIndex&, const BasisIndex&) = default;
};

/// Fixed ordering of the composite basis: Ground block (m_s = +1,0,-1 outer,
/// m_i = +1,0,-1 inner), then Excited likewise, then Singlet (m_i = +1,0,-1),
/// then optionally Nv0 (m_i = +1,0,-1). Flat indices are 0..20, or 0..23 when
/// the charge-state level is enabled.
class BasisLayout {
 public:
  explicit BasisLayout(bool with_nv0 = false) : with_nv0_(with_nv0) {}

  bool with_nv0() const { return with_nv0_; }
  int dim() const { return with_nv0_ ? 24 : 21; }

  int flat_index(const BasisIndex& b) const;
  BasisIndex basis_of(int index) const;

  int block_offset(Manifold m) const;
  int block_size(Manifold m) const;  // 9 for Ground/Excited, 3 for Singlet/Nv0

  friend bool operator==(const BasisLayout&, const BasisLayout&) = default;

 private:
  bool with_nv0_;
};

/// Places an electron (x) nucleus operator into the diagonal block of the
/// given manifold; all other entries are zero. Singlet/Nv0 accept only
/// nuclear operators, i.e. op_electron must be the identity there.
Matrix embed(const Matrix3& op_electron, const Matrix3& op_nucleus,
             Manifold manifold, const BasisLayout& layout);

/// Kronecker product with the first factor owning the slow (outer) index.
template <typename DerivedA, typename DerivedB>
Matrix kron(const Eigen::MatrixBase<DerivedA>& a,
            const Eigen::MatrixBase<DerivedB>& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
          Complex(a(i, j)) * b;
  return out;
}

/// Column-stacking vectorization, vec(A rho B) = (B^T (x) A) vec(rho).
inline Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

inline Matrix unvec(const Vector& v, int dim) {
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

}  // namespace nvdnp
