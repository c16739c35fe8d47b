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

#include <Eigen/Eigenvalues>
#include <random>

#include "nvdnp/hamiltonian.hpp"
#include "test_util.hpp"

using namespace nvdnp;

TEST_CASE("aligned-field diagonal entry matches the hand sum") {
  const SystemParams p;
  const FieldConfig f{348.0, 0.0};
  const HamiltonianSet h = build_hamiltonian(p, f);
  // |+1,+1>_g: d_g + gamma_e B + q + a_par + gamma_n B = 3837.881816 MHz
  CHECK(h.h_total(0, 0).real() == doctest::Approx(3837.881816).epsilon(1e-9));
  CHECK(h.h_total(0, 0).imag() == 0.0);
}

TEST_CASE("hamiltonian is hermitian and block diagonal over random draws") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ub(0.0, 600.0), ut(0.0, 90.0),
      uc(-60.0, 0.0);
  for (int trial = 0; trial < 50; ++trial) {
    SystemParams p;
    p.c_perp = uc(rng);
    const FieldConfig f{ub(rng), ut(rng)};
    const HamiltonianSet h = build_hamiltonian(p, f);
    CHECK((h.h_total - h.h_total.adjoint()).cwiseAbs().maxCoeff() <
          1e-10 * h.h_total.cwiseAbs().maxCoeff());
    // no coherent inter-manifold terms
    CHECK(h.h_total.block(0, 9, 9, 12).cwiseAbs().maxCoeff() == 0.0);
    CHECK(h.h_total.block(9, 18, 9, 3).cwiseAbs().maxCoeff() == 0.0);
    CHECK(h.h_total.block(18, 0, 3, 18).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("aligned excited block conserves m_s + m_i") {
  SystemParams p;
  p.c_perp = -23.0;
  const HamiltonianSet h = build_hamiltonian(p, FieldConfig{348.0, 0.0});
  const BasisLayout& layout = h.layout;
  for (int i = 9; i < 18; ++i)
    for (int j = 9; j < 18; ++j) {
      const BasisIndex a = layout.basis_of(i), b = layout.basis_of(j);
      if (a.m_s + a.m_i != b.m_s + b.m_i)
        CHECK(std::abs(h.h_total(i, j)) < 1e-12);
    }
}

TEST_CASE("zero field and zero hyperfine gives degenerate d_g gaps") {
  SystemParams p;
  p.a_par = 0.0;
  p.a_perp = 0.0;
  const HamiltonianSet h = build_hamiltonian(p, FieldConfig{0.0, 0.0});
  const Matrix g = h.h_total.block(0, 0, 9, 9);
  // electronic gaps: E(+-1, mi) - E(0, mi) = d_g
  for (int mi = 0; mi < 3; ++mi) {
    CHECK(g(mi, mi).real() - g(3 + mi, 3 + mi).real() ==
          doctest::Approx(2870.0));
    CHECK(g(6 + mi, 6 + mi).real() - g(3 + mi, 3 + mi).real() ==
          doctest::Approx(2870.0));
  }
}

TEST_CASE("eslac field from the default constants") {
  const SystemParams p;
  CHECK(eslac_field(p) == doctest::Approx(506.780871).epsilon(1e-6));
  SystemParams doubled = p;
  doubled.d_e *= 2.0;
  CHECK(eslac_field(doubled) == doctest::Approx(2.0 * eslac_field(p)));
}

TEST_CASE("excited level gap of the mixed pair is minimal near the eslac field") {
  SystemParams p;
  p.c_perp = -23.0;
  const BasisLayout layout;
  const int i_0m1 = layout.flat_index({Manifold::Excited, 0, -1}) - 9;
  const int i_m10 = layout.flat_index({Manifold::Excited, -1, 0}) - 9;
  double best_b = 0.0, best_gap = 1e300;
  for (double b = 460.0; b <= 560.0; b += 0.25) {
    const HamiltonianSet h = build_hamiltonian(p, FieldConfig{b, 0.0});
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.h_total.block(9, 9, 9, 9));
    // track the two eigenstates with the largest weight on |0,-1>_e and
    // |-1,0>_e and measure the gap of that hybridized pair
    int ia = 0, ib = 0;
    for (int k = 1; k < 9; ++k) {
      if (std::norm(es.eigenvectors()(i_0m1, k)) >
          std::norm(es.eigenvectors()(i_0m1, ia)))
        ia = k;
      if (std::norm(es.eigenvectors()(i_m10, k)) >
          std::norm(es.eigenvectors()(i_m10, ib)))
        ib = k;
    }
    if (ia == ib) continue;  // fully hybridized sample point, skip
    const double gap =
        std::abs(es.eigenvalues()[ia] - es.eigenvalues()[ib]);
    if (gap < best_gap) {
      best_gap = gap;
      best_b = b;
    }
  }
  CHECK(std::abs(best_b - eslac_field(p)) <= 10.0);
  CHECK(best_gap > 0.0);
}

TEST_CASE("cubic roots: aligned-field factorization is exact") {
  const SystemParams p;
  for (double b : {0.0, 100.0, 252.0, 600.0, 899.0}) {
    const auto roots = solve_cubic(p, b, 0.0);
    const double zb = p.gamma_e * b;
    CHECK(std::abs(roots[0] - 0.0) < 1e-10);
    CHECK(std::abs(roots[1] - (p.d_g - zb)) < 1e-10);
    CHECK(std::abs(roots[2] - (p.d_g + zb)) < 1e-10);
  }
}

TEST_CASE("cubic roots: vieta sum, residuals and companion-matrix oracle") {
  const SystemParams p;
  std::mt19937_64 rng(57);
  std::uniform_real_distribution<double> ub(0.0, 890.0), ut(0.0, 90.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double b = ub(rng), theta = ut(rng);
    const auto roots = solve_cubic(p, b, theta);
    CHECK(std::abs(roots[0] + roots[1] + roots[2] - 2.0 * p.d_g) <
          1e-8 * 2.0 * p.d_g);
    // residual-based accuracy estimate |f(r)/f'(r)|, valid at any draw
    const double zb = p.gamma_e * b;
    const double a2 = -2.0 * p.d_g, a1 = p.d_g * p.d_g - zb * zb;
    const double a0 =
        0.5 * p.d_g * zb * zb * (1.0 - std::cos(2.0 * deg_to_rad(theta)));
    for (double r : roots) {
      const double f = ((r + a2) * r + a1) * r + a0;
      const double fd = (3.0 * r + 2.0 * a2) * r + a1;
      if (std::abs(fd) > 1.0) CHECK(std::abs(f / fd) < 1e-8);
    }
    // the companion-matrix eigensolve itself loses half the digits at
    // near-degenerate roots; compare at 1e-9 only where roots are separated
    const double sep =
        std::min(roots[1] - roots[0], roots[2] - roots[1]);
    if (sep > 10.0) {
      const auto oracle =
          test::companion_cubic_roots(p.d_g, p.gamma_e, b, theta);
      for (int k = 0; k < 3; ++k) CHECK(std::abs(roots[k] - oracle[k]) < 1e-9);
    }
  }
  // the example pinned against the oracle
  const auto roots = solve_cubic(p, 411.0, 0.8);
  const auto oracle = test::companion_cubic_roots(p.d_g, p.gamma_e, 411.0, 0.8);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(roots[k] - oracle[k]) < 1e-9);
}

TEST_CASE("ground transition frequencies") {
  const SystemParams p;
  SUBCASE("aligned field splits symmetrically") {
    const auto [np, nm] = ground_transition_frequencies(p, FieldConfig{252.0, 0.0});
    CHECK(np == doctest::Approx(2870.0 + 2.802 * 252.0).epsilon(1e-12));
    CHECK(nm == doctest::Approx(2870.0 - 2.802 * 252.0).epsilon(1e-12));
  }
  SUBCASE("zero field is degenerate at d_g") {
    const auto [np, nm] = ground_transition_frequencies(p, FieldConfig{0.0, 0.0});
    CHECK(np == doctest::Approx(2870.0));
    CHECK(nm == doctest::Approx(2870.0));
  }
  SUBCASE("tilted field matches the cubic roots") {
    const auto [np, nm] = ground_transition_frequencies(p, FieldConfig{252.0, 1.7});
    const auto roots = test::companion_cubic_roots(p.d_g, p.gamma_e, 252.0, 1.7);
    CHECK(std::abs(np - (roots[2] - roots[0])) < 1e-9);
    CHECK(std::abs(nm - (roots[1] - roots[0])) < 1e-9);
  }
  SUBCASE("electronic ground block reproduces the cubic spectrum") {
    SystemParams bare = p;
    bare.a_par = 0.0;
    bare.a_perp = 0.0;
    bare.gamma_n = 0.0;
    bare.q = 0.0;
    const HamiltonianSet h = build_hamiltonian(bare, FieldConfig{411.0, 2.5});
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.h_total.block(0, 0, 9, 9),
                                             Eigen::EigenvaluesOnly);
    const auto roots = solve_cubic(p, 411.0, 2.5);
    // each electronic level is threefold degenerate over m_i
    for (int k = 0; k < 3; ++k)
      for (int r = 0; r < 3; ++r)
        CHECK(std::abs(es.eigenvalues()[3 * k + r] - roots[k]) < 1e-8);
  }
  SUBCASE("gslac guard") {
    CHECK_THROWS_AS(ground_transition_frequencies(p, FieldConfig{950.0, 0.0}),
                    std::domain_error);
  }
}

TEST_CASE("transition frequencies are monotone in field when aligned") {
  const SystemParams p;
  double prev_p = 0.0, prev_m = 1e9;
  for (double b = 0.0; b <= 899.0; b += 20.0) {
    const auto [np, nm] = ground_transition_frequencies(p, FieldConfig{b, 0.0});
    if (b > 0.0) {
      CHECK(np > prev_p);
      CHECK(nm < prev_m);
    }
    prev_p = np;
    prev_m = nm;
  }
}

TEST_CASE("strain enters the ground electronic block only") {
  SystemParams p;
  p.strain_e = 5.0;
  const HamiltonianSet h = build_hamiltonian(p, FieldConfig{100.0, 0.0});
  const HamiltonianSet h0 = build_hamiltonian(SystemParams{}, FieldConfig{100.0, 0.0});
  CHECK((h.h_total.block(9, 9, 12, 12) - h0.h_total.block(9, 9, 12, 12))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((h.h_total.block(0, 0, 9, 9) - h0.h_total.block(0, 0, 9, 9))
            .cwiseAbs()
            .maxCoeff() > 0.0);
}

TEST_CASE("parameter validation") {
  SystemParams p;
  p.d_g = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  FieldConfig f{-1.0, 0.0};
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  FieldConfig f2{100.0, 91.0};
  CHECK_THROWS_AS(f2.validate(), std::invalid_argument);
}
