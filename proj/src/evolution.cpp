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
#include "nvdnp/evolution.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace nvdnp {

namespace {

uint64_t time_key(double t) {
  uint64_t k;
  static_assert(sizeof(k) == sizeof(t));
  std::memcpy(&k, &t, sizeof(k));
  return k;
}

int manifold_count(const BasisLayout& layout) {
  return layout.with_nv0() ? 4 : 3;
}

int manifold_of_level(int level) {
  if (level < 9) return 0;
  if (level < 18) return 1;
  if (level < 21) return 2;
  return 3;
}

}  // namespace

void assert_density_invariants(const DensityState& s, const char* where) {
  const Matrix& rho = s.rho;
  if (rho.rows() != rho.cols())
    throw std::runtime_error(std::string(where) + ": density matrix not square");
  const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (herm > 1e-9)
    throw std::runtime_error(std::string(where) +
                             ": hermiticity violated, defect " + std::to_string(herm));
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > 1e-9)
    throw std::runtime_error(std::string(where) + ": trace " + std::to_string(tr) +
                             " deviates from one");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()),
                                           Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -1e-8)
    throw std::runtime_error(std::string(where) + ": negative eigenvalue " +
                             std::to_string(min_eig));
}

std::array<double, 3> populations(const DensityState& s,
                                  const BasisLayout& layout) {
  std::array<double, 3> p{};
  for (int k = 0; k < 3; ++k) {
    const int idx = layout.flat_index({Manifold::Ground, 0, 1 - k});
    p[k] = s.rho(idx, idx).real();
  }
  const double sum = p[0] + p[1] + p[2];
  if (sum <= 1e-12)
    throw std::domain_error(
        "populations: no ground m_s = 0 population to normalize");
  for (double& x : p) x /= sum;
  return p;
}

DensityState apply_pi_swap(const DensityState& s, const BasisLayout& layout) {
  const int a = layout.flat_index({Manifold::Ground, 0, +1});
  const int b = layout.flat_index({Manifold::Ground, 0, 0});
  Matrix rho = s.rho;
  rho.row(a).swap(rho.row(b));
  rho.col(a).swap(rho.col(b));
  return DensityState{std::move(rho)};
}

Propagator::Propagator(const Liouvillian& liouville)
    : layout_(liouville.layout) {
  const int d = layout_.dim();
  const int nm = manifold_count(layout_);

  // sector 0 is the merged intra-manifold sector; ordered pairs (a,b), a != b
  // get one sector each
  std::vector<std::vector<int>> pair_sector(nm, std::vector<int>(nm, 0));
  int next = 1;
  for (int a = 0; a < nm; ++a)
    for (int b = 0; b < nm; ++b)
      if (a != b) pair_sector[a][b] = next++;
  sectors_.resize(next);

  sector_of_.resize(d * d);
  pos_in_sector_.resize(d * d);
  for (int col = 0; col < d; ++col)
    for (int row = 0; row < d; ++row) {
      const int v = col * d + row;
      const int sid = pair_sector[manifold_of_level(row)][manifold_of_level(col)];
      sector_of_[v] = sid;
      pos_in_sector_[v] = static_cast<int>(sectors_[sid].vec_idx.size());
      sectors_[sid].vec_idx.push_back(v);
    }

  for (Sector& s : sectors_) {
    const int n = static_cast<int>(s.vec_idx.size());
    s.gen = Matrix::Zero(n, n);
  }
  for (int outer = 0; outer < liouville.op.outerSize(); ++outer)
    for (SparseMatrix::InnerIterator it(liouville.op, outer); it; ++it) {
      const int si = sector_of_[it.row()];
      if (si != sector_of_[it.col()])
        throw std::logic_error(
            "generator couples distinct manifold-pair sectors");
      sectors_[si].gen(pos_in_sector_[it.row()], pos_in_sector_[it.col()]) +=
          it.value();
    }
}

const Matrix& Propagator::step_matrix(Sector& s, double t) {
  auto [it, inserted] = s.cache.try_emplace(time_key(t));
  if (inserted) it->second = Matrix(s.gen * t).exp();
  return it->second;
}

DensityState Propagator::apply(const DensityState& rho0, double t_us) {
  if (!(t_us >= 0.0))
    throw std::invalid_argument("propagation time must be >= 0");
  const int d = layout_.dim();
  if (rho0.rho.rows() != d || rho0.rho.cols() != d)
    throw std::invalid_argument("state dimension does not match generator");
  if (t_us == 0.0) return rho0;

  const Vector v0 = vec(rho0.rho);
  Vector v1 = Vector::Zero(v0.size());
  for (Sector& s : sectors_) {
    const int n = static_cast<int>(s.vec_idx.size());
    Vector sub(n);
    for (int k = 0; k < n; ++k) sub[k] = v0[s.vec_idx[k]];
    // untouched sectors stay zero; skip their exponentials
    if (sub.cwiseAbs().maxCoeff() > 0.0) sub = step_matrix(s, t_us) * sub;
    for (int k = 0; k < n; ++k) v1[s.vec_idx[k]] = sub[k];
  }

  Matrix rho = unvec(v1, d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  DensityState out{std::move(rho)};
  assert_density_invariants(out, "propagate");
  return out;
}

DensityState propagate(const Liouvillian& liouville, const DensityState& rho0,
                       double t_us) {
  Propagator prop(liouville);
  return prop.apply(rho0, t_us);
}

DensityState steady_state(const Liouvillian& liouville) {
  const BasisLayout& layout = liouville.layout;
  const int d = layout.dim();

  // restrict to the intra-manifold sector, where any kernel vector lives
  // (inter-manifold coherences are damped whenever decay rates are nonzero)
  std::vector<int> intra;
  intra.reserve(d * d);
  std::vector<int> pos(d * d, -1);
  for (int col = 0; col < d; ++col)
    for (int row = 0; row < d; ++row)
      if (manifold_of_level(row) == manifold_of_level(col)) {
        pos[col * d + row] = static_cast<int>(intra.size());
        intra.push_back(col * d + row);
      }
  const int n = static_cast<int>(intra.size());

  Matrix gen = Matrix::Zero(n, n);
  for (int outer = 0; outer < liouville.op.outerSize(); ++outer)
    for (SparseMatrix::InnerIterator it(liouville.op, outer); it; ++it) {
      if (pos[it.row()] < 0) continue;
      if (pos[it.col()] < 0) {
        if (std::abs(it.value()) > 0) continue;  // cannot happen structurally
      } else {
        gen(pos[it.row()], pos[it.col()]) += it.value();
      }
    }

  // trace functional restricted to the intra sector (left null vector)
  Vector tvec = Vector::Zero(n);
  for (int k = 0; k < n; ++k) {
    const int v = intra[k];
    if (v % d == v / d) tvec[k] = 1.0;
  }

  // deflated inverse iteration: kernel vector, then the next-slowest mode
  {
    Eigen::PartialPivLU<Matrix> lu(gen - 1e-9 * Matrix::Identity(n, n));
    Vector x = Vector::Ones(n);
    for (int i = 0; i < n; ++i) x[i] += Complex(0.0, 1e-3 * ((i * 37) % 11));
    for (int it = 0; it < 8; ++it) x = lu.solve(x).normalized();
    const Complex trace_x = tvec.dot(x);
    if (std::abs(trace_x) < 1e-12)
      throw std::runtime_error("steady_state: traceless kernel candidate");
    Vector y = Vector::Ones(n);
    for (int i = 0; i < n; ++i) y[i] += Complex(1e-3 * ((i * 17) % 7), 1e-4 * i);
    for (int it = 0; it < 12; ++it) {
      y = lu.solve(y);
      y -= x * (tvec.dot(y) / trace_x);  // exact oblique deflation of the kernel
      y.normalize();
    }
    const Complex lambda2 = y.dot(gen * y);
    if (std::abs(lambda2.real()) <= 1e-6)
      throw std::runtime_error(
          "steady_state: degenerate kernel (multiple steady states); "
          "second eigenvalue real part " + std::to_string(lambda2.real()));
  }

  // bordered system [gen, tvec; tvec^T, 0] [x; mu] = [0; 1]
  Matrix bordered = Matrix::Zero(n + 1, n + 1);
  bordered.topLeftCorner(n, n) = gen;
  bordered.topRightCorner(n, 1) = tvec;
  bordered.bottomLeftCorner(1, n) = tvec.transpose();
  Vector rhs = Vector::Zero(n + 1);
  rhs[n] = 1.0;
  Eigen::PartialPivLU<Matrix> lu(bordered);
  Vector sol = lu.solve(rhs);
  sol += lu.solve(rhs - bordered * sol);  // one step of iterative refinement

  const double residual = (gen * sol.head(n)).cwiseAbs().maxCoeff();
  if (residual > 1e-9)
    throw std::runtime_error("steady_state: solve residual " +
                             std::to_string(residual) + " exceeds 1e-9");

  Matrix rho = Matrix::Zero(d, d);
  for (int k = 0; k < n; ++k) rho(intra[k] % d, intra[k] / d) = sol[k];
  rho = 0.5 * (rho + rho.adjoint()).eval();
  DensityState out{std::move(rho)};
  assert_density_invariants(out, "steady_state");
  return out;
}

PolarizationTrace dnp_sequence(const SystemParams& p, const FieldConfig& f,
                               const RateModel& r,
                               std::span<const double> t_grid_us,
                               const DnpOptions& opt) {
  if (t_grid_us.empty())
    throw std::invalid_argument("dnp_sequence: time grid must be nonempty");
  for (size_t i = 0; i < t_grid_us.size(); ++i) {
    if (!(t_grid_us[i] >= 0.0))
      throw std::invalid_argument("dnp_sequence: times must be >= 0");
    if (i > 0 && !(t_grid_us[i] > t_grid_us[i - 1]))
      throw std::invalid_argument("dnp_sequence: times must be increasing");
  }

  const BasisLayout layout(r.gamma_ion > 0.0 || opt.force_nv0);
  const HamiltonianSet h = build_hamiltonian(p, f, layout);
  const Liouvillian pump_on = assemble_liouvillian(h, build_jumps(r, layout));
  RateModel r_off = r;
  r_off.w = 0.0;
  const Liouvillian pump_off =
      assemble_liouvillian(h, build_jumps(r_off, layout));

  DensityState rho;
  if (layout.with_nv0() && r.gamma_ion == 0.0) {
    // Nv0 is unreachable at gamma_ion = 0, which makes the full kernel
    // degenerate; prepare on the reachable 21-level subspace and embed.
    const BasisLayout bare;
    const DensityState ss21 = steady_state(
        assemble_liouvillian(build_hamiltonian(p, f, bare), build_jumps(r, bare)));
    rho.rho = Matrix::Zero(layout.dim(), layout.dim());
    rho.rho.topLeftCorner(21, 21) = ss21.rho;
  } else {
    rho = steady_state(pump_on);
  }
  rho = propagate(pump_off, rho, opt.relax_us);
  rho = apply_pi_swap(rho, layout);

  Propagator prop(pump_on);
  PolarizationTrace trace;
  trace.times.assign(t_grid_us.begin(), t_grid_us.end());
  double t_prev = 0.0;
  for (double t : t_grid_us) {
    rho = prop.apply(rho, t - t_prev);
    t_prev = t;
    const auto pops = populations(rho, layout);
    trace.p_plus1.push_back(pops[0]);
    trace.p_zero.push_back(pops[1]);
    trace.p_minus1.push_back(pops[2]);
  }
  return trace;
}

}  // namespace nvdnp
