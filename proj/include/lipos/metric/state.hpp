// state.hpp — states and matrix states on block operator systems.
//
// A state is stored as one density block per ambient block (PSD, traces
// summing to 1); its pairing with the hermitian basis gives the dual
// coordinates used by the distance solvers.  A matrix state is a unital map
// X → M_p stored through its Choi blocks; complete positivity is recorded as
// a verified flag rather than a hard invariant so that unital positive
// non-CP maps (e.g. the transpose) can still be measured against UCP ones.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "lipos/core/blocks.hpp"
#include "lipos/core/common.hpp"
#include "lipos/core/subsystem.hpp"

namespace lipos::metric {

using core::BlockElement;
using core::BlockShape;
using core::MatC;
using core::MatR;
using core::OperatorSubsystem;
using core::VecR;
using core::cplx;

// ---- states -----------------------------------------------------------------------

struct State {
  std::vector<MatC> rho;  // one PSD block per ambient block; Σ traces = 1

  // Evaluation ω(x) = Σ_k tr(ρ_k x_k).
  double eval(const BlockElement& x) const {
    cplx v = 0.0;
    for (std::size_t k = 0; k < rho.size(); ++k) v += (rho[k] * x.blocks[k]).trace();
    return v.real();
  }

  // Dual coordinates against the hermitian basis: coords(j) = ω(b_j).
  VecR coords(const OperatorSubsystem& sys) const {
    VecR c(sys.dim());
    for (int j = 0; j < sys.dim(); ++j) c(j) = eval(sys.basis()[j]);
    return c;
  }
};

inline State make_state(const BlockShape& shape, std::vector<MatC> rho) {
  if (static_cast<int>(rho.size()) != shape.block_count())
    throw std::invalid_argument("make_state: block count mismatch");
  double trace_sum = 0.0;
  for (int k = 0; k < shape.block_count(); ++k) {
    const MatC& r = rho[k];
    if (r.rows() != shape.dims[k] || r.cols() != shape.dims[k])
      throw std::invalid_argument("make_state: density block dimension mismatch");
    if ((r - r.adjoint()).norm() > 1e-10 * std::max(1.0, r.norm()))
      throw std::invalid_argument("make_state: density block is not hermitian");
    Eigen::SelfAdjointEigenSolver<MatC> es(r, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw std::invalid_argument("make_state: density block is not PSD");
    trace_sum += r.trace().real();
  }
  if (std::abs(trace_sum - 1.0) > 1e-10)
    throw std::invalid_argument("make_state: traces do not sum to 1");
  return State{std::move(rho)};
}

// The vector state x ↦ ⟨ξ, x_k ξ⟩ supported on one block.
inline State vector_state(const BlockShape& shape, int block, const Eigen::VectorXcd& xi) {
  if (block < 0 || block >= shape.block_count())
    throw std::invalid_argument("vector_state: block index out of range");
  if (xi.size() != shape.dims[block] || std::abs(xi.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("vector_state: need a unit vector of the block dimension");
  std::vector<MatC> rho;
  for (int k = 0; k < shape.block_count(); ++k)
    rho.push_back(k == block ? MatC(xi * xi.adjoint()) : MatC::Zero(shape.dims[k], shape.dims[k]));
  return State{std::move(rho)};
}

// Point evaluation of an abelian system.
inline State delta_state(const BlockShape& shape, int point) {
  if (!shape.abelian()) throw std::invalid_argument("delta_state: system is not abelian");
  Eigen::VectorXcd xi(1);
  xi << 1.0;
  return vector_state(shape, point, xi);
}

// The normalized trace across all blocks.
inline State uniform_state(const BlockShape& shape) {
  double total = 0.0;
  for (int dk : shape.dims) total += dk;
  std::vector<MatC> rho;
  for (int dk : shape.dims) rho.push_back(MatC::Identity(dk, dk) / total);
  return State{std::move(rho)};
}

// Seeded random full-rank state (Wishart blocks, normalized total trace).
inline State random_state(const BlockShape& shape, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<MatC> rho;
  double total = 0.0;
  for (int dk : shape.dims) {
    MatC a(dk, dk);
    for (int i = 0; i < dk; ++i)
      for (int j = 0; j < dk; ++j) a(i, j) = cplx(gauss(rng), gauss(rng));
    MatC r = a * a.adjoint();
    total += r.trace().real();
    rho.push_back(std::move(r));
  }
  for (auto& r : rho) r /= total;
  return State{std::move(rho)};
}

// Extreme-state mesh: point evaluations for 1-dimensional blocks, a Fibonacci
// mesh of Bloch-sphere pure states for 2-dimensional blocks, and seeded random
// pure states for anything larger.  Every convex function on the state space
// attains its sup on such pure single-block states (mesh granularity aside).
inline std::vector<State> extreme_states(const BlockShape& shape, int per_block_mesh = 512) {
  std::vector<State> out;
  std::mt19937_64 rng = core::make_rng(core::kDefaultSeed + 7);
  for (int k = 0; k < shape.block_count(); ++k) {
    const int d = shape.dims[k];
    if (d == 1) {
      out.push_back(delta_state(shape, k));
      continue;
    }
    std::vector<Eigen::Vector3d> bloch;
    if (d == 2) bloch = core::fibonacci_sphere(per_block_mesh);
    for (int i = 0; i < per_block_mesh; ++i) {
      Eigen::VectorXcd xi(d);
      if (d == 2) {
        const double theta = std::acos(std::clamp(bloch[i].z(), -1.0, 1.0));
        const double phi = std::atan2(bloch[i].y(), bloch[i].x());
        xi << std::cos(0.5 * theta), std::polar(std::sin(0.5 * theta), phi);
      } else {
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int j = 0; j < d; ++j) xi(j) = cplx(gauss(rng), gauss(rng));
        xi /= xi.norm();
      }
      out.push_back(vector_state(shape, k, xi));
    }
  }
  return out;
}

// ---- matrix states ----------------------------------------------------------------

// A unital map Φ: ⊕_k M_{d_k} → M_p through its Choi blocks
// C_k[(i·p+s), (j·p+t)] = Φ_k(E_ij)_{st}; Φ is CP iff every C_k is PSD.
struct MatrixState {
  int p = 1;
  std::vector<MatC> choi;  // one block per ambient block, size d_k·p
  bool cp = false;         // verified: min eigenvalue of every Choi block ≥ -1e-9

  // Φ(x) = Σ_k Σ_ij (x_k)_{ij} Φ_k(E_ij).
  MatC apply(const BlockElement& x) const {
    MatC out = MatC::Zero(p, p);
    for (std::size_t k = 0; k < choi.size(); ++k) {
      const MatC& xk = x.blocks[k];
      const int d = static_cast<int>(xk.rows());
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          if (xk(i, j) == cplx(0.0, 0.0)) continue;
          out += xk(i, j) * choi[k].block(i * p, j * p, p, p);
        }
    }
    return out;
  }
};

inline MatrixState make_matrix_state(const BlockShape& shape, int p, std::vector<MatC> choi) {
  if (p < 1) throw std::invalid_argument("make_matrix_state: p must be positive");
  if (static_cast<int>(choi.size()) != shape.block_count())
    throw std::invalid_argument("make_matrix_state: block count mismatch");
  MatC unit_image = MatC::Zero(p, p);
  bool cp = true;
  for (int k = 0; k < shape.block_count(); ++k) {
    const int dk = shape.dims[k];
    const MatC& c = choi[k];
    if (c.rows() != dk * p || c.cols() != dk * p)
      throw std::invalid_argument("make_matrix_state: Choi block dimension mismatch");
    if ((c - c.adjoint()).norm() > 1e-9 * std::max(1.0, c.norm()))
      throw std::invalid_argument("make_matrix_state: Choi block is not hermitian");
    Eigen::SelfAdjointEigenSolver<MatC> es(c, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9) cp = false;
    for (int i = 0; i < dk; ++i) unit_image += c.block(i * p, i * p, p, p);
  }
  if ((unit_image - MatC::Identity(p, p)).norm() > 1e-8)
    throw std::invalid_argument("make_matrix_state: map is not unital");
  return MatrixState{p, std::move(choi), cp};
}

// p = 1 embedding of an ordinary state (Choi block = conjugate density).
inline MatrixState matrix_state(const BlockShape& shape, const State& w) {
  std::vector<MatC> choi;
  for (const MatC& r : w.rho) choi.push_back(r.conjugate());
  return make_matrix_state(shape, 1, std::move(choi));
}

// The identity map on a single-block system (p = d).
inline MatrixState identity_map(const BlockShape& shape) {
  if (shape.block_count() != 1)
    throw std::invalid_argument("identity_map: single-block systems only");
  const int d = shape.dims[0];
  MatC c = MatC::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) c(i * d + i, j * d + j) = 1.0;  // Φ(E_ij) = E_ij
  return make_matrix_state(shape, d, {c});
}

// The transpose map on a single-block system: unital and positive, not CP.
inline MatrixState transpose_map(const BlockShape& shape) {
  if (shape.block_count() != 1)
    throw std::invalid_argument("transpose_map: single-block systems only");
  const int d = shape.dims[0];
  MatC c = MatC::Zero(d * d, d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) c(i * d + j, j * d + i) = 1.0;  // Φ(E_ij) = E_ji
  return make_matrix_state(shape, d, {c});
}

// Seeded random UCP map: random PSD Choi blocks pushed onto the unital slice
// by alternating PSD/affine projections (cap 500 passes, tolerance 1e-9).
inline MatrixState random_matrix_state(const BlockShape& shape, int p, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<MatC> choi;
  for (int dk : shape.dims) {
    MatC a(dk * p, dk * p);
    for (int i = 0; i < dk * p; ++i)
      for (int j = 0; j < dk * p; ++j) a(i, j) = cplx(gauss(rng), gauss(rng));
    choi.push_back(MatC(a * a.adjoint()));
  }
  double total_dim = 0.0;
  for (int dk : shape.dims) total_dim += dk;
  for (int pass = 0; pass < 500; ++pass) {
    // Affine step: shift the partial trace onto I_p, spread across blocks.
    MatC unit_image = MatC::Zero(p, p);
    for (std::size_t k = 0; k < choi.size(); ++k)
      for (int i = 0; i < shape.dims[k]; ++i) unit_image += choi[k].block(i * p, i * p, p, p);
    MatC corr = (MatC::Identity(p, p) - unit_image) / total_dim;
    for (std::size_t k = 0; k < choi.size(); ++k)
      for (int i = 0; i < shape.dims[k]; ++i) choi[k].block(i * p, i * p, p, p) += corr;
    // PSD step: clip negative eigenvalues.
    double worst = 0.0;
    for (auto& c : choi) {
      c = 0.5 * (c + c.adjoint().eval());
      Eigen::SelfAdjointEigenSolver<MatC> es(c);
      double lam_min = es.eigenvalues().minCoeff();
      worst = std::min(worst, lam_min);
      if (lam_min < 0.0) {
        Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
        c = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
      }
    }
    if (worst >= -1e-9 && std::abs(corr.norm()) <= 1e-9) break;
  }
  return make_matrix_state(shape, p, std::move(choi));
}

}  // namespace lipos::metric
