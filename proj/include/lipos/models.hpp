// models.hpp — the three built-in example families: parameterized Lip-normed
// systems, their limit families, and bridge seminorms coupling each member to
// its limit.  Everything is generated programmatically from block-entry
// functionals so parameter sweeps are unbounded.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lipos/core/subsystem.hpp"
#include "lipos/cstar/limit.hpp"
#include "lipos/seminorm/spec.hpp"

namespace lipos::models {

using core::BlockElement;
using core::BlockShape;
using core::MatC;
using core::MatR;
using core::OperatorSubsystem;
using core::VecR;
using core::cplx;

// A bridge between two Lip-normed systems: the component seminorms plus the
// joint seminorm on X ⊕ Y whose couplings tie the two sides together.
struct BridgeModel {
  sn::SeminormSpec left;
  sn::SeminormSpec right;
  sn::SeminormSpec bridge;
};

namespace detail {

// Basis coefficients of the complex entry functional x ↦ x.blocks[k](i, j).
inline std::vector<cplx> entry_coeffs(const OperatorSubsystem& sys, int k, int i, int j) {
  std::vector<cplx> c;
  c.reserve(static_cast<std::size_t>(sys.dim()));
  for (const auto& b : sys.basis()) c.push_back(b.blocks[static_cast<std::size_t>(k)](i, j));
  return c;
}

inline std::vector<cplx> axpy(cplx a, const std::vector<cplx>& x, cplx b,
                              const std::vector<cplx>& y) {
  std::vector<cplx> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = a * x[i] + b * y[i];
  return r;
}

// |f(x)| for a complex-linear functional f with basis coefficients c, as a
// two-row real map over the general coordinate layout [u; v]: for
// x = Σ (u_j + i v_j) b_j one has f(x) = Σ (u_j + i v_j) c_j.
inline MatR modulus_rows(const std::vector<cplx>& c) {
  const int m = static_cast<int>(c.size());
  MatR rows = MatR::Zero(2, 2 * m);
  for (int j = 0; j < m; ++j) {
    rows(0, j) = c[static_cast<std::size_t>(j)].real();
    rows(0, m + j) = -c[static_cast<std::size_t>(j)].imag();
    rows(1, j) = c[static_cast<std::size_t>(j)].imag();
    rows(1, m + j) = c[static_cast<std::size_t>(j)].real();
  }
  return rows;
}

// Same modulus map over a bridge's joint layout [uL; uR; vL; vR], for the
// functional with left coefficients cL and right coefficients cR.
inline MatR joint_modulus_rows(const std::vector<cplx>& cL, const std::vector<cplx>& cR) {
  const int mL = static_cast<int>(cL.size());
  const int mR = static_cast<int>(cR.size());
  MatR rows = MatR::Zero(2, 2 * mL + 2 * mR);
  for (int j = 0; j < mL; ++j) {
    rows(0, j) = cL[static_cast<std::size_t>(j)].real();
    rows(0, mL + mR + j) = -cL[static_cast<std::size_t>(j)].imag();
    rows(1, j) = cL[static_cast<std::size_t>(j)].imag();
    rows(1, mL + mR + j) = cL[static_cast<std::size_t>(j)].real();
  }
  for (int j = 0; j < mR; ++j) {
    rows(0, mL + j) = cR[static_cast<std::size_t>(j)].real();
    rows(0, 2 * mL + mR + j) = -cR[static_cast<std::size_t>(j)].imag();
    rows(1, mL + j) = cR[static_cast<std::size_t>(j)].imag();
    rows(1, 2 * mL + mR + j) = cR[static_cast<std::size_t>(j)].real();
  }
  return rows;
}

}  // namespace detail

// ---- two-by-two -------------------------------------------------------------------
//
// One 2×2 matrix block.  The parameterized norm weights the traceless diagonal
// part by n, so growing n pinches the diagonal onto multiples of the identity;
// the surviving subspace is the matrices with scalar diagonal.

inline OperatorSubsystem two_by_two_system() {
  BlockShape shape({2});
  std::vector<BlockElement> basis;
  basis.push_back(core::identity(shape));
  BlockElement sx(shape), sy(shape), sz(shape);
  sx.blocks[0] << 0, 1, 1, 0;
  sy.blocks[0] << 0, cplx(0, -1), cplx(0, 1), 0;
  sz.blocks[0] << 1, 0, 0, -1;
  basis.push_back(sx);
  basis.push_back(sy);
  basis.push_back(sz);
  return OperatorSubsystem(shape, std::move(basis));
}

// The span of {1, σx, σy}: matrices whose diagonal part is a multiple of the
// identity — the limit subspace of the two-by-two family.
inline OperatorSubsystem scalar_diagonal_system() {
  BlockShape shape({2});
  std::vector<BlockElement> basis;
  basis.push_back(core::identity(shape));
  BlockElement sx(shape), sy(shape);
  sx.blocks[0] << 0, 1, 1, 0;
  sy.blocks[0] << 0, cplx(0, -1), cplx(0, 1), 0;
  basis.push_back(sx);
  basis.push_back(sy);
  return OperatorSubsystem(shape, std::move(basis));
}

// max{ |(a11+a22)/2|, n·|(a11−a22)/2|, |a12|, |a21| } over general coordinates
// of the given 2×2-block system; atoms that vanish identically on the span
// (e.g. the diagonal difference on the scalar-diagonal subspace) are dropped.
inline sn::SeminormSpec two_by_two_norm(const OperatorSubsystem& sys, double n) {
  if (sys.shape().block_count() != 1 || sys.shape().dims[0] != 2)
    throw std::invalid_argument("two_by_two_norm: system must be a single 2x2 block");
  using detail::axpy;
  using detail::entry_coeffs;
  using detail::modulus_rows;
  const auto e11 = entry_coeffs(sys, 0, 0, 0);
  const auto e22 = entry_coeffs(sys, 0, 1, 1);
  const auto e12 = entry_coeffs(sys, 0, 0, 1);
  const auto e21 = entry_coeffs(sys, 0, 1, 0);
  struct Piece {
    std::vector<cplx> c;
    double weight;
  };
  const std::vector<Piece> pieces = {{axpy(0.5, e11, 0.5, e22), 1.0},
                                     {axpy(0.5, e11, -0.5, e22), n},
                                     {axpy(1.0, e12, 0.0, e12), 1.0},
                                     {axpy(1.0, e21, 0.0, e21), 1.0}};
  std::vector<sn::SeminormSpec> atoms;
  for (const auto& p : pieces) {
    MatR rows = modulus_rows(p.c);
    if (rows.norm() <= 0.0) continue;
    atoms.push_back(sn::SeminormSpec::linmap(std::move(rows), sn::PNorm::Two, p.weight, true));
  }
  return sn::SeminormSpec::max_of(std::move(atoms));
}

inline sn::SeminormSpec two_by_two_lip(double n) {
  return sn::SeminormSpec::quotient(two_by_two_norm(two_by_two_system(), n));
}

inline cstar::SeminormFamily two_by_two_family(std::vector<double> params = {1.0, 2.0, 4.0, 8.0,
                                                                             16.0}) {
  OperatorSubsystem sys = two_by_two_system();
  cstar::SeminormFamily F(sys);
  F.base = two_by_two_lip(1.0);
  MatR zrow = MatR::Zero(1, sys.dim());
  for (int j = 0; j < sys.dim(); ++j) {
    const MatC& b = sys.basis()[static_cast<std::size_t>(j)].blocks[0];
    zrow(0, j) = 0.5 * (b(0, 0) - b(1, 1)).real();
  }
  F.blowups = {sn::LinearMapAtom{std::move(zrow), sn::PNorm::Two, 1.0}};
  F.make = [](double p) { return two_by_two_lip(p); };
  F.params = std::move(params);
  F.id = "two-by-two";
  return F;
}

// Bridge over (scalar-diagonal) ⊕ (full 2×2): the couplings pin all four
// entry differences of D = A₀ − A with weight n, so the joint unit ball
// forces ‖A₀ − A‖ = O(1/n).
inline BridgeModel two_by_two_bridge(double n) {
  using detail::axpy;
  using detail::entry_coeffs;
  OperatorSubsystem left_sys = scalar_diagonal_system();
  OperatorSubsystem right_sys = two_by_two_system();
  sn::SeminormSpec left = sn::SeminormSpec::quotient(two_by_two_norm(left_sys, 1.0));
  sn::SeminormSpec right = two_by_two_lip(n);

  auto diff = [&](int i, int j) {
    return std::pair<std::vector<cplx>, std::vector<cplx>>{
        entry_coeffs(left_sys, 0, i, j),
        axpy(-1.0, entry_coeffs(right_sys, 0, i, j), 0.0, entry_coeffs(right_sys, 0, i, j))};
  };
  const auto [l11, r11] = diff(0, 0);
  const auto [l22, r22] = diff(1, 1);
  const auto [l12, r12] = diff(0, 1);
  const auto [l21, r21] = diff(1, 0);
  std::vector<sn::SeminormSpec> couplings;
  couplings.push_back(sn::SeminormSpec::linmap(
      detail::joint_modulus_rows(axpy(0.5, l11, 0.5, l22), axpy(0.5, r11, 0.5, r22)),
      sn::PNorm::Two, n, true));
  couplings.push_back(sn::SeminormSpec::linmap(
      detail::joint_modulus_rows(axpy(0.5, l11, -0.5, l22), axpy(0.5, r11, -0.5, r22)),
      sn::PNorm::Two, n, true));
  couplings.push_back(
      sn::SeminormSpec::linmap(detail::joint_modulus_rows(l12, r12), sn::PNorm::Two, n, true));
  couplings.push_back(
      sn::SeminormSpec::linmap(detail::joint_modulus_rows(l21, r21), sn::PNorm::Two, n, true));

  // Operator norm of A₀ − A over the joint layout [uL; uR; vL; vR].
  sn::OpNormAtom d;
  d.weight = 1.0;
  const int mL = left_sys.dim();
  const int mR = right_sys.dim();
  d.coeffs.resize(static_cast<std::size_t>(2 * mL + 2 * mR));
  for (int j = 0; j < mL; ++j) {
    const MatC& b = left_sys.basis()[static_cast<std::size_t>(j)].blocks[0];
    d.coeffs[static_cast<std::size_t>(j)] = b;
    d.coeffs[static_cast<std::size_t>(mL + mR + j)] = cplx(0, 1) * b;
  }
  for (int j = 0; j < mR; ++j) {
    const MatC& b = right_sys.basis()[static_cast<std::size_t>(j)].blocks[0];
    d.coeffs[static_cast<std::size_t>(mL + j)] = -b;
    d.coeffs[static_cast<std::size_t>(2 * mL + mR + j)] = cplx(0, -1) * b;
  }
  d.rebuild_sparsity();
  sn::SeminormSpec bridge =
      sn::SeminormSpec::make_bridge(left, right, std::move(couplings), {std::move(d)});
  return BridgeModel{std::move(left), std::move(right), std::move(bridge)};
}

// ---- flattening-triangle ----------------------------------------------------------
//
// Three points (a, b, c) with the distance between a and b held fixed while c
// is pulled onto their midpoint with weight n: the triangle state space
// flattens onto a segment, and the limit subspace is {c = (a+b)/2}.

inline OperatorSubsystem simplex3_system() {
  return OperatorSubsystem::full(BlockShape({1, 1, 1}));
}

inline OperatorSubsystem interval_system() { return OperatorSubsystem::full(BlockShape({1, 1})); }

namespace detail {

// Real row of the point-evaluation functional combination Σ w_i · x(p_i) over
// the hermitian coordinates of a commutative (all-1×1-blocks) system.
inline MatR point_row(const OperatorSubsystem& sys,
                      const std::vector<std::pair<int, double>>& points) {
  MatR row = MatR::Zero(1, sys.dim());
  for (auto [k, w] : points)
    for (int j = 0; j < sys.dim(); ++j)
      row(0, j) += w * sys.basis()[static_cast<std::size_t>(j)].blocks[static_cast<std::size_t>(k)](0, 0).real();
  return row;
}

}  // namespace detail

// ℓ2 of ( (a−b)/2, n·((a+b)/2 − c) ) over the hermitian coordinates of ℂ³.
inline sn::SeminormSpec flattening_lip(double n) {
  OperatorSubsystem sys = simplex3_system();
  MatR rows(2, sys.dim());
  rows.row(0) = detail::point_row(sys, {{0, 0.5}, {1, -0.5}});
  rows.row(1) = n * detail::point_row(sys, {{0, 0.5}, {1, 0.5}, {2, -1.0}});
  return sn::SeminormSpec::linmap(std::move(rows), sn::PNorm::Two, 1.0, false);
}

// |α−β|/2 on the two-point system.
inline sn::SeminormSpec interval_lip() {
  OperatorSubsystem sys = interval_system();
  return sn::SeminormSpec::linmap(detail::point_row(sys, {{0, 0.5}, {1, -0.5}}), sn::PNorm::Two,
                                  1.0, false);
}

inline cstar::SeminormFamily flattening_family(std::vector<double> params = {1.0, 2.0, 4.0, 8.0,
                                                                             16.0}) {
  OperatorSubsystem sys = simplex3_system();
  cstar::SeminormFamily F(sys);
  MatR stable = detail::point_row(sys, {{0, 0.5}, {1, -0.5}});
  MatR blow = detail::point_row(sys, {{0, 0.5}, {1, 0.5}, {2, -1.0}});
  F.base = sn::SeminormSpec::linmap(stable, sn::PNorm::Two, 1.0, false);
  F.blowups = {sn::LinearMapAtom{std::move(blow), sn::PNorm::Two, 1.0}};
  F.make = [](double p) { return flattening_lip(p); };
  F.params = std::move(params);
  F.id = "flattening-triangle";
  return F;
}

// Bridge over ℂ³ ⊕ ℂ²: couples (a, b, c) to (α, β) along the embedding
// (α, β) ↦ (α, β, (α+β)/2), all three coordinate differences with weight n.
inline BridgeModel flattening_bridge(double n) {
  OperatorSubsystem left_sys = simplex3_system();
  OperatorSubsystem right_sys = interval_system();
  sn::SeminormSpec left = flattening_lip(n);
  sn::SeminormSpec right = interval_lip();
  const int mL = left_sys.dim();
  const int mR = right_sys.dim();

  auto joint_row = [&](const std::vector<std::pair<int, double>>& lpts,
                       const std::vector<std::pair<int, double>>& rpts) {
    MatR row = MatR::Zero(1, mL + mR);
    row.block(0, 0, 1, mL) = detail::point_row(left_sys, lpts);
    row.block(0, mL, 1, mR) = -detail::point_row(right_sys, rpts);
    return row;
  };
  std::vector<MatR> rows = {
      joint_row({{0, 1.0}}, {{0, 1.0}}),                      // a − α
      joint_row({{1, 1.0}}, {{1, 1.0}}),                      // b − β
      joint_row({{2, 1.0}}, {{0, 0.5}, {1, 0.5}}),            // c − (α+β)/2
  };
  std::vector<sn::SeminormSpec> couplings;
  std::vector<sn::OpNormAtom> difference;
  for (const MatR& r : rows) {
    couplings.push_back(sn::SeminormSpec::linmap(r, sn::PNorm::Two, n, false));
    sn::OpNormAtom atom;
    atom.weight = 1.0;
    atom.coeffs.resize(static_cast<std::size_t>(mL + mR));
    for (int j = 0; j < mL + mR; ++j) {
      atom.coeffs[static_cast<std::size_t>(j)] = MatC::Zero(1, 1);
      atom.coeffs[static_cast<std::size_t>(j)](0, 0) = r(0, j);
    }
    atom.rebuild_sparsity();
    difference.push_back(std::move(atom));
  }
  sn::SeminormSpec bridge =
      sn::SeminormSpec::make_bridge(left, right, std::move(couplings), std::move(difference));
  return BridgeModel{std::move(left), std::move(right), std::move(bridge)};
}

// ---- tail-weighted ----------------------------------------------------------------
//
// K blocks of 2×2 matrices with the norm max_k k‖A_k‖ (blocks 1-based), so
// membership forces the tail A_k → 0 at rate 1/k; the parameterized seminorm
// adds diagonal-difference pinches of weight k³ on the first stages.  At a
// fixed cutoff the family stabilizes once n passes K.

inline OperatorSubsystem tail_system(int K) {
  if (K < 1) throw std::invalid_argument("tail_system: cutoff must be positive");
  return OperatorSubsystem::full(BlockShape(std::vector<int>(static_cast<std::size_t>(K), 2)));
}

// max_k k‖A_k‖ as one operator-norm atom per block over general coordinates.
inline sn::SeminormSpec tail_norm(const OperatorSubsystem& sys) {
  const int m = sys.dim();
  const int K = sys.shape().block_count();
  std::vector<sn::SeminormSpec> per_block;
  per_block.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    std::vector<MatC> coeffs(static_cast<std::size_t>(2 * m));
    for (int j = 0; j < m; ++j) {
      const MatC& blk = sys.basis()[static_cast<std::size_t>(j)].blocks[static_cast<std::size_t>(k)];
      coeffs[static_cast<std::size_t>(j)] = blk;
      coeffs[static_cast<std::size_t>(m + j)] = cplx(0, 1) * blk;
    }
    per_block.push_back(sn::SeminormSpec::opnorm(std::move(coeffs), k + 1.0, true));
  }
  return sn::SeminormSpec::max_of(std::move(per_block));
}

// max{ quotient of the weighted norm, k³·|a_k − d_k| for stages k+1 < n }.
inline sn::SeminormSpec tail_lip(const OperatorSubsystem& sys, double n) {
  using detail::axpy;
  using detail::entry_coeffs;
  const int K = sys.shape().block_count();
  std::vector<sn::SeminormSpec> parts;
  parts.push_back(sn::SeminormSpec::quotient(tail_norm(sys)));
  for (int k = 0; k < K && k + 1.0 < n; ++k) {
    const auto c = axpy(1.0, entry_coeffs(sys, k, 0, 0), -1.0, entry_coeffs(sys, k, 1, 1));
    const double w = (k + 1.0) * (k + 1.0) * (k + 1.0);
    parts.push_back(sn::SeminormSpec::linmap(detail::modulus_rows(c), sn::PNorm::Two, w, true));
  }
  return sn::SeminormSpec::max_of(std::move(parts));
}

// The escape witness A with A_k = e12/k: unit seminorm at every parameter,
// while its square climbs the diagonal pinches.
inline BlockElement tail_witness(int K) {
  BlockElement a(BlockShape(std::vector<int>(static_cast<std::size_t>(K), 2)));
  for (int k = 0; k < K; ++k) a.blocks[static_cast<std::size_t>(k)](0, 1) = 1.0 / (k + 1.0);
  return a;
}

// Parameters double until they pass the cutoff, then one more: the top two
// values generate identical seminorms, which certifies stabilization.
inline std::vector<double> tail_default_params(int K) {
  std::vector<double> ps;
  double p = 2.0;
  while (p <= static_cast<double>(K)) {
    ps.push_back(p);
    p *= 2.0;
  }
  ps.push_back(p);
  ps.push_back(2.0 * p);
  return ps;
}

inline cstar::SeminormFamily tail_family(int K, std::vector<double> params = {}) {
  OperatorSubsystem sys = tail_system(K);
  cstar::SeminormFamily F(sys);
  F.base = tail_lip(sys, K + 1.0);  // every stage active: the stabilized top
  F.make = [sys](double p) { return tail_lip(sys, p); };
  F.params = params.empty() ? tail_default_params(K) : std::move(params);
  F.id = "tail-weighted";
  return F;
}

// Bridge over two copies of the K-block system: the member seminorm on the
// left, the stabilized top on the right, coupled blockwise by
// max(n, k)·‖A_k − B_k‖.  Block k can absorb its diagonal pinch within
// 1/k (its quotient radius), so stiffer coupling there would break the
// bridge property, while looser coupling would weaken the 1/n defect.
inline BridgeModel tail_bridge(int K, double n) {
  OperatorSubsystem sys = tail_system(K);
  sn::SeminormSpec left = tail_lip(sys, n);
  sn::SeminormSpec right = tail_lip(sys, K + 1.0);
  const int m = sys.dim();
  std::vector<sn::SeminormSpec> couplings;
  std::vector<sn::OpNormAtom> difference;
  for (int k = 0; k < sys.shape().block_count(); ++k) {
    // Block difference (A − B)_k over the joint layout [uL; uR; vL; vR].
    sn::OpNormAtom atom;
    atom.coeffs.resize(static_cast<std::size_t>(4 * m));
    for (int j = 0; j < m; ++j) {
      const MatC& blk = sys.basis()[static_cast<std::size_t>(j)].blocks[static_cast<std::size_t>(k)];
      atom.coeffs[static_cast<std::size_t>(j)] = blk;
      atom.coeffs[static_cast<std::size_t>(m + j)] = -blk;
      atom.coeffs[static_cast<std::size_t>(2 * m + j)] = cplx(0, 1) * blk;
      atom.coeffs[static_cast<std::size_t>(3 * m + j)] = cplx(0, -1) * blk;
    }
    sn::OpNormAtom datom = atom;
    const double w = std::max(n, k + 1.0);
    atom.weight = w;
    atom.rebuild_sparsity();
    couplings.push_back(sn::SeminormSpec::opnorm(std::move(atom.coeffs), w, true));
    datom.weight = 1.0;
    datom.rebuild_sparsity();
    difference.push_back(std::move(datom));
  }
  sn::SeminormSpec bridge =
      sn::SeminormSpec::make_bridge(left, right, std::move(couplings), std::move(difference));
  return BridgeModel{std::move(left), std::move(right), std::move(bridge)};
}

}  // namespace lipos::models
