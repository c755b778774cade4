// fixtures.hpp — shared hand-built systems and seminorms used across tests.
//
// These are written directly from the defining formulas, independently of any
// library-side constructors, so value agreement between the two is a real
// cross-check and not a tautology.
#pragma once

#include <utility>
#include <vector>

#include "lipos/core/subsystem.hpp"
#include "lipos/seminorm/spec.hpp"

namespace fixtures {

using lipos::core::BlockElement;
using lipos::core::BlockShape;
using lipos::core::MatC;
using lipos::core::MatR;
using lipos::core::OperatorSubsystem;
using lipos::core::VecR;
using lipos::core::cplx;
using lipos::sn::OpNormAtom;
using lipos::sn::PNorm;
using lipos::sn::SeminormSpec;

// M_2 with the hermitian basis {1, sigma_x, sigma_y, sigma_z}.
inline OperatorSubsystem pauli_system() {
  BlockShape shape({2});
  std::vector<BlockElement> basis;
  basis.push_back(lipos::core::identity(shape));
  BlockElement sx(shape), sy(shape), sz(shape);
  sx.blocks[0] << 0, 1, 1, 0;
  sy.blocks[0] << 0, cplx(0, -1), cplx(0, 1), 0;
  sz.blocks[0] << 1, 0, 0, -1;
  basis.push_back(sx);
  basis.push_back(sy);
  basis.push_back(sz);
  return OperatorSubsystem(shape, std::move(basis));
}

// The weighted M_2 norm max{|t|, n|z|, |b|, |c|} in entry coordinates
// t = (a11+a22)/2, z = (a11-a22)/2, b = a12, c = a21, acting on the native
// general coordinates [u; v] of the pauli_system basis (m = 4, cols = 8).
inline SeminormSpec m2_weighted_norm(double n) {
  auto row = [](std::initializer_list<std::pair<int, double>> entries) {
    VecR r = VecR::Zero(8);
    for (auto [idx, val] : entries) r(idx) = val;
    return r;
  };
  auto two_rows = [&](VecR r1, VecR r2) {
    MatR m(2, 8);
    m.row(0) = r1.transpose();
    m.row(1) = r2.transpose();
    return m;
  };
  // Coordinate layout: u = (t, x, y, z) at 0..3, v at 4..7.
  SeminormSpec t_abs =
      SeminormSpec::linmap(two_rows(row({{0, 1.0}}), row({{4, 1.0}})), PNorm::Two, 1.0, true);
  SeminormSpec z_abs =
      SeminormSpec::linmap(two_rows(row({{3, 1.0}}), row({{7, 1.0}})), PNorm::Two, n, true);
  // b = a12 = (x - i y) with x = u1 + i v1, y = u2 + i v2:
  //   b = (u1 + v2) + i (v1 - u2);  c = a21 = (u1 - v2) + i (v1 + u2).
  SeminormSpec b_abs = SeminormSpec::linmap(
      two_rows(row({{1, 1.0}, {6, 1.0}}), row({{5, 1.0}, {2, -1.0}})), PNorm::Two, 1.0, true);
  SeminormSpec c_abs = SeminormSpec::linmap(
      two_rows(row({{1, 1.0}, {6, -1.0}}), row({{5, 1.0}, {2, 1.0}})), PNorm::Two, 1.0, true);
  return SeminormSpec::max_of({t_abs, z_abs, b_abs, c_abs});
}

inline SeminormSpec m2_weighted_lip(double n) {
  return SeminormSpec::quotient(m2_weighted_norm(n));
}

// Flattening-family rows on C^3 in the coordinates of the canonical basis
// {1, E_2, E_3} (values a = u0, b = u0+u1, c = u0+u2): the seminorm is the
// l2 norm of ((a-b)/2, n((a+b)/2 - c)).
inline MatR flattening_rows(double n) {
  MatR rows(2, 3);
  rows << 0.0, -0.5, 0.0, 0.0, 0.5 * n, -n;
  return rows;
}

inline SeminormSpec flattening_spec(double n) {
  return SeminormSpec::linmap(flattening_rows(n), PNorm::Two, 1.0, false);
}

// The two-point interval system C^2 with L(alpha, beta) = |alpha - beta| / 2,
// in the coordinates of the basis {1, E_2} (alpha = u0, beta = u0 + u1).
inline SeminormSpec interval_spec() {
  MatR row(1, 2);
  row << 0.0, 0.5;
  return SeminormSpec::linmap(row, PNorm::Two, 1.0, false);
}

// Bridge between the flattening system (left, C^3) and the interval system
// (right, C^2): couplings n|a - alpha|, n|b - beta|, n|c - (alpha+beta)/2| on
// the joint hermitian coordinates [x0 x1 x2 y0 y1].  The difference map D
// carries the same three rows as 1x1 matrix images.
struct BridgePack {
  SeminormSpec left;
  SeminormSpec right;
  SeminormSpec bridge;
};

inline BridgePack flattening_bridge(double n) {
  SeminormSpec left = flattening_spec(n);
  SeminormSpec right = interval_spec();
  MatR c1(1, 5), c2(1, 5), c3(1, 5);
  c1 << 1, 0, 0, -1, 0;        // a - alpha
  c2 << 1, 1, 0, -1, -1;       // b - beta
  c3 << 1, 0, 1, -1, -0.5;     // c - (alpha + beta)/2
  std::vector<SeminormSpec> couplings = {
      SeminormSpec::linmap(c1, PNorm::Two, n, false),
      SeminormSpec::linmap(c2, PNorm::Two, n, false),
      SeminormSpec::linmap(c3, PNorm::Two, n, false)};
  std::vector<OpNormAtom> difference;
  for (const MatR* rowp : {&c1, &c2, &c3}) {
    OpNormAtom atom;
    atom.weight = 1.0;
    atom.coeffs.resize(5);
    for (int j = 0; j < 5; ++j) {
      atom.coeffs[j] = MatC::Zero(1, 1);
      atom.coeffs[j](0, 0) = (*rowp)(0, j);
    }
    atom.rebuild_sparsity();
    difference.push_back(std::move(atom));
  }
  SeminormSpec bridge =
      SeminormSpec::make_bridge(left, right, std::move(couplings), std::move(difference));
  return BridgePack{std::move(left), std::move(right), std::move(bridge)};
}

// The span {1, sigma_x, sigma_y} inside M_2 (matrices with scalar diagonal).
inline OperatorSubsystem c0_system() {
  BlockShape shape({2});
  std::vector<BlockElement> basis;
  basis.push_back(lipos::core::identity(shape));
  BlockElement sx(shape), sy(shape);
  sx.blocks[0] << 0, 1, 1, 0;
  sy.blocks[0] << 0, cplx(0, -1), cplx(0, 1), 0;
  basis.push_back(sx);
  basis.push_back(sy);
  return OperatorSubsystem(shape, std::move(basis));
}

// Direct sum of K copies of M_2 (full canonical basis).
inline OperatorSubsystem tail_system(int K) {
  return OperatorSubsystem::full(BlockShape(std::vector<int>(static_cast<std::size_t>(K), 2)));
}

// |||A||| = max_k k ||A_k|| (blocks 1-based) as native-general opnorm atoms
// over the canonical basis of tail_system(K).
inline SeminormSpec tail_weighted_norm(const OperatorSubsystem& sys, int K) {
  const int m = sys.dim();
  std::vector<SeminormSpec> per_block;
  for (int k = 0; k < K; ++k) {
    std::vector<MatC> coeffs(static_cast<std::size_t>(2 * m));
    for (int j = 0; j < m; ++j) {
      const MatC& blk = sys.basis()[static_cast<std::size_t>(j)].blocks[static_cast<std::size_t>(k)];
      coeffs[static_cast<std::size_t>(j)] = blk;
      coeffs[static_cast<std::size_t>(m + j)] = cplx(0, 1) * blk;
    }
    per_block.push_back(SeminormSpec::opnorm(std::move(coeffs), k + 1.0, true));
  }
  return SeminormSpec::max_of(std::move(per_block));
}

// L_n = max{ min_{lambda in C} |||A - lambda||| , k^3 |a_k - d_k| for k < n }:
// the quotient carries the weighted norm; each stage k pinches the diagonal
// difference of block k with weight k^3.
inline SeminormSpec tail_weighted_lip(const OperatorSubsystem& sys, int K, double n) {
  const int m = sys.dim();
  std::vector<SeminormSpec> parts;
  parts.push_back(SeminormSpec::quotient(tail_weighted_norm(sys, K)));
  for (int k = 0; k < K && k + 1.0 < n; ++k) {
    VecR rho = VecR::Zero(m);
    for (int j = 0; j < m; ++j) {
      const MatC& blk = sys.basis()[static_cast<std::size_t>(j)].blocks[static_cast<std::size_t>(k)];
      rho(j) = (blk(0, 0) - blk(1, 1)).real();
    }
    MatR rows = MatR::Zero(2, 2 * m);
    rows.row(0).head(m) = rho.transpose();
    rows.row(1).tail(m) = rho.transpose();
    const double w = (k + 1.0) * (k + 1.0) * (k + 1.0);
    parts.push_back(SeminormSpec::linmap(rows, PNorm::Two, w, true));
  }
  return SeminormSpec::max_of(std::move(parts));
}

// The escape witness A with A_k = e12 / k.
inline BlockElement tail_witness(int K) {
  BlockElement a(BlockShape(std::vector<int>(static_cast<std::size_t>(K), 2)));
  for (int k = 0; k < K; ++k) a.blocks[static_cast<std::size_t>(k)](0, 1) = 1.0 / (k + 1.0);
  return a;
}

}  // namespace fixtures
