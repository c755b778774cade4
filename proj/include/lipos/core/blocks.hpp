// blocks.hpp — finite-dimensional block *-algebras ⊕_k M_{d_k} and their elements.
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "lipos/core/common.hpp"

namespace lipos::core {

inline constexpr int kMaxBlockDim = 16;
inline constexpr int kMaxTotalRealDim = 256;

// ---- block shape -------------------------------------------------------------

// Shape of a block algebra ⊕_k M_{d_k}.  The real dimension of the hermitian
// part equals sum d_k^2.
struct BlockShape {
  std::vector<int> dims;

  explicit BlockShape(std::vector<int> d) : dims(std::move(d)) {
    if (dims.empty()) throw std::invalid_argument("BlockShape: no blocks");
    for (int dk : dims) {
      if (dk < 1 || dk > kMaxBlockDim)
        throw std::invalid_argument("BlockShape: block dimension out of range [1,16]");
    }
    if (total_real_dim() > kMaxTotalRealDim)
      throw std::invalid_argument("BlockShape: total real dimension exceeds 256");
  }

  int block_count() const { return static_cast<int>(dims.size()); }
  int total_real_dim() const {
    int t = 0;
    for (int dk : dims) t += dk * dk;
    return t;
  }
  bool abelian() const {
    for (int dk : dims)
      if (dk != 1) return false;
    return true;
  }
  bool operator==(const BlockShape& o) const { return dims == o.dims; }
};

// ---- elements ----------------------------------------------------------------

// An element of ⊕_k M_{d_k}: one complex matrix per block.
struct BlockElement {
  std::vector<MatC> blocks;

  BlockElement() = default;
  explicit BlockElement(const BlockShape& shape) {
    blocks.reserve(shape.dims.size());
    for (int dk : shape.dims) blocks.push_back(MatC::Zero(dk, dk));
  }

  int block_count() const { return static_cast<int>(blocks.size()); }

  BlockShape shape() const {
    std::vector<int> d;
    d.reserve(blocks.size());
    for (const auto& b : blocks) d.push_back(static_cast<int>(b.rows()));
    return BlockShape(d);
  }
};

inline void check_same_shape(const BlockElement& a, const BlockElement& b,
                             const char* fn) {
  if (a.block_count() != b.block_count())
    throw std::invalid_argument(std::string(fn) + ": block count mismatch");
  for (int k = 0; k < a.block_count(); ++k)
    if (a.blocks[k].rows() != b.blocks[k].rows())
      throw std::invalid_argument(std::string(fn) + ": block dimension mismatch");
}

inline BlockElement operator+(const BlockElement& a, const BlockElement& b) {
  check_same_shape(a, b, "BlockElement::operator+");
  BlockElement r = a;
  for (int k = 0; k < r.block_count(); ++k) r.blocks[k] += b.blocks[k];
  return r;
}

inline BlockElement operator-(const BlockElement& a, const BlockElement& b) {
  check_same_shape(a, b, "BlockElement::operator-");
  BlockElement r = a;
  for (int k = 0; k < r.block_count(); ++k) r.blocks[k] -= b.blocks[k];
  return r;
}

inline BlockElement operator*(cplx s, const BlockElement& a) {
  BlockElement r = a;
  for (auto& blk : r.blocks) blk *= s;
  return r;
}

inline BlockElement operator*(double s, const BlockElement& a) {
  return cplx(s, 0.0) * a;
}

// Blockwise product (the algebra multiplication).
inline BlockElement mul(const BlockElement& a, const BlockElement& b) {
  check_same_shape(a, b, "mul");
  BlockElement r = a;
  for (int k = 0; k < r.block_count(); ++k) r.blocks[k] = a.blocks[k] * b.blocks[k];
  return r;
}

inline BlockElement adjoint(const BlockElement& a) {
  BlockElement r = a;
  for (auto& blk : r.blocks) blk = blk.adjoint().eval();
  return r;
}

inline BlockElement identity(const BlockShape& shape) {
  BlockElement e(shape);
  for (int k = 0; k < e.block_count(); ++k)
    e.blocks[k] = MatC::Identity(shape.dims[k], shape.dims[k]);
  return e;
}

inline BlockElement hermitian_part(const BlockElement& a) {
  BlockElement r = a;
  for (auto& blk : r.blocks) blk = (0.5 * (blk + blk.adjoint())).eval();
  return r;
}

// Anti-hermitian part divided by i, i.e. the hermitian element y with a = x + iy.
inline BlockElement antihermitian_part(const BlockElement& a) {
  BlockElement r = a;
  for (auto& blk : r.blocks) blk = (cplx(0.0, -0.5) * (blk - blk.adjoint())).eval();
  return r;
}

inline bool is_hermitian(const BlockElement& a, double tol = 1e-12) {
  for (const auto& blk : a.blocks)
    if ((blk - blk.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  return true;
}

// Hilbert–Schmidt inner product sum_k tr(a_k^* b_k).
inline cplx hs_inner(const BlockElement& a, const BlockElement& b) {
  check_same_shape(a, b, "hs_inner");
  cplx s = 0.0;
  for (int k = 0; k < a.block_count(); ++k)
    s += (a.blocks[k].adjoint() * b.blocks[k]).trace();
  return s;
}

inline double hs_norm(const BlockElement& a) {
  return std::sqrt(std::max(0.0, hs_inner(a, a).real()));
}

// Largest singular value of a complex matrix.  Dimension 1 and 2 get closed
// forms; larger blocks go through Eigen's SVD.
inline double sigma_max(const MatC& m) {
  const int n = static_cast<int>(m.rows());
  if (n == 1) return std::abs(m(0, 0));
  if (n == 2) {
    // For T in M_2: sigma_max^2 = (|T|_F^2 + sqrt(|T|_F^4 - 4 |det T|^2)) / 2.
    double f2 = m.squaredNorm();
    double det2 = std::norm(m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0));
    double disc = std::max(0.0, f2 * f2 - 4.0 * det2);
    return std::sqrt(std::max(0.0, 0.5 * (f2 + std::sqrt(disc))));
  }
  Eigen::JacobiSVD<MatC> svd(m);
  return svd.singularValues()(0);
}

// Operator norm: max over blocks of the largest singular value.
inline double op_norm(const BlockElement& a) {
  double v = 0.0;
  for (const auto& blk : a.blocks) v = std::max(v, sigma_max(blk));
  return v;
}

inline double max_abs_entry(const BlockElement& a) {
  double v = 0.0;
  for (const auto& blk : a.blocks)
    if (blk.size() > 0) v = std::max(v, blk.cwiseAbs().maxCoeff());
  return v;
}

// ---- spectra of hermitian elements -------------------------------------------

// Global spectrum extremes (over all blocks) of a hermitian element.
struct SpectrumRange {
  double min = 0.0;
  double max = 0.0;
};

inline SpectrumRange spectrum_range(const BlockElement& a, double herm_tol = 1e-10) {
  if (!is_hermitian(a, herm_tol))
    throw std::invalid_argument("spectrum_range: element is not hermitian");
  SpectrumRange r{std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity()};
  for (const auto& blk : a.blocks) {
    if (blk.rows() == 1) {
      double v = blk(0, 0).real();
      r.min = std::min(r.min, v);
      r.max = std::max(r.max, v);
      continue;
    }
    Eigen::SelfAdjointEigenSolver<MatC> es(blk, Eigen::EigenvaluesOnly);
    r.min = std::min(r.min, es.eigenvalues().minCoeff());
    r.max = std::max(r.max, es.eigenvalues().maxCoeff());
  }
  return r;
}

// Order norm of a hermitian element: inf{t >= 0 : -t e <= a <= t e}, i.e. the
// spectral radius.  (Eigenvalue route; deliberately distinct from op_norm's
// singular-value route so the two can cross-check each other.)
inline double order_norm(const BlockElement& a) {
  SpectrumRange r = spectrum_range(a);
  return std::max(std::abs(r.min), std::abs(r.max));
}

// Oscillation seminorm ‖a‖₀ = (max sp(a) - min sp(a)) / 2 of a hermitian element.
// Vanishes exactly on the scalar multiples of the unit.
inline double osc_seminorm(const BlockElement& a) {
  SpectrumRange r = spectrum_range(a);
  return 0.5 * (r.max - r.min);
}

// ---- random elements ----------------------------------------------------------

inline BlockElement random_hermitian(std::mt19937_64& rng, const BlockShape& shape) {
  std::normal_distribution<double> g(0.0, 1.0);
  BlockElement a(shape);
  for (int k = 0; k < a.block_count(); ++k) {
    int d = shape.dims[k];
    MatC m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
    a.blocks[k] = 0.5 * (m + m.adjoint());
  }
  return a;
}

inline BlockElement random_element(std::mt19937_64& rng, const BlockShape& shape) {
  std::normal_distribution<double> g(0.0, 1.0);
  BlockElement a(shape);
  for (int k = 0; k < a.block_count(); ++k) {
    int d = shape.dims[k];
    MatC m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = cplx(g(rng), g(rng));
    a.blocks[k] = m;
  }
  return a;
}

}  // namespace lipos::core
