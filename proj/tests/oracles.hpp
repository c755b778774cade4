// oracles.hpp — independent reference implementations used only by tests.
//
// Every oracle here deliberately takes a different mathematical or numerical
// route than the library code it checks, so that agreement between the two is
// evidence of correctness rather than repetition:
//   * oscillation: golden search over the unit-shift quotient of the operator
//     norm (library uses the eigenvalue spread),
//   * polytope support: brute-force vertex enumeration (library uses LP /
//     cutting planes),
//   * quotient seminorms: dense lambda grids with refinement (library uses
//     golden section),
//   * smooth ball support: dense boundary meshes (library uses closed forms).
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "lipos/core/blocks.hpp"

namespace oracles {

using lipos::core::BlockElement;
using lipos::core::MatC;
using lipos::core::MatR;
using lipos::core::VecR;

// Operator norm via Jacobi SVD on every block, regardless of size (the library
// uses closed forms for small blocks).
inline double op_norm_svd(const BlockElement& a) {
  double v = 0.0;
  for (const auto& blk : a.blocks) {
    Eigen::JacobiSVD<MatC> svd(blk);
    if (svd.singularValues().size() > 0) v = std::max(v, svd.singularValues()(0));
  }
  return v;
}

// Oscillation of a hermitian element via the quotient formula
//   ‖a‖₀ = min over real λ of ‖a - λ e‖,
// evaluated by golden search on [-‖a‖, ‖a‖] with the operator norm from SVD.
inline double osc_quotient_oracle(const BlockElement& a) {
  const double bound = op_norm_svd(a) + 1e-12;
  auto f = [&](double lam) {
    BlockElement shifted = a;
    for (auto& blk : shifted.blocks)
      blk -= lam * MatC::Identity(blk.rows(), blk.cols());
    return op_norm_svd(shifted);
  };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = -bound, hi = bound;
  double c = hi - inv_phi * (hi - lo), d = lo + inv_phi * (hi - lo);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 220 && hi - lo > 1e-14; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return std::min({fc, fd, f(0.0), f(0.5 * (lo + hi))});
}

// Minimum over a dense lambda grid (with shrinking refinement passes) of a
// convex one-dimensional function; reference for quotient-by-unit evaluations.
// Convexity keeps the true minimizer inside one grid step of the best sample,
// so each pass shrinks the bracket by a factor of (points - 1) / 2.
inline double grid_min(const std::function<double(double)>& f, double lo, double hi,
                       int points = 4001, int passes = 4) {
  double best_x = lo, best = std::numeric_limits<double>::infinity();
  double flo = lo, fhi = hi;
  for (int pass = 0; pass < passes; ++pass) {
    for (int i = 0; i < points; ++i) {
      double x = flo + (fhi - flo) * i / (points - 1);
      double v = f(x);
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
    double h = (fhi - flo) / (points - 1);
    flo = std::max(lo, best_x - h);
    fhi = std::min(hi, best_x + h);
  }
  return best;
}

// ---- polytope support via brute-force vertex enumeration ----------------------
//
// For a full-dimensional polytope {x : A x <= b} in R^n (n small), enumerate
// all vertices as feasible intersections of n constraint rows, then maximize
// the linear objective over the vertices.

struct VertexSet {
  std::vector<VecR> vertices;
};

inline VertexSet enumerate_vertices(const MatR& A, const VecR& b, double tol = 1e-9) {
  const int rows = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  VertexSet out;
  std::vector<int> idx(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      MatR S(n, n);
      VecR rhs(n);
      for (int i = 0; i < n; ++i) {
        S.row(i) = A.row(idx[i]);
        rhs(i) = b(idx[i]);
      }
      Eigen::FullPivLU<MatR> lu(S);
      if (!lu.isInvertible()) return;
      VecR x = lu.solve(rhs);
      if (((A * x).array() <= b.array() + tol).all()) {
        for (const auto& v : out.vertices)
          if ((v - x).lpNorm<Eigen::Infinity>() < 1e-7) return;
        out.vertices.push_back(x);
      }
      return;
    }
    for (int i = start; i < rows; ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return out;
}

inline double support_vertex_oracle(const MatR& A, const VecR& b, const VecR& phi) {
  VertexSet vs = enumerate_vertices(A, b);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : vs.vertices) best = std::max(best, phi.dot(v));
  return best;
}

// Support of {x : ‖M x‖₂ <= 1} (M injective) in direction phi over a dense
// boundary mesh in 2D preimage coordinates; reference for the ellipse path.
inline double support_ellipse_mesh(const MatR& M, const VecR& phi, int mesh = 200000) {
  // Parameterize the boundary through y on the unit circle, x = M^+ y extended
  // by nothing (valid when M is square and invertible; tests use that case).
  Eigen::FullPivLU<MatR> lu(M);
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < mesh; ++i) {
    double th = 2.0 * M_PI * i / mesh;
    VecR y(2);
    y << std::cos(th), std::sin(th);
    VecR x = lu.solve(y);
    best = std::max(best, phi.dot(x));
  }
  return best;
}

}  // namespace oracles
