// lp.hpp — dense linear programming for support computations and cutting planes.
//
// Solves  max φᵀx  subject to  A x ≤ b  with x free, assuming the feasible set
// is bounded and has 0 in its interior (callers add box rows to ensure this).
// The solve runs a revised simplex with Bland's rule on the dual
//   min bᵀy  s.t.  Aᵀy = φ,  y ≥ 0,
// whose basis has only dim(x) columns — the row count (cut count) can be large.
// The primal solution is recovered from the equality multipliers.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lipos/core/common.hpp"

namespace lipos::cvx {

using core::MatR;
using core::VecR;

struct LpResult {
  bool ok = false;
  double value = 0.0;  // optimal objective φᵀx = bᵀy
  VecR x;              // primal maximizer
  VecR y;              // dual certificate (y ≥ 0, Aᵀy = φ)
  std::string error;
};

// Optimal basis carried between related lp_max calls.  Entries k ≥ 0 name row k
// of A (a structural column of the equality form) and −(i+1) names the
// artificial column of equality row i.  Appending rows to A or changing b keeps
// old entries meaningful, so re-solves of a grown problem can start from the
// previous optimum: the stale basis is re-checked numerically and silently
// discarded when it no longer fits.
struct WarmBasis {
  std::vector<int> cols;
};

namespace detail {

// Revised simplex for min cᵀz s.t. E z = d, z ≥ 0 (E is n×R, full row rank
// assumed reachable through artificials).  Returns basis multipliers π with
// πᵀE_B = c_B so that π is the dual solution of the equality constraints.
struct SimplexOutcome {
  bool ok = false;
  double value = 0.0;
  VecR z;
  VecR pi;
  std::string error;
};

inline SimplexOutcome simplex_eq(const MatR& E, const VecR& d, const VecR& c,
                                 int max_iters = 50000, WarmBasis* warm = nullptr) {
  const int n = static_cast<int>(E.rows());
  const int R = static_cast<int>(E.cols());
  const double tol = 1e-11;

  // Scale every column to unit norm (with the cost scaled alongside): the
  // substitution z_j ↦ z_j/s_j keeps the value, the equality multipliers and
  // feasibility intact while keeping basis matrices well conditioned.
  VecR colscale(R);
  MatR Ew = E;
  for (int j = 0; j < R; ++j) {
    const double nj = Ew.col(j).norm();
    colscale(j) = nj > 1e-300 ? 1.0 / nj : 1.0;
    Ew.col(j) *= colscale(j);
  }
  VecR cw(R);
  for (int j = 0; j < R; ++j) cw(j) = c(j) * colscale(j);

  // Flip row signs so the right-hand side is nonnegative, then append
  // artificial columns forming an identity.
  VecR dw = d;
  for (int i = 0; i < n; ++i)
    if (dw(i) < 0.0) {
      dw(i) = -dw(i);
      Ew.row(i) = -Ew.row(i);
    }
  const int total = R + n;

  // Anti-cycling: pivot against a generically perturbed right-hand side, which
  // keeps every basic solution nondegenerate so ratio-test ties (the source of
  // cycling) cannot occur.  Reduced-cost optimality of the final basis does not
  // depend on the right-hand side, so the true solution is recovered at the end
  // by re-evaluating the basis against the unperturbed d.  The jitter is a
  // fixed low-discrepancy sequence: runs stay deterministic.
  VecR dp = dw;
  for (int i = 0; i < n; ++i) {
    double u = std::fmod(0.6180339887498949 * static_cast<double>(i + 1), 1.0);
    dp(i) += 1e-10 * (1.0 + dw(i)) * (0.25 + 0.75 * u);
  }
  auto column = [&](int j) -> VecR {
    if (j < R) return Ew.col(j);
    VecR a = VecR::Zero(n);
    a(j - R) = 1.0;
    return a;
  };

  std::vector<int> basis(n);
  for (int i = 0; i < n; ++i) basis[i] = R + i;

  MatR Binv = MatR::Identity(n, n);
  VecR zB = dp;

  // Warm start: accept the carried basis when it is invertible, feasible for
  // the (current) right-hand side, and keeps artificials at zero; phase 1 is
  // then skipped entirely.
  bool warm_ok = false;
  if (warm && static_cast<int>(warm->cols.size()) == n) {
    std::vector<int> mapped(n);
    bool valid = true;
    for (int i = 0; i < n; ++i) {
      const int k = warm->cols[static_cast<std::size_t>(i)];
      if (k >= 0 && k < R)
        mapped[i] = k;
      else if (k < 0 && -k - 1 < n)
        mapped[i] = R + (-k - 1);
      else {
        valid = false;
        break;
      }
    }
    if (valid) {
      MatR B(n, n);
      for (int i = 0; i < n; ++i) B.col(i) = column(mapped[i]);
      Eigen::FullPivLU<MatR> lu(B);
      if (lu.isInvertible()) {
        MatR Bi = lu.inverse();
        VecR z0 = Bi * dp;
        double art = 0.0;
        for (int i = 0; i < n; ++i)
          if (mapped[i] >= R) art += std::abs(z0(i));
        if (z0.minCoeff() >= -1e-9 && art <= 1e-7) {
          basis = mapped;
          Binv = Bi;
          zB = z0.cwiseMax(0.0);
          warm_ok = true;
        }
      }
    }
  }

  auto phase = [&](const VecR& costs, bool allow_artificial,
                   int iters_left) -> std::pair<bool, std::string> {
    // Columns whose pivot would make the basis numerically singular are banned
    // until the next successful pivot changes the basis.
    std::vector<char> banned(static_cast<std::size_t>(total), 0);
    // After this many pivots the leaving rule degrades from the Harris-style
    // two-pass to pure Bland (smallest basis index among exact min ratios),
    // which terminates finitely even on degenerate bases a warm start inherits.
    const int bland_after = std::max(2000, 64 * n);
    for (int it = 0; it < iters_left; ++it) {
      // Duals and reduced costs (Bland: first negative wins).
      VecR cB(n);
      for (int i = 0; i < n; ++i) cB(i) = costs(basis[i]);
      VecR pi = Binv.transpose() * cB;
      int enter = -1;
      bool skipped_banned = false;
      for (int j = 0; j < total; ++j) {
        if (!allow_artificial && j >= R) continue;
        bool in_basis = false;
        for (int i = 0; i < n; ++i)
          if (basis[i] == j) {
            in_basis = true;
            break;
          }
        if (in_basis) continue;
        double rc = costs(j) - pi.dot(column(j));
        if (rc < -tol) {
          if (banned[static_cast<std::size_t>(j)]) {
            skipped_banned = true;
            continue;
          }
          enter = j;
          break;
        }
      }
      if (enter < 0) {
        if (skipped_banned) return {false, "singular basis"};
        return {true, ""};
      }

      // Two-pass ratio test: find the minimal ratio, then among rows within a
      // hair of it pivot on the largest |w| — near-tied degenerate pivots on
      // tiny elements are what wreck the basis conditioning.
      VecR w = Binv * column(enter);
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i)
        if (w(i) > tol) best_ratio = std::min(best_ratio, zB(i) / w(i));
      if (!std::isfinite(best_ratio)) return {false, "unbounded pivot column"};
      int leave = -1;
      if (it < bland_after) {
        const double ratio_cap = best_ratio + 1e-9 * (1.0 + std::abs(best_ratio)) + 1e-12;
        for (int i = 0; i < n; ++i)
          if (w(i) > tol && zB(i) / w(i) <= ratio_cap)
            if (leave < 0 || w(i) > w(leave)) leave = i;
      } else {
        const double ratio_cap = best_ratio + 1e-12 * (1.0 + std::abs(best_ratio));
        for (int i = 0; i < n; ++i)
          if (w(i) > tol && zB(i) / w(i) <= ratio_cap)
            if (leave < 0 || basis[i] < basis[leave]) leave = i;
      }

      // Pivot: update basis and refresh the inverse (dims are small).  If the
      // refreshed basis is numerically singular, undo the pivot and ban the
      // entering column instead of failing outright.
      const int old_col = basis[leave];
      basis[leave] = enter;
      MatR B(n, n);
      for (int i = 0; i < n; ++i) B.col(i) = column(basis[i]);
      Eigen::FullPivLU<MatR> lu(B);
      if (!lu.isInvertible()) {
        basis[leave] = old_col;
        banned[static_cast<std::size_t>(enter)] = 1;
        continue;
      }
      std::fill(banned.begin(), banned.end(), 0);
      Binv = lu.inverse();
      zB = Binv * dp;
      for (int i = 0; i < n; ++i) zB(i) = std::max(zB(i), 0.0);
    }
    return {false, "iteration limit"};
  };

  // Phase 1: minimize the artificial mass (skipped on a feasible warm basis).
  if (!warm_ok) {
    VecR c1 = VecR::Zero(total);
    for (int j = R; j < total; ++j) c1(j) = 1.0;
    auto [ok1, err1] = phase(c1, true, max_iters);
    if (!ok1) return {false, 0.0, VecR(), VecR(), "phase 1: " + err1};
    double art_mass = 0.0;
    for (int i = 0; i < n; ++i)
      if (basis[i] >= R) art_mass += zB(i);
    if (art_mass > 1e-7) return {false, 0.0, VecR(), VecR(), "equality system infeasible"};
  }

  // Phase 2: real costs; artificial columns may remain basic at level ~0 but
  // can no longer enter.
  VecR c2 = VecR::Zero(total);
  for (int j = 0; j < R; ++j) c2(j) = cw(j);
  auto [ok2, err2] = phase(c2, false, max_iters);
  if (!ok2) return {false, 0.0, VecR(), VecR(), "phase 2: " + err2};

  if (warm) {
    warm->cols.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      warm->cols[static_cast<std::size_t>(i)] =
          basis[i] < R ? basis[i] : -(basis[i] - R + 1);
  }

  // Evaluate the optimal basis against the unperturbed right-hand side.
  VecR zTrue = Binv * dw;
  for (int i = 0; i < n; ++i) zTrue(i) = std::max(zTrue(i), 0.0);

  SimplexOutcome out;
  out.ok = true;
  out.z = VecR::Zero(R);
  VecR cB(n);
  for (int i = 0; i < n; ++i) {
    if (basis[i] < R) out.z(basis[i]) = zTrue(i) * colscale(basis[i]);
    cB(i) = c2(basis[i]);
  }
  out.pi = Binv.transpose() * cB;
  out.value = 0.0;
  for (int i = 0; i < n; ++i)
    if (basis[i] < R) out.value += cw(basis[i]) * zTrue(i);

  // Undo row sign flips in the multipliers: flipping row i of (E, d) flips π_i.
  for (int i = 0; i < n; ++i)
    if (d(i) < 0.0) out.pi(i) = -out.pi(i);
  return out;
}

}  // namespace detail

// max φᵀx s.t. A x ≤ b.  The primal maximizer is the vector of equality
// multipliers of the dual program; the dual y certifies value = bᵀy from above.
// `warm` (optional) carries the optimal basis between calls whose A grows by
// appended rows and/or whose b or φ change; see WarmBasis.
inline LpResult lp_max(const MatR& A, const VecR& b, const VecR& phi,
                       WarmBasis* warm = nullptr) {
  if (A.rows() != b.size() || A.cols() != phi.size())
    throw std::invalid_argument("lp_max: dimension mismatch");
  detail::SimplexOutcome sx = detail::simplex_eq(A.transpose(), phi, b, 50000, warm);
  LpResult r;
  if (!sx.ok) {
    r.error = "lp_max: " + sx.error;
    return r;
  }
  r.ok = true;
  r.value = sx.value;
  r.x = sx.pi;
  r.y = sx.z;
  return r;
}

}  // namespace lipos::cvx
