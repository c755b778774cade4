// solve.hpp — certified convex computations over seminorm balls.
//
// All routines work in the solver coordinates of a BallSpec and return
// two-sided enclosures: SolveResult.value is the midpoint of [lower, upper]
// and SolveResult.gap the half-width, so value − gap ≤ true ≤ value + gap.
// Lower bounds always come from explicitly feasible points (gauge scaling),
// upper bounds from LP duals, closed forms, or cutting-plane relaxations.
//
// Quotient shifts never appear as inner minimizations here: each constraint's
// axis directions become extra LP columns ("lifted variables"), which keeps
// every cut exact for positively homogeneous atoms.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lipos/convex/lp.hpp"
#include "lipos/seminorm/ball.hpp"

namespace lipos::cvx {

using core::MatR;
using core::VecR;
using sn::BallConstraint;
using sn::BallSpec;
using sn::LinearMapAtom;
using sn::OpNormAtom;
using sn::PNorm;

enum class SolveStatus { converged, gap_open, iteration_cap };

struct SolveResult {
  double value = 0.0;   // midpoint of the certified enclosure
  VecR certificate;     // feasible point attaining value − gap (solver coords)
  double gap = 0.0;     // half-width of the enclosure
  int iterations = 0;
  SolveStatus status = SolveStatus::converged;

  double lower() const { return value - gap; }
  double upper() const { return value + gap; }
};

struct SolverOptions {
  double support_tol = 1e-8;     // target enclosure width for support values
  double projection_tol = 1e-7;  // target enclosure width for projections
  int max_cuts = 900;
  int restarts = 16;
  int line_samples = 33;
  int ascent_passes = 6;       // multistart maximization: polish passes per start
  int ascent_random_dirs = 6;  //   random directions per pass
  int ascent_coord_dirs = 32;  //   coordinate directions per pass (capped by dim)
  std::uint64_t seed = core::kDefaultSeed;
  bool force_cutting_plane = false;  // skip exact paths (used by cross-checks)
};

// ---- coercivity -----------------------------------------------------------------

// Quadratic form with (max_c g_c(x))² ≥ xᵀ Q̄ x in solver coordinates (before
// dividing by the ball radius): each constraint contributes its atom rows
// scaled by their quadratic factors, projected along the axis images, averaged.
inline MatR coercivity_quadratic(const BallSpec& ball) {
  const int n = ball.nx();
  MatR Qbar = MatR::Zero(n, n);
  const double kcount = static_cast<double>(ball.constraints.size());
  for (const auto& c : ball.constraints) {
    std::vector<double> fac;
    MatR S = c.stacked_rows(ball.native_cols, &fac);
    int r = 0;
    std::vector<int> sizes;
    for (const auto& a : c.lin) sizes.push_back(static_cast<int>(a.matrix.rows()));
    for (const auto& a : c.op) sizes.push_back(2 * a.dim() * a.dim());
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      S.middleRows(r, sizes[i]) *= fac[i];
      r += sizes[i];
    }
    MatR C = S * ball.embed;
    MatR Q = C.transpose() * C;
    for (const auto& a : c.axes) {
      VecR sa = S * a;
      double denom = sa.squaredNorm();
      if (denom > 1e-14) {
        VecR qa = C.transpose() * sa;
        Q -= qa * qa.transpose() / denom;
      }
    }
    const double N = static_cast<double>(std::max<std::size_t>(1, sizes.size()));
    Qbar += Q / (N * kcount);
  }
  return Qbar;
}

// Bound ‖y‖₂ ≤ κ for embedded ball points U y, from λmin of Uᵀ Q̄ U.
inline double coercivity_bound(const BallSpec& ball, const MatR& U) {
  MatR Qw = U.transpose() * coercivity_quadratic(ball) * U;
  Eigen::SelfAdjointEigenSolver<MatR> es(Qw);
  double lam = es.eigenvalues().minCoeff();
  if (!(lam > 1e-14))
    throw std::runtime_error("coercivity_bound: ball is unbounded on the working subspace");
  return ball.radius / std::sqrt(lam);
}

// ---- lifted problem ---------------------------------------------------------------

namespace detail {

struct AtomRef {
  int constraint = 0;
  bool is_lin = true;
  int index = 0;
};

struct Lifted {
  MatR U;                                   // nx × nw
  int nw = 0, nlam = 0;
  std::vector<std::pair<int, int>> lam_cols;  // (constraint, axis) per λ column
  std::vector<AtomRef> atoms;
  double kappa_x = 0.0;
  std::vector<double> kappa_lam;
  MatR EU;  // native_cols × nw: embed·U
};

inline Lifted build_lifted(const BallSpec& ball, const MatR& U) {
  Lifted L;
  L.U = U;
  L.nw = static_cast<int>(U.cols());
  L.EU = ball.embed * U;
  L.kappa_x = coercivity_bound(ball, U);
  for (int ci = 0; ci < static_cast<int>(ball.constraints.size()); ++ci) {
    const auto& c = ball.constraints[ci];
    for (int i = 0; i < static_cast<int>(c.lin.size()); ++i)
      L.atoms.push_back({ci, true, i});
    for (int i = 0; i < static_cast<int>(c.op.size()); ++i)
      L.atoms.push_back({ci, false, i});
    for (int ai = 0; ai < static_cast<int>(c.axes.size()); ++ai) {
      // Sensitivity of the constraint's atoms along the axis; a dead axis is
      // dropped (it lies in every atom's kernel and the shift is irrelevant).
      double sens = 0.0;
      for (const auto& a : c.lin) sens = std::max(sens, a.value(c.axes[ai]));
      for (const auto& a : c.op) sens = std::max(sens, a.value(c.axes[ai]));
      if (sens < 1e-12) continue;
      // Rough atom Lipschitz scale on the working subspace for the λ box.
      double lip = 0.0;
      for (const auto& a : c.lin) lip = std::max(lip, a.weight * (a.matrix * L.EU).norm());
      for (const auto& a : c.op) lip = std::max(lip, a.weight * (a.real_rows() * L.EU).norm());
      L.lam_cols.emplace_back(ci, ai);
      L.kappa_lam.push_back(16.0 * (ball.radius + L.kappa_x * std::max(1.0, lip)) / sens);
    }
  }
  L.nlam = static_cast<int>(L.lam_cols.size());
  return L;
}

// Native-space evaluation point of constraint ci at the lifted LP point ξ.
inline VecR constraint_point(const BallSpec& ball, const Lifted& L, const VecR& xi,
                             int ci) {
  VecR z = L.EU * xi.head(L.nw);
  for (int k = 0; k < L.nlam; ++k)
    if (L.lam_cols[k].first == ci)
      z -= xi(L.nw + k) * ball.constraints[ci].axes[L.lam_cols[k].second];
  return z;
}

// Max atom value over all constraints at the lifted point; also reports which
// atom attains it and the native point of its constraint.
inline double lifted_gauge(const BallSpec& ball, const Lifted& L, const VecR& xi,
                           AtomRef* worst = nullptr, VecR* worst_point = nullptr) {
  double best = 0.0;
  bool first = true;
  for (int ci = 0; ci < static_cast<int>(ball.constraints.size()); ++ci) {
    VecR z = constraint_point(ball, L, xi, ci);
    const auto& c = ball.constraints[ci];
    for (int i = 0; i < static_cast<int>(c.lin.size()); ++i) {
      double v = c.lin[i].value(z);
      if (first || v > best) {
        best = v;
        first = false;
        if (worst) *worst = {ci, true, i};
        if (worst_point) *worst_point = z;
      }
    }
    for (int i = 0; i < static_cast<int>(c.op.size()); ++i) {
      double v = c.op[i].value(z);
      if (first || v > best) {
        best = v;
        first = false;
        if (worst) *worst = {ci, false, i};
        if (worst_point) *worst_point = z;
      }
    }
  }
  return best;
}

// Cut row in lifted coordinates from a native-space subgradient s of an atom of
// constraint ci: s·(EU y − Σ λ a) ≤ radius.
inline VecR lifted_cut(const BallSpec& ball, const Lifted& L, int ci, const VecR& s) {
  VecR row = VecR::Zero(L.nw + L.nlam);
  row.head(L.nw) = L.EU.transpose() * s;
  for (int k = 0; k < L.nlam; ++k)
    if (L.lam_cols[k].first == ci)
      row(L.nw + k) = -s.dot(ball.constraints[ci].axes[L.lam_cols[k].second]);
  return row;
}

inline void append_rows(MatR& A, VecR& b, const MatR& rows, const VecR& rhs) {
  const int old = static_cast<int>(A.rows());
  A.conservativeResize(old + rows.rows(), Eigen::NoChange);
  b.conservativeResize(old + rows.rows());
  A.bottomRows(rows.rows()) = rows;
  b.tail(rhs.size()) = rhs;
}

}  // namespace detail

// ---- support function ---------------------------------------------------------------

namespace detail {

inline bool polytope_eligible(const BallSpec& ball) {
  for (const auto& c : ball.constraints) {
    if (!c.op.empty()) return false;
    for (const auto& a : c.lin) {
      if (a.p == PNorm::Inf) continue;
      if (a.p == PNorm::One && a.matrix.rows() <= 12) continue;
      if (a.p == PNorm::Two && a.matrix.rows() == 1) continue;
      return false;
    }
  }
  return true;
}

inline bool ellipsoid_eligible(const BallSpec& ball) {
  return ball.constraints.size() == 1 && ball.constraints[0].op.empty() &&
         ball.constraints[0].lin.size() == 1 &&
         ball.constraints[0].lin[0].p == PNorm::Two;
}

// Complete H-representation of a polytope-eligible ball in lifted coordinates.
inline void polytope_rows(const BallSpec& ball, const Lifted& L, MatR& A, VecR& b) {
  std::vector<VecR> rows;
  for (int ci = 0; ci < static_cast<int>(ball.constraints.size()); ++ci) {
    for (const auto& atom : ball.constraints[ci].lin) {
      const int r = static_cast<int>(atom.matrix.rows());
      if (atom.p == PNorm::Inf || (atom.p == PNorm::Two && r == 1)) {
        for (int i = 0; i < r; ++i) {
          VecR s = atom.weight * atom.matrix.row(i).transpose();
          rows.push_back(lifted_cut(ball, L, ci, s));
          rows.push_back(lifted_cut(ball, L, ci, VecR(-s)));
        }
      } else {  // p = 1, r ≤ 12: all sign patterns
        for (long mask = 0; mask < (1L << r); ++mask) {
          VecR s = VecR::Zero(atom.matrix.cols());
          for (int i = 0; i < r; ++i)
            s += ((mask >> i) & 1 ? 1.0 : -1.0) * atom.matrix.row(i).transpose();
          rows.push_back(lifted_cut(ball, L, ci, VecR(atom.weight * s)));
        }
      }
    }
  }
  A.resize(static_cast<int>(rows.size()), L.nw + L.nlam);
  b.resize(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    A.row(static_cast<int>(i)) = rows[i].transpose();
    b(static_cast<int>(i)) = ball.radius;
  }
}

inline void box_rows(const Lifted& L, MatR& A, VecR& b, double lam_scale) {
  const int n = L.nw + L.nlam;
  MatR rows(2 * n, n);
  VecR rhs(2 * n);
  rows.setZero();
  for (int i = 0; i < n; ++i) {
    double cap = i < L.nw ? 1.05 * L.kappa_x : lam_scale * L.kappa_lam[i - L.nw];
    rows(2 * i, i) = 1.0;
    rhs(2 * i) = cap;
    rows(2 * i + 1, i) = -1.0;
    rhs(2 * i + 1) = cap;
  }
  append_rows(A, b, rows, rhs);
}

}  // namespace detail

// Reusable per-ball state for repeated support calls on the *same* BallSpec:
// the kernel split, the lifted structure, and every accumulated subgradient cut
// are independent of the objective φ, so later calls restart from a refined
// outer polytope instead of rebuilding it.  Never share a cache across balls.
struct SupportCache {
  bool init = false;
  sn::KernelSplit ks;
  detail::Lifted lifted;
  MatR cut_rows{0, 0};
  VecR cut_rhs{0};
  double lam_scale = 1.0;
  WarmBasis basis;  // optimal LP basis, re-verified on every reuse
};

// Support value sup{φᵀx : x ∈ ball} in solver coordinates.  Throws if φ fails
// to annihilate the ball's kernel (the supremum would be infinite).
inline SolveResult support(const BallSpec& ball, const VecR& phi,
                           const SolverOptions& opts = {},
                           SupportCache* cache = nullptr) {
  if (phi.size() != ball.nx()) throw std::invalid_argument("support: dimension mismatch");
  if (cache && !cache->init) {
    cache->ks = sn::kernel_split(ball);
    cache->cut_rows.resize(0, 0);
    cache->cut_rhs.resize(0);
    cache->lam_scale = 1.0;
  }
  const sn::KernelSplit ks = cache ? cache->ks : sn::kernel_split(ball);
  for (int i = 0; i < ks.kernel.cols(); ++i)
    if (std::abs(phi.dot(ks.kernel.col(i))) > 1e-9 * std::max(1.0, phi.norm()))
      throw std::runtime_error("support: objective is unbounded along the ball kernel");
  const MatR U = ks.complement;
  const int nw = static_cast<int>(U.cols());
  SolveResult res;
  if (nw == 0 || phi.norm() == 0.0) {
    res.value = 0.0;
    res.gap = 0.0;
    res.certificate = VecR::Zero(ball.nx());
    return res;
  }

  if (cache && !cache->init) {
    cache->lifted = detail::build_lifted(ball, U);
    cache->cut_rows.resize(0, cache->lifted.nw + cache->lifted.nlam);
    cache->init = true;
  }
  detail::Lifted L = cache ? cache->lifted : detail::build_lifted(ball, U);
  VecR phi_w = U.transpose() * phi;
  VecR phi_lift = VecR::Zero(L.nw + L.nlam);
  phi_lift.head(L.nw) = phi_w;

  auto finish = [&](double lower, double upper, const VecR& cert_y, int iters,
                    SolveStatus st) {
    SolveResult r;
    upper = std::max(upper, lower);
    r.value = 0.5 * (lower + upper);
    r.gap = 0.5 * (upper - lower) + 1e-13 * (1.0 + std::abs(upper));
    r.certificate = U * cert_y;
    r.iterations = iters;
    r.status = st;
    return r;
  };

  // -- exact ellipsoid path ---------------------------------------------------
  if (!opts.force_cutting_plane && detail::ellipsoid_eligible(ball)) {
    const auto& c = ball.constraints[0];
    const auto& atom = c.lin[0];
    MatR M(atom.matrix.rows(), L.nw + L.nlam);
    M.leftCols(L.nw) = atom.weight * atom.matrix * L.EU;
    for (int k = 0; k < L.nlam; ++k)
      M.col(L.nw + k) = -atom.weight * atom.matrix * c.axes[L.lam_cols[k].second];
    Eigen::CompleteOrthogonalDecomposition<MatR> cod(M.transpose());
    VecR w = cod.pseudoInverse() * phi_lift;  // (Mᵀ)⁺ φ
    if ((M.transpose() * w - phi_lift).norm() > 1e-9 * std::max(1.0, phi_lift.norm()))
      throw std::runtime_error("support: objective is unbounded along the ball kernel");
    double upper = ball.radius * w.norm();
    // Maximizer: ξ = radius · M⁺ (w/‖w‖); fold back and rescale feasibly.
    VecR xi = VecR::Zero(L.nw + L.nlam);
    if (w.norm() > 1e-300) {
      Eigen::CompleteOrthogonalDecomposition<MatR> codM(M);
      xi = ball.radius * (codM.pseudoInverse() * (w / w.norm()));
    }
    VecR y = xi.head(L.nw);
    double g = ball.gauge(U * y);
    if (g > 1.0) y /= g;
    double lower = phi_w.dot(y);
    return finish(lower, upper, y, 1, SolveStatus::converged);
  }

  // -- exact polytope path ------------------------------------------------------
  if (!opts.force_cutting_plane && detail::polytope_eligible(ball)) {
    double lam_scale = 1.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
      MatR A;
      VecR b;
      detail::polytope_rows(ball, L, A, b);
      detail::box_rows(L, A, b, lam_scale);
      LpResult lp = lp_max(A, b, phi_lift, cache ? &cache->basis : nullptr);
      if (!lp.ok) throw std::runtime_error("support: " + lp.error);
      // Expand λ boxes if they bind at the solution.
      bool binding = false;
      for (int k = 0; k < L.nlam; ++k)
        if (std::abs(lp.x(L.nw + k)) > 0.999 * lam_scale * L.kappa_lam[k]) binding = true;
      if (binding) {
        lam_scale *= 8.0;
        continue;
      }
      VecR y = lp.x.head(L.nw);
      double g = ball.gauge(U * y);
      if (g > 1.0) y /= g;
      double lower = phi_w.dot(y);
      double upper = lp.value + 1e-12 * (1.0 + std::abs(lp.value));
      return finish(lower, upper, y, 1, SolveStatus::converged);
    }
    throw std::runtime_error("support: lambda box kept binding after expansion");
  }

  // -- cutting-plane path ---------------------------------------------------------
  // Accumulated subgradient cuts stay valid for the lifted feasible set, so they
  // survive λ-box expansions; only the box rows are rebuilt per attempt.
  MatR cut_rows = cache ? cache->cut_rows : MatR(0, L.nw + L.nlam);
  VecR cut_rhs = cache ? cache->cut_rhs : VecR(0);
  double lower = 0.0;
  VecR best_y = VecR::Zero(L.nw);
  double upper = std::numeric_limits<double>::infinity();
  int cuts = 0;
  SolveStatus st = SolveStatus::iteration_cap;
  double lam_scale = cache ? cache->lam_scale : 1.0;
  WarmBasis local_basis;  // within-call warm starts even without a cache
  WarmBasis* wb = cache ? &cache->basis : &local_basis;
  for (int attempt = 0; attempt < 4; ++attempt) {
    MatR A(0, L.nw + L.nlam);
    VecR b(0);
    detail::box_rows(L, A, b, lam_scale);
    if (cut_rows.rows() > 0) detail::append_rows(A, b, cut_rows, cut_rhs);
    bool lam_binding = false;
    st = SolveStatus::iteration_cap;
    while (true) {
      LpResult lp = lp_max(A, b, phi_lift, wb);
      if (!lp.ok) throw std::runtime_error("support: " + lp.error);
      upper = lp.value + 1e-12 * (1.0 + std::abs(lp.value));
      lam_binding = false;
      for (int k = 0; k < L.nlam; ++k)
        if (std::abs(lp.x(L.nw + k)) > 0.999 * lam_scale * L.kappa_lam[k]) lam_binding = true;
      detail::AtomRef worst;
      VecR z;
      double g = detail::lifted_gauge(ball, L, lp.x, &worst, &z) / ball.radius;
      if (g <= 1.0 + 1e-12) {
        double cand = phi_lift.dot(lp.x) / std::max(1.0, g);
        if (cand > lower) {
          lower = cand;
          best_y = lp.x.head(L.nw) / std::max(1.0, g);
        }
        st = SolveStatus::converged;
        break;
      }
      // Feasible by homogeneity: scale the whole lifted vector inside.
      VecR scaled = lp.x / g;
      double cand = phi_lift.dot(scaled);
      double true_g = ball.gauge(U * scaled.head(L.nw));
      if (true_g > 1.0 + 1e-12) cand = phi_lift.dot(scaled) / true_g;
      if (cand > lower) {
        lower = cand;
        best_y = scaled.head(L.nw) / std::max(1.0, true_g);
      }
      if (upper - lower <= opts.support_tol * std::max(1.0, std::abs(upper))) {
        st = SolveStatus::converged;
        break;
      }
      if (cuts >= opts.max_cuts) break;  // budget exhausted; upper stays valid
      const auto& c = ball.constraints[worst.constraint];
      VecR s = worst.is_lin ? c.lin[worst.index].subgradient(z)
                            : c.op[worst.index].subgradient(z);
      VecR row = detail::lifted_cut(ball, L, worst.constraint, s);
      MatR rows(1, row.size());
      rows.row(0) = row.transpose();
      VecR rhs(1);
      rhs(0) = ball.radius * (1.0 + 1e-12);
      detail::append_rows(A, b, rows, rhs);
      detail::append_rows(cut_rows, cut_rhs, rows, rhs);
      ++cuts;
    }
    // A binding λ box makes the LP upper unreliable: expand and resume.
    if (lam_binding && attempt < 3) {
      lam_scale *= 8.0;
      continue;
    }
    break;
  }
  if (cache) {
    cache->cut_rows = cut_rows;
    cache->cut_rhs = cut_rhs;
    cache->lam_scale = lam_scale;
  }
  if (st != SolveStatus::converged &&
      upper - lower <= opts.support_tol * std::max(1.0, std::abs(upper)))
    st = SolveStatus::converged;
  else if (st != SolveStatus::converged && cuts >= opts.max_cuts)
    st = SolveStatus::iteration_cap;
  return finish(lower, upper, best_y, cuts, st);
}

// ---- line geometry helpers ------------------------------------------------------------

namespace detail {

// Feasible parameter interval of {y + t d ∈ ball} around t = 0 (y feasible).
inline std::pair<double, double> feasible_interval(const BallSpec& ball, const VecR& y,
                                                   const VecR& d, double hint = 1.0) {
  auto inside = [&](double t) { return ball.gauge(y + t * d) <= 1.0 + 1e-12; };
  auto edge = [&](double dir) {
    double t = dir * hint;
    int grow = 0;
    while (inside(t) && grow++ < 40) t *= 2.0;
    double lo = inside(t) ? t : 0.0, hi = t;
    if (!inside(t)) {
      lo = 0.0;
      hi = t;
      for (int it = 0; it < 34; ++it) {
        double mid = 0.5 * (lo + hi);
        (inside(mid) ? lo : hi) = mid;
      }
    }
    return lo;
  };
  return {edge(-1.0), edge(1.0)};
}

}  // namespace detail

// ---- projection ------------------------------------------------------------------------

struct ProjectResult {
  double lower = 0.0;   // certified distance lower bound
  double upper = 0.0;   // attained distance at `point`
  VecR point;           // feasible nearest point found (solver coords)
  int iterations = 0;
  SolveStatus status = SolveStatus::converged;

  double value() const { return 0.5 * (lower + upper); }
  double gap() const { return 0.5 * (upper - lower); }
};

// A dual certificate for distance lower bounds: a functional f in solver
// coordinates together with a valid upper bound on sup over the ball of f and
// the ambient dual norm of f.
struct DualCertificate {
  VecR f;
  double ball_support_upper = 0.0;
  double dual_norm = 1.0;
};

// Distance from `target` to the ball, measured by `norm_fn` (a norm on solver
// coordinate differences).  Upper bounds from feasible points refined by line
// searches; lower bounds from caller-supplied dual certificates.
inline ProjectResult project_to_ball(
    const BallSpec& ball, const VecR& target,
    const std::function<double(const VecR&)>& norm_fn,
    const std::function<std::vector<DualCertificate>(const VecR& best_point)>&
        certificates,
    const SolverOptions& opts = {}) {
  ProjectResult out;
  double g0 = ball.gauge(target);
  if (g0 <= 1.0 + 1e-12) {
    out.lower = out.upper = 0.0;
    out.point = target;
    out.status = SolveStatus::converged;
    return out;
  }

  // Feasible starts: radial pullback and the origin.
  VecR y = target / g0;
  double best = norm_fn(target - y);
  if (double v0 = norm_fn(target); v0 < best) {
    y = VecR::Zero(target.size());
    best = v0;
  }

  std::mt19937_64 rng = core::make_rng(opts.seed);
  const int n = static_cast<int>(target.size());
  int evals = 0;
  for (int pass = 0; pass < opts.restarts; ++pass) {
    bool improved = false;
    // Direction set: toward the target, coordinates, and random directions.
    std::vector<VecR> dirs;
    dirs.push_back(target - y);
    for (int i = 0; i < n && i < 64; ++i) dirs.push_back(VecR::Unit(n, i));
    for (int r = 0; r < 8; ++r) dirs.push_back(core::random_gaussian_vec(rng, n));
    for (const auto& d0 : dirs) {
      if (d0.norm() < 1e-14) continue;
      VecR d = d0 / d0.norm();
      auto [tlo, thi] = detail::feasible_interval(ball, y, d);
      if (thi - tlo < 1e-14) continue;
      auto f = [&](double t) {
        ++evals;
        return norm_fn(target - (y + t * d));
      };
      core::GoldenResult gr = core::golden_min(f, tlo, thi, 1e-11);
      if (gr.value < best - 1e-14) {
        best = gr.value;
        y += gr.x * d;
        improved = true;
      }
    }
    if (!improved) break;
  }
  out.point = y;
  out.upper = best;
  out.iterations = evals;

  // Certified lower bound: best dual certificate value.
  double lower = 0.0;
  for (const auto& cert : certificates(y)) {
    if (cert.dual_norm <= 1e-14) continue;
    double v = (cert.f.dot(target) - cert.ball_support_upper) / cert.dual_norm;
    lower = std::max(lower, v);
  }
  out.lower = std::min(lower, out.upper);
  out.status = (out.upper - out.lower <= opts.projection_tol * std::max(1.0, out.upper))
                   ? SolveStatus::converged
                   : SolveStatus::gap_open;
  return out;
}

// ---- nonconcave maximization -------------------------------------------------------------

// Multistart maximization of a (possibly nonconcave) objective over the ball.
// Returns a certified *lower* bound only: value = best found, gap = +inf.
//
// `invariant` may hold orthonormal columns spanning a subspace along which both
// the gauge and the objective are constant (e.g. the seminorm kernel).  Starts
// and search directions are projected off it; without the projection a ball
// that is a cylinder along that subspace yields unbounded line searches whose
// far samples lose the objective in floating-point cancellation.
inline SolveResult max_nonconcave(const BallSpec& ball,
                                  const std::function<double(const VecR&)>& objective,
                                  const std::vector<VecR>& seeds, const MatR& invariant,
                                  const SolverOptions& opts = {}) {
  std::mt19937_64 rng = core::make_rng(opts.seed);
  const int n = ball.nx();
  auto deflate = [&](VecR v) {
    if (invariant.cols() > 0) v -= invariant * (invariant.transpose() * v);
    return v;
  };
  std::vector<VecR> starts = seeds;
  for (int r = 0; r < opts.restarts; ++r) starts.push_back(core::random_gaussian_vec(rng, n));

  VecR best_x = VecR::Zero(n);
  double best = objective(best_x);
  int evals = 1;
  for (VecR s : starts) {
    s = deflate(s);
    double g = ball.gauge(s);
    if (g > 1.0) s /= g * (1.0 + 1e-12);
    double val = objective(s);
    ++evals;
    // Local polish: sampled line maximization along random + coordinate dirs.
    for (int pass = 0; pass < opts.ascent_passes; ++pass) {
      bool improved = false;
      std::vector<VecR> dirs;
      for (int r = 0; r < opts.ascent_random_dirs; ++r)
        dirs.push_back(core::random_gaussian_vec(rng, n));
      for (int i = 0; i < n && i < opts.ascent_coord_dirs; ++i) dirs.push_back(VecR::Unit(n, i));
      for (const auto& d0 : dirs) {
        VecR d = deflate(d0);
        if (d.norm() < 1e-12) continue;
        d /= d.norm();
        auto [tlo, thi] = detail::feasible_interval(ball, s, d);
        if (thi - tlo < 1e-13) continue;
        double step = (thi - tlo) / (opts.line_samples - 1);
        double loc_best = val, loc_t = 0.0;
        for (int k = 0; k < opts.line_samples; ++k) {
          double t = tlo + k * step;
          double v = objective(s + t * d);
          ++evals;
          if (v > loc_best) {
            loc_best = v;
            loc_t = t;
          }
        }
        // Refine around the best sample (local unimodality assumption).
        double a = std::max(tlo, loc_t - step), bnd = std::min(thi, loc_t + step);
        core::GoldenResult gr =
            core::golden_min([&](double t) { return -objective(s + t * d); }, a, bnd, 1e-10);
        ++evals;
        if (-gr.value > loc_best) {
          loc_best = -gr.value;
          loc_t = gr.x;
        }
        if (loc_best > val + 1e-14) {
          val = loc_best;
          s += loc_t * d;
          improved = true;
        }
      }
      if (!improved) break;
    }
    if (val > best) {
      best = val;
      best_x = s;
    }
  }
  SolveResult r;
  r.value = best;
  r.gap = std::numeric_limits<double>::infinity();
  r.certificate = best_x;
  r.iterations = evals;
  r.status = SolveStatus::gap_open;
  return r;
}

inline SolveResult max_nonconcave(const BallSpec& ball,
                                  const std::function<double(const VecR&)>& objective,
                                  const std::vector<VecR>& seeds,
                                  const SolverOptions& opts = {}) {
  return max_nonconcave(ball, objective, seeds, MatR(), opts);
}

}  // namespace lipos::cvx
