// lipsystem.hpp — Lip-normed operator systems.
//
// Bundles an operator subsystem with a Lipschitz seminorm and a certified
// enclosure of its radius R = sup{ ‖a‖₀ / L(a) : a hermitian, L(a) > 0 }
// (equivalently half the state-space diameter).  The combined lip-norm
// ‖a‖_L = max{ ‖a‖ / R, L(a) } is exposed through outer/inner balls that use
// the upper/lower end of the radius enclosure, so callers can pick the side
// with the right certification direction.  Also provides dual seminorm values
// (suprema of linear functionals over the L-ball) and bridge verification:
// does a bridge seminorm on X ⊕ Y restrict to the component seminorms?
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lipos/convex/solve.hpp"
#include "lipos/seminorm/ball.hpp"
#include "lipos/seminorm/spec.hpp"

namespace lipos::sn {

// ---- radius ---------------------------------------------------------------------

struct RadiusInterval {
  double lo = 0.0;     // certified lower bound (attained by a feasible witness)
  double hi = 0.0;     // certified upper bound
  bool closed = false; // hi - lo <= 1e-4 * max(hi, 1e-12)
  std::string method;  // "single-point", "abelian-pairs", "ascent+coercivity"
};

// Point-evaluation rows of an abelian system: V(k, j) = value of basis b_j at
// the k-th point, so the Kadison function of element(u) is V u.
inline MatR abelian_value_rows(const OperatorSubsystem& sys) {
  if (!sys.shape().abelian())
    throw std::invalid_argument("abelian_value_rows: system is not abelian");
  const int k = sys.shape().block_count(), m = sys.dim();
  MatR V(k, m);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < m; ++j) V(i, j) = sys.basis()[j].blocks[i](0, 0).real();
  return V;
}

namespace detail {

// Shared kernel sanity: throws when {L = 0} provably exceeds the unit line
// (the radius would be infinite).
inline void require_kernel_in_unit_line(const KernelSplit& ks, int m) {
  if (ks.kernel.cols() >= 2)
    throw std::runtime_error("radius: seminorm kernel is larger than the unit line");
  if (ks.kernel.cols() == 1) {
    VecR e = VecR::Zero(m);
    e(0) = 1.0;
    VecR kvec = ks.kernel.col(0);
    if ((kvec - kvec.dot(e) * e).norm() > 1e-8)
      throw std::runtime_error("radius: seminorm kernel is not the unit line");
  }
}

}  // namespace detail

// Certified enclosure of the radius.  Abelian systems get the exact route
// (pairwise point-evaluation supports); everything else combines a multistart
// oscillation ascent (lower) with a coercivity bound (upper).
inline RadiusInterval radius(const SeminormSpec& lip, const OperatorSubsystem& sys,
                             const cvx::SolverOptions& opts = {}) {
  const int m = sys.dim();
  if (lip.system_dim() != m)
    throw std::invalid_argument("radius: spec does not match the system dimension");
  RadiusInterval out;
  if (m == 1) {  // only multiples of the unit: every oscillation vanishes
    out.lo = out.hi = 0.0;
    out.closed = true;
    out.method = "single-point";
    return out;
  }

  BallSpec ball = build_ball(lip, sys, BallSpace::Hermitian);
  KernelSplit ks = kernel_split(ball);
  detail::require_kernel_in_unit_line(ks, m);

  auto close = [&](double lo, double hi, const char* method) {
    out.lo = lo;
    out.hi = std::max(hi, lo);
    out.closed = out.hi - out.lo <= 1e-4 * std::max(out.hi, 1e-12);
    out.method = method;
    return out;
  };

  if (sys.shape().abelian()) {
    MatR V = abelian_value_rows(sys);
    const int k = static_cast<int>(V.rows());
    double lo = 0.0, hi = 0.0;
    cvx::SupportCache cache;  // one ball across all point pairs
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) {
        VecR phi = (V.row(i) - V.row(j)).transpose();
        cvx::SolveResult s = cvx::support(ball, phi, opts, &cache);
        lo = std::max(lo, 0.5 * s.lower());
        hi = std::max(hi, 0.5 * s.upper());
      }
    return close(lo, hi, "abelian-pairs");
  }

  // -- general path -----------------------------------------------------------
  // Lower: maximize the oscillation over the ball (multistart ascent), then
  // refine with the state pair at the certificate's spectral extremes.  On
  // high-dimensional systems the ascent only has to land in the right basin —
  // the certified support refinement below carries the precision — so its
  // budget is trimmed there.
  auto osc_obj = [&](const VecR& u) { return core::osc_seminorm(sys.element(u)); };
  std::vector<VecR> seeds;
  for (int i = 0; i < m && i < 8; ++i) seeds.push_back(VecR::Unit(m, i));
  cvx::SolverOptions aopts = opts;
  if (m > 16) {
    aopts.restarts = std::min(aopts.restarts, 8);
    aopts.ascent_passes = std::min(aopts.ascent_passes, 4);
    aopts.ascent_random_dirs = std::min(aopts.ascent_random_dirs, 4);
    aopts.ascent_coord_dirs = std::min(aopts.ascent_coord_dirs, 12);
    aopts.line_samples = std::min(aopts.line_samples, 17);
  }
  // The kernel (= unit line) is passed as the invariant subspace: both the
  // gauge and the oscillation are constant along it.
  cvx::SolveResult ascent = cvx::max_nonconcave(ball, osc_obj, seeds, ks.kernel, aopts);
  double lo = ascent.value;

  // State-pair refinement: ω± the eigenstates at the global max/min eigenvalue
  // of a witness; sup over the ball of (ω₊ - ω₋)/2 is a valid lower bound for R
  // and is solved as a plain support problem.  The support maximizer is itself
  // a better witness, so the state pair and the support solve alternate until
  // the value settles; every iterate is a certified lower bound.
  cvx::SolverOptions ropts = opts;
  ropts.max_cuts = std::min(ropts.max_cuts, 600);
  cvx::SupportCache rcache;
  VecR witness = ascent.certificate;
  for (int round = 0; round < 5; ++round) {
    core::BlockElement a = sys.element(witness);
    double best_max = 0.0, best_min = 0.0;
    int blk_max = -1, blk_min = -1;
    Eigen::VectorXcd v_max, v_min;
    for (int k = 0; k < sys.shape().block_count(); ++k) {
      Eigen::SelfAdjointEigenSolver<MatC> es(a.blocks[k]);
      const int d = static_cast<int>(es.eigenvalues().size());
      if (blk_max < 0 || es.eigenvalues()(d - 1) > best_max) {
        best_max = es.eigenvalues()(d - 1);
        blk_max = k;
        v_max = es.eigenvectors().col(d - 1);
      }
      if (blk_min < 0 || es.eigenvalues()(0) < best_min) {
        best_min = es.eigenvalues()(0);
        blk_min = k;
        v_min = es.eigenvectors().col(0);
      }
    }
    if (blk_max < 0 || blk_min < 0 || (blk_max == blk_min && (v_max - v_min).norm() <= 1e-9))
      break;
    VecR phi(m);
    for (int j = 0; j < m; ++j) {
      const MatC& bmax = sys.basis()[j].blocks[blk_max];
      const MatC& bmin = sys.basis()[j].blocks[blk_min];
      phi(j) = (v_max.adjoint() * bmax * v_max)(0, 0).real() -
               (v_min.adjoint() * bmin * v_min)(0, 0).real();
    }
    // Only the feasible-point lower bound is consumed, and it locks in within
    // a modest cut budget; the certified upper side is not needed here.
    cvx::SolveResult s = cvx::support(ball, phi, ropts, &rcache);
    const double prev = lo;
    lo = std::max(lo, 0.5 * s.lower());
    witness = s.certificate;
    if (lo <= prev * (1.0 + 1e-10) + 1e-14) break;
  }

  // Upper: every ball point can be shifted to have vanishing unit coordinate
  // without changing L or the oscillation, and on {u_0 = 0} the coercivity
  // quadratic bounds the coordinate norm; the Gram form then bounds the
  // operator norm (osc ≤ ‖·‖ ≤ ‖·‖_HS).
  MatR W = MatR::Zero(m, m - 1);
  W.bottomRows(m - 1).setIdentity();
  MatR Qw = W.transpose() * cvx::coercivity_quadratic(ball) * W;
  Eigen::SelfAdjointEigenSolver<MatR> esq(Qw);
  double lam = esq.eigenvalues().minCoeff();
  if (!(lam > 1e-14))
    throw std::runtime_error("radius: coercivity failed on the unit complement");
  MatR Gw = W.transpose() * sys.gram() * W;
  Eigen::SelfAdjointEigenSolver<MatR> esg(Gw);
  double hi = std::sqrt(esg.eigenvalues().maxCoeff()) * ball.radius / std::sqrt(lam);
  return close(lo, hi, "ascent+coercivity");
}

// ---- the bundled system -----------------------------------------------------------

struct LipNormedSystem {
  OperatorSubsystem sys;
  SeminormSpec lip;
  RadiusInterval R;
};

inline LipNormedSystem make_lip_system(OperatorSubsystem sys, SeminormSpec lip,
                                       const cvx::SolverOptions& opts = {}) {
  RadiusInterval r = radius(lip, sys, opts);
  return LipNormedSystem{std::move(sys), std::move(lip), std::move(r)};
}

// {L ≤ r}: the plain seminorm ball (a cylinder along the unit line).
inline BallSpec lip_ball(const LipNormedSystem& ls, BallSpace space, double r = 1.0) {
  return build_ball(ls.lip, ls.sys, space, r);
}

namespace detail {

inline BallSpec lip_norm_ball(const LipNormedSystem& ls, BallSpace space, double r,
                              double R_used) {
  // Degenerate single-point systems carry ‖a‖_L = ‖a‖ (radius zero).
  const double cap = R_used > 0.0 ? r * R_used : r;
  return build_ball(ls.lip, ls.sys, space, r, cap);
}

}  // namespace detail

// {‖·‖_L ≤ r} with the radius replaced by its upper bound: a certified
// superset of the true lip-norm ball (use for suprema upper bounds).
inline BallSpec lip_norm_ball_outer(const LipNormedSystem& ls, BallSpace space,
                                    double r = 1.0) {
  return detail::lip_norm_ball(ls, space, r, ls.R.hi);
}

// The same ball built from the radius lower bound: a certified subset of the
// true lip-norm ball (use for feasible witnesses).
inline BallSpec lip_norm_ball_inner(const LipNormedSystem& ls, BallSpace space,
                                    double r = 1.0) {
  return detail::lip_norm_ball(ls, space, r, ls.R.lo > 0.0 ? ls.R.lo : ls.R.hi);
}

// sup{ φ(a) : ‖a‖_L ≤ 1, a hermitian } in hermitian coordinates.  Functionals
// that annihilate the seminorm kernel are solved over the uncapped {L ≤ 1}
// ball (the suprema agree there and the exact solver paths stay available);
// all others go through the norm-capped outer ball.
inline cvx::SolveResult dual_seminorm(const LipNormedSystem& ls, const VecR& phi,
                                      const cvx::SolverOptions& opts = {}) {
  BallSpec ball = lip_ball(ls, BallSpace::Hermitian);
  KernelSplit ks = kernel_split(ball);
  bool annihilates = true;
  for (int i = 0; i < ks.kernel.cols(); ++i)
    if (std::abs(phi.dot(ks.kernel.col(i))) > 1e-9 * std::max(1.0, phi.norm()))
      annihilates = false;
  if (annihilates) return cvx::support(ball, phi, opts);
  return cvx::support(lip_norm_ball_outer(ls, BallSpace::Hermitian), phi, opts);
}

// ---- bridges -----------------------------------------------------------------------

// Ball of a bridge seminorm over the joint coordinates [u_X; u_Y] (hermitian)
// or the full native layout; bridges have no enclosing OperatorSubsystem, so
// this bypasses build_ball.
inline BallSpec build_bridge_ball(const SeminormSpec& bridge, BallSpace space,
                                  double r = 1.0) {
  if (bridge.kind != Kind::Bridge)
    throw std::invalid_argument("build_bridge_ball: not a bridge node");
  if (!(r > 0.0)) throw std::invalid_argument("build_bridge_ball: radius must be positive");
  BallSpec ball;
  ball.radius = r;
  ball.native_cols = bridge.cols;
  ball.constraints = normalize_to_constraints(bridge);
  if (space == BallSpace::Hermitian && bridge.native_general) {
    const int mh = bridge.cols / 2;  // native layout is [u_X; u_Y; v_X; v_Y]
    ball.embed = MatR::Zero(bridge.cols, mh);
    ball.embed.topRows(mh).setIdentity();
  } else {
    ball.embed = MatR::Identity(bridge.cols, bridge.cols);
  }
  return ball;
}

struct CompletionResult {
  double value = 0.0;  // upper estimate of inf over the other side
  VecR other;          // hermitian coordinates of the minimizing completion
};

// Given hermitian coordinates on one side of a bridge, minimize the bridge
// value over hermitian completions of the other side.  Start: least-squares
// zeroing of the coupling atoms; refinement: coordinate + random direction
// descent (the objective is convex, so stalls only happen at corners, which
// the random directions break).
inline CompletionResult min_completion(const SeminormSpec& bridge, const VecR& given,
                                       bool given_left,
                                       const cvx::SolverOptions& opts = {}) {
  if (bridge.kind != Kind::Bridge)
    throw std::invalid_argument("min_completion: not a bridge node");
  const int cl = bridge.bridge.left_cols, cr = bridge.bridge.right_cols;
  const int mg = bridge.native_general ? (given_left ? cl : cr) / 2 : (given_left ? cl : cr);
  const int mo = bridge.native_general ? (given_left ? cr : cl) / 2 : (given_left ? cr : cl);
  if (given.size() != mg)
    throw std::invalid_argument("min_completion: coordinate size mismatch");

  // Hermitian coordinate -> joint native layout maps for both sides.
  auto herm_to_joint = [&](bool left) {
    MatR E = bridge_embedding(bridge, left);
    const int comp = left ? cl : cr;
    MatR pad = MatR::Zero(comp, bridge.native_general ? comp / 2 : comp);
    pad.topRows(pad.cols()).setIdentity();
    return MatR(E * pad);
  };
  MatR Jg = herm_to_joint(given_left);
  MatR Jo = herm_to_joint(!given_left);
  VecR base = Jg * given;

  auto f = [&](const VecR& y) { return eval_raw(bridge, base + Jo * y); };

  // Least-squares coupling zeroing over the free side.
  std::vector<MatR> rows;
  for (std::size_t k = 2; k < bridge.children.size(); ++k) {
    auto cs = normalize_to_constraints(bridge.children[k]);
    for (const auto& c : cs) {
      for (const auto& a : c.lin) rows.push_back(a.matrix);
      for (const auto& a : c.op) rows.push_back(a.real_rows());
    }
  }
  VecR y = VecR::Zero(mo);
  if (!rows.empty()) {
    int total = 0;
    for (const auto& r : rows) total += static_cast<int>(r.rows());
    MatR S(total, bridge.cols);
    int at = 0;
    for (const auto& r : rows) {
      S.middleRows(at, r.rows()) = r;
      at += static_cast<int>(r.rows());
    }
    MatR A = S * Jo;
    VecR b = -(S * base);
    Eigen::CompleteOrthogonalDecomposition<MatR> cod(A);
    y = cod.solve(b);
  }
  double best = f(y);

  std::mt19937_64 rng = core::make_rng(opts.seed);
  for (int pass = 0; pass < 12; ++pass) {
    double pass_start = best;
    std::vector<VecR> dirs;
    for (int i = 0; i < mo; ++i) dirs.push_back(VecR::Unit(mo, i));
    for (int r = 0; r < 6; ++r) dirs.push_back(core::random_gaussian_vec(rng, mo));
    for (const auto& d : dirs) {
      auto line = [&](double t) { return f(y + t * d); };
      double bracket = 2.0 * std::max(1.0, best) / std::max(d.norm(), 1e-14);
      core::GoldenResult g = core::golden_min_expand(line, -bracket, bracket, 1e-12);
      if (g.value < best - 1e-15) {
        best = g.value;
        y += g.x * d;
      }
    }
    if (pass_start - best <= 1e-12 * std::max(1.0, pass_start)) break;
  }
  return CompletionResult{best, y};
}

struct BridgeReport {
  // Worst excess of inf over completions above the component value on probes
  // normalized to component seminorm 1 (a valid bridge keeps these near 0;
  // the bridge value can never fall below the component value).
  double left_gap = 0.0;
  double right_gap = 0.0;
  bool joint_kernel_unit_line = false;
  int probe_count = 0;
};

// Check that the bridge seminorm restricts to the component seminorms: for
// probes x with L_X(x) = 1, inf over y of the bridge value should equal 1
// (and symmetrically).  Probes: coordinate directions, random hermitian
// directions, and optional caller-supplied witnesses.
inline BridgeReport verify_bridge(const SeminormSpec& bridge, const SeminormSpec& left,
                                  const SeminormSpec& right, int random_probes = 6,
                                  const std::vector<VecR>& left_probes = {},
                                  const std::vector<VecR>& right_probes = {},
                                  const cvx::SolverOptions& opts = {}) {
  if (bridge.kind != Kind::Bridge)
    throw std::invalid_argument("verify_bridge: not a bridge node");
  if (left.cols != bridge.bridge.left_cols || right.cols != bridge.bridge.right_cols ||
      left.native_general != bridge.native_general ||
      right.native_general != bridge.native_general)
    throw std::invalid_argument("verify_bridge: component layout mismatch");

  BridgeReport rep;

  // Joint kernel: must be the line through (e_X, e_Y).
  BallSpec ball = build_bridge_ball(bridge, BallSpace::Hermitian);
  KernelSplit ks = kernel_split(ball);
  if (ks.kernel.cols() == 1) {
    const int mL = left.system_dim();
    VecR joint_unit = VecR::Zero(ball.nx());
    joint_unit(0) = 1.0 / std::sqrt(2.0);
    joint_unit(mL) = 1.0 / std::sqrt(2.0);
    VecR kvec = ks.kernel.col(0);
    rep.joint_kernel_unit_line = (kvec - kvec.dot(joint_unit) * joint_unit).norm() <= 1e-8;
  }

  std::mt19937_64 rng = core::make_rng(opts.seed);
  auto side_gap = [&](const SeminormSpec& comp, bool is_left,
                      const std::vector<VecR>& extra) {
    const int mc = comp.system_dim();
    std::vector<VecR> probes;
    for (int i = 0; i < mc && i < 16; ++i) probes.push_back(VecR::Unit(mc, i));
    for (int r = 0; r < random_probes; ++r) probes.push_back(core::random_gaussian_vec(rng, mc));
    probes.insert(probes.end(), extra.begin(), extra.end());
    double gap = 0.0;
    int used = 0;
    for (VecR p : probes) {
      double v = eval_hermitian(comp, p);
      if (v < 1e-10) continue;  // unit-line directions carry no information
      p /= v;
      CompletionResult c = min_completion(bridge, p, is_left, opts);
      gap = std::max(gap, c.value - 1.0);
      ++used;
    }
    rep.probe_count += used;
    return gap;
  };
  rep.left_gap = side_gap(left, true, left_probes);
  rep.right_gap = side_gap(right, false, right_probes);
  return rep;
}

}  // namespace lipos::sn
