// distance.hpp — metrics on state spaces and bridge-based distance bounds.
//
// rho_states: the state metric sup{|ω₁(a) − ω₂(a)| : L(a) ≤ 1, a hermitian}.
// rho_ucp: its matrix-state version sup‖φ(x) − ψ(x)‖ with certified upper
// (Frobenius relaxation) and alternating rank-one lower bounds.
// coupling_defect: sup of the bridge's difference map over the bridge ball.
// hausdorff_states / dist_upper: Hausdorff-type bounds between the state
// spaces of two bridged systems.
#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lipos/convex/solve.hpp"
#include "lipos/metric/state.hpp"
#include "lipos/seminorm/lipsystem.hpp"

namespace lipos::metric {

// ---- the state metric -------------------------------------------------------------

// Certified enclosure of ρ_L(ω₁, ω₂).  The difference functional kills the
// unit, so the sup is finite and solved over the uncapped {L ≤ 1} ball; the
// sign is canonicalized so that swapping the arguments is bit-identical.
inline cvx::SolveResult rho_states(const sn::LipNormedSystem& ls, const State& w1,
                                   const State& w2, const cvx::SolverOptions& opts = {}) {
  VecR phi = w1.coords(ls.sys) - w2.coords(ls.sys);
  const double scale = phi.cwiseAbs().maxCoeff();
  if (scale <= 1e-14) {
    cvx::SolveResult r;
    r.certificate = VecR::Zero(ls.sys.dim());
    return r;  // identical states: zero at zero gap
  }
  for (int j = 0; j < phi.size(); ++j) {
    if (std::abs(phi(j)) <= 1e-13 * scale) continue;
    if (phi(j) < 0.0) phi = -phi;
    break;
  }
  return sn::dual_seminorm(ls, phi, opts);
}

// ---- sup of a matrix-valued linear image over a ball --------------------------------

namespace detail {

// Stacked real rows of u ↦ A(u) = Σ_j u_j images[j]: ‖A(u)‖_F = ‖T u‖₂.
inline MatR realified_rows(const std::vector<MatC>& images) {
  const int m = static_cast<int>(images.size());
  const int q = static_cast<int>(images[0].rows());
  MatR T(2 * q * q, m);
  for (int j = 0; j < m; ++j)
    for (int s = 0; s < q; ++s)
      for (int t = 0; t < q; ++t) {
        T(2 * (s * q + t), j) = images[j](s, t).real();
        T(2 * (s * q + t) + 1, j) = images[j](s, t).imag();
      }
  return T;
}

// Certified enclosure of sup{ ‖A(u)‖_op : u in ball }.  Rank-one image maps
// (in particular every scalar-valued map) reduce exactly to a support call;
// otherwise the upper bound is the Frobenius/coercivity relaxation and the
// lower bound comes from alternating rank-one functional ascent, each step of
// which is an exact support problem.
inline cvx::SolveResult sup_opnorm_image(const sn::BallSpec& ball,
                                         const std::vector<MatC>& images,
                                         const cvx::SolverOptions& opts = {}) {
  if (images.empty() || static_cast<int>(images.size()) != ball.nx())
    throw std::invalid_argument("sup_opnorm_image: one image per ball coordinate required");
  const int m = ball.nx();
  const int q = static_cast<int>(images[0].rows());
  MatR T = realified_rows(images);

  cvx::SolveResult out;
  if (T.norm() <= 1e-14) {
    out.certificate = VecR::Zero(m);
    return out;  // the zero map
  }

  sn::KernelSplit ks = sn::kernel_split(ball);
  if (ks.kernel.cols() > 0 && (T * ks.kernel).norm() > 1e-8 * T.norm())
    throw std::runtime_error(
        "sup_opnorm_image: the image map does not vanish on the seminorm kernel "
        "(the sup is unbounded)");
  auto deflate = [&](VecR f) {
    if (ks.kernel.cols() > 0) f -= ks.kernel * (ks.kernel.transpose() * f);
    return f;
  };

  Eigen::JacobiSVD<MatR> tsvd(T, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = tsvd.singularValues();
  if (sv.size() == 1 || sv(1) <= 1e-12 * sv(0)) {
    // A(u) = (v₁ᵀu)·A(v₁): exact through one support value (the ball is
    // symmetric, so sup |v₁ᵀu| = sup v₁ᵀu).
    VecR v1 = deflate(tsvd.matrixV().col(0));
    v1 /= v1.norm();
    MatC B = MatC::Zero(q, q);
    for (int j = 0; j < m; ++j) B += v1(j) * images[j];
    const double bop = core::sigma_max(B);
    cvx::SolveResult s = cvx::support(ball, v1, opts);
    out.value = bop * s.value;
    out.gap = bop * s.gap;
    out.certificate = s.certificate;
    out.iterations = s.iterations;
    out.status = s.status;
    return out;
  }

  // Certified upper: on the kernel complement ‖w‖ ≤ radius/√λmin(WᵀQW), and
  // ‖A(u)‖_op ≤ ‖A(u)‖_F = ‖T W w‖₂ there.
  MatR Qw = ks.complement.transpose() * cvx::coercivity_quadratic(ball) * ks.complement;
  Eigen::SelfAdjointEigenSolver<MatR> esq(Qw);
  const double lam = esq.eigenvalues().minCoeff();
  if (!(lam > 1e-14))
    throw std::runtime_error("sup_opnorm_image: ball is not coercive off the kernel");
  Eigen::JacobiSVD<MatR> wsvd(MatR(T * ks.complement));
  double upper = wsvd.singularValues()(0) * ball.radius / std::sqrt(lam);

  // Alternating lower: fix a rank-one functional Re⟨ξ, A(u) η⟩, solve the
  // support problem exactly, then refresh (ξ, η) from the top singular pair
  // of the image at the certificate.
  double lower = 0.0;
  VecR best_x = VecR::Zero(m);
  int evals = 0;
  cvx::SupportCache alt_cache;  // one ball across every alternating solve
  std::vector<std::pair<int, int>> seeds;
  for (int a = 0; a < q && static_cast<int>(seeds.size()) < 16; ++a)
    for (int b = 0; b < q && static_cast<int>(seeds.size()) < 16; ++b) seeds.emplace_back(a, b);
  for (auto [a, b] : seeds) {
    Eigen::VectorXcd xi = Eigen::VectorXcd::Zero(q), eta = Eigen::VectorXcd::Zero(q);
    xi(a) = 1.0;
    eta(b) = 1.0;
    double prev = -1.0;
    for (int it = 0; it < 8; ++it) {
      VecR f(m);
      for (int j = 0; j < m; ++j) f(j) = (xi.adjoint() * images[j] * eta)(0, 0).real();
      f = deflate(f);
      if (f.norm() <= 1e-13) break;
      cvx::SolveResult s = cvx::support(ball, f, opts, &alt_cache);
      evals += s.iterations;
      MatC A = MatC::Zero(q, q);
      for (int j = 0; j < m; ++j) A += s.certificate(j) * images[j];
      Eigen::JacobiSVD<MatC> asvd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const double val = asvd.singularValues()(0);
      if (val > lower) {
        lower = val;
        best_x = s.certificate;
      }
      if (val <= prev + 1e-12) break;
      prev = val;
      xi = asvd.matrixU().col(0);
      eta = asvd.matrixV().col(0);
    }
  }

  lower = std::min(lower, upper);  // floating-point guard
  out.value = 0.5 * (lower + upper);
  out.gap = 0.5 * (upper - lower) + 1e-13;
  out.certificate = best_x;
  out.iterations = evals;
  out.status = (out.gap <= opts.support_tol * std::max(1.0, out.value))
                   ? cvx::SolveStatus::converged
                   : cvx::SolveStatus::gap_open;
  return out;
}

}  // namespace detail

// ---- the matrix-state metric --------------------------------------------------------

struct HausdorffBound {
  double lower = 0.0;      // sampled/witnessed estimate (feasible, not exhaustive)
  double upper = 0.0;      // certified bound (mesh granularity aside); lower ≤ upper
  VecR witness;            // coordinates of the object attaining `lower`
  std::string witness_id;
};

// ρ_L(φ, ψ) = sup{ ‖φ(x) − ψ(x)‖ : L(x) ≤ 1, x hermitian }.  At p = 1 the
// image map is scalar and the enclosure collapses to the rho_states support
// problem; for larger p the bound pair is [alternating lower, Frobenius upper].
inline HausdorffBound rho_ucp(const sn::LipNormedSystem& ls, const MatrixState& phi,
                              const MatrixState& psi, const cvx::SolverOptions& opts = {}) {
  if (phi.p != psi.p) throw std::invalid_argument("rho_ucp: matrix sizes differ");
  const int m = ls.sys.dim();
  std::vector<MatC> images;
  images.reserve(m);
  for (int j = 0; j < m; ++j)
    images.push_back(phi.apply(ls.sys.basis()[j]) - psi.apply(ls.sys.basis()[j]));
  sn::BallSpec ball = sn::lip_ball(ls, sn::BallSpace::Hermitian);
  cvx::SolveResult s = detail::sup_opnorm_image(ball, images, opts);
  HausdorffBound out;
  out.lower = std::max(0.0, s.lower());
  out.upper = std::max(out.lower, s.upper());
  out.witness = s.certificate;
  out.witness_id = "alternating-rank-one";
  return out;
}

// ---- bridge-based distance bounds ----------------------------------------------------

// sup of the bridge's difference map over the bridge unit ball, the
// Thm-style upper bound on how far the two sides can sit apart.  Throws when
// the bridge fails to tie the sides together (kernel larger than the joint
// unit line: the sup would be infinite).
inline cvx::SolveResult coupling_defect(const sn::SeminormSpec& bridge,
                                        const cvx::SolverOptions& opts = {}) {
  if (bridge.kind != sn::Kind::Bridge)
    throw std::invalid_argument("coupling_defect: not a bridge node");
  if (bridge.bridge.difference.empty())
    throw std::invalid_argument("coupling_defect: bridge carries no difference map");
  sn::BallSpec ball = sn::build_bridge_ball(bridge, sn::BallSpace::Hermitian);
  sn::KernelSplit ks = sn::kernel_split(ball);
  if (ks.kernel.cols() >= 2)
    throw std::runtime_error(
        "coupling_defect: bridge ball kernel exceeds the joint unit line "
        "(decoupled bridge, the difference is unbounded)");

  cvx::SolveResult out;
  out.certificate = VecR::Zero(ball.nx());
  double lo = 0.0, hi = 0.0;
  for (const sn::OpNormAtom& atom : bridge.bridge.difference) {
    const int q = static_cast<int>(atom.coeffs[0].rows());
    std::vector<MatC> images(ball.nx(), MatC::Zero(q, q));
    for (int j = 0; j < ball.nx(); ++j)
      for (int i = 0; i < static_cast<int>(atom.coeffs.size()); ++i)
        if (ball.embed(i, j) != 0.0) images[j] += atom.weight * ball.embed(i, j) * atom.coeffs[i];
    cvx::SolveResult s = detail::sup_opnorm_image(ball, images, opts);
    out.iterations += s.iterations;
    if (s.upper() > hi) hi = s.upper();
    if (s.lower() > lo) {
      lo = s.lower();
      out.certificate = s.certificate;
    }
  }
  lo = std::min(lo, hi);
  out.value = 0.5 * (lo + hi);
  out.gap = 0.5 * (hi - lo);
  out.status = (out.gap <= opts.support_tol * std::max(1.0, out.value))
                   ? cvx::SolveStatus::converged
                   : cvx::SolveStatus::gap_open;
  return out;
}

using StateMatcher = std::function<State(const State&)>;

// Hausdorff-type bound between S(X) and S(Y) inside the bridge metric.
// upper: with matchers, the sup over sampled extreme states of the matched
// pair distance (exact for abelian blocks, mesh-granular for matrix blocks);
// without matchers it falls back to the coupling defect.  lower: max-min over
// small sampled state meshes (an estimate, clamped to stay below upper).
// Callers are expected to have verified the bridge beforehand.
inline HausdorffBound hausdorff_states(const sn::LipNormedSystem& X,
                                       const sn::LipNormedSystem& Y,
                                       const sn::SeminormSpec& bridge,
                                       const StateMatcher& x_to_y = nullptr,
                                       const StateMatcher& y_to_x = nullptr, int mesh = 512,
                                       int lower_mesh = 8,
                                       const cvx::SolverOptions& opts = {}) {
  sn::BallSpec ball = sn::build_bridge_ball(bridge, sn::BallSpace::Hermitian);
  const int mX = X.sys.dim(), mY = Y.sys.dim();
  if (ball.nx() != mX + mY)
    throw std::invalid_argument("hausdorff_states: bridge does not match the two systems");

  auto pair_phi = [&](const State& wx, const State& wy) {
    VecR phi(mX + mY);
    phi.head(mX) = wx.coords(X.sys);
    phi.tail(mY) = -wy.coords(Y.sys);
    return phi;
  };
  cvx::SupportCache pair_cache;  // one ball, many state pairs: reuse its cuts
  auto pair_rho = [&](const State& wx, const State& wy) {
    return cvx::support(ball, pair_phi(wx, wy), opts, &pair_cache);
  };

  HausdorffBound out;
  if (x_to_y && y_to_x) {
    for (const State& w : extreme_states(X.sys.shape(), mesh))
      out.upper = std::max(out.upper, pair_rho(w, x_to_y(w)).upper());
    for (const State& w : extreme_states(Y.sys.shape(), mesh))
      out.upper = std::max(out.upper, pair_rho(y_to_x(w), w).upper());
  } else {
    out.upper = coupling_defect(bridge, opts).upper();
  }

  // The inf side of each max-min must range over mixtures as well (infima are
  // not attained at extreme states), so the candidate lists carry extremes,
  // seeded random mixed states, and — when available — the matched state.
  std::mt19937_64 rng = core::make_rng(opts.seed);
  auto candidates = [&](const BlockShape& shape) {
    std::vector<State> c = extreme_states(shape, lower_mesh);
    for (int r = 0; r < lower_mesh; ++r) c.push_back(random_state(shape, rng));
    return c;
  };
  std::vector<State> sx = candidates(X.sys.shape());
  std::vector<State> sy = candidates(Y.sys.shape());
  auto scan = [&](const std::vector<State>& from, const std::vector<State>& to,
                  const StateMatcher& matcher, bool from_left, const char* tag) {
    for (std::size_t i = 0; i < from.size(); ++i) {
      double dmin = std::numeric_limits<double>::infinity();
      auto probe = [&](const State& other) {
        cvx::SolveResult r =
            from_left ? pair_rho(from[i], other) : pair_rho(other, from[i]);
        dmin = std::min(dmin, r.value);
      };
      for (const State& w : to) probe(w);
      if (matcher) probe(matcher(from[i]));
      if (dmin > out.lower) {
        out.lower = dmin;
        out.witness = from_left ? from[i].coords(X.sys) : from[i].coords(Y.sys);
        out.witness_id = std::string(tag) + std::to_string(i);
      }
    }
  };
  scan(sx, sy, x_to_y, true, "X-sample-");
  scan(sy, sx, y_to_x, false, "Y-sample-");
  out.lower = std::min(out.lower, out.upper);
  return out;
}

// Per-bridge coupling-defect upper bounds; each value bounds the matched-pair
// distance simultaneously for every matrix-state size p, because the
// difference-map bound dominates the restriction matcher on every UCP_p.
inline std::vector<double> dist_upper(const std::vector<const sn::SeminormSpec*>& bridges,
                                      const cvx::SolverOptions& opts = {}) {
  std::vector<double> out;
  out.reserve(bridges.size());
  for (const sn::SeminormSpec* b : bridges) out.push_back(coupling_defect(*b, opts).upper());
  return out;
}

}  // namespace lipos::metric
