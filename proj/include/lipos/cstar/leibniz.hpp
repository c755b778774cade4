// leibniz.hpp — multiplicative estimates for lip-normed systems: interval values
// of the lip-norm on general elements, certified bounds on the seminorm over
// positive contractions, an upper certificate for the squares map x ↦ x*x, and
// sampled lower bounds for the best constant C in ‖ab‖_L ≤ C ‖a‖_L ‖b‖_L.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "lipos/core/blocks.hpp"
#include "lipos/core/common.hpp"
#include "lipos/core/subsystem.hpp"
#include "lipos/seminorm/lipsystem.hpp"
#include "lipos/seminorm/spec.hpp"

namespace lipos::cstar {

using core::BlockElement;
using core::MatC;
using core::MatR;
using core::VecR;
using core::cplx;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
};

// ‖x‖_L = max{‖x‖/R, L(x)} as a two-sided enclosure.  The seminorm value and
// the operator norm are exact; the only uncertainty comes from the radius
// interval (R.lo ≤ R ≤ R.hi, so 1/R ∈ [1/R.hi, 1/R.lo]).
inline Interval lip_norm_interval(const sn::LipNormedSystem& ls, const BlockElement& x) {
  core::Coords c = ls.sys.coords(x);
  const double L = sn::eval_general(ls.lip, c.u, c.v);
  const double nrm = core::op_norm(x);
  if (!(ls.R.hi > 0.0)) {
    // Degenerate (single-state) system: the lip-norm collapses to the norm.
    const double v = std::max(nrm, L);
    return {v, v};
  }
  const double r_lo = ls.R.lo > 0.0 ? ls.R.lo : ls.R.hi;
  return {std::max(nrm / ls.R.hi, L), std::max(nrm / r_lo, L)};
}

namespace detail {

// Upper bound on sup{ w·‖M(x)‖_p } over the coordinate box |x - c| ≤ h
// (entrywise): each row satisfies |(Mx)_i| ≤ |(Mc)_i| + (|M| h)_i.
inline double box_sup_linmap(const sn::LinearMapAtom& a, const VecR& c, const VecR& h) {
  VecR m = (a.matrix * c).cwiseAbs() + a.matrix.cwiseAbs() * h;
  switch (a.p) {
    case sn::PNorm::One:
      return a.weight * m.lpNorm<1>();
    case sn::PNorm::Two:
      return a.weight * m.norm();
    case sn::PNorm::Inf:
      return a.weight * m.lpNorm<Eigen::Infinity>();
  }
  throw std::logic_error("box_sup_linmap: unknown p-norm");
}

// Upper bound on sup{ w·σmax(Σ x_j C_j) } over the box: triangle inequality
// around the centre plus one σmax per coefficient times the half-width.
inline double box_sup_opnorm(const sn::OpNormAtom& a, const VecR& c, const VecR& h) {
  const int d = a.dim();
  MatC centre = MatC::Zero(d, d);
  double spread = 0.0;
  for (int j = 0; j < c.size(); ++j) {
    if (c[j] != 0.0) centre += c[j] * a.coeffs[j];
    if (h[j] != 0.0) spread += h[j] * core::sigma_max(a.coeffs[j]);
  }
  return a.weight * (core::sigma_max(centre) + spread);
}

// Certified upper bound on sup{ s(x) : |x - c| ≤ h entrywise }.  Quotient nodes
// minimize the box supremum over their shift span (any shift yields a valid
// upper bound because sup_x min_λ ≤ min_λ sup_x); the minimization runs golden
// sweeps per axis.  Bridge nodes are rejected: a coordinate box has no paired
// left/right structure.
inline double box_sup_raw(const sn::SeminormSpec& s, const VecR& c, const VecR& h) {
  switch (s.kind) {
    case sn::Kind::LinMap:
      return box_sup_linmap(s.lin, c, h);
    case sn::Kind::OpNorm:
      return box_sup_opnorm(s.op, c, h);
    case sn::Kind::Scale:
      return s.scale_factor * box_sup_raw(s.children[0], c, h);
    case sn::Kind::Max: {
      double v = 0.0;
      for (const auto& ch : s.children) v = std::max(v, box_sup_raw(ch, c, h));
      return v;
    }
    case sn::Kind::Quotient: {
      VecR lam = VecR::Zero(static_cast<int>(s.axes.size()));
      auto value_at = [&](const VecR& l) {
        VecR shifted = c;
        for (int i = 0; i < l.size(); ++i) shifted -= l[i] * s.axes[static_cast<std::size_t>(i)];
        return box_sup_raw(s.children[0], shifted, h);
      };
      const double span = c.lpNorm<1>() + h.lpNorm<1>() + 1.0;
      double best = value_at(lam);
      for (int sweep = 0; sweep < 3; ++sweep) {
        for (int i = 0; i < lam.size(); ++i) {
          auto f1 = [&](double t) {
            VecR l = lam;
            l[i] = t;
            return value_at(l);
          };
          core::GoldenResult g = core::golden_min_expand(f1, lam[i] - span, lam[i] + span, 1e-9);
          if (g.value < best) {
            best = g.value;
            lam[i] = g.x;
          }
        }
      }
      return best;
    }
    case sn::Kind::Bridge:
      throw std::invalid_argument("box_sup: bridge specs have no single-system box bound");
  }
  throw std::logic_error("box_sup: unknown node kind");
}

// Entry point handling the native-general embedding of hermitian coordinates
// (hermitian boxes have zero imaginary part, matching eval_hermitian).
inline double box_sup(const sn::SeminormSpec& s, const VecR& c, const VecR& h) {
  if (!s.native_general) return box_sup_raw(s, c, h);
  VecR ce = VecR::Zero(2 * c.size()), he = VecR::Zero(2 * h.size());
  ce.head(c.size()) = c;
  he.head(h.size()) = h;
  return box_sup_raw(s, ce, he);
}

// Exact per-coordinate range of the Hilbert–Schmidt pairings ⟨B_j, z⟩ over all
// ambient 0 ⪯ z ⪯ I: block-wise, the extremes pick the spectral projections of
// B_j's positive / negative parts, so the range is [Σλ₋(B_j), Σλ₊(B_j)].
inline void psd_pairing_range(const core::OperatorSubsystem& sys, VecR& centre, VecR& half) {
  const int m = sys.dim();
  centre.resize(m);
  half.resize(m);
  for (int j = 0; j < m; ++j) {
    double pos = 0.0, neg = 0.0;
    for (const auto& blk : sys.basis()[static_cast<std::size_t>(j)].blocks) {
      Eigen::SelfAdjointEigenSolver<MatC> es(blk);
      for (int i = 0; i < es.eigenvalues().size(); ++i) {
        const double lam = es.eigenvalues()[i];
        if (lam > 0.0)
          pos += lam;
        else
          neg += lam;
      }
    }
    centre[j] = 0.5 * (pos + neg);
    half[j] = 0.5 * (pos - neg);
  }
}

}  // namespace detail

// Certified upper bound on M_sq := sup{ L(z) : z in the system, 0 ⪯ z ⪯ I }.
struct PsdSeminormBound {
  double value = 0.0;
  bool exact = false;
  std::string route;  // "abelian-projections" (exact) or "interval-box"
};

// Two routes:
//  * abelian-projections — when the system is a full abelian ambient (all
//    blocks 1×1, span = everything), L is convex and the order interval
//    [0, I] is a cube whose extreme points are the 2^B diagonal projections;
//    enumerating them gives the exact supremum.
//  * interval-box — generally, coordinates of any 0 ⪯ z ⪯ I lie in an exact
//    per-coordinate box (pairing ranges pushed through the Gram inverse), and
//    the box supremum of the seminorm tree bounds M_sq from above.
inline PsdSeminormBound psd_seminorm_bound(const sn::LipNormedSystem& ls) {
  const core::OperatorSubsystem& sys = ls.sys;
  const int m = sys.dim();
  const int blocks = sys.shape().block_count();
  if (sys.shape().abelian() && m == blocks && blocks <= 16) {
    double best = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << blocks); ++mask) {
      BlockElement z = core::identity(sys.shape());
      for (int k = 0; k < blocks; ++k)
        z.blocks[static_cast<std::size_t>(k)](0, 0) = (mask >> k) & 1u ? 1.0 : 0.0;
      core::Coords c = sys.coords(z);
      best = std::max(best, sn::eval_hermitian(ls.lip, c.u));
    }
    return {best, true, "abelian-projections"};
  }
  VecR pair_c, pair_h;
  detail::psd_pairing_range(sys, pair_c, pair_h);
  Eigen::LDLT<MatR> ldlt(sys.gram());
  MatR ginv = ldlt.solve(MatR::Identity(m, m));
  VecR centre = ginv * pair_c;
  VecR half = ginv.cwiseAbs() * pair_h;
  return {detail::box_sup(ls.lip, centre, half), false, "interval-box"};
}

// Certified upper constant for the squares map: when the span is closed under
// products, every unit-lip-ball element x satisfies
//   ‖x*x‖_L ≤ C,   C = max{ R_hi²/R_lo , M_sq · R_hi² }
// (norm part: ‖x*x‖ ≤ ‖x‖² ≤ R_hi²; seminorm part: x*x/R_hi² is a positive
// contraction in the system, so L(x*x) ≤ R_hi² M_sq).  Availability requires
// certifying closure: either the span is the full block ambient, or the
// pairwise product defect vanishes numerically.
struct LeibnizCert {
  bool available = false;
  double squares_constant = std::numeric_limits<double>::quiet_NaN();
  double psd_bound = std::numeric_limits<double>::quiet_NaN();
  std::string route;  // closure route: "full-ambient", "product-defect", or "" if unavailable
};

inline LeibnizCert leibniz_upper_cert(const sn::LipNormedSystem& ls) {
  const core::OperatorSubsystem& sys = ls.sys;
  LeibnizCert cert;
  if (sys.dim() == sys.shape().total_real_dim()) {
    cert.route = "full-ambient";
  } else if (sys.dim() <= 40 && sys.product_defect() <= 1e-10) {
    cert.route = "product-defect";
  } else {
    return cert;
  }
  cert.available = true;
  if (!(ls.R.hi > 0.0)) {
    // L ≡ 0 on a single-state system: ‖x*x‖_L = ‖x*x‖ ≤ ‖x‖_L².
    cert.psd_bound = 0.0;
    cert.squares_constant = 1.0;
    return cert;
  }
  PsdSeminormBound msq = psd_seminorm_bound(ls);
  const double r_lo = ls.R.lo > 0.0 ? ls.R.lo : ls.R.hi;
  cert.psd_bound = msq.value;
  cert.squares_constant =
      std::max(ls.R.hi * ls.R.hi / r_lo, msq.value * ls.R.hi * ls.R.hi);
  return cert;
}

// Sampled lower bound for the best constant C in ‖ab‖_L ≤ C ‖a‖_L ‖b‖_L:
// the maximum over sampled pairs of ‖ab‖_L.lo / (‖a‖_L.hi ‖b‖_L.hi).  Pairs
// whose product leaves the span are skipped (no multiplicative statement
// applies to them).  Witness elements are paired with themselves, their
// adjoints, and each other; the rest of the budget is random.
inline double leibniz_constant_lower(const sn::LipNormedSystem& ls, int random_samples,
                                     const std::vector<BlockElement>& witnesses = {},
                                     std::uint64_t seed = core::kDefaultSeed) {
  if (random_samples < 0)
    throw std::invalid_argument("leibniz_constant_lower: negative sample count");
  const core::OperatorSubsystem& sys = ls.sys;
  double best = 0.0;
  auto try_pair = [&](const BlockElement& a, const BlockElement& b) {
    BlockElement ab = core::mul(a, b);
    if (!sys.contains(a) || !sys.contains(b) || !sys.contains(ab)) return;
    Interval na = lip_norm_interval(ls, a);
    Interval nb = lip_norm_interval(ls, b);
    if (na.hi <= 1e-12 || nb.hi <= 1e-12) return;
    Interval nab = lip_norm_interval(ls, ab);
    best = std::max(best, nab.lo / (na.hi * nb.hi));
  };
  for (const auto& w : witnesses) {
    BlockElement ws = core::adjoint(w);
    try_pair(w, w);
    try_pair(w, ws);
    try_pair(ws, w);
  }
  if (witnesses.size() >= 2 && witnesses.size() <= 8)
    for (std::size_t i = 0; i < witnesses.size(); ++i)
      for (std::size_t j = 0; j < witnesses.size(); ++j)
        if (i != j) try_pair(witnesses[i], witnesses[j]);
  std::mt19937_64 rng = core::make_rng(seed);
  const int m = sys.dim();
  for (int s = 0; s < random_samples; ++s) {
    core::Coords ca{core::random_gaussian_vec(rng, m), core::random_gaussian_vec(rng, m)};
    core::Coords cb{core::random_gaussian_vec(rng, m), core::random_gaussian_vec(rng, m)};
    if (s % 3 == 0) {
      // Every third pair hermitian: products of hermitians probe the seminorm
      // differently from generic elements.
      ca.v.setZero();
      cb.v.setZero();
    }
    try_pair(sys.element(ca), sys.element(cb));
  }
  return best;
}

}  // namespace lipos::cstar
