// limit.hpp — stabilized limits of growing seminorm families.  A family
// L_n = max{base-ish part, blown-up coupling maps} concentrates, as the
// parameter grows, on the joint kernel of the blowup maps; this module
// extracts that surviving span, restricts the stabilized seminorm to it,
// decides whether the limit inherits multiplicative (C*) structure, and
// probes the tail of the defect function at the largest parameters.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "lipos/core/blocks.hpp"
#include "lipos/core/common.hpp"
#include "lipos/core/subsystem.hpp"
#include "lipos/cstar/curve.hpp"
#include "lipos/cstar/leibniz.hpp"
#include "lipos/seminorm/lipsystem.hpp"
#include "lipos/seminorm/spec.hpp"

namespace lipos::cstar {

// Restrict a seminorm spec to a subspace: W maps subspace hermitian
// coordinates to system hermitian coordinates (native-general specs get the
// block-diagonal lift acting on real and imaginary parts alike).  Quotient
// axes must lie inside the subspace — a shift direction that leaves the span
// has no meaning for the restricted seminorm and is rejected.
inline sn::SeminormSpec restrict_spec(const sn::SeminormSpec& s, const MatR& W) {
  MatR Wg;
  if (s.native_general) {
    Wg = MatR::Zero(2 * W.rows(), 2 * W.cols());
    Wg.topLeftCorner(W.rows(), W.cols()) = W;
    Wg.bottomRightCorner(W.rows(), W.cols()) = W;
  } else {
    Wg = W;
  }
  if (s.cols != Wg.rows())
    throw std::invalid_argument("restrict_spec: subspace map does not match the spec layout");
  switch (s.kind) {
    case sn::Kind::LinMap:
      return sn::SeminormSpec::linmap((s.lin.matrix * Wg).eval(), s.lin.p, s.lin.weight,
                                      s.native_general);
    case sn::Kind::OpNorm: {
      std::vector<MatC> coeffs(static_cast<std::size_t>(Wg.cols()));
      const int d = s.op.dim();
      for (int j = 0; j < Wg.cols(); ++j) {
        coeffs[static_cast<std::size_t>(j)] = MatC::Zero(d, d);
        for (int i = 0; i < Wg.rows(); ++i)
          if (Wg(i, j) != 0.0)
            coeffs[static_cast<std::size_t>(j)] += Wg(i, j) * s.op.coeffs[static_cast<std::size_t>(i)];
      }
      return sn::SeminormSpec::opnorm(std::move(coeffs), s.op.weight, s.native_general);
    }
    case sn::Kind::Scale:
      return sn::SeminormSpec::scale(s.scale_factor, restrict_spec(s.children[0], W));
    case sn::Kind::Max: {
      std::vector<sn::SeminormSpec> children;
      children.reserve(s.children.size());
      for (const auto& ch : s.children) children.push_back(restrict_spec(ch, W));
      return sn::SeminormSpec::max_of(std::move(children));
    }
    case sn::Kind::Quotient: {
      Eigen::ColPivHouseholderQR<MatR> qr(Wg);
      std::vector<VecR> axes;
      axes.reserve(s.axes.size());
      for (const VecR& a : s.axes) {
        VecR x = qr.solve(a);
        if ((Wg * x - a).norm() > 1e-9 * std::max(1.0, a.norm()))
          throw std::invalid_argument("restrict_spec: quotient axis leaves the subspace");
        axes.push_back(std::move(x));
      }
      return sn::SeminormSpec::quotient(restrict_spec(s.children[0], W), std::move(axes));
    }
    case sn::Kind::Bridge:
      throw std::invalid_argument("restrict_spec: bridge specs cannot be restricted");
  }
  throw std::logic_error("restrict_spec: unknown node kind");
}

// A parametric seminorm family on a fixed system.
struct SeminormFamily {
  explicit SeminormFamily(core::OperatorSubsystem system) : sys(std::move(system)) {}

  core::OperatorSubsystem sys;
  sn::SeminormSpec base;  // stabilized part; equals the family limit on the surviving span
  std::vector<sn::LinearMapAtom> blowups;  // hermitian-coordinate maps whose scale grows
  std::vector<double> params;              // increasing parameter values to probe
  std::function<sn::SeminormSpec(double)> make;  // exact seminorm at a given parameter
  std::string id;
};

namespace detail {

struct KernelBasis {
  MatR Q;  // m × k, orthonormal columns, first column = the unit coordinate axis
  std::vector<std::string> warnings;
};

// Joint kernel of the blowup maps with the unit direction pinned first.
inline KernelBasis blowup_kernel(const SeminormFamily& F, double kernel_tol) {
  const int m = F.sys.dim();
  KernelBasis out;
  if (F.blowups.empty()) {
    out.Q = MatR::Identity(m, m);
    return out;
  }
  int rows = 0;
  for (const auto& a : F.blowups) rows += static_cast<int>(a.matrix.rows());
  MatR A(rows, m);
  int at = 0;
  for (const auto& a : F.blowups) {
    if (a.matrix.cols() != m)
      throw std::invalid_argument("limit_system: blowup map does not match the system dimension");
    A.middleRows(at, a.matrix.rows()) = a.matrix;
    at += static_cast<int>(a.matrix.rows());
  }
  Eigen::JacobiSVD<MatR> svd(A, Eigen::ComputeFullV);
  const VecR sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  if (smax <= 0.0) {
    out.Q = MatR::Identity(m, m);
    out.warnings.push_back("blowup stack is numerically zero; the whole system survives");
    return out;
  }
  int rank = 0;
  double smin_pos = smax;
  bool ambiguous = false;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > kernel_tol * smax) {
      ++rank;
      smin_pos = sv[i];
    }
    if (sv[i] > 1e-12 * smax && sv[i] <= 1e-8 * smax) ambiguous = true;
  }
  if (ambiguous)
    out.warnings.push_back("blowup stack has singular values in the rank-ambiguous zone");
  if (smax / smin_pos > 1e12)
    out.warnings.push_back("blowup stack condition number exceeds 1e12");
  const int k = m - rank;
  if (k < 1) throw std::invalid_argument("limit_system: blowups leave no surviving span");
  MatR V = svd.matrixV().rightCols(k);

  // Pin the unit axis as the first basis vector (it must survive), then
  // complete with the leading singular directions of the kernel basis with the
  // unit component projected out — deterministic and immune to column order.
  VecR e0 = VecR::Unit(m, 0);
  if ((V * (V.transpose() * e0) - e0).norm() > 1e-8)
    throw std::invalid_argument("limit_system: blowups do not annihilate the unit");
  MatR Q(m, k);
  Q.col(0) = e0;
  if (k > 1) {
    MatR Vp = V - e0 * (e0.transpose() * V);
    Eigen::JacobiSVD<MatR> pod(Vp, Eigen::ComputeThinU);
    Q.rightCols(k - 1) = pod.matrixU().leftCols(k - 1);
  }
  // Sign-canonicalize columns so the basis is reproducible across runs.
  for (int j = 0; j < Q.cols(); ++j)
    for (int i = 0; i < Q.rows(); ++i)
      if (std::abs(Q(i, j)) > 1e-9) {
        if (Q(i, j) < 0.0) Q.col(j) = -Q.col(j);
        break;
      }
  out.Q = Q;
  return out;
}

}  // namespace detail

// Structural sanity checks for a family: increasing positive parameters,
// pointwise monotone growth on random elements, blowups annihilating the unit,
// and agreement of `base` with the largest family member on the surviving span.
inline void validate_family(const SeminormFamily& F, int samples = 16,
                            std::uint64_t seed = core::kDefaultSeed) {
  const int m = F.sys.dim();
  if (!F.make) throw std::invalid_argument("validate_family: missing seminorm builder");
  if (F.params.size() < 2)
    throw std::invalid_argument("validate_family: need at least two parameter values");
  for (std::size_t i = 0; i < F.params.size(); ++i) {
    if (!(F.params[i] > 0.0)) throw std::invalid_argument("validate_family: parameters must be positive");
    if (i > 0 && !(F.params[i] > F.params[i - 1]))
      throw std::invalid_argument("validate_family: parameters must be strictly increasing");
  }
  if (F.base.system_dim() != m)
    throw std::invalid_argument("validate_family: base spec does not match the system");
  VecR e0 = VecR::Unit(m, 0);
  for (const auto& a : F.blowups) {
    if (a.matrix.cols() != m)
      throw std::invalid_argument("validate_family: blowup map does not match the system");
    if (a.value(e0) > 1e-10)
      throw std::invalid_argument("validate_family: blowups must annihilate the unit");
  }

  std::vector<sn::SeminormSpec> specs;
  specs.reserve(F.params.size());
  for (double p : F.params) {
    specs.push_back(F.make(p));
    if (specs.back().system_dim() != m)
      throw std::invalid_argument("validate_family: family spec does not match the system");
  }

  detail::KernelBasis kb = detail::blowup_kernel(F, 1e-8);
  std::mt19937_64 rng = core::make_rng(seed);
  for (int s = 0; s < samples; ++s) {
    VecR u = core::random_gaussian_vec(rng, m);
    VecR v = core::random_gaussian_vec(rng, m);
    double prev = sn::eval_general(specs[0], u, v);
    for (std::size_t i = 1; i < specs.size(); ++i) {
      const double cur = sn::eval_general(specs[i], u, v);
      if (prev > cur + 1e-9 * std::max(1.0, cur))
        throw std::invalid_argument("validate_family: family is not pointwise monotone");
      prev = cur;
    }
    // On the surviving span the largest member must have reached the base.
    VecR uk = kb.Q * (kb.Q.transpose() * u);
    VecR vk = kb.Q * (kb.Q.transpose() * v);
    const double b = sn::eval_general(F.base, uk, vk);
    const double top = sn::eval_general(specs.back(), uk, vk);
    if (std::abs(b - top) > 1e-6 * std::max(1.0, std::abs(b)))
      throw std::invalid_argument(
          "validate_family: base disagrees with the largest family member on the surviving span");
  }
}

struct LimitOptions {
  cvx::SolverOptions solver;
  EpsOptions eps;            // witness budget for the tail probe
  double kernel_tol = 1e-8;
  double defect_tol = 1e-8;  // product defect below which closure is accepted
  double stable_ratio = 1.25;  // squares-constant growth treated as stabilized
};

struct LimitVerdict {
  core::OperatorSubsystem limit_subspace;
  sn::LipNormedSystem limit;  // restricted base seminorm on the surviving span
  bool inherited = false;     // span certified closed under products
  double defect = std::numeric_limits<double>::quiet_NaN();
  std::string closure_route;  // "full-ambient", "product-defect", or "uncertified"
  bool constant_stabilized = false;
  double squares_constant = std::numeric_limits<double>::quiet_NaN();  // at the top parameter
  double r_tail = std::numeric_limits<double>::quiet_NaN();
  double eps_tail = std::numeric_limits<double>::quiet_NaN();  // certified ε lower at r_tail
  EpsCurve tail_curve;
  std::vector<std::string> warnings;
};

// Extract the limit of the family: surviving span, restricted seminorm, and a
// two-part inheritance verdict.
//
//  * Structure: the span survives with the restricted base seminorm; it is
//    "inherited" C*-structure when the span is certified closed under
//    products (exactly, for a full matrix ambient, or by a vanishing product
//    defect).
//  * Tail behaviour: the defect function of the largest family member is
//    probed at r_tail.  When the squares constant C of the two largest
//    members has stopped growing, r_tail = C and the certified upper bound
//    R²·max{0, 1 − r/C} vanishes there — the defect dies in the tail.  When C
//    still grows, r_tail = 4·max(1, R_lo²) is a fixed yardstick at which a
//    genuinely escaping family shows a certified positive lower bound; the
//    certified lower end of the radius enclosure sets the scale, so a loose
//    upper end cannot push the probe out to where every defect vanishes.
inline LimitVerdict limit_system(const SeminormFamily& F, const LimitOptions& opts = {}) {
  validate_family(F, 16, opts.solver.seed);
  const core::OperatorSubsystem& sys = F.sys;

  detail::KernelBasis kb = detail::blowup_kernel(F, opts.kernel_tol);
  const int k = static_cast<int>(kb.Q.cols());
  std::vector<BlockElement> basis;
  basis.reserve(static_cast<std::size_t>(k));
  basis.push_back(core::identity(sys.shape()));
  const int m = sys.dim();
  for (int j = 1; j < k; ++j)
    basis.push_back(sys.element(core::Coords{kb.Q.col(j), VecR::Zero(m)}));
  core::OperatorSubsystem span(sys.shape(), basis);

  LimitVerdict out{span, sn::make_lip_system(span, restrict_spec(F.base, kb.Q), opts.solver)};
  out.warnings = kb.warnings;

  if (k == sys.shape().total_real_dim()) {
    out.defect = 0.0;
    out.closure_route = "full-ambient";
  } else if (k <= 40) {
    out.defect = span.product_defect();
    out.closure_route = "product-defect";
  } else {
    out.closure_route = "uncertified";
    out.warnings.push_back("surviving span too large to certify closure under products");
  }
  out.inherited = std::isfinite(out.defect) && out.defect <= opts.defect_tol;

  // Tail probe at the two largest parameters.
  const double p_top = F.params.back();
  const double p_prev = F.params[F.params.size() - 2];
  sn::LipNormedSystem ls_top = sn::make_lip_system(sys, F.make(p_top), opts.solver);
  sn::LipNormedSystem ls_prev = sn::make_lip_system(sys, F.make(p_prev), opts.solver);
  LeibnizCert cert_top = leibniz_upper_cert(ls_top);
  LeibnizCert cert_prev = leibniz_upper_cert(ls_prev);
  out.squares_constant = cert_top.squares_constant;
  out.constant_stabilized =
      cert_top.available && cert_prev.available &&
      cert_top.squares_constant <= opts.stable_ratio * cert_prev.squares_constant + 1e-9;
  const double unit_lip = ls_top.R.hi > 0.0 ? 1.0 / ls_top.R.hi : 0.0;
  const double R_probe = ls_top.R.lo > 0.0 ? ls_top.R.lo : ls_top.R.hi;
  double r_tail = out.constant_stabilized
                      ? cert_top.squares_constant
                      : 4.0 * std::max(1.0, R_probe * R_probe);
  r_tail = std::max(r_tail, unit_lip * (1.0 + 1e-9));
  out.r_tail = r_tail;

  EpsOptions eps_opts = opts.eps;
  if (eps_opts.system_id.empty()) eps_opts.system_id = F.id;
  eps_opts.solver.seed = opts.solver.seed;
  std::vector<double> grid;
  const double r_half = std::max(0.5 * r_tail, unit_lip * (1.0 + 1e-9));
  if (r_half < r_tail * (1.0 - 1e-9)) grid = {r_half, r_tail};
  else grid = {r_tail};
  out.tail_curve = epsilon_curve(ls_top, grid, eps_opts);
  out.eps_tail = out.tail_curve.lower.back();
  return out;
}

}  // namespace lipos::cstar
