// spec.hpp — seminorm syntax trees over operator subsystems.
//
// A seminorm is described by a tree of nodes:
//   linmap    w·‖M x‖_p           (p ∈ {1, 2, ∞}, x the real coordinate vector)
//   opnorm    w·σ_max(Σ_j x_j C_j) (largest singular value of a matrix image)
//   scale     c·child
//   max       max(children...)
//   quotient  min over shifts along stored axis directions of the child
//             (the unit-quotient L(x) = min_λ N(x − λe) and its complex variant)
//   bridge    max(left on X-part, right on Y-part, couplings on the joint space)
//
// Coordinates: a system with hermitian basis {b_0 = e, b_1, ...} of size m has
// hermitian coordinates u ∈ R^m and general coordinates [u; v] ∈ R^{2m} for
// x = Σ (u_j + i v_j) b_j.  A spec is either native-general (atoms act on 2m
// columns) or hermitian-only (m columns, extended to general elements by
// L(x) = max{L(Re x), L(Im x)}).
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lipos/core/blocks.hpp"
#include "lipos/core/common.hpp"
#include "lipos/core/subsystem.hpp"

namespace lipos::sn {

using core::BlockElement;
using core::BlockShape;
using core::Coords;
using core::MatC;
using core::MatR;
using core::OperatorSubsystem;
using core::VecR;
using core::cplx;

inline constexpr double kQuotientValueTol = 1e-10;

// ---- atoms --------------------------------------------------------------------

enum class PNorm { One, Two, Inf };

inline double pnorm(const VecR& y, PNorm p) {
  switch (p) {
    case PNorm::One: return y.lpNorm<1>();
    case PNorm::Two: return y.norm();
    case PNorm::Inf: return y.size() ? y.lpNorm<Eigen::Infinity>() : 0.0;
  }
  return 0.0;
}

// w·‖M x‖_p on coordinate vectors.
struct LinearMapAtom {
  MatR matrix;
  PNorm p = PNorm::Two;
  double weight = 1.0;

  double value(const VecR& x) const { return weight * pnorm(matrix * x, p); }

  // A subgradient g with g·x = value(x) (Euler) and value(y) ≥ g·y for all y.
  VecR subgradient(const VecR& x) const {
    VecR y = matrix * x;
    VecR d(y.size());
    switch (p) {
      case PNorm::One:
        for (int i = 0; i < y.size(); ++i) d(i) = y(i) >= 0.0 ? 1.0 : -1.0;
        break;
      case PNorm::Two: {
        double n = y.norm();
        d = n > 1e-300 ? VecR(y / n) : VecR(VecR::Zero(y.size()));
        break;
      }
      case PNorm::Inf: {
        d = VecR::Zero(y.size());
        if (y.size()) {
          int arg = 0;
          for (int i = 1; i < y.size(); ++i)
            if (std::abs(y(i)) > std::abs(y(arg))) arg = i;
          d(arg) = y(arg) >= 0.0 ? 1.0 : -1.0;
        }
        break;
      }
    }
    return weight * (matrix.transpose() * d);
  }

  // Rows whose l2 norm lower-bounds value/c (used for kernels and coercivity):
  // value(x) ≥ c·‖rows·x‖₂ with the returned factor c.
  double quad_factor() const {
    switch (p) {
      case PNorm::One: return weight;
      case PNorm::Two: return weight;
      case PNorm::Inf: return weight / std::sqrt(static_cast<double>(matrix.rows()));
    }
    return weight;
  }
};

// w·σ_max(T(x)) with T(x) = Σ_j x_j C_j, C_j square complex matrices.
struct OpNormAtom {
  std::vector<MatC> coeffs;
  double weight = 1.0;
  std::vector<int> nz;  // indices of nonzero coefficient matrices (sparsity cache)

  int cols() const { return static_cast<int>(coeffs.size()); }
  int dim() const { return coeffs.empty() ? 0 : static_cast<int>(coeffs[0].rows()); }

  void rebuild_sparsity() {
    nz.clear();
    for (int j = 0; j < cols(); ++j)
      if (coeffs[j].cwiseAbs().maxCoeff() > 0.0) nz.push_back(j);
  }

  MatC image(const VecR& x) const {
    MatC T = MatC::Zero(dim(), dim());
    if (!nz.empty()) {
      for (int j : nz)
        if (x(j) != 0.0) T += x(j) * coeffs[j];
      return T;
    }
    for (int j = 0; j < cols(); ++j)
      if (x(j) != 0.0) T += x(j) * coeffs[j];
    return T;
  }

  double value(const VecR& x) const { return weight * core::sigma_max(image(x)); }

  VecR subgradient(const VecR& x) const {
    MatC T = image(x);
    Eigen::JacobiSVD<MatC> svd(T, Eigen::ComputeThinU | Eigen::ComputeThinV);
    VecR g(cols());
    if (svd.singularValues().size() == 0) return VecR::Zero(cols());
    Eigen::VectorXcd u = svd.matrixU().col(0), v = svd.matrixV().col(0);
    for (int j = 0; j < cols(); ++j)
      g(j) = weight * (u.adjoint() * coeffs[j] * v)(0, 0).real();
    return g;
  }

  // Real-linearization rows: ‖rows·x‖₂ = ‖T(x)‖_F ≥ σ_max(T(x)) / √dim ... the
  // other way: σ_max ≥ ‖T‖_F / √dim, so value(x) ≥ (w/√dim)·‖rows·x‖₂.
  MatR real_rows() const {
    const int d = dim(), n = cols();
    MatR rows(2 * d * d, n);
    for (int j = 0; j < n; ++j) {
      int r = 0;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          rows(r++, j) = coeffs[j](a, b).real();
          rows(r++, j) = coeffs[j](a, b).imag();
        }
    }
    return rows;
  }

  double quad_factor() const { return weight / std::sqrt(static_cast<double>(std::max(1, dim()))); }
};

// ---- tree ----------------------------------------------------------------------

enum class Kind { LinMap, OpNorm, Scale, Max, Quotient, Bridge };

struct BridgeInfo {
  int left_cols = 0;   // coordinate dimension of the left component spec
  int right_cols = 0;  // coordinate dimension of the right component spec
  // Explicit difference map D(x) used by coupling-defect objectives: one matrix
  // image per target block; ‖D(x)‖ = max over blocks of σ_max.
  std::vector<OpNormAtom> difference;
};

struct SeminormSpec {
  Kind kind = Kind::Max;
  bool native_general = true;  // atoms act on [u; v] if true, on u only if false
  int cols = 0;                // coordinate dimension this node acts on

  LinearMapAtom lin;                // Kind::LinMap
  OpNormAtom op;                    // Kind::OpNorm
  double scale_factor = 1.0;        // Kind::Scale
  std::vector<VecR> axes;           // Kind::Quotient: shift directions
  std::vector<SeminormSpec> children;
  BridgeInfo bridge;                // Kind::Bridge: children = [left, right, couplings...]

  // -- constructors ---------------------------------------------------------

  static SeminormSpec linmap(MatR m, PNorm p, double w, bool native) {
    if (m.rows() < 1 || m.cols() < 1)
      throw std::invalid_argument("SeminormSpec::linmap: empty matrix");
    if (!(w > 0.0)) throw std::invalid_argument("SeminormSpec::linmap: weight must be positive");
    SeminormSpec s;
    s.kind = Kind::LinMap;
    s.native_general = native;
    s.cols = static_cast<int>(m.cols());
    s.lin = LinearMapAtom{std::move(m), p, w};
    return s;
  }

  static SeminormSpec opnorm(std::vector<MatC> coeffs, double w, bool native) {
    if (coeffs.empty()) throw std::invalid_argument("SeminormSpec::opnorm: no coefficients");
    const int d = static_cast<int>(coeffs[0].rows());
    if (d < 1 || d > core::kMaxBlockDim)
      throw std::invalid_argument("SeminormSpec::opnorm: block dimension out of range");
    for (const auto& c : coeffs)
      if (c.rows() != d || c.cols() != d)
        throw std::invalid_argument("SeminormSpec::opnorm: coefficient shape mismatch");
    if (!(w > 0.0)) throw std::invalid_argument("SeminormSpec::opnorm: weight must be positive");
    SeminormSpec s;
    s.kind = Kind::OpNorm;
    s.native_general = native;
    s.cols = static_cast<int>(coeffs.size());
    s.op = OpNormAtom{std::move(coeffs), w, {}};
    s.op.rebuild_sparsity();
    return s;
  }

  static SeminormSpec scale(double c, SeminormSpec child) {
    if (!(c > 0.0)) throw std::invalid_argument("SeminormSpec::scale: factor must be positive");
    SeminormSpec s;
    s.kind = Kind::Scale;
    s.native_general = child.native_general;
    s.cols = child.cols;
    s.scale_factor = c;
    s.children.push_back(std::move(child));
    return s;
  }

  static SeminormSpec max_of(std::vector<SeminormSpec> children) {
    if (children.empty()) throw std::invalid_argument("SeminormSpec::max_of: no children");
    SeminormSpec s;
    s.kind = Kind::Max;
    s.native_general = children[0].native_general;
    s.cols = children[0].cols;
    for (const auto& c : children)
      if (c.cols != s.cols || c.native_general != s.native_general)
        throw std::invalid_argument("SeminormSpec::max_of: child layout mismatch");
    s.children = std::move(children);
    return s;
  }

  // Quotient by the unit line: axes default to the unit coordinate direction(s)
  // (column 0 for u, column m for v on native-general specs with cols = 2m).
  static SeminormSpec quotient(SeminormSpec child, std::vector<VecR> axes = {}) {
    SeminormSpec s;
    s.kind = Kind::Quotient;
    s.native_general = child.native_general;
    s.cols = child.cols;
    if (axes.empty()) {
      VecR eu = VecR::Zero(s.cols);
      eu(0) = 1.0;
      axes.push_back(eu);
      if (s.native_general) {
        if (s.cols % 2 != 0)
          throw std::invalid_argument("SeminormSpec::quotient: native spec needs even cols");
        VecR ev = VecR::Zero(s.cols);
        ev(s.cols / 2) = 1.0;
        axes.push_back(ev);
      }
    }
    for (const auto& a : axes) {
      if (a.size() != s.cols)
        throw std::invalid_argument("SeminormSpec::quotient: axis dimension mismatch");
      if (a.norm() < 1e-14)
        throw std::invalid_argument("SeminormSpec::quotient: zero axis");
    }
    if (child.has_quotient() || child.kind == Kind::Bridge)
      throw std::invalid_argument(
          "SeminormSpec::quotient: child must be quotient- and bridge-free");
    s.axes = std::move(axes);
    s.children.push_back(std::move(child));
    return s;
  }

  static SeminormSpec make_bridge(SeminormSpec left, SeminormSpec right,
                                  std::vector<SeminormSpec> couplings,
                                  std::vector<OpNormAtom> difference) {
    if (left.native_general != right.native_general)
      throw std::invalid_argument("SeminormSpec::make_bridge: component layout mismatch");
    SeminormSpec s;
    s.kind = Kind::Bridge;
    s.native_general = left.native_general;
    s.bridge.left_cols = left.cols;
    s.bridge.right_cols = right.cols;
    s.cols = left.cols + right.cols;
    for (const auto& c : couplings) {
      if (c.cols != s.cols || c.native_general != s.native_general)
        throw std::invalid_argument("SeminormSpec::make_bridge: coupling layout mismatch");
    }
    for (const auto& d : difference)
      if (d.cols() != s.cols)
        throw std::invalid_argument("SeminormSpec::make_bridge: difference layout mismatch");
    s.bridge.difference = std::move(difference);
    s.children.push_back(std::move(left));
    s.children.push_back(std::move(right));
    for (auto& c : couplings) s.children.push_back(std::move(c));
    return s;
  }

  bool has_quotient() const {
    if (kind == Kind::Quotient) return true;
    for (const auto& c : children)
      if (c.has_quotient()) return true;
    return false;
  }

  bool has_bridge() const {
    if (kind == Kind::Bridge) return true;
    for (const auto& c : children)
      if (c.has_bridge()) return true;
    return false;
  }

  // Hermitian coordinate dimension of the system this spec belongs to.
  int system_dim() const { return native_general ? cols / 2 : cols; }
};

// ---- column embeddings (bridge lifting) ----------------------------------------

// Embedding matrix sending a component's coordinate layout into the joint
// bridge layout.  Hermitian-only: [u_X; u_Y].  Native: [u_X; u_Y; v_X; v_Y].
inline MatR bridge_embedding(const SeminormSpec& bridge, bool left_side) {
  if (bridge.kind != Kind::Bridge)
    throw std::invalid_argument("bridge_embedding: not a bridge node");
  const int cl = bridge.bridge.left_cols, cr = bridge.bridge.right_cols;
  const int comp_cols = left_side ? cl : cr;
  MatR E = MatR::Zero(bridge.cols, comp_cols);
  if (!bridge.native_general) {
    int off = left_side ? 0 : cl;
    for (int j = 0; j < comp_cols; ++j) E(off + j, j) = 1.0;
    return E;
  }
  const int mx = cl / 2, my = cr / 2;
  const int m = left_side ? mx : my;
  int u_off = left_side ? 0 : mx;
  int v_off = mx + my + (left_side ? 0 : mx);
  for (int j = 0; j < m; ++j) {
    E(u_off + j, j) = 1.0;      // u part
    E(v_off + j, m + j) = 1.0;  // v part
  }
  return E;
}

// ---- evaluation -----------------------------------------------------------------

namespace detail {

// Minimize f over the span of the axes through alternating golden sections plus
// a shrinking deterministic pattern search (robust against nonsmooth corners).
inline double min_over_axes(const std::function<double(const VecR&)>& f,
                            const std::vector<VecR>& axes, int cols) {
  VecR shift = VecR::Zero(cols);
  auto eval_at = [&](const VecR& s) { return f(s); };
  double best = eval_at(shift);
  if (axes.empty()) return best;

  // Coordinate start: nothing better known than 0; callers add aligned probes
  // through the structure of f itself (f(0) is always taken).
  double scale = std::max(1.0, best);
  for (int round = 0; round < 6; ++round) {
    double round_start = best;
    for (const auto& a : axes) {
      auto line = [&](double t) {
        VecR s = shift + t * a;
        return eval_at(s);
      };
      double bracket = 4.0 * scale / std::max(a.norm(), 1e-14);
      core::GoldenResult g = core::golden_min_expand(line, -bracket, bracket, 1e-9);
      if (g.value < best) {
        best = g.value;
        shift += g.x * a;
      }
    }
    // Alternating minimization of a convex function stalls only at the optimum.
    if (round_start - best <= 1e-13 * scale) break;
  }
  // Pattern search over axis combinations: alternating minimization of a
  // nonsmooth convex function can stall on a corner, and the diagonal moves
  // walk off it.  The floor tracks the golden tolerance above.
  if (axes.size() >= 2) {
    double step = 0.25 * scale;
    const double floor = 1e-8 * scale;
    while (step > floor) {
      bool improved = false;
      for (std::size_t i = 0; i < axes.size(); ++i)
        for (std::size_t j = i + 1; j < axes.size(); ++j)
          for (double si : {1.0, -1.0})
            for (double sj : {1.0, -1.0}) {
              VecR cand = shift + step * (si * axes[i] + sj * axes[j]);
              double v = eval_at(cand);
              if (v < best - 1e-15) {
                best = v;
                shift = cand;
                improved = true;
              }
            }
      if (!improved) step *= 0.5;
    }
  }
  return best;
}

}  // namespace detail

// Evaluate the tree on a raw coordinate vector of size spec.cols.
inline double eval_raw(const SeminormSpec& s, const VecR& x) {
  if (x.size() != s.cols) throw std::invalid_argument("eval_raw: coordinate size mismatch");
  switch (s.kind) {
    case Kind::LinMap: return s.lin.value(x);
    case Kind::OpNorm: return s.op.value(x);
    case Kind::Scale: return s.scale_factor * eval_raw(s.children[0], x);
    case Kind::Max: {
      double v = 0.0;
      for (const auto& c : s.children) v = std::max(v, eval_raw(c, x));
      return v;
    }
    case Kind::Quotient: {
      const SeminormSpec& child = s.children[0];
      auto f = [&](const VecR& shift) { return eval_raw(child, x - shift); };
      // Aligned probe: minimize the residual along each axis in least squares
      // first, so exact minimizers at the alignment point are found exactly.
      double best = detail::min_over_axes(f, s.axes, s.cols);
      VecR aligned = VecR::Zero(s.cols);
      for (const auto& a : s.axes) aligned += (x.dot(a) / a.squaredNorm()) * a;
      best = std::min(best, eval_raw(child, x - aligned));
      return best;
    }
    case Kind::Bridge: {
      MatR El = bridge_embedding(s, true), Er = bridge_embedding(s, false);
      double v = std::max(eval_raw(s.children[0], El.transpose() * x),
                          eval_raw(s.children[1], Er.transpose() * x));
      for (std::size_t k = 2; k < s.children.size(); ++k)
        v = std::max(v, eval_raw(s.children[k], x));
      return v;
    }
  }
  return 0.0;
}

// Evaluate on a hermitian element given by hermitian coordinates u.
inline double eval_hermitian(const SeminormSpec& s, const VecR& u) {
  if (!s.native_general) return eval_raw(s, u);
  VecR w = VecR::Zero(2 * u.size());
  w.head(u.size()) = u;
  return eval_raw(s, w);
}

// Evaluate on a general element x = Σ (u_j + i v_j) b_j.
inline double eval_general(const SeminormSpec& s, const VecR& u, const VecR& v) {
  if (s.native_general) {
    VecR w(2 * u.size());
    w.head(u.size()) = u;
    w.tail(v.size()) = v;
    return eval_raw(s, w);
  }
  // Hermitian-only spec: flagged extension L(x) = max{L(Re x), L(Im x)}.
  return std::max(eval_raw(s, u), eval_raw(s, v));
}

inline double eval(const SeminormSpec& s, const OperatorSubsystem& sys,
                   const BlockElement& x) {
  Coords c = sys.coords(x);
  if (c.u.size() != s.system_dim())
    throw std::invalid_argument("eval: spec does not match the system dimension");
  return eval_general(s, c.u, c.v);
}

}  // namespace lipos::sn
