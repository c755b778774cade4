// subsystem.hpp — operator subsystems: unital, *-closed subspaces of a block
// algebra, described by a hermitian basis whose first element is the unit.
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "lipos/core/blocks.hpp"

namespace lipos::core {

// Real coordinates of an element x = sum_j (u_j + i v_j) b_j against the
// hermitian basis {b_j}.  Hermitian elements have v = 0.
struct Coords {
  VecR u;
  VecR v;
};

class OperatorSubsystem {
 public:
  OperatorSubsystem(BlockShape shape, std::vector<BlockElement> basis)
      : shape_(std::move(shape)), basis_(std::move(basis)) {
    if (basis_.empty())
      throw std::invalid_argument("OperatorSubsystem: empty basis");
    for (const auto& b : basis_) {
      if (!(b.shape() == shape_))
        throw std::invalid_argument("OperatorSubsystem: basis element shape mismatch");
      if (!is_hermitian(b, 1e-10))
        throw std::invalid_argument("OperatorSubsystem: basis element not hermitian");
    }
    BlockElement e = identity(shape_);
    if (hs_norm(basis_[0] - e) > 1e-10)
      throw std::invalid_argument("OperatorSubsystem: basis[0] must be the unit");
    build_gram();
  }

  const BlockShape& shape() const { return shape_; }
  const std::vector<BlockElement>& basis() const { return basis_; }
  int dim() const { return static_cast<int>(basis_.size()); }
  const BlockElement& unit() const { return basis_[0]; }
  const MatR& gram() const { return gram_; }

  // Whole algebra ⊕ M_{d_k} as a subsystem of itself.  The canonical hermitian
  // basis starts with the global unit; independence is preserved by swapping
  // the unit for the first diagonal matrix unit.
  static OperatorSubsystem full(const BlockShape& shape) {
    std::vector<BlockElement> basis;
    basis.push_back(identity(shape));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int k = 0; k < shape.block_count(); ++k) {
      int d = shape.dims[k];
      for (int i = 0; i < d; ++i) {
        if (k == 0 && i == 0) continue;  // replaced by the global unit
        BlockElement b(shape);
        b.blocks[k](i, i) = 1.0;
        basis.push_back(b);
      }
      for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
          BlockElement s(shape);
          s.blocks[k](i, j) = inv_sqrt2;
          s.blocks[k](j, i) = inv_sqrt2;
          basis.push_back(s);
          BlockElement t(shape);
          t.blocks[k](i, j) = cplx(0.0, -inv_sqrt2);
          t.blocks[k](j, i) = cplx(0.0, inv_sqrt2);
          basis.push_back(t);
        }
    }
    return OperatorSubsystem(shape, std::move(basis));
  }

  // ---- coordinates ------------------------------------------------------------

  BlockElement element(const VecR& u) const {
    check_coord_size(u, "OperatorSubsystem::element");
    BlockElement x(shape_);
    for (int j = 0; j < dim(); ++j) x = x + u(j) * basis_[j];
    return x;
  }

  BlockElement element(const Coords& c) const {
    check_coord_size(c.u, "OperatorSubsystem::element");
    check_coord_size(c.v, "OperatorSubsystem::element");
    BlockElement x(shape_);
    for (int j = 0; j < dim(); ++j) x = x + cplx(c.u(j), c.v(j)) * basis_[j];
    return x;
  }

  // Coordinates of x against the basis; throws if x is not in the complex span.
  Coords coords(const BlockElement& x, double tol = 1e-9) const {
    Coords c;
    c.u = project(hermitian_part(x));
    c.v = project(antihermitian_part(x));
    BlockElement back = element(c);
    double scale = std::max(1.0, hs_norm(x));
    if (hs_norm(back - x) > tol * scale)
      throw std::invalid_argument("OperatorSubsystem::coords: element outside the span");
    return c;
  }

  bool contains(const BlockElement& x, double tol = 1e-9) const {
    Coords c;
    c.u = project(hermitian_part(x));
    c.v = project(antihermitian_part(x));
    double scale = std::max(1.0, hs_norm(x));
    return hs_norm(element(c) - x) <= tol * scale;
  }

  // ---- order structure ---------------------------------------------------------

  double order_norm(const BlockElement& a) const { return core::order_norm(a); }
  double osc_seminorm(const BlockElement& a) const { return core::osc_seminorm(a); }

  // Kadison function representation evaluated on a finite set of states given
  // by density blocks: returns [ω_i(a)] = [sum_k tr(ρ_{i,k} a_k)].
  std::vector<double> kadison_hat(const BlockElement& a,
                                  const std::vector<BlockElement>& states) const {
    if (!is_hermitian(a, 1e-10))
      throw std::invalid_argument("kadison_hat: element is not hermitian");
    std::vector<double> values;
    values.reserve(states.size());
    for (const auto& rho : states) values.push_back(hs_inner(rho, a).real());
    return values;
  }

  // Multiplicative defect: max over pairs (i, j) of the HS distance from
  // b_i b_j to the complex span of the basis, computed over an HS-orthonormal
  // basis of the subsystem.  A defect <= 1e-10 means the subsystem is closed
  // under multiplication (is a C*-subalgebra), modulo rounding.
  double product_defect() const {
    std::vector<BlockElement> on = orthonormal_basis();
    double worst = 0.0;
    for (const auto& bi : on)
      for (const auto& bj : on) {
        BlockElement p = mul(bi, bj);
        BlockElement res = p;
        for (const auto& bk : on) {
          cplx coeff = hs_inner(bk, p);
          res = res - coeff * bk;
        }
        worst = std::max(worst, hs_norm(res));
      }
    return worst;
  }

  // HS-orthonormalization of the hermitian basis (Gram–Schmidt; the result is
  // still hermitian because the inner products of hermitian elements are real).
  std::vector<BlockElement> orthonormal_basis() const {
    std::vector<BlockElement> on;
    for (const auto& b : basis_) {
      BlockElement w = b;
      for (const auto& q : on) {
        cplx c = hs_inner(q, w);
        w = w - c * q;
      }
      double n = hs_norm(w);
      if (n < 1e-12)
        throw std::invalid_argument("orthonormal_basis: basis is numerically dependent");
      on.push_back((1.0 / n) * w);
    }
    return on;
  }

 private:
  void check_coord_size(const VecR& u, const char* fn) const {
    if (u.size() != dim())
      throw std::invalid_argument(std::string(fn) + ": coordinate size mismatch");
  }

  void build_gram() {
    const int m = dim();
    gram_ = MatR(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) gram_(i, j) = hs_inner(basis_[i], basis_[j]).real();
    Eigen::SelfAdjointEigenSolver<MatR> es(gram_);
    if (es.eigenvalues().minCoeff() < 1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()))
      throw std::invalid_argument("OperatorSubsystem: basis is numerically dependent");
    gram_solver_.compute(gram_);
  }

  // Coordinates of a hermitian element's best approximation in the real span.
  VecR project(const BlockElement& h) const {
    VecR rhs(dim());
    for (int j = 0; j < dim(); ++j) rhs(j) = hs_inner(basis_[j], h).real();
    return gram_solver_.solve(rhs);
  }

  BlockShape shape_;
  std::vector<BlockElement> basis_;
  MatR gram_;
  Eigen::LDLT<MatR> gram_solver_;
};

}  // namespace lipos::core
