// test_core.cpp — block algebra elements, subsystems, order structure.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lipos/core/blocks.hpp"
#include "lipos/core/subsystem.hpp"
#include "oracles.hpp"

using namespace lipos::core;

namespace {

BlockElement pauli(int which) {  // 1 = x, 2 = y, 3 = z
  BlockElement s{BlockShape({2})};
  switch (which) {
    case 1: s.blocks[0] << 0, 1, 1, 0; break;
    case 2: s.blocks[0] << cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0); break;
    case 3: s.blocks[0] << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("pauli: index");
  }
  return s;
}

BlockElement diag3(double a, double b, double c) {
  BlockElement x{BlockShape({1, 1, 1})};
  x.blocks[0](0, 0) = a;
  x.blocks[1](0, 0) = b;
  x.blocks[2](0, 0) = c;
  return x;
}

}  // namespace

TEST_CASE("block shapes validate their limits") {
  CHECK_NOTHROW(BlockShape({2, 3, 1}));
  CHECK_NOTHROW(BlockShape(std::vector<int>(64, 2)));  // 64 blocks of M_2: 256 real dims
  CHECK_THROWS_AS(BlockShape({17}), std::invalid_argument);
  CHECK_THROWS_AS(BlockShape({}), std::invalid_argument);
  CHECK_THROWS_AS(BlockShape(std::vector<int>(65, 2)), std::invalid_argument);
  CHECK(BlockShape({1, 1, 1}).abelian());
  CHECK_FALSE(BlockShape({2, 1}).abelian());
  CHECK(BlockShape({2, 3}).total_real_dim() == 13);
}

TEST_CASE("algebra operations: products, adjoints, unit") {
  BlockShape m2({2});
  BlockElement e12(m2), e21(m2), e11(m2);
  e12.blocks[0](0, 1) = 1.0;
  e21.blocks[0](1, 0) = 1.0;
  e11.blocks[0](0, 0) = 1.0;

  CHECK(hs_norm(mul(e12, e21) - e11) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(hs_norm(adjoint(e12) - e21) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(op_norm(e12) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(hs_inner(e12, e12).real() == doctest::Approx(1.0).epsilon(1e-14));

  BlockElement e = identity(m2);
  CHECK(hs_norm(mul(e, e12) - e12) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(is_hermitian(e));
  CHECK_FALSE(is_hermitian(e12));
  CHECK(is_hermitian(hermitian_part(e12)));

  // x = h + i k with h, k hermitian: recombination is exact.
  std::mt19937_64 rng = make_rng(7);
  BlockElement x = random_element(rng, BlockShape({2, 3}));
  BlockElement h = hermitian_part(x), k = antihermitian_part(x);
  CHECK(hs_norm((h + cplx(0, 1) * k) - x) < 1e-12);
}

TEST_CASE("order norm and oscillation on explicit spectra") {
  // diag(1,2,4): spectrum {1,2,4}; oscillation = (4-1)/2, order norm = 4.
  BlockElement x = diag3(1, 2, 4);
  CHECK(osc_seminorm(x) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(order_norm(x) == doctest::Approx(4.0).epsilon(1e-14));

  CHECK(order_norm(diag3(-3, 2, 0)) == doctest::Approx(3.0).epsilon(1e-14));

  // sigma_z has eigenvalues ±1: oscillation 1; the unit has oscillation 0.
  CHECK(osc_seminorm(pauli(3)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(osc_seminorm(identity(BlockShape({2}))) == doctest::Approx(0.0).epsilon(1e-15));

  // Unit shifts leave the oscillation invariant.
  BlockElement shifted = pauli(3) + 5.0 * identity(BlockShape({2}));
  CHECK(osc_seminorm(shifted) == doctest::Approx(1.0).epsilon(1e-12));

  // Non-hermitian input is rejected.
  BlockElement e12{BlockShape({2})};
  e12.blocks[0](0, 1) = 1.0;
  CHECK_THROWS_AS(osc_seminorm(e12), std::invalid_argument);
}

TEST_CASE("oscillation agrees with the unit-shift quotient oracle") {
  // Two independent routes: eigenvalue spread vs golden search over
  // min_lambda ‖a - lambda e‖ with SVD norms.  50 random hermitian elements on
  // random block shapes with total complex dimension <= 12.
  std::mt19937_64 rng = make_rng(kDefaultSeed);
  std::vector<BlockShape> shapes = {BlockShape({2}),       BlockShape({1, 1, 1}),
                                    BlockShape({2, 3}),    BlockShape({4, 2, 1}),
                                    BlockShape({3, 3, 2}), BlockShape({5, 4})};
  for (int trial = 0; trial < 50; ++trial) {
    const BlockShape& shape = shapes[trial % shapes.size()];
    BlockElement a = random_hermitian(rng, shape);
    double lib = osc_seminorm(a);
    double ora = oracles::osc_quotient_oracle(a);
    CHECK(std::abs(lib - ora) <= 1e-9);
  }
}

TEST_CASE("sigma_max closed forms match SVD") {
  std::mt19937_64 rng = make_rng(11);
  for (int t = 0; t < 40; ++t) {
    BlockElement a = random_element(rng, BlockShape({2, 1, 3}));
    CHECK(op_norm(a) == doctest::Approx(oracles::op_norm_svd(a)).epsilon(1e-12));
  }
}

TEST_CASE("subsystem coordinates round-trip") {
  OperatorSubsystem full = OperatorSubsystem::full(BlockShape({2, 3}));
  CHECK(full.dim() == 13);

  std::mt19937_64 rng = make_rng(23);
  BlockElement x = random_element(rng, full.shape());
  Coords c = full.coords(x);
  CHECK(hs_norm(full.element(c) - x) < 1e-10);

  // Hermitian elements have vanishing imaginary coordinates.
  BlockElement h = random_hermitian(rng, full.shape());
  Coords ch = full.coords(h);
  CHECK(ch.v.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("subsystem validation rejects bad bases") {
  BlockShape m2({2});
  // First basis element must be the unit.
  CHECK_THROWS_AS(OperatorSubsystem(m2, {pauli(3)}), std::invalid_argument);
  // Dependent basis is rejected.
  CHECK_THROWS_AS(OperatorSubsystem(m2, {identity(m2), pauli(1), pauli(1)}),
                  std::invalid_argument);
  // Non-hermitian basis element is rejected.
  BlockElement e12(m2);
  e12.blocks[0](0, 1) = 1.0;
  CHECK_THROWS_AS(OperatorSubsystem(m2, {identity(m2), e12}), std::invalid_argument);
}

TEST_CASE("span membership: scalar-diagonal subsystem of M_2") {
  BlockShape m2({2});
  OperatorSubsystem sub(m2, {identity(m2), pauli(1), pauli(2)});
  CHECK(sub.contains(pauli(1)));
  BlockElement e12(m2);
  e12.blocks[0](0, 1) = 1.0;  // e12 = (sigma_x + i sigma_y)/2: in the complex span
  CHECK(sub.contains(e12));
  CHECK_FALSE(sub.contains(pauli(3)));
  CHECK_THROWS_AS(sub.coords(pauli(3)), std::invalid_argument);
}

TEST_CASE("product defect detects C*-closure and its failure") {
  BlockShape m2({2});
  // The full matrix algebra is closed under products.
  CHECK(OperatorSubsystem::full(m2).product_defect() <= 1e-10);
  // Abelian algebras are closed.
  CHECK(OperatorSubsystem::full(BlockShape({1, 1, 1})).product_defect() <= 1e-10);

  // span{1, sigma_x, sigma_y}: sigma_x sigma_y = i sigma_z leaves the span.
  // Over the HS-orthonormal basis {1/√2, sigma_x/√2, sigma_y/√2} the worst
  // residual is ‖i sigma_z / 2‖_HS = √2 / 2.
  OperatorSubsystem sub(m2, {identity(m2), pauli(1), pauli(2)});
  CHECK(sub.product_defect() == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("kadison representation on point states of an abelian algebra") {
  OperatorSubsystem c3 = OperatorSubsystem::full(BlockShape({1, 1, 1}));
  std::vector<BlockElement> deltas;
  for (int i = 0; i < 3; ++i) {
    BlockElement rho(c3.shape());
    rho.blocks[i](0, 0) = 1.0;
    deltas.push_back(rho);
  }
  BlockElement a = diag3(0.25, -1.0, 2.0);
  auto values = c3.kadison_hat(a, deltas);
  REQUIRE(values.size() == 3);
  CHECK(values[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(values[1] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(values[2] == doctest::Approx(2.0).epsilon(1e-14));
}
