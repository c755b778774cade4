// test_lipsystem.cpp — radius enclosures, lip-norm balls, dual values, bridges.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fixtures.hpp"
#include "lipos/seminorm/lipsystem.hpp"
#include "oracles.hpp"

using namespace lipos;
using namespace lipos::sn;
using core::BlockShape;
using core::MatR;
using core::OperatorSubsystem;
using core::VecR;

namespace {

OperatorSubsystem c3() { return OperatorSubsystem::full(BlockShape({1, 1, 1})); }
OperatorSubsystem c2() { return OperatorSubsystem::full(BlockShape({1, 1})); }

}  // namespace

TEST_CASE("radius of the flattening family is 1 for every n (abelian route)") {
  for (double n : {1.0, 2.0, 4.0, 8.0}) {
    RadiusInterval r = radius(fixtures::flattening_spec(n), c3());
    CHECK(r.method == "abelian-pairs");
    CHECK(r.closed);
    CHECK(r.lo == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.hi == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.lo <= r.hi);
  }
}

TEST_CASE("quotient-wrapping the seminorm does not move the radius") {
  // Dual route: the plain ball solves supports on the ellipsoid path, the
  // quotient-wrapped ball goes through the lifted cutting-plane path.
  RadiusInterval plain = radius(fixtures::flattening_spec(4.0), c3());
  RadiusInterval wrapped =
      radius(SeminormSpec::quotient(fixtures::flattening_spec(4.0)), c3());
  CHECK(std::abs(plain.lo - wrapped.lo) <= 1e-6);
  CHECK(std::abs(plain.hi - wrapped.hi) <= 1e-6);
  CHECK(wrapped.closed);
}

TEST_CASE("radius of the two-point interval system is 1") {
  RadiusInterval r = radius(fixtures::interval_spec(), c2());
  CHECK(r.method == "abelian-pairs");
  CHECK(r.closed);
  CHECK(r.lo == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.hi == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("radius of the weighted M_2 system encloses sqrt(1 + 1/n^2)") {
  // Hermitian ball: sqrt(x^2 + y^2) <= 1, |z| <= 1/n, trace part free; the
  // oscillation is the length of the Pauli vector part, so the true radius is
  // sqrt(1 + 1/n^2).  The ascent route must reach it and the coercivity upper
  // bound must stay finite and honest.
  const double n = 2.0;
  const double truth = std::sqrt(1.0 + 1.0 / (n * n));
  RadiusInterval r = radius(fixtures::m2_weighted_lip(n), fixtures::pauli_system());
  CHECK(r.method == "ascent+coercivity");
  CHECK(r.lo >= truth - 1e-3);
  CHECK(r.lo <= truth + 1e-9);  // lower bounds must never overshoot the truth
  CHECK(r.hi >= r.lo);
  CHECK(r.hi <= 4.0);
}

TEST_CASE("radius is deterministic across repeated calls") {
  RadiusInterval a = radius(fixtures::m2_weighted_lip(2.0), fixtures::pauli_system());
  RadiusInterval b = radius(fixtures::m2_weighted_lip(2.0), fixtures::pauli_system());
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
}

TEST_CASE("single-point systems have radius zero") {
  OperatorSubsystem pt = OperatorSubsystem::full(BlockShape({1}));
  RadiusInterval r = radius(SeminormSpec::linmap(MatR::Zero(1, 1), PNorm::Two, 1.0, false), pt);
  CHECK(r.method == "single-point");
  CHECK(r.lo == 0.0);
  CHECK(r.hi == 0.0);
  CHECK(r.closed);
}

TEST_CASE("a seminorm with a kernel beyond the unit line is rejected") {
  MatR one_row(1, 3);
  one_row << 0.0, -0.5, 0.0;
  SeminormSpec degenerate = SeminormSpec::linmap(one_row, PNorm::Two, 1.0, false);
  CHECK_THROWS_AS(radius(degenerate, c3()), std::runtime_error);
  CHECK_THROWS_AS(make_lip_system(c3(), degenerate), std::runtime_error);
}

TEST_CASE("dual seminorm values on the flattening system") {
  const double n = 4.0;
  LipNormedSystem ls = make_lip_system(c3(), fixtures::flattening_spec(n));
  REQUIRE(ls.R.closed);

  // Functionals annihilating the unit go through the uncapped {L <= 1} ball.
  VecR phi_ac(3);  // delta_a - delta_c = -u2 in basis coordinates
  phi_ac << 0.0, 0.0, -1.0;
  cvx::SolveResult s = dual_seminorm(ls, phi_ac);
  CHECK(s.value == doctest::Approx(std::sqrt(1.0 + 1.0 / (n * n))).epsilon(1e-9));
  CHECK(s.gap <= 1e-8);

  VecR phi_ab(3);  // delta_a - delta_b = -u1: the pair at distance 2
  phi_ab << 0.0, -1.0, 0.0;
  CHECK(dual_seminorm(ls, phi_ab).value == doctest::Approx(2.0).epsilon(1e-9));

  // A state-like functional that sees the unit must use the capped ball:
  // sup{ u0 : L <= 1, |a|,|b|,|c| <= 1 } = 1, attained at the unit itself.
  VecR phi_a(3);
  phi_a << 1.0, 0.0, 0.0;
  cvx::SolveResult capped = dual_seminorm(ls, phi_a);
  CHECK(capped.upper() >= 1.0 - 1e-9);
  CHECK(capped.value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("outer and inner lip-norm balls nest correctly") {
  LipNormedSystem ls =
      make_lip_system(fixtures::pauli_system(), fixtures::m2_weighted_lip(2.0));
  REQUIRE(ls.R.lo > 0.0);
  REQUIRE(ls.R.hi > ls.R.lo);  // the honest ascent interval is open here
  BallSpec outer = lip_norm_ball_outer(ls, BallSpace::Hermitian);
  BallSpec inner = lip_norm_ball_inner(ls, BallSpace::Hermitian);

  std::mt19937_64 rng = core::make_rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    VecR x = core::random_gaussian_vec(rng, 4);
    double gi = inner.gauge(x);
    REQUIRE(gi > 0.0);
    VecR scaled = x / (gi * (1.0 + 1e-9));
    CHECK(inner.contains(scaled));
    CHECK(outer.contains(scaled));  // smaller radius estimate => smaller ball
    CHECK(outer.gauge(x) <= gi + 1e-12);
  }

  // The unit direction is capped by the norm part only.
  LipNormedSystem flat = make_lip_system(c3(), fixtures::flattening_spec(2.0));
  BallSpec fouter = lip_norm_ball_outer(flat, BallSpace::Hermitian);
  VecR unit_dir = VecR::Zero(3);
  unit_dir(0) = 0.999;
  CHECK(fouter.contains(unit_dir));
  unit_dir(0) = 1.002;
  CHECK(!fouter.contains(unit_dir));
}

TEST_CASE("minimal bridge completions reproduce exact values") {
  fixtures::BridgePack pack = fixtures::flattening_bridge(2.0);

  VecR x(3);  // values (a, b, c) = (0, 2, 1): L_X = 1, couplings can vanish
  x << 0.0, 2.0, 1.0;
  CompletionResult left_to_right = min_completion(pack.bridge, x, true);
  CHECK(left_to_right.value == doctest::Approx(1.0).epsilon(1e-9));
  REQUIRE(left_to_right.other.size() == 2);
  CHECK(std::abs(left_to_right.other(0) - 0.0) <= 1e-6);
  CHECK(std::abs(left_to_right.other(1) - 2.0) <= 1e-6);

  VecR y(2);  // values (alpha, beta) = (0, 2): completion (0, 2, 1) is exact
  y << 0.0, 2.0;
  CompletionResult right_to_left = min_completion(pack.bridge, y, false);
  CHECK(right_to_left.value == doctest::Approx(1.0).epsilon(1e-9));
  REQUIRE(right_to_left.other.size() == 3);
  CHECK(std::abs(right_to_left.other(2) - 1.0) <= 1e-6);
}

TEST_CASE("the flattening bridge restricts to both component seminorms") {
  for (double n : {1.0, 2.0}) {
    fixtures::BridgePack pack = fixtures::flattening_bridge(n);
    BridgeReport rep = verify_bridge(pack.bridge, pack.left, pack.right);
    CHECK(rep.joint_kernel_unit_line);
    CHECK(rep.probe_count >= 10);
    CHECK(rep.left_gap >= -1e-12);
    CHECK(rep.left_gap <= 1e-6);
    CHECK(rep.right_gap >= -1e-12);
    CHECK(rep.right_gap <= 1e-6);
  }
}
