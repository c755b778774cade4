// test_convex.cpp — LP, certified support values, projections, multistart max.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "lipos/convex/solve.hpp"
#include "oracles.hpp"

using namespace lipos;
using namespace lipos::cvx;
using core::BlockShape;
using core::MatR;
using core::VecR;
using fixtures::flattening_rows;
using sn::BallSpace;
using sn::BallSpec;
using sn::PNorm;
using sn::SeminormSpec;

namespace {

BallSpec flattening_ball(double n) {
  core::OperatorSubsystem c3 = core::OperatorSubsystem::full(BlockShape({1, 1, 1}));
  SeminormSpec spec = SeminormSpec::quotient(fixtures::flattening_spec(n));
  return sn::build_ball(spec, c3, BallSpace::Hermitian);
}

BallSpec m2_lip_ball(double n) {
  core::OperatorSubsystem m2 = fixtures::pauli_system();
  return sn::build_ball(fixtures::m2_weighted_lip(n), m2, BallSpace::Hermitian);
}

// Explicit polytope spec on 3 coordinates: full-kernel-free mix of the three
// exactly enumerable atom types.
struct PolytopeFixture {
  BallSpec ball;
  MatR A;  // H-representation rows, built independently of the library
  VecR b;
};

PolytopeFixture make_polytope() {
  MatR minf = MatR::Identity(3, 3);
  MatR m1(2, 3);
  m1 << 1, 1, 0, 0, 1, 1;
  MatR m2(1, 3);
  m2 << 1, -1, 1;
  SeminormSpec spec = SeminormSpec::max_of(
      {SeminormSpec::linmap(minf, PNorm::Inf, 1.0, false),
       SeminormSpec::linmap(m1, PNorm::One, 0.7, false),
       SeminormSpec::linmap(m2, PNorm::Two, 0.5, false)});
  core::OperatorSubsystem c3 = core::OperatorSubsystem::full(BlockShape({1, 1, 1}));
  PolytopeFixture fx{sn::build_ball(spec, c3, BallSpace::Hermitian), MatR(), VecR()};

  std::vector<VecR> rows;
  for (int i = 0; i < 3; ++i) {
    rows.push_back(VecR(minf.row(i)));
    rows.push_back(VecR(-minf.row(i)));
  }
  for (double s1 : {1.0, -1.0})
    for (double s2 : {1.0, -1.0})
      rows.push_back(VecR(0.7 * (s1 * m1.row(0) + s2 * m1.row(1)).transpose()));
  rows.push_back(VecR(0.5 * m2.row(0).transpose()));
  rows.push_back(VecR(-0.5 * m2.row(0).transpose()));
  fx.A.resize(static_cast<int>(rows.size()), 3);
  fx.b.resize(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    fx.A.row(static_cast<int>(i)) = rows[i].transpose();
    fx.b(static_cast<int>(i)) = 1.0;
  }
  return fx;
}

}  // namespace

TEST_CASE("lp_max solves explicit boxes, including degenerate rows") {
  MatR A(4, 2);
  A << 1, 0, 0, 1, -1, 0, 0, -1;
  VecR b = VecR::Ones(4);
  VecR phi(2);
  phi << 2, 3;
  LpResult lp = lp_max(A, b, phi);
  REQUIRE(lp.ok);
  CHECK(lp.value == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(lp.x(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(lp.x(1) == doctest::Approx(1.0).epsilon(1e-10));

  // Duplicated and redundant rows must not disturb the optimum.
  MatR A2(7, 2);
  A2 << 1, 0, 0, 1, -1, 0, 0, -1, 1, 0, 1, 1, -1, -1;
  VecR b2(7);
  b2 << 1, 1, 1, 1, 1, 2, 3;
  LpResult lp2 = lp_max(A2, b2, phi);
  REQUIRE(lp2.ok);
  CHECK(lp2.value == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("lp_max agrees with vertex enumeration on random bounded polytopes") {
  std::mt19937_64 rng = core::make_rng(core::kDefaultSeed + 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + (trial % 2);
    const int extra = 3 + (trial % 3);
    MatR A(2 * n + extra, n);
    VecR b(2 * n + extra);
    for (int i = 0; i < n; ++i) {
      A.row(2 * i).setZero();
      A(2 * i, i) = 1.0;
      b(2 * i) = 1.0;
      A.row(2 * i + 1).setZero();
      A(2 * i + 1, i) = -1.0;
      b(2 * i + 1) = 1.0;
    }
    for (int i = 0; i < extra; ++i) {
      for (int j = 0; j < n; ++j) A(2 * n + i, j) = gauss(rng);
      b(2 * n + i) = 0.5 + std::abs(gauss(rng));
    }
    VecR phi(n);
    for (int j = 0; j < n; ++j) phi(j) = gauss(rng);

    LpResult lp = lp_max(A, b, phi);
    REQUIRE(lp.ok);
    double ref = oracles::support_vertex_oracle(A, b, phi);
    CHECK(std::abs(lp.value - ref) <= 1e-8 * std::max(1.0, std::abs(ref)));
    CHECK(((A * lp.x).array() <= b.array() + 1e-8).all());
  }
}

TEST_CASE("support on polytope balls: exact path and forced cutting planes") {
  PolytopeFixture fx = make_polytope();
  std::mt19937_64 rng = core::make_rng(core::kDefaultSeed + 2);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    VecR phi(3);
    for (int j = 0; j < 3; ++j) phi(j) = gauss(rng);
    double ref = oracles::support_vertex_oracle(fx.A, fx.b, phi);

    SolveResult exact = support(fx.ball, phi);
    CHECK(exact.status == SolveStatus::converged);
    CHECK(std::abs(exact.value - ref) <= 1e-8 * std::max(1.0, std::abs(ref)));
    CHECK(exact.lower() <= ref + 1e-9);
    CHECK(exact.upper() >= ref - 1e-9);
    CHECK(fx.ball.contains(exact.certificate, 1e-9));

    SolverOptions forced;
    forced.force_cutting_plane = true;
    SolveResult cp = support(fx.ball, phi, forced);
    CHECK(std::abs(cp.value - ref) <= 1e-6 * std::max(1.0, std::abs(ref)));
    CHECK(cp.lower() <= ref + 1e-9);
    CHECK(cp.upper() >= ref - 1e-9);
  }
}

TEST_CASE("support on the flattening family: exact state-distance values") {
  // sup over the lip-ball of the functionals behind the three point-state
  // distances: a-b gives 2, a-c gives sqrt(1+1/n^2), c-(a+b)/2 gives 1/n.
  for (double n : {1.0, 4.0}) {
    BallSpec ball = flattening_ball(n);
    VecR phi_ab(3), phi_ac(3), phi_mid(3);
    phi_ab << 0, -1, 0;
    phi_ac << 0, 0, -1;
    phi_mid << 0, -0.5, 1;

    SolveResult r1 = support(ball, phi_ab);
    SolveResult r2 = support(ball, phi_ac);
    SolveResult r3 = support(ball, phi_mid);
    CHECK(r1.value == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(r2.value == doctest::Approx(std::sqrt(1.0 + 1.0 / (n * n))).epsilon(1e-9));
    CHECK(r3.value == doctest::Approx(1.0 / n).epsilon(1e-9));
    CHECK(r1.gap <= 1e-8);
    CHECK(r2.gap <= 1e-8);

    // Dense boundary mesh oracle in the reduced (u1, u2) coordinates.
    MatR U(3, 2);
    U.setZero();
    U(1, 0) = 1.0;
    U(2, 1) = 1.0;
    MatR Mred = flattening_rows(n) * U;
    VecR phi_red(2);
    phi_red << 0, -1;
    double mesh = oracles::support_ellipse_mesh(Mred, phi_red);
    CHECK(std::abs(r2.value - mesh) <= 1e-6);

    // Forced cutting planes: the enclosure must bracket the exact ellipsoid
    // value; the midpoint converges like the square of the cut density.
    SolverOptions forced;
    forced.force_cutting_plane = true;
    SolveResult cp = support(ball, phi_ac, forced);
    CHECK(std::abs(cp.value - r2.value) <= 1e-5);
    CHECK(cp.lower() <= r2.value + 1e-9);
    CHECK(cp.upper() >= r2.value - 1e-9);
  }
}

TEST_CASE("support through lifted quotient shifts on the M_2 lip-ball") {
  // max{n|z|, |b|, |c|} after quotienting the trace: sup of the z coordinate
  // over the hermitian ball is exactly 1/n, and the trace shift variables are
  // genuinely exercised because the |t| atom does not annihilate the axes.
  for (double n : {2.0, 5.0}) {
    BallSpec ball = m2_lip_ball(n);
    VecR phi = VecR::Zero(4);
    phi(3) = 1.0;
    SolveResult r = support(ball, phi);
    CHECK(r.upper() >= 1.0 / n - 1e-9);
    CHECK(r.lower() <= 1.0 / n + 1e-9);
    CHECK(std::abs(r.value - 1.0 / n) <= 2e-5);

    // sup of the x coordinate: |b| and |c| both reduce to sqrt(x^2 + y^2) on
    // hermitian points, so the answer is 1.
    VecR phix = VecR::Zero(4);
    phix(1) = 1.0;
    SolveResult rx = support(ball, phix);
    CHECK(rx.upper() >= 1.0 - 1e-9);
    CHECK(rx.lower() <= 1.0 + 1e-9);
    CHECK(std::abs(rx.value - 1.0) <= 2e-5);
  }
}

TEST_CASE("support rejects objectives that see the kernel") {
  core::OperatorSubsystem c3 = core::OperatorSubsystem::full(BlockShape({1, 1, 1}));
  MatR one_row(1, 3);
  one_row << 0.0, -0.5, 0.0;
  BallSpec ball = sn::build_ball(SeminormSpec::linmap(one_row, PNorm::Two, 1.0, false), c3,
                                 BallSpace::Hermitian);
  VecR phi(3);
  phi << 0, 0, 1;  // not annihilated by the kernel direction u2
  CHECK_THROWS_AS((void)support(ball, phi), std::runtime_error);
}

TEST_CASE("coercivity bound is tight on the cube and detects unboundedness") {
  core::OperatorSubsystem c3 = core::OperatorSubsystem::full(BlockShape({1, 1, 1}));
  BallSpec cube = sn::build_ball(
      SeminormSpec::linmap(MatR::Identity(3, 3), PNorm::Inf, 1.0, false), c3,
      BallSpace::Hermitian);
  double kappa = coercivity_bound(cube, MatR::Identity(3, 3));
  CHECK(kappa == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));

  MatR one_row(1, 3);
  one_row << 1, 0, 0;
  BallSpec degenerate = sn::build_ball(
      SeminormSpec::linmap(one_row, PNorm::Two, 1.0, false), c3, BallSpace::Hermitian);
  CHECK_THROWS_AS((void)coercivity_bound(degenerate, MatR::Identity(3, 3)),
                  std::runtime_error);
}

TEST_CASE("projection to the cube: exact distances with dual certificates") {
  core::OperatorSubsystem c2 = core::OperatorSubsystem::full(BlockShape({1, 1}));
  BallSpec cube = sn::build_ball(
      SeminormSpec::linmap(MatR::Identity(2, 2), PNorm::Inf, 1.0, false), c2,
      BallSpace::Hermitian);
  auto l2 = [](const VecR& d) { return d.norm(); };

  // Inside: distance is exactly zero.
  VecR inside(2);
  inside << 0.5, 0.5;
  ProjectResult pin = project_to_ball(cube, inside, l2, [](const VecR&) {
    return std::vector<DualCertificate>{};
  });
  CHECK(pin.upper == 0.0);
  CHECK(pin.status == SolveStatus::converged);

  // Face: target (3, 0), distance 2, certificate f = e0.
  VecR t1(2);
  t1 << 3, 0;
  auto cert1 = [](const VecR&) {
    VecR f(2);
    f << 1, 0;
    return std::vector<DualCertificate>{{f, 1.0, 1.0}};
  };
  ProjectResult p1 = project_to_ball(cube, t1, l2, cert1);
  CHECK(p1.upper == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(p1.lower == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(p1.status == SolveStatus::converged);

  // Corner: target (2, 2), distance sqrt(2), certificate f = (1, 1).
  VecR t2(2);
  t2 << 2, 2;
  auto cert2 = [](const VecR&) {
    VecR f(2);
    f << 1, 1;
    return std::vector<DualCertificate>{{f, 2.0, std::sqrt(2.0)}};
  };
  ProjectResult p2 = project_to_ball(cube, t2, l2, cert2);
  CHECK(p2.upper == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
  CHECK(p2.lower == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
  CHECK(p2.status == SolveStatus::converged);
}

TEST_CASE("multistart maximization finds cube corners") {
  core::OperatorSubsystem c2 = core::OperatorSubsystem::full(BlockShape({1, 1}));
  BallSpec cube = sn::build_ball(
      SeminormSpec::linmap(MatR::Identity(2, 2), PNorm::Inf, 1.0, false), c2,
      BallSpace::Hermitian);
  auto obj = [](const VecR& x) { return x.squaredNorm(); };
  VecR seed(2);
  seed << 0.3, -0.2;
  SolveResult r = max_nonconcave(cube, obj, {seed});
  CHECK(r.value >= 2.0 - 1e-6);
  CHECK(r.value <= 2.0 + 1e-9);
  CHECK(r.status == SolveStatus::gap_open);
  CHECK(std::isinf(r.gap));
  CHECK(cube.contains(r.certificate, 1e-9));
}
