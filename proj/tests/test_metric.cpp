// test_metric.cpp — state metrics, matrix-state metrics, bridge distance bounds.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fixtures.hpp"
#include "lipos/metric/distance.hpp"
#include "lipos/metric/state.hpp"
#include "oracles.hpp"

using namespace lipos;
using namespace lipos::metric;
using core::BlockShape;
using core::MatC;
using core::MatR;
using core::VecR;
using core::cplx;
using sn::BallSpace;
using sn::LipNormedSystem;
using sn::SeminormSpec;

namespace {

LipNormedSystem flattening_system(double n) {
  return sn::make_lip_system(core::OperatorSubsystem::full(BlockShape({1, 1, 1})),
                             fixtures::flattening_spec(n));
}

// The M_2 system with a pinned radius interval: rho/rho_ucp never consult R,
// so the ascent run is skipped to keep the suite fast.
LipNormedSystem m2_system(double n) {
  const double r = std::sqrt(1.0 + 1.0 / (n * n));
  return LipNormedSystem{fixtures::pauli_system(), fixtures::m2_weighted_lip(n),
                         sn::RadiusInterval{r, r, true, "pinned"}};
}

State mix(const BlockShape& shape, const State& a, const State& b, double t) {
  std::vector<MatC> rho;
  for (std::size_t k = 0; k < a.rho.size(); ++k)
    rho.push_back((1.0 - t) * a.rho[k] + t * b.rho[k]);
  return make_state(shape, std::move(rho));
}

}  // namespace

TEST_CASE("state construction, validation and dual coordinates") {
  BlockShape c3({1, 1, 1});
  State d1 = delta_state(c3, 0), d2 = delta_state(c3, 1), d3 = delta_state(c3, 2);
  core::OperatorSubsystem sys = core::OperatorSubsystem::full(c3);
  CHECK((d1.coords(sys) - (VecR(3) << 1, 0, 0).finished()).norm() <= 1e-14);
  CHECK((d2.coords(sys) - (VecR(3) << 1, 1, 0).finished()).norm() <= 1e-14);
  CHECK((d3.coords(sys) - (VecR(3) << 1, 0, 1).finished()).norm() <= 1e-14);

  // Traces must sum to one and blocks must be PSD.
  std::vector<MatC> bad = {MatC::Constant(1, 1, 0.5), MatC::Constant(1, 1, 0.2),
                           MatC::Constant(1, 1, 0.2)};
  CHECK_THROWS_AS(make_state(c3, bad), std::invalid_argument);
  std::vector<MatC> neg = {MatC::Constant(1, 1, 1.5), MatC::Constant(1, 1, -0.5),
                           MatC::Constant(1, 1, 0.0)};
  CHECK_THROWS_AS(make_state(c3, neg), std::invalid_argument);

  std::mt19937_64 rng = core::make_rng(3);
  State w = random_state(BlockShape({2, 2}), rng);
  double tr = 0.0;
  for (const auto& r : w.rho) tr += r.trace().real();
  CHECK(tr == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("extreme state meshes are pure, deterministic, and sized as requested") {
  BlockShape m2({2});
  std::vector<State> mesh = extreme_states(m2, 64);
  REQUIRE(static_cast<int>(mesh.size()) == 64);
  for (const State& w : mesh) {
    // Purity: tr(rho^2) = 1 for a rank-one density.
    CHECK((w.rho[0] * w.rho[0]).trace().real() == doctest::Approx(1.0).epsilon(1e-12));
  }
  std::vector<State> again = extreme_states(m2, 64);
  CHECK((mesh[17].rho[0] - again[17].rho[0]).norm() == 0.0);

  BlockShape c3({1, 1, 1});
  CHECK(extreme_states(c3, 512).size() == 3);  // abelian blocks contribute deltas
}

TEST_CASE("matrix states: validation, unitality, cp flags, application") {
  BlockShape m2({2});
  MatrixState id = identity_map(m2);
  MatrixState tr = transpose_map(m2);
  CHECK(id.cp);
  CHECK(!tr.cp);  // the transpose is unital and positive but not CP

  core::BlockElement sy(m2);
  sy.blocks[0] << 0, cplx(0, -1), cplx(0, 1), 0;
  CHECK((id.apply(sy) - sy.blocks[0]).norm() <= 1e-14);
  CHECK((tr.apply(sy) + sy.blocks[0]).norm() <= 1e-14);  // sigma_y^T = -sigma_y

  // Non-unital Choi data is rejected.
  MatC c = MatC::Identity(4, 4);
  CHECK_THROWS_AS(make_matrix_state(m2, 2, {c}), std::invalid_argument);

  std::mt19937_64 rng = core::make_rng(5);
  MatrixState rnd = random_matrix_state(m2, 2, rng);
  CHECK(rnd.cp);  // the alternating projection must land on the UCP set
}

TEST_CASE("rho_states reproduces the known point distances") {
  LipNormedSystem ls1 = flattening_system(1.0);
  BlockShape c3({1, 1, 1});
  State d1 = delta_state(c3, 0), d2 = delta_state(c3, 1), d3 = delta_state(c3, 2);

  CHECK(rho_states(ls1, d1, d1).value == 0.0);
  CHECK(rho_states(ls1, d1, d3).value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  for (double n : {1.0, 2.0, 8.0}) {
    LipNormedSystem ls = flattening_system(n);
    CHECK(rho_states(ls, d1, d2).value == doctest::Approx(2.0).epsilon(1e-9));
  }

  // The flattening motion: the third point collapses onto the edge midpoint.
  State edge_mid = mix(c3, d1, d2, 0.5);
  for (double n : {1.0, 4.0, 16.0}) {
    LipNormedSystem ls = flattening_system(n);
    double d = rho_states(ls, d3, edge_mid).value;
    CHECK(d <= 1.0 / n + 1e-9);
    CHECK(d >= 1.0 / n - 1e-9);  // equals 1/n: the ellipse support in that direction
  }
}

TEST_CASE("rho_states is bit-symmetric and satisfies the triangle inequality") {
  LipNormedSystem ls = flattening_system(2.0);
  BlockShape c3({1, 1, 1});
  std::mt19937_64 rng = core::make_rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    State w1 = random_state(c3, rng), w2 = random_state(c3, rng), w3 = random_state(c3, rng);
    cvx::SolveResult a = rho_states(ls, w1, w2);
    cvx::SolveResult b = rho_states(ls, w2, w1);
    CHECK(a.value == b.value);  // exact bit equality via sign canonicalization
    CHECK(a.gap == b.gap);
    double d12 = a.value, d23 = rho_states(ls, w2, w3).value, d13 = rho_states(ls, w1, w3).value;
    CHECK(d13 <= d12 + d23 + 1e-7);
    CHECK(d12 >= 0.0);
  }
}

TEST_CASE("rho_states metrizes weak* convergence linearly in the mixing weight") {
  LipNormedSystem ls = flattening_system(2.0);
  BlockShape c3({1, 1, 1});
  State base = delta_state(c3, 0), other = delta_state(c3, 2);
  double d1 = rho_states(ls, mix(c3, base, other, 1.0), base).value;
  for (double t : {0.5, 0.125, 1.0 / 64.0}) {
    double dt = rho_states(ls, mix(c3, base, other, t), base).value;
    CHECK(dt == doctest::Approx(t * d1).epsilon(1e-9));
  }
}

TEST_CASE("sup_opnorm_image: cube oracle, rank-one exactness, kernel detection") {
  // Cube ball on 3 coordinates; truth = max over the 8 corners.
  core::OperatorSubsystem c3 = core::OperatorSubsystem::full(BlockShape({1, 1, 1}));
  sn::BallSpec cube = sn::build_ball(SeminormSpec::linmap(MatR::Identity(3, 3), sn::PNorm::Inf,
                                                          1.0, false),
                                     c3, BallSpace::Hermitian);
  std::mt19937_64 rng = core::make_rng(33);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<MatC> images;
    for (int j = 0; j < 3; ++j) {
      MatC g(2, 2);
      for (int r = 0; r < 2; ++r)
        for (int cc = 0; cc < 2; ++cc) g(r, cc) = cplx(gauss(rng), gauss(rng));
      images.push_back(g);
    }
    double oracle = 0.0;
    for (int mask = 0; mask < 8; ++mask) {
      MatC a = MatC::Zero(2, 2);
      for (int j = 0; j < 3; ++j) a += ((mask >> j) & 1 ? 1.0 : -1.0) * images[j];
      oracle = std::max(oracle, core::sigma_max(a));
    }
    cvx::SolveResult s = metric::detail::sup_opnorm_image(cube, images);
    CHECK(s.lower() <= oracle + 1e-9);
    CHECK(s.upper() >= oracle - 1e-9);
    CHECK(s.lower() >= oracle - 1e-8);  // alternating ascent reaches the corner optimum
  }

  // Rank-one image maps collapse to an exact support value.
  MatC B(2, 2);
  B << 1, cplx(0, 2), cplx(0, -2), -1;
  std::vector<MatC> rank1 = {0.5 * B, -1.0 * B, 2.0 * B};
  cvx::SolveResult s1 = metric::detail::sup_opnorm_image(cube, rank1);
  CHECK(s1.value ==
        doctest::Approx((0.5 + 1.0 + 2.0) * core::sigma_max(B)).epsilon(1e-10));
  CHECK(s1.gap <= 1e-8);

  // Images that see the seminorm kernel are rejected as unbounded.
  sn::BallSpec quos = sn::build_ball(SeminormSpec::quotient(fixtures::flattening_spec(2.0)), c3,
                                     BallSpace::Hermitian);
  std::vector<MatC> bad = {MatC::Identity(2, 2), MatC::Zero(2, 2), MatC::Zero(2, 2)};
  CHECK_THROWS_AS(metric::detail::sup_opnorm_image(quos, bad), std::runtime_error);
}

TEST_CASE("rho_ucp at p = 1 agrees with rho_states") {
  BlockShape c3({1, 1, 1});
  std::mt19937_64 rng = core::make_rng(8);
  for (double n : {1.0, 4.0}) {
    LipNormedSystem ls = flattening_system(n);
    for (int trial = 0; trial < 10; ++trial) {
      State w1 = random_state(c3, rng), w2 = random_state(c3, rng);
      cvx::SolveResult s = rho_states(ls, w1, w2);
      HausdorffBound u = rho_ucp(ls, matrix_state(c3, w1), matrix_state(c3, w2));
      CHECK(std::abs(u.lower - s.lower()) <= 1e-8);
      CHECK(std::abs(u.upper - s.upper()) <= 1e-8);
    }
  }
}

TEST_CASE("rho_ucp separates the identity from the transpose on M_2") {
  LipNormedSystem ls = m2_system(2.0);
  BlockShape m2({2});
  MatrixState id = identity_map(m2), tr = transpose_map(m2);

  HausdorffBound zero = rho_ucp(ls, id, id);
  CHECK(zero.lower == 0.0);
  CHECK(zero.upper == 0.0);

  // (id - transpose)(x) = 2i·Im(x): over the hermitian ball the sup is
  // attained at x = -sigma_y with ‖2i·Im(x)‖ = 2.
  HausdorffBound d = rho_ucp(ls, id, tr);
  CHECK(d.lower >= 1.0);  // the witnessed separation
  CHECK(d.lower == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(d.upper == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(d.lower <= d.upper);
}

TEST_CASE("coupling defect of the flattening bridge is exactly 1/n") {
  for (double n : {1.0, 2.0, 4.0}) {
    fixtures::BridgePack pack = fixtures::flattening_bridge(n);
    cvx::SolveResult s = coupling_defect(pack.bridge);
    CHECK(s.value == doctest::Approx(1.0 / n).epsilon(1e-9));
    CHECK(s.gap <= 1e-8);
  }
}

TEST_CASE("degenerate bridges are rejected by coupling_defect") {
  // A coupling that never ties the two sides leaves a two-dimensional kernel.
  SeminormSpec left = fixtures::interval_spec();
  SeminormSpec right = fixtures::interval_spec();
  MatR row(1, 4);
  row << 0, 1, 0, 0;  // |x1| only: no cross terms
  std::vector<sn::OpNormAtom> diff(1);
  diff[0].weight = 1.0;
  diff[0].coeffs.assign(4, MatC::Zero(1, 1));
  diff[0].coeffs[1](0, 0) = 1.0;
  diff[0].rebuild_sparsity();
  SeminormSpec loose = SeminormSpec::make_bridge(
      left, right, {SeminormSpec::linmap(row, sn::PNorm::Two, 1.0, false)}, diff);
  CHECK_THROWS_AS(coupling_defect(loose), std::runtime_error);

  // A bridge without a difference map cannot measure anything.
  SeminormSpec no_diff = SeminormSpec::make_bridge(
      left, right, {SeminormSpec::linmap(row, sn::PNorm::Two, 1.0, false)}, {});
  CHECK_THROWS_AS(coupling_defect(no_diff), std::invalid_argument);
}

TEST_CASE("hausdorff_states on the flattening bridge") {
  const double n = 4.0;
  fixtures::BridgePack pack = fixtures::flattening_bridge(n);
  LipNormedSystem X = flattening_system(n);
  LipNormedSystem Y = sn::make_lip_system(
      core::OperatorSubsystem::full(BlockShape({1, 1})), fixtures::interval_spec());

  BlockShape cy({1, 1});
  StateMatcher x_to_y = [&](const State& w) {
    double pa = w.rho[0](0, 0).real(), pb = w.rho[1](0, 0).real(), pc = w.rho[2](0, 0).real();
    std::vector<MatC> r = {MatC::Constant(1, 1, pa + 0.5 * pc),
                           MatC::Constant(1, 1, pb + 0.5 * pc)};
    return make_state(cy, std::move(r));
  };
  BlockShape cx({1, 1, 1});
  StateMatcher y_to_x = [&](const State& w) {
    std::vector<MatC> r = {w.rho[0], w.rho[1], MatC::Zero(1, 1)};
    return make_state(cx, std::move(r));
  };

  HausdorffBound hb = hausdorff_states(X, Y, pack.bridge, x_to_y, y_to_x);
  CHECK(hb.upper <= 1.0 / n + 1e-9);  // the restriction matcher realizes the 1/n bound
  CHECK(hb.lower >= 0.0);
  CHECK(hb.lower <= hb.upper);

  // Without matchers the upper bound falls back to the coupling defect.
  HausdorffBound fb = hausdorff_states(X, Y, pack.bridge);
  CHECK(fb.upper == doctest::Approx(coupling_defect(pack.bridge).upper()).epsilon(1e-12));
}

TEST_CASE("an identity bridge with a huge coupling weight gives distance zero") {
  SeminormSpec side = fixtures::interval_spec();
  const double w = 1e6;
  MatR r1(1, 4), r2(1, 4);
  r1 << 1, 0, -1, 0;
  r2 << 0, 1, 0, -1;
  std::vector<sn::OpNormAtom> diff;
  for (const MatR* rp : {&r1, &r2}) {
    sn::OpNormAtom atom;
    atom.weight = 1.0;
    atom.coeffs.assign(4, MatC::Zero(1, 1));
    for (int j = 0; j < 4; ++j) atom.coeffs[j](0, 0) = (*rp)(0, j);
    atom.rebuild_sparsity();
    diff.push_back(std::move(atom));
  }
  SeminormSpec ident = SeminormSpec::make_bridge(
      side, side, {SeminormSpec::linmap(r1, sn::PNorm::Two, w, false),
                   SeminormSpec::linmap(r2, sn::PNorm::Two, w, false)},
      diff);
  LipNormedSystem Y = sn::make_lip_system(
      core::OperatorSubsystem::full(BlockShape({1, 1})), fixtures::interval_spec());
  HausdorffBound hb = hausdorff_states(Y, Y, ident);
  CHECK(hb.upper <= 1e-5);
  CHECK(hb.lower <= hb.upper);
}

TEST_CASE("dist_upper lists the per-n coupling defects") {
  std::vector<fixtures::BridgePack> packs;
  for (double n : {1.0, 2.0, 3.0, 4.0}) packs.push_back(fixtures::flattening_bridge(n));
  std::vector<const SeminormSpec*> bridges;
  for (const auto& p : packs) bridges.push_back(&p.bridge);
  std::vector<double> bounds = dist_upper(bridges);
  REQUIRE(bounds.size() == 4);
  for (int i = 0; i < 4; ++i)
    CHECK(bounds[i] == doctest::Approx(1.0 / (i + 1.0)).epsilon(1e-8));
}
