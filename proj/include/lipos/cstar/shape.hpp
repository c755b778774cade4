// shape.hpp — sampled geometry of the state space of an operator subsystem.
// The states of a unital subsystem of ⊕_k M_{d_k} are exactly the restrictions
// of ambient states, so for hermitian F₁,…,F_d in the span the support value
//   h(v) = sup{ Σ v_j ω(F_j) : ω a state } = max over blocks of λmax(Σ v_j F_j)
// is an exact eigenvalue computation.  Sampling h over a direction mesh and
// clustering the maximizing states' coordinate vectors (the gradients of h)
// separates polytopal state spaces (few clusters: the extreme points) from
// smooth ones (gradients fan out continuously).
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

namespace lipos::cstar {

struct ShapeTable {
  int coord_dim = 0;
  std::vector<VecR> directions;
  std::vector<double> support;   // h(v) per direction (exact up to eigensolver accuracy)
  std::vector<VecR> gradients;   // coordinates of a maximizing state per direction
  std::string classification;    // "polytope" | "smooth" | "inconclusive"
  int extreme_count = 0;         // distinct gradient clusters found
  double disc_radius = std::numeric_limits<double>::quiet_NaN();  // 2D constant-support radius
};

namespace detail {

inline std::vector<VecR> direction_mesh(int d, int count, std::uint64_t seed) {
  std::vector<VecR> dirs;
  if (d == 1) {
    dirs.push_back(VecR::Constant(1, 1.0));
    dirs.push_back(VecR::Constant(1, -1.0));
    return dirs;
  }
  if (count < 4) throw std::invalid_argument("state_space_shape: need at least 4 directions");
  dirs.reserve(static_cast<std::size_t>(count));
  if (d == 2) {
    for (int i = 0; i < count; ++i) {
      const double th = 2.0 * M_PI * i / count;
      VecR v(2);
      v << std::cos(th), std::sin(th);
      dirs.push_back(v);
    }
    return dirs;
  }
  if (d == 3) {
    // Fibonacci sphere: deterministic, near-uniform.
    const double golden_angle = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / count;
      const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double ph = golden_angle * i;
      VecR v(3);
      v << rad * std::cos(ph), rad * std::sin(ph), z;
      dirs.push_back(v);
    }
    return dirs;
  }
  std::mt19937_64 rng = core::make_rng(seed);
  while (static_cast<int>(dirs.size()) < count) {
    VecR v = core::random_gaussian_vec(rng, d);
    if (v.norm() > 1e-12) dirs.push_back(v.normalized());
  }
  return dirs;
}

}  // namespace detail

// Sample the support function of the state space in the given coordinates.
// With no explicit coordinate elements, the non-unit basis elements are used
// (one real coordinate each).  Explicit elements may be non-hermitian: such an
// element C contributes the two real coordinates ω ↦ (Re ω(C), Im ω(C)) via
// its hermitian and antihermitian parts — this is the natural plane for
// studying e.g. the image of a matrix unit under all states.
inline ShapeTable state_space_shape(const core::OperatorSubsystem& S, int directions,
                                    const std::vector<BlockElement>& coord_elems = {},
                                    std::uint64_t seed = core::kDefaultSeed) {
  std::vector<BlockElement> funcs;
  if (coord_elems.empty()) {
    if (S.dim() < 2)
      throw std::invalid_argument("state_space_shape: system has no non-unit coordinates");
    for (int j = 1; j < S.dim(); ++j) funcs.push_back(S.basis()[static_cast<std::size_t>(j)]);
  } else {
    for (const BlockElement& e : coord_elems) {
      if (!S.contains(e))
        throw std::invalid_argument("state_space_shape: coordinate element outside the system");
      if (core::is_hermitian(e)) {
        funcs.push_back(e);
      } else {
        funcs.push_back(core::hermitian_part(e));
        BlockElement im = e;  // (E − E*)/(2i), the hermitian "imaginary part"
        for (auto& blk : im.blocks) blk = (blk - blk.adjoint().eval()) / core::cplx(0.0, 2.0);
        funcs.push_back(im);
      }
    }
  }
  const int d = static_cast<int>(funcs.size());

  ShapeTable table;
  table.coord_dim = d;
  table.directions = detail::direction_mesh(d, directions, seed);

  for (const VecR& v : table.directions) {
    BlockElement ev = v[0] * funcs[0];
    for (int j = 1; j < d; ++j) ev = ev + v[j] * funcs[static_cast<std::size_t>(j)];
    double best = -std::numeric_limits<double>::infinity();
    int best_block = 0;
    Eigen::VectorXcd best_vec;
    for (std::size_t k = 0; k < ev.blocks.size(); ++k) {
      Eigen::SelfAdjointEigenSolver<MatC> es(ev.blocks[k]);
      const int top = static_cast<int>(es.eigenvalues().size()) - 1;
      if (es.eigenvalues()[top] > best) {
        best = es.eigenvalues()[top];
        best_block = static_cast<int>(k);
        best_vec = es.eigenvectors().col(top);
      }
    }
    table.support.push_back(best);
    VecR grad(d);
    for (int j = 0; j < d; ++j)
      grad[j] = (best_vec.adjoint() *
                 funcs[static_cast<std::size_t>(j)].blocks[static_cast<std::size_t>(best_block)] *
                 best_vec)(0)
                    .real();
    table.gradients.push_back(grad);
  }

  // Greedy clustering of the gradients.
  std::vector<VecR> reps;
  for (const VecR& g : table.gradients) {
    bool found = false;
    for (const VecR& r : reps)
      if ((g - r).lpNorm<Eigen::Infinity>() <= 1e-6 * std::max(1.0, r.lpNorm<Eigen::Infinity>())) {
        found = true;
        break;
      }
    if (!found) reps.push_back(g);
  }
  table.extreme_count = static_cast<int>(reps.size());

  const int n = static_cast<int>(table.directions.size());
  if (d == 1) {
    table.classification = "polytope";  // a 1D state-space image is a segment
  } else if (table.extreme_count <= std::max(2, n / 4)) {
    table.classification = "polytope";
  } else if (table.extreme_count >= (3 * n) / 4) {
    table.classification = "smooth";
  } else {
    table.classification = "inconclusive";
  }

  if (d == 2) {
    double mean = 0.0;
    for (double h : table.support) mean += h;
    mean /= table.support.size();
    double dev = 0.0;
    for (double h : table.support) dev = std::max(dev, std::abs(h - mean));
    if (dev <= 1e-6 * std::max(1.0, std::abs(mean))) table.disc_radius = mean;
  }
  return table;
}

}  // namespace lipos::cstar
