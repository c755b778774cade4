// common.hpp — shared numeric utilities: golden-section search, meshes, RNG.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace lipos::core {

using cplx = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using MatR = Eigen::MatrixXd;
using VecR = Eigen::VectorXd;
using VecC = Eigen::VectorXcd;

// Default seed used by every stochastic routine unless the caller overrides it.
inline constexpr std::uint64_t kDefaultSeed = 20250401ull;

// ---- golden-section minimization -------------------------------------------

struct GoldenResult {
  double x = 0.0;      // argmin estimate
  double value = 0.0;  // f(x)
};

// Minimizes a unimodal (in particular, convex) function on [lo, hi].
// Endpoints and the midpoint are always evaluated so exact minima at special
// points (e.g. 0) are reproduced to machine precision, not just to x_tol.
inline GoldenResult golden_min(const std::function<double(double)>& f, double lo,
                               double hi, double x_tol = 1e-12) {
  if (!(lo <= hi)) throw std::invalid_argument("golden_min: empty bracket");
  static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > x_tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  GoldenResult best{c, fc};
  for (double x : {lo, hi, 0.5 * (lo + hi), d}) {
    double v = f(x);
    if (v < best.value) best = {x, v};
  }
  return best;
}

// Golden-section minimization with automatic bracket expansion: if the minimum
// lands on (or hugs) the initial bracket boundary, the bracket is doubled.
inline GoldenResult golden_min_expand(const std::function<double(double)>& f,
                                      double lo, double hi, double x_tol = 1e-12,
                                      int max_expansions = 8) {
  GoldenResult r = golden_min(f, lo, hi, x_tol);
  for (int k = 0; k < max_expansions; ++k) {
    double width = hi - lo;
    bool at_lo = r.x - lo < 1e-9 * (width + 1.0);
    bool at_hi = hi - r.x < 1e-9 * (width + 1.0);
    if (!at_lo && !at_hi) break;
    double mid = 0.5 * (lo + hi);
    lo = mid - width;
    hi = mid + width;
    r = golden_min(f, lo, hi, x_tol);
  }
  return r;
}

// ---- meshes -----------------------------------------------------------------

// Fibonacci lattice on the unit sphere S^2: nearly uniform, fully deterministic.
inline std::vector<Eigen::Vector3d> fibonacci_sphere(int count) {
  if (count <= 0) throw std::invalid_argument("fibonacci_sphere: count must be positive");
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(static_cast<std::size_t>(count));
  const double ga = M_PI * (3.0 - std::sqrt(5.0));  // golden angle
  for (int i = 0; i < count; ++i) {
    double z = 1.0 - 2.0 * (i + 0.5) / count;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double th = ga * i;
    pts.emplace_back(r * std::cos(th), r * std::sin(th), z);
  }
  return pts;
}

// Uniform directions on the unit circle.
inline std::vector<Eigen::Vector2d> circle_mesh(int count) {
  if (count <= 0) throw std::invalid_argument("circle_mesh: count must be positive");
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    double th = 2.0 * M_PI * i / count;
    pts.emplace_back(std::cos(th), std::sin(th));
  }
  return pts;
}

// ---- seeded RNG helpers ------------------------------------------------------

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline VecR random_gaussian_vec(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  VecR v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

}  // namespace lipos::core
