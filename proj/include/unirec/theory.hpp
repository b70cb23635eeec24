#pragma once

#include "unirec/rng.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace unirec {

// ---------------------------------------------------------------------------
// Gaussian helpers. Templated so the extended-precision round trip is
// available; the solvers and curves use double.
// ---------------------------------------------------------------------------

template <typename T = double> T gauss_pdf(T t) {
  return std::exp(-t * t / 2) / std::sqrt(2 * std::numbers::pi_v<T>);
}

/// Upper tail Q(t) = P(g > t).
template <typename T = double> T q_function(T t) {
  return std::erfc(t / std::numbers::sqrt2_v<T>) / 2;
}

/// Inverse of Q on (0, 1). Throws DomainError outside.
double q_inverse(double p);
long double q_inverse(long double p);

// ---------------------------------------------------------------------------
// Thresholds
// ---------------------------------------------------------------------------

/// E[(|g| - tau)_+^2] = 2[(1 + tau^2) Q(tau) - tau phi(tau)].
double expected_soft_residual(double tau);

/// psi_s(tau) = s (1 + tau^2) + (1 - s) E[(|g| - tau)_+^2].
double l1_statdim_functional(double s, double tau);

struct SparseThreshold {
  /// Root of x Q^{-1}((2x - s)/(2 - 2s)) = (1 - s) phi(Q^{-1}((2x - s)/(2 - 2s))).
  double x_root = 0.0;
  /// |lhs - rhs| of the equation at x_root.
  double residual = 0.0;
  /// min over tau >= 0 of psi_s(tau).
  double delta_statdim = 0.0;
  double tau_star = 0.0;
};

/// Both forms of the l1 threshold for sparsity fraction s in (0, 1). The
/// stationarity condition of psi_s is the root equation with
/// delta_statdim = 2 x_root.
SparseThreshold sparse_delta_star(double s);

/// Left-hand side minus right-hand side of the root equation at x.
double sparse_equation_residual(double s, double x);

/// 3r: rank-r PSD recovery from quadratic measurements, delta = m/n.
double lowrank_delta_star(int r);

struct WidthEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  int samples = 0;
};

/// Monte Carlo statistical dimension of the l1 descent cone at a k-sparse
/// point divided by n: mean over g of min_{tau>=0} dist(g, tau d||x0||_1)^2.
WidthEstimate width_l1_mc(int n, int k, int num_samples, std::uint64_t seed);

/// Squared distance from g to the ray tau * subgradient minimized over tau >= 0,
/// for a sign pattern of +1 on the first k coordinates.
double l1_cone_distance_sq(const std::vector<double> &g, int k);

struct OrderEstimate {
  long long measurements = 0;
  bool order_only = true; // no constant is known
};

/// min(k^2, r n) for a k-sparse rank-r n x n matrix.
OrderEstimate sl_order(int k, int r, int n);

// ---------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------

enum class TheoryMethod { EqDeltaRoot, StatDimL1, ThreeR, WidthMc, OrderMinK2Rn };

std::string to_string(TheoryMethod method);
TheoryMethod theory_method_from_string(const std::string &name);

struct TheoryCurve {
  std::vector<double> structure_axis;
  std::vector<double> delta_star;
  TheoryMethod method = TheoryMethod::StatDimL1;
};

TheoryCurve l1_curve(const std::vector<double> &s_axis, TheoryMethod method);
TheoryCurve lowrank_curve(const std::vector<int> &r_axis);

/// CSV with header `structure,delta_star,method`.
std::string theory_csv(const std::vector<TheoryCurve> &curves);
/// Parses the CSV above, one curve per method in order of appearance.
std::vector<TheoryCurve> parse_theory_csv(const std::string &text);

} // namespace unirec
