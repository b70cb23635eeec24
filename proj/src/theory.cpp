#include "unirec/theory.hpp"

#include "unirec/error.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

namespace unirec {

namespace {

/// Solves log Q(t) = log p for p in (0, 1/2] by Newton on log Q, safeguarded
/// by the bracket [0, hi].
template <typename T> T q_inverse_upper_tail(T p, T hi) {
  const T target = std::log(p);
  T lo = 0;
  T t = std::sqrt(-2 * target); // tail asymptote, an overestimate
  if (!(t < hi)) t = hi / 2;
  for (int iter = 0; iter < 200; ++iter) {
    const T q = q_function(t);
    const T g = std::log(q) - target; // decreasing in t
    if (g > 0)
      lo = t;
    else
      hi = t;
    T next = t + g * q / gauss_pdf(t);
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = (lo + hi) / 2;
    if (std::abs(next - t) <= 4 * std::numeric_limits<T>::epsilon() * std::max<T>(1, std::abs(t))) {
      t = next;
      break;
    }
    t = next;
  }
  return t;
}

template <typename T> T q_inverse_impl(T p, T hi) {
  if (!(p > 0 && p < 1)) throw DomainError("q_inverse: p must lie in (0, 1)");
  if (p == T(0.5)) return 0;
  // 1 - p is exact for p in [1/2, 1).
  if (p > T(0.5)) return -q_inverse_upper_tail<T>(1 - p, hi);
  return q_inverse_upper_tail<T>(p, hi);
}

void check_fraction(double s) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("sparsity fraction must lie in (0, 1)");
}

// Shortest text that parses back to the same double.
std::string fmt_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

} // namespace

double q_inverse(double p) { return q_inverse_impl<double>(p, 40.0); }
long double q_inverse(long double p) { return q_inverse_impl<long double>(p, 160.0L); }

double expected_soft_residual(double tau) {
  return 2.0 * ((1.0 + tau * tau) * q_function(tau) - tau * gauss_pdf(tau));
}

double l1_statdim_functional(double s, double tau) {
  return s * (1.0 + tau * tau) + (1.0 - s) * expected_soft_residual(tau);
}

double sparse_equation_residual(double s, double x) {
  check_fraction(s);
  const double tau = q_inverse((2.0 * x - s) / (2.0 - 2.0 * s));
  return x * tau - (1.0 - s) * gauss_pdf(tau);
}

SparseThreshold sparse_delta_star(double s) {
  check_fraction(s);
  SparseThreshold out;

  // Root of the nonlinear equation. The Q^{-1} argument must stay in (0, 1),
  // which confines x to (s/2, 1 - s/2); the residual is +inf-like at the left
  // end and -inf-like at the right end.
  {
    double lo = s / 2.0, hi = 1.0 - s / 2.0;
    auto h = [&](double x) { return sparse_equation_residual(s, x); };
    double x = 0.5 * (lo + hi);
    // Step inside the open bracket so Q^{-1} stays finite at both ends.
    const double inset = std::max(1e-14 * (hi - lo), 8.0 * std::numeric_limits<double>::epsilon());
    double a = lo + inset, b = hi - inset;
    if (!(h(a) > 0.0 && h(b) < 0.0)) throw DomainError("sparse_delta_star: no sign change in bracket");
    lo = a;
    hi = b;
    for (int iter = 0; iter < 400; ++iter) {
      const double hx = h(x);
      if (hx == 0.0) break;
      if (hx > 0.0)
        lo = x;
      else
        hi = x;
      const double tau = q_inverse((2.0 * x - s) / (2.0 - 2.0 * s));
      const double phi = gauss_pdf(tau);
      const double dtau = -1.0 / ((1.0 - s) * phi);
      const double dh = tau + dtau * (x + (1.0 - s) * tau * phi);
      double next = x - hx / dh;
      if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
      if (next == x || hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * hi) {
        x = next;
        break;
      }
      x = next;
    }
    // Pick the best of the final point and the bracket ends.
    double best = x, best_res = std::abs(h(x));
    for (double c : {lo, hi}) {
      const double r = std::abs(h(c));
      if (r < best_res) {
        best = c;
        best_res = r;
      }
    }
    out.x_root = best;
    out.residual = best_res;
  }

  // Variational form: psi is strictly convex with psi'(0) < 0.
  {
    auto dpsi = [&](double tau) {
      return 2.0 * (s * tau + 2.0 * (1.0 - s) * (tau * q_function(tau) - gauss_pdf(tau)));
    };
    auto d2psi = [&](double tau) { return 2.0 * s + 4.0 * (1.0 - s) * q_function(tau); };
    double lo = 0.0, hi = 40.0;
    double tau = 1.0;
    for (int iter = 0; iter < 400; ++iter) {
      const double g = dpsi(tau);
      if (g == 0.0) break;
      if (g > 0.0)
        hi = tau;
      else
        lo = tau;
      double next = tau - g / d2psi(tau);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - tau) <= 1e-15 * std::max(1.0, tau)) {
        tau = next;
        break;
      }
      tau = next;
    }
    out.tau_star = tau;
    out.delta_statdim = l1_statdim_functional(s, tau);
  }
  return out;
}

double lowrank_delta_star(int r) {
  if (r < 0) throw ParameterError("lowrank_delta_star: r must be >= 0");
  return 3.0 * r;
}

double l1_cone_distance_sq(const std::vector<double> &g, int k) {
  const int n = static_cast<int>(g.size());
  if (k < 0 || k > n) throw ParameterError("l1_cone_distance_sq: k out of range");
  double support_sum = 0.0;
  for (int i = 0; i < k; ++i) support_sum += g[static_cast<std::size_t>(i)];
  std::vector<double> off;
  off.reserve(static_cast<std::size_t>(n - k));
  for (int i = k; i < n; ++i) off.push_back(std::abs(g[static_cast<std::size_t>(i)]));
  std::sort(off.begin(), off.end(), std::greater<>());

  // F'(tau)/2 = (k + j) tau - support_sum - (a_1 + ... + a_j) on the interval
  // where exactly the j largest off-support magnitudes exceed tau.
  double tau = 0.0;
  double prefix = 0.0;
  const int n_off = static_cast<int>(off.size());
  for (int j = 0; j <= n_off; ++j) {
    if (j > 0) prefix += off[static_cast<std::size_t>(j - 1)];
    const double upper = j == 0 ? std::numeric_limits<double>::infinity() : off[static_cast<std::size_t>(j - 1)];
    const double lower = j == n_off ? 0.0 : off[static_cast<std::size_t>(j)];
    if (k + j == 0) continue; // F is flat zero above the largest magnitude
    const double root = (support_sum + prefix) / (k + j);
    if (root >= lower && root <= upper) {
      tau = root;
      break;
    }
    if (j == n_off) tau = 0.0;
  }
  tau = std::max(tau, 0.0);

  double dist = 0.0;
  for (int i = 0; i < k; ++i) {
    const double d = g[static_cast<std::size_t>(i)] - tau;
    dist += d * d;
  }
  for (double a : off) {
    const double d = a - tau;
    if (d > 0.0) dist += d * d;
  }
  return dist;
}

WidthEstimate width_l1_mc(int n, int k, int num_samples, std::uint64_t seed) {
  if (n < 1 || k < 1 || k > n) throw ParameterError("width_l1_mc: need 1 <= k <= n");
  if (num_samples < 2) throw ParameterError("width_l1_mc: need at least two samples");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> g(static_cast<std::size_t>(n));
  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < num_samples; ++s) {
    for (auto &v : g) v = normal(rng);
    const double d = l1_cone_distance_sq(g, k) / n;
    sum += d;
    sum_sq += d * d;
  }
  WidthEstimate est;
  est.samples = num_samples;
  est.mean = sum / num_samples;
  const double var = std::max(0.0, (sum_sq - num_samples * est.mean * est.mean) / (num_samples - 1));
  est.stderr_ = std::sqrt(var / num_samples);
  return est;
}

OrderEstimate sl_order(int k, int r, int n) {
  if (n < 1 || k < 1 || k > n || r < 1 || r > k) throw ParameterError("sl_order: need 1 <= r <= k <= n");
  OrderEstimate est;
  est.measurements = std::min(static_cast<long long>(k) * k, static_cast<long long>(r) * n);
  return est;
}

std::string to_string(TheoryMethod method) {
  switch (method) {
  case TheoryMethod::EqDeltaRoot: return "EqDeltaRoot";
  case TheoryMethod::StatDimL1: return "StatDimL1";
  case TheoryMethod::ThreeR: return "ThreeR";
  case TheoryMethod::WidthMc: return "WidthMc";
  case TheoryMethod::OrderMinK2Rn: return "OrderMinK2Rn";
  }
  return "unknown";
}

TheoryMethod theory_method_from_string(const std::string &name) {
  for (auto m : {TheoryMethod::EqDeltaRoot, TheoryMethod::StatDimL1, TheoryMethod::ThreeR, TheoryMethod::WidthMc,
                 TheoryMethod::OrderMinK2Rn})
    if (to_string(m) == name) return m;
  throw FormatError("unknown theory method: " + name);
}

TheoryCurve l1_curve(const std::vector<double> &s_axis, TheoryMethod method) {
  if (method != TheoryMethod::EqDeltaRoot && method != TheoryMethod::StatDimL1)
    throw ParameterError("l1_curve: method must be EqDeltaRoot or StatDimL1");
  TheoryCurve curve;
  curve.method = method;
  for (double s : s_axis) {
    const auto t = sparse_delta_star(s);
    curve.structure_axis.push_back(s);
    curve.delta_star.push_back(method == TheoryMethod::EqDeltaRoot ? t.x_root : t.delta_statdim);
  }
  return curve;
}

TheoryCurve lowrank_curve(const std::vector<int> &r_axis) {
  TheoryCurve curve;
  curve.method = TheoryMethod::ThreeR;
  for (int r : r_axis) {
    curve.structure_axis.push_back(r);
    curve.delta_star.push_back(lowrank_delta_star(r));
  }
  return curve;
}

std::string theory_csv(const std::vector<TheoryCurve> &curves) {
  std::string out = "structure,delta_star,method\n";
  for (const auto &c : curves)
    for (std::size_t i = 0; i < c.structure_axis.size(); ++i)
      out += fmt_double(c.structure_axis[i]) + "," + fmt_double(c.delta_star[i]) + "," + to_string(c.method) + "\n";
  return out;
}

std::vector<TheoryCurve> parse_theory_csv(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("theory CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "structure,delta_star,method") throw FormatError("theory CSV: unexpected header '" + line + "'");
  std::vector<TheoryCurve> curves;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos) throw FormatError("theory CSV: malformed row '" + line + "'");
    double structure = 0.0, delta = 0.0;
    try {
      std::size_t used = 0;
      structure = std::stod(line.substr(0, c1), &used);
      delta = std::stod(line.substr(c1 + 1, c2 - c1 - 1), &used);
    } catch (const std::exception &) {
      throw FormatError("theory CSV: non-numeric value in '" + line + "'");
    }
    const TheoryMethod method = theory_method_from_string(line.substr(c2 + 1));
    auto it = std::find_if(curves.begin(), curves.end(), [&](const TheoryCurve &c) { return c.method == method; });
    if (it == curves.end()) {
      curves.push_back(TheoryCurve{{}, {}, method});
      it = std::prev(curves.end());
    }
    it->structure_axis.push_back(structure);
    it->delta_star.push_back(delta);
  }
  return curves;
}

} // namespace unirec
