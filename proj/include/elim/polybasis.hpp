#pragma once

// Orthonormal shifted Legendre polynomials on [0,1] and Gauss-Legendre rules.
//
// P_j(x) = sqrt(2j+1) L_j(2x-1), so that int_0^1 P_i P_j = delta_ij and
// P_j(1) > 0. All evaluation goes through the three-term recurrence of the
// orthonormal family.

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace elim {

/// Off-diagonal coefficient of the integration matrix: (2 sqrt(4i^2-1))^-1.
[[nodiscard]] inline double xi(int i) {
  const double di = static_cast<double>(i);
  return 1.0 / (2.0 * std::sqrt(4.0 * di * di - 1.0));
}

/// Values P_0(x),...,P_n(x).
[[nodiscard]] inline std::vector<double> legendre_values(int n, double x) {
  std::vector<double> p(static_cast<std::size_t>(n) + 1);
  const double t = 2.0 * x - 1.0;
  p[0] = 1.0;
  if (n == 0) return p;
  p[1] = std::numbers::sqrt3 * t;
  // t P_j = a_{j+1} P_{j+1} + a_j P_{j-1}, a_j = j / sqrt(4j^2 - 1) = 2 j xi_j
  for (int j = 1; j < n; ++j) {
    const double a_j = 2.0 * j * xi(j);
    const double a_next = 2.0 * (j + 1) * xi(j + 1);
    p[j + 1] = (t * p[j] - a_j * p[j - 1]) / a_next;
  }
  return p;
}

[[nodiscard]] inline double legendre_eval(int j, double x) {
  if (j < 0) throw std::invalid_argument("legendre_eval: negative degree");
  return legendre_values(j, x).back();
}

/// int_0^c P_j(x) dx = xi_{j+1} P_{j+1}(c) - xi_j P_{j-1}(c)   (j >= 1)
///                   = c                                      (j == 0)
[[nodiscard]] inline double legendre_integral(int j, double c) {
  if (j < 0) throw std::invalid_argument("legendre_integral: negative degree");
  if (j == 0) return c;
  const auto p = legendre_values(j + 1, c);
  return xi(j + 1) * p[j + 1] - xi(j) * p[j - 1];
}

/// Integrals int_0^c P_j for j = 0..n-1 from a single recurrence pass.
[[nodiscard]] inline std::vector<double> legendre_integrals(int n, double c) {
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 0) return out;
  const auto p = legendre_values(n, c);
  out[0] = c;
  for (int j = 1; j < n; ++j) out[j] = xi(j + 1) * p[j + 1] - xi(j) * p[j - 1];
  return out;
}

struct QuadratureRule {
  int n = 0;
  std::vector<double> nodes;    // strictly increasing in (0,1)
  std::vector<double> weights;  // positive, sum to 1
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Standard Legendre L_n(t) and L_n'(t) on [-1,1].
inline void standard_legendre(int n, double t, double& value, double& derivative) {
  double prev = 1.0;
  double cur = t;
  if (n == 0) {
    value = 1.0;
    derivative = 0.0;
    return;
  }
  for (int j = 1; j < n; ++j) {
    const double next = ((2.0 * j + 1.0) * t * cur - j * prev) / (j + 1.0);
    prev = cur;
    cur = next;
  }
  value = cur;
  derivative = n * (t * cur - prev) / (t * t - 1.0);
}

inline QuadratureRule compute_gauss_rule(int n) {
  constexpr double kTol = 1e-15;
  constexpr int kMaxIter = 100;

  QuadratureRule rule;
  rule.n = n;
  rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
  rule.weights.assign(static_cast<std::size_t>(n), 0.0);

  // Roots on [-1,1] in decreasing order; only the upper half is computed, the
  // rest is mirrored so the rule is exactly symmetric.
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double value = 0.0;
    double derivative = 0.0;
    bool converged = false;
    for (int it = 0; it < kMaxIter; ++it) {
      standard_legendre(n, t, value, derivative);
      const double dt = value / derivative;
      t -= dt;
      if (std::abs(dt) <= kTol) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw QuadratureError("gauss_rule: Newton iteration did not converge for n=" +
                            std::to_string(n));
    }
    if (n % 2 == 1 && i == half - 1) t = 0.0;
    standard_legendre(n, t, value, derivative);
    const double w = 1.0 / ((1.0 - t * t) * derivative * derivative);  // 2/(..)/2

    const auto hi = static_cast<std::size_t>(n - 1 - i);
    const auto lo = static_cast<std::size_t>(i);
    rule.nodes[hi] = 0.5 * (1.0 + t);
    rule.nodes[lo] = 1.0 - rule.nodes[hi];
    rule.weights[hi] = w;
    rule.weights[lo] = w;
  }
  return rule;
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [0,1]. Rules are built once per point count
/// and shared; the returned reference stays valid for the program lifetime.
[[nodiscard]] inline const QuadratureRule& gauss_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_rule: point count must be positive");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const QuadratureRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, std::make_unique<const QuadratureRule>(detail::compute_gauss_rule(n)))
             .first;
  }
  return *it->second;
}

}  // namespace elim
