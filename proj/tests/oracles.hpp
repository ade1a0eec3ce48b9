#pragma once

// Reference implementations used only by the tests. They deliberately avoid
// the library's recurrences so agreement means something.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

using Poly = std::vector<long double>;  // monomial coefficients, lowest first

inline long double poly_eval(const Poly& p, long double x) {
  long double v = 0.0L;
  for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * x + *it;
  return v;
}

// <x^i, x^j> on [0,1] is 1/(i+j+1), so inner products of monomial expansions
// are exact sums.
inline long double inner(const Poly& a, const Poly& b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) s += a[i] * b[j] / static_cast<long double>(i + j + 1);
  }
  return s;
}

/// Orthonormal polynomials on [0,1] by modified Gram-Schmidt on 1, x, x^2, ...
/// with the sign fixed so P_j(1) > 0.
inline std::vector<Poly> gram_schmidt_legendre(int n) {
  std::vector<Poly> basis;
  for (int d = 0; d <= n; ++d) {
    Poly v(static_cast<std::size_t>(d + 1), 0.0L);
    v[static_cast<std::size_t>(d)] = 1.0L;
    for (const Poly& q : basis) {
      const long double proj = inner(v, q);
      for (std::size_t i = 0; i < q.size(); ++i) v[i] -= proj * q[i];
    }
    const long double norm = std::sqrt(inner(v, v));
    for (auto& c : v) c /= norm;
    if (poly_eval(v, 1.0L) < 0) {
      for (auto& c : v) c = -c;
    }
    basis.push_back(v);
  }
  return basis;
}

/// Adaptive Simpson quadrature.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                               int depth = 40) {
  const std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int d) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid);
        const double rm = 0.5 * (mid + hi);
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15.0 * eps) {
          return left + right + (left + right - whole) / 15.0;
        }
        return rec(lo, mid, flo, flm, fmid, left, eps / 2.0, d - 1) +
               rec(mid, hi, fmid, frm, fhi, right, eps / 2.0, d - 1);
      };
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth);
}

/// Standard Legendre L_n on [-1,1] from the explicit sum
/// L_n(x) = 2^-n sum_k C(n,k)^2 (x-1)^(n-k) (x+1)^k.
inline long double legendre_explicit(int n, long double x) {
  long double sum = 0.0L;
  long double binom = 1.0L;
  for (int k = 0; k <= n; ++k) {
    sum += binom * binom * std::pow(x - 1.0L, n - k) * std::pow(x + 1.0L, k);
    binom = binom * (n - k) / (k + 1);
  }
  return sum / std::pow(2.0L, n);
}

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss rule on [0,1]: roots bracketed on a fine grid, refined by bisection,
/// weights from 2(1-x^2) / (n L_{n-1}(x))^2 mapped to [0,1].
inline Rule gauss_by_bisection(int n) {
  Rule rule;
  const int grid = 2000 * n + 1;  // odd, so x = 0 is never a grid point
  long double prev_x = -1.0L;
  long double prev_v = legendre_explicit(n, prev_x);
  for (int i = 1; i <= grid; ++i) {
    const long double x = -1.0L + 2.0L * i / grid;
    const long double v = legendre_explicit(n, x);
    if ((prev_v < 0) != (v < 0)) {
      long double lo = prev_x;
      long double hi = x;
      long double flo = prev_v;
      for (int it = 0; it < 200; ++it) {
        const long double mid = 0.5L * (lo + hi);
        const long double fm = legendre_explicit(n, mid);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      const long double root = 0.5L * (lo + hi);
      const long double lp = legendre_explicit(n - 1, root);
      const long double w = 2.0L * (1.0L - root * root) / (n * n * lp * lp);
      rule.nodes.push_back(static_cast<double>(0.5L * (1.0L + root)));
      rule.weights.push_back(static_cast<double>(0.5L * w));
    }
    prev_x = x;
    prev_v = v;
  }
  if (static_cast<int>(rule.nodes.size()) != n) throw std::runtime_error("gauss_by_bisection: root count");
  return rule;
}

/// Published Gauss-Legendre Butcher tableaux (Hairer, Norsett, Wanner).
struct Butcher {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

inline Butcher gauss_tableau(int s) {
  Butcher t;
  if (s == 1) {
    t.A = Eigen::MatrixXd::Constant(1, 1, 0.5);
    t.b = Eigen::VectorXd::Constant(1, 1.0);
    t.c = Eigen::VectorXd::Constant(1, 0.5);
    return t;
  }
  if (s == 2) {
    const double r = std::sqrt(3.0) / 6.0;
    t.A.resize(2, 2);
    t.A << 0.25, 0.25 - r, 0.25 + r, 0.25;
    t.b.resize(2);
    t.b << 0.5, 0.5;
    t.c.resize(2);
    t.c << 0.5 - r, 0.5 + r;
    return t;
  }
  if (s == 3) {
    const double r = std::sqrt(15.0);
    t.A.resize(3, 3);
    t.A << 5.0 / 36.0, 2.0 / 9.0 - r / 15.0, 5.0 / 36.0 - r / 30.0,  //
        5.0 / 36.0 + r / 24.0, 2.0 / 9.0, 5.0 / 36.0 - r / 24.0,      //
        5.0 / 36.0 + r / 30.0, 2.0 / 9.0 + r / 15.0, 5.0 / 36.0;
    t.b.resize(3);
    t.b << 5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0;
    t.c.resize(3);
    t.c << 0.5 - r / 10.0, 0.5, 0.5 + r / 10.0;
    return t;
  }
  throw std::invalid_argument("gauss_tableau: s must be 1, 2 or 3");
}

/// One implicit RK step in stage-derivative form, solved by fixed point.
inline Eigen::VectorXd rk_step(const Butcher& t, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                               const Eigen::VectorXd& y0, double h) {
  const Eigen::Index s = t.b.size();
  std::vector<Eigen::VectorXd> k(static_cast<std::size_t>(s), f(y0));
  for (int it = 0; it < 500; ++it) {
    double change = 0.0;
    std::vector<Eigen::VectorXd> next(static_cast<std::size_t>(s));
    for (Eigen::Index i = 0; i < s; ++i) {
      Eigen::VectorXd y = y0;
      for (Eigen::Index j = 0; j < s; ++j) y += h * t.A(i, j) * k[static_cast<std::size_t>(j)];
      next[static_cast<std::size_t>(i)] = f(y);
      change = std::max(change, (next[static_cast<std::size_t>(i)] - k[static_cast<std::size_t>(i)]).cwiseAbs().maxCoeff());
    }
    k.swap(next);
    if (change <= 1e-15) break;
  }
  Eigen::VectorXd y1 = y0;
  for (Eigen::Index i = 0; i < s; ++i) y1 += h * t.b[i] * k[static_cast<std::size_t>(i)];
  return y1;
}

/// Fourth-order central difference gradient.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                   double step = 1e-3) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    auto at = [&](double d) {
      Eigen::VectorXd y = x;
      y[i] += d;
      return f(y);
    };
    g[i] = (-at(2 * step) + 8 * at(step) - 8 * at(-step) + at(-2 * step)) / (12 * step);
  }
  return g;
}

}  // namespace oracle
