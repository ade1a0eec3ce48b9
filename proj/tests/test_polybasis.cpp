#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <thread>
#include <vector>

#include "elim/polybasis.hpp"
#include "oracles.hpp"

namespace {

const double kPoints[] = {0.0, 0.1, 0.25, 0.5, 0.7321, 0.9, 1.0};

// Gram-Schmidt on monomials loses digits quickly (Hilbert-matrix conditioning),
// so it is only trusted up to degree 6; the explicit-sum form covers the rest.
TEST(Legendre, MatchesGramSchmidt) {
  const auto basis = oracle::gram_schmidt_legendre(6);
  for (double x : kPoints) {
    const auto values = elim::legendre_values(6, x);
    ASSERT_EQ(values.size(), 7u);
    for (int j = 0; j <= 6; ++j) {
      EXPECT_NEAR(values[j], static_cast<double>(oracle::poly_eval(basis[j], x)), 1e-11) << "j=" << j << " x=" << x;
    }
  }
}

TEST(Legendre, MatchesExplicitSum) {
  for (double x : kPoints) {
    const auto values = elim::legendre_values(14, x);
    for (int j = 0; j <= 14; ++j) {
      const double ref = std::sqrt(2.0 * j + 1.0) * static_cast<double>(oracle::legendre_explicit(j, 2.0L * x - 1.0L));
      EXPECT_NEAR(values[j], ref, 1e-12 * std::sqrt(2.0 * j + 1.0)) << "j=" << j << " x=" << x;
    }
  }
}

TEST(Legendre, EvalAgreesWithValues) {
  for (double x : kPoints) {
    const auto values = elim::legendre_values(6, x);
    for (int j = 0; j <= 6; ++j) EXPECT_DOUBLE_EQ(elim::legendre_eval(j, x), values[j]);
  }
}

TEST(Legendre, KnownValues) {
  EXPECT_DOUBLE_EQ(elim::legendre_eval(0, 0.3), 1.0);
  EXPECT_NEAR(elim::legendre_eval(1, 1.0), std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(elim::legendre_eval(2, 0.0), std::sqrt(5.0), 1e-14);
  EXPECT_NEAR(elim::legendre_eval(1, 0.5), 0.0, 1e-16);
}

TEST(Legendre, OrthonormalUnderGaussRule) {
  const auto& rule = elim::gauss_rule(10);
  for (int i = 0; i <= 8; ++i) {
    for (int j = 0; j <= 8; ++j) {
      double s = 0.0;
      for (int l = 0; l < rule.n; ++l) {
        s += rule.weights[l] * elim::legendre_eval(i, rule.nodes[l]) * elim::legendre_eval(j, rule.nodes[l]);
      }
      EXPECT_NEAR(s, i == j ? 1.0 : 0.0, 1e-13) << i << "," << j;
    }
  }
}

TEST(Legendre, NegativeDegreeThrows) {
  EXPECT_THROW((void)elim::legendre_eval(-1, 0.5), std::invalid_argument);
  EXPECT_THROW((void)elim::legendre_integral(-2, 0.5), std::invalid_argument);
}

TEST(Legendre, IntegralsMatchAdaptiveQuadrature) {
  for (int j = 0; j <= 7; ++j) {
    for (double c : {0.0, 0.2, 0.5, 0.81, 1.0}) {
      const double ref =
          c == 0.0 ? 0.0 : oracle::adaptive_simpson([j](double x) { return elim::legendre_eval(j, x); }, 0.0, c, 1e-15);
      EXPECT_NEAR(elim::legendre_integral(j, c), ref, 1e-13) << "j=" << j << " c=" << c;
    }
  }
}

TEST(Legendre, IntegralAtOneVanishesForPositiveDegree) {
  EXPECT_DOUBLE_EQ(elim::legendre_integral(0, 1.0), 1.0);
  for (int j = 1; j <= 10; ++j) EXPECT_NEAR(elim::legendre_integral(j, 1.0), 0.0, 1e-14) << j;
}

TEST(Legendre, IntegralsVectorIsConsistent) {
  const auto v = elim::legendre_integrals(5, 0.37);
  ASSERT_EQ(v.size(), 5u);
  for (int j = 0; j < 5; ++j) EXPECT_DOUBLE_EQ(v[j], elim::legendre_integral(j, 0.37));
  EXPECT_NEAR(elim::legendre_integrals(2, 0.5)[1], -std::sqrt(3.0) / 4.0, 1e-15);
}

TEST(GaussRule, FivePointMatchesBisectionOracle) {
  const auto ref = oracle::gauss_by_bisection(5);
  const auto& rule = elim::gauss_rule(5);
  ASSERT_EQ(rule.n, 5);
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(rule.nodes[i], ref.nodes[i], 1e-14);
    EXPECT_NEAR(rule.weights[i], ref.weights[i], 1e-14);
  }
}

TEST(GaussRule, OtherSizesMatchBisectionOracle) {
  for (int n : {1, 2, 3, 4, 7, 12}) {
    const auto ref = oracle::gauss_by_bisection(n);
    const auto& rule = elim::gauss_rule(n);
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(rule.nodes[i], ref.nodes[i], 1e-13) << n;
      EXPECT_NEAR(rule.weights[i], ref.weights[i], 1e-13) << n;
    }
  }
}

TEST(GaussRule, ExactUpToDegree2nMinus1) {
  for (int n = 1; n <= 15; ++n) {
    const auto& rule = elim::gauss_rule(n);
    for (int d = 0; d <= 2 * n - 1; ++d) {
      double s = 0.0;
      for (int l = 0; l < n; ++l) s += rule.weights[l] * std::pow(rule.nodes[l], d);
      EXPECT_NEAR(s, 1.0 / (d + 1), 1e-14) << "n=" << n << " degree=" << d;
    }
  }
}

// For x^{2n} the error is exactly (n!)^4 / ((2n+1) ((2n)!)^2).
TEST(GaussRule, DegreeTwoNErrorConstant) {
  for (int n = 1; n <= 7; ++n) {
    const auto& rule = elim::gauss_rule(n);
    double s = 0.0;
    for (int l = 0; l < n; ++l) s += rule.weights[l] * std::pow(rule.nodes[l], 2 * n);
    const double expected = std::pow(std::tgamma(n + 1.0), 4) / ((2 * n + 1) * std::pow(std::tgamma(2 * n + 1.0), 2));
    EXPECT_NEAR((1.0 / (2 * n + 1) - s) / expected, 1.0, 1e-4) << "n=" << n;
  }
}

TEST(GaussRule, SortedSymmetricPositive) {
  for (int n = 1; n <= 20; ++n) {
    const auto& rule = elim::gauss_rule(n);
    ASSERT_EQ(rule.nodes.size(), static_cast<std::size_t>(n));
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      EXPECT_GT(rule.nodes[i], 0.0);
      EXPECT_LT(rule.nodes[i], 1.0);
      EXPECT_GT(rule.weights[i], 0.0);
      if (i > 0) EXPECT_LT(rule.nodes[i - 1], rule.nodes[i]);
      EXPECT_DOUBLE_EQ(rule.nodes[i], 1.0 - rule.nodes[n - 1 - i]);
      EXPECT_DOUBLE_EQ(rule.weights[i], rule.weights[n - 1 - i]);
      total += rule.weights[i];
    }
    EXPECT_NEAR(total, 1.0, 1e-14);
  }
  EXPECT_DOUBLE_EQ(elim::gauss_rule(1).nodes[0], 0.5);
  EXPECT_DOUBLE_EQ(elim::gauss_rule(1).weights[0], 1.0);
}

TEST(GaussRule, InvalidCountThrows) {
  EXPECT_THROW((void)elim::gauss_rule(0), std::invalid_argument);
  EXPECT_THROW((void)elim::gauss_rule(-3), std::invalid_argument);
}

TEST(GaussRule, CachedAndThreadSafe) {
  std::vector<const elim::QuadratureRule*> seen(8, nullptr);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&seen, t] { seen[t] = &elim::gauss_rule(23); });
  }
  for (auto& th : threads) th.join();
  std::set<const elim::QuadratureRule*> unique(seen.begin(), seen.end());
  EXPECT_EQ(unique.size(), 1u);
  EXPECT_EQ(&elim::gauss_rule(23), seen[0]);
}

TEST(Xi, Definition) {
  for (int i = 1; i <= 6; ++i) EXPECT_DOUBLE_EQ(elim::xi(i), 1.0 / (2.0 * std::sqrt(4.0 * i * i - 1.0)));
}

}  // namespace
