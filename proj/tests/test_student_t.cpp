#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "taylorlaw/student_t.hpp"

using namespace taylorlaw;

TEST(StudentT, FrozenValues) {
  // Two-sided tails from high-precision quadrature of the t density.
  EXPECT_NEAR(t_tail_probability(2.086, 20), 0.049996354457440225, 1e-12);
  EXPECT_NEAR(t_tail_probability(5.0, 20), 6.8730285795421973e-5, 1e-15);
  EXPECT_NEAR(t_tail_probability(0.4, 20), 0.69339657624180467, 1e-12);
  EXPECT_NEAR(t_tail_probability(-6.0, 20), 7.2436999304165708e-6, 1e-15);
  EXPECT_NEAR(t_tail_probability(2.0, 2), 0.18350341907227397, 1e-12);
  EXPECT_NEAR(t_tail_probability(1.5, 5), 0.19390368024247343, 1e-12);
}

TEST(StudentT, CauchyCase) {
  EXPECT_NEAR(t_tail_probability(1.0, 1), 0.5, 1e-14);
  for (double t : {0.3, 2.0, 10.0}) EXPECT_NEAR(t_tail_probability(t, 1), 1.0 - 2.0 * std::atan(t) / M_PI, 1e-13);
}

TEST(StudentT, EdgeCases) {
  EXPECT_EQ(t_tail_probability(0.0, 7), 1.0);
  EXPECT_THROW(t_tail_probability(1.0, 0), DomainError);
  EXPECT_THROW(t_tail_probability(std::nan(""), 3), DomainError);
}

TEST(StudentTProperty, SymmetricMonotoneBounded) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> tdist(0.0, 30.0);
  std::uniform_int_distribution<int> ddist(1, 200);
  for (int trial = 0; trial < 500; ++trial) {
    const double t1 = tdist(rng), t2 = t1 + tdist(rng) / 10.0;
    const int dof = ddist(rng);
    const double p1 = t_tail_probability(t1, dof);
    ASSERT_EQ(p1, t_tail_probability(-t1, dof));
    ASSERT_GE(p1, t_tail_probability(t2, dof));
    ASSERT_GE(p1, 0.0);
    ASSERT_LE(p1, 1.0);
  }
}

TEST(StudentTProperty, MatchesQuadratureOracle) {
  for (int dof : {1, 2, 5, 20, 100})
    for (double t : {0.1, 0.7, 1.3, 2.5})
      EXPECT_NEAR(t_tail_probability(t, dof), taylorlaw::testing::t_tail_by_quadrature(t, dof), 1e-9) << t << " " << dof;
}
