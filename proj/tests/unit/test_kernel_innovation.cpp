#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "locstat/innovation.hpp"
#include "locstat/kernel.hpp"
#include "locstat/numerics.hpp"

using namespace locstat;

TEST(Kernel, EpanechnikovMoments) {
  const Kernel k = Kernel::epanechnikov();
  EXPECT_NEAR(integrate([&](double u) { return k(u); }, -0.5, 0.5).value, 1.0, 1e-12);
  EXPECT_NEAR(integrate([&](double u) { return k(u) * k(u); }, -0.5, 0.5).value, 1.2, 1e-12);
  EXPECT_NEAR(k.integral(), 1.0, 1e-10);
  EXPECT_NEAR(k.l2_squared(), 1.2, 1e-10);
  EXPECT_DOUBLE_EQ(k(0.0), 1.5);
  EXPECT_DOUBLE_EQ(k(0.5), 0.0);
  EXPECT_DOUBLE_EQ(k(0.7), 0.0);
  EXPECT_DOUBLE_EQ(k.sup(), 1.5);
  EXPECT_DOUBLE_EQ(k.lipschitz(), 6.0);
}

TEST(Kernel, TriangularMoments) {
  const Kernel k = Kernel::triangular();
  EXPECT_NEAR(k.integral(), 1.0, 1e-10);
  EXPECT_NEAR(k.l2_squared(), 4.0 / 3.0, 1e-10);
  EXPECT_DOUBLE_EQ(k(0.25), 1.0);
  EXPECT_DOUBLE_EQ(k(-0.6), 0.0);
}

TEST(Kernel, CustomSamplesValidated) {
  // Triangle through (-1/2, 0), (0, 2), (1/2, 0) equals the triangular kernel.
  const Kernel k = Kernel::custom({0.0, 2.0, 0.0});
  EXPECT_NEAR(k(0.1), Kernel::triangular()(0.1), 1e-14);
  EXPECT_NEAR(k.integral(), 1.0, 1e-12);
  EXPECT_THROW(Kernel::custom({0.0, 1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(Kernel::custom({1.0, 1.0, 1.0}), std::invalid_argument);
}

TEST(Kernel, ScaledIntegratesToOne) {
  const Kernel k = Kernel::epanechnikov();
  const double h = 0.1;
  EXPECT_NEAR(integrate([&](double x) { return k.scaled(x, h); }, -h / 2, h / 2).value, 1.0, 1e-12);
}

TEST(Innovation, NormalMoments) {
  const Innovation e = Innovation::normal(2.0);
  EXPECT_DOUBLE_EQ(e.variance(), 4.0);
  EXPECT_NEAR(e.lq_norm(2.0), 2.0, 1e-12);
  EXPECT_NEAR(e.lq_norm(1.0), 2.0 * std::sqrt(2.0 / std::numbers::pi), 1e-12);
  EXPECT_NEAR(e.cdf(0.0), 0.5, 1e-15);
  EXPECT_NEAR(e.quantile(e.cdf(1.3)), 1.3, 1e-12);
  EXPECT_NEAR(e.pdf_sup(), 1.0 / (2.0 * std::sqrt(2.0 * std::numbers::pi)), 1e-12);
}

TEST(Innovation, StudentAndUniform) {
  const Innovation t = Innovation::student_t(5.0);
  EXPECT_NEAR(t.variance(), 5.0 / 3.0, 1e-12);
  EXPECT_TRUE(std::isinf(t.lq_norm(6.0)));
  EXPECT_NEAR(t.lq_norm(2.0), std::sqrt(5.0 / 3.0), 1e-8);
  const Innovation u = Innovation::uniform();
  EXPECT_NEAR(u.variance(), 1.0, 1e-12);
  EXPECT_NEAR(u.lq_norm(4.0), std::pow(9.0 / 5.0, 0.25), 1e-10);
  EXPECT_FALSE(u.smooth_density());
  EXPECT_THROW(Innovation::student_t(2.0), std::invalid_argument);
}

TEST(Innovation, SampleMomentsMatchLaw) {
  for (const Innovation& e : {Innovation::normal(), Innovation::student_t(6.0), Innovation::uniform()}) {
    CounterRng rng(5, 1);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = e.sample(rng);
      s += x;
      s2 += x * x;
    }
    const double sd = std::sqrt(e.variance());
    EXPECT_NEAR(s / n, 0.0, 5.0 * sd / std::sqrt(n)) << e.name();
    EXPECT_NEAR(s2 / n / e.variance(), 1.0, 0.03) << e.name();
  }
}
