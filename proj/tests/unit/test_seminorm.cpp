#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "locstat/rng.hpp"
#include "locstat/seminorm.hpp"

using namespace locstat;

namespace {

RecursiveModel ar1(double a) {
  RecursiveModel m;
  m.a = Polynomial::constant(a);
  return m;
}

FunctionClass global(Base b) { return {std::move(b), Factor::global()}; }

// f2n + Σ_{k=1}^{K} min{f2n, D Δ(k)} plus the midpoint-integral remainder for polynomial decay.
double v_direct(double f2n, double d_n, const DecayProfile& p, std::uint64_t K = 1'000'000) {
  double s = 0.0;
  for (std::uint64_t k = K; k >= 1; --k) s += std::min(f2n, d_n * p(double(k)));
  if (p.kind == DecayKind::polynomial) s += d_n * p.c * std::pow(double(K) + 0.5, 1.0 - p.alpha) / (p.alpha - 1.0);
  return f2n + s;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> g;
  for (int i = 0; i < points; ++i) g.push_back(lo * std::pow(hi / lo, i / double(points - 1)));
  return g;
}

}  // namespace

TEST(NormNuN, ConstantFunction) {
  const auto est = norm_nu_n(global(Base::constant(-2.5)), ar1(0.5), 2.0, 50, 100, 1);
  EXPECT_NEAR(est.value, 2.5, 1e-12);
}

TEST(NormNuN, Ar1SecondMoment) {
  const auto est = norm_nu_n(global(Base::identity()), ar1(0.5), 2.0, 2000, 400, 2);
  EXPECT_NEAR(est.value, std::sqrt(4.0 / 3.0), 4.0 * est.se + 1e-3);
  EXPECT_NEAR(1.1547, std::sqrt(4.0 / 3.0), 1e-4);
}

TEST(NormNuN, IndicatorOfWholeLine) {
  const auto est = norm_nu_n(global(Base::indicator(1e300)), ar1(0.5), 2.0, 100, 100, 3);
  EXPECT_DOUBLE_EQ(est.value, 1.0);
}

TEST(VNorm, IndependentAndZero) {
  EXPECT_DOUBLE_EQ(v_norm(0.37, 2.0, DecayProfile::independent()), 0.37);
  EXPECT_DOUBLE_EQ(v_norm(0.0, 1.0, DecayProfile::polynomial(1.0, 2.0)), 0.0);
}

TEST(VNorm, MatchesDirectSummation) {
  for (const auto& p : {DecayProfile::polynomial(1.0, 2.0), DecayProfile::geometric(1.0, 0.5),
                        DecayProfile::polynomial(2.0, 3.0)}) {
    for (double f2n : {1e-3, 0.01, 0.2, 1.0, 3.0}) {
      const double v = v_norm(f2n, 1.0, p);
      EXPECT_NEAR(v / v_direct(f2n, 1.0, p), 1.0, 1e-7) << p.name() << " f2n=" << f2n;
    }
  }
}

TEST(VNorm, SandwichOverFourDecades) {
  for (const auto& p : {DecayProfile::polynomial(1.0, 2.0), DecayProfile::polynomial(0.5, 3.0),
                        DecayProfile::geometric(1.0, 0.5), DecayProfile::geometric(4.0, 0.8)}) {
    for (double d_n : {1.0, 2.0}) {
      for (double f2n : log_grid(1e-4, 1.0, 40)) {
        const double v = v_norm(f2n, d_n, p);
        const auto cf = v_closed_form(f2n, d_n, p);
        EXPECT_LE(cf.lower, v * (1 + 1e-12)) << p.name() << " f2n=" << f2n;
        EXPECT_GE(cf.upper, v * (1 - 1e-12)) << p.name() << " f2n=" << f2n;
      }
    }
  }
}

TEST(VNorm, GeometricUpperFormAtExpMinusThree) {
  const auto p = DecayProfile::geometric(1.0, 0.5);
  const double s = std::exp(-3.0);
  const auto cf = v_closed_form(s, 1.0, p);
  const double L = std::log(2.0);
  const double b = 2.0 / L * (1.0 + 2.0 * L / 0.5);
  EXPECT_NEAR(cf.shape, 3.0 * s, 1e-15);
  EXPECT_NEAR(cf.upper, s + b * 3.0 * s, 1e-14);
  EXPECT_GE(cf.upper, v_direct(s, 1.0, p, 2000));
}

TEST(VNorm, LargeF2nUsesUnitBranch) {
  const auto cf = v_closed_form(2.0, 1.0, DecayProfile::polynomial(1.0, 2.0));
  EXPECT_DOUBLE_EQ(cf.shape, 2.0);
}

TEST(VNorm, SemiNormLaws) {
  CounterRng rng(21, 0);
  for (const auto& p : {DecayProfile::polynomial(1.0, 2.0), DecayProfile::geometric(1.0, 0.6)}) {
    for (int t = 0; t < 200; ++t) {
      const double s1 = std::exp(-8.0 * rng.uniform01()), s2 = std::exp(-8.0 * rng.uniform01());
      const double a = 0.1 + 5.0 * rng.uniform01();
      const double d = 0.5 + rng.uniform01();
      EXPECT_LE(v_norm(s1 + s2, d, p), (v_norm(s1, d, p) + v_norm(s2, d, p)) * (1 + 1e-12));
      EXPECT_NEAR(v_norm(a * s1, a * d, p), a * v_norm(s1, d, p), 1e-12 * a * v_norm(s1, d, p));
      EXPECT_GE(v_norm(s1, d, p), s1);
      EXPECT_NEAR(v_norm_inverse(v_norm(s1, d, p), d, p), s1, 1e-12 * s1);
    }
  }
}

TEST(VTilde, DominatesVAndMatchesBruteForce) {
  const auto p = DecayProfile::geometric(1.0, 0.5);
  const BernsteinWeights w{2.0};
  EXPECT_DOUBLE_EQ(v_tilde(0.0, 1.0, p, 2.0), 0.0);
  for (double f2n : {1e-4, 1e-2, 0.3, 2.0}) {
    double s = 0.0;
    for (std::uint64_t j = 1000000; j >= 1; --j) {
      const double jd = double(j);
      s += std::min(f2n, p(jd) * w.omega(jd)) * w.ell(jd);
    }
    const double vt = v_tilde(f2n, 1.0, p, 2.0);
    EXPECT_NEAR(vt / (f2n + s), 1.0, 1e-6) << f2n;
    EXPECT_GE(vt, v_norm(f2n, 1.0, p));
  }
  EXPECT_THROW((void)v_tilde(0.1, 1.0, DecayProfile::polynomial(1.0, 1.4), 2.0), ModelError);
}

TEST(MThreshold, Identities) {
  const auto p = DecayProfile::polynomial(1.0, 2.0);
  EXPECT_DOUBLE_EQ(h_of_k(1.0), 1.0);
  EXPECT_NEAR(m_threshold(400, 0.05, 1.0, 2.0, 3.0, p), r_of_delta(p, 0.025) * 3.0 * 20.0, 1e-14);
  const double m1 = m_threshold(1000, 0.02, 50.0, 1.0, 1.0, p);
  EXPECT_NEAR(m_threshold(2000, 0.02, 50.0, 1.0, 1.0, p) / m1, std::sqrt(2.0), 1e-14);
  const double delta = 2.0 * beta(p, 1);
  EXPECT_NEAR(m_threshold(100, delta, 20.0, 2.0, 1.5, p), delta / 2.0 * 1.5 * 10.0 / std::sqrt(std::log(20.0)),
              1e-12);
}

TEST(EntropyIntegral, ConstantIntegrand) {
  EXPECT_NEAR(entropy_integral([](double) { return 0.0; }, 0.7), 0.7, 1e-12);
}

TEST(EntropyIntegral, LogEntropyAgainstRiemannSum) {
  const auto H = [](double e) { return std::log(1.0 / e); };
  const int panels = 1000000;
  double riemann = 0.0;
  for (int j = 0; j < panels; ++j) riemann += std::sqrt(std::max(1.0, H((j + 0.5) / panels)));
  riemann /= panels;
  EXPECT_NEAR(entropy_integral(H, 1.0), riemann, 1e-5);
}

TEST(EntropyIntegral, IncreasingInDimension) {
  double prev = 0.0;
  for (double d : {1.0, 2.0, 5.0, 20.0}) {
    const double v = entropy_integral([d](double e) { return d * std::log(1.0 / e); }, 0.5);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_TRUE(std::isfinite(entropy_integral([](double e) { return std::log(1.0 / e); }, 0.5, EntropyWeight::psi)));
}

TEST(EntropyIntegral, DivergenceNamesExponent) {
  try {
    (void)entropy_integral([](double e) { return 1.0 / (e * e); }, 1.0);
    FAIL() << "expected divergence";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("p = 1"), std::string::npos) << e.what();
  }
}

TEST(Truncate, Examples) {
  EXPECT_EQ(truncate(3.0, 2.0), std::make_pair(2.0, 1.0));
  EXPECT_EQ(truncate(-5.0, 2.0), std::make_pair(-2.0, -3.0));
  EXPECT_EQ(truncate(0.5, 2.0), std::make_pair(0.5, 0.0));
  EXPECT_THROW((void)truncate(1.0, 0.0), std::invalid_argument);
}

// Dyadic inputs keep every sum below exact in double precision, so the pointwise
// inequalities can be checked with no tolerance.
TEST(Truncate, LemmaPropertiesOnRandomDyadics) {
  CounterRng rng(8, 8);
  const auto dyadic = [&](double scale) {
    return std::ldexp(std::floor(rng.uniform01() * 0x1p20) - 0x1p19, -19) * scale;
  };
  for (int t = 0; t < 100000; ++t) {
    const double m = std::ldexp(std::floor(rng.uniform01() * 0x1p10) + 1.0, -8);
    const double x1 = dyadic(m), x2 = dyadic(m), x3 = dyadic(4.0 * m);
    if (std::abs(x1) + std::abs(x2) <= m) {
      const double lhs = std::abs(truncate(x1 + x2 + x3, m).first - truncate(x1, m).first - truncate(x2, m).first);
      ASSERT_LE(lhs, std::min(std::abs(x3), 2.0 * m));
    }
    const double x = dyadic(4.0 * m), y = std::abs(dyadic(4.0 * m));
    const auto [hat, vee] = truncate(x, m);
    ASSERT_LE(std::abs(hat), std::min(std::abs(x), m));
    ASSERT_EQ(hat + vee, x);
    if (std::abs(x) < y) {
      ASSERT_LE(std::abs(vee), truncate(y, m).second);
      ASSERT_LE(truncate(y, m).second, y > m ? y : 0.0);
    }
    const double z = dyadic(4.0 * m);
    ASSERT_LE(std::abs(truncate(x, m).first - truncate(z, m).first), std::abs(x - z));
  }
}

TEST(FunctionClass, NormalizersOfLocalFactor) {
  const FunctionClass f{Base::identity(), Factor::local(Kernel::epanechnikov(), 0.2, 0.5)};
  const auto nz = class_normalizers(std::span(&f, 1), 10000);
  EXPECT_NEAR(nz.d_n * nz.d_n, 1.2, 1e-3);
  EXPECT_NEAR(nz.d_n_inf, nz.d_n, 1e-12);
  const FunctionClass g{Base::identity(), Factor::global()};
  EXPECT_DOUBLE_EQ(class_normalizers(std::span(&g, 1), 100).d_n, 1.0);
}
