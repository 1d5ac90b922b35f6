#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "locstat/estimators.hpp"
#include "locstat/numerics.hpp"
#include "locstat/rng.hpp"

using namespace locstat;

namespace {

RecursiveModel ar1(double a) {
  RecursiveModel m;
  m.a = Polynomial::constant(a);
  return m;
}

RecursiveModel tvar() {
  RecursiveModel m;
  m.a = Polynomial({0.2, 0.5});
  return m;
}

const Kernel kEpa = Kernel::epanechnikov();

}  // namespace

TEST(KernelRegression, ConstantSignal) {
  const std::size_t n = 1000;
  const std::vector<double> y(n, 2.5);
  const double h = 0.1;
  const auto r = kernel_regression(y, kEpa, h, interior_grid(h, 11));
  ASSERT_EQ(r.values.size(), 11u);
  for (std::size_t j = 0; j < r.v.size(); ++j) {
    EXPECT_NEAR(r.values[j], 2.5 * kernel_weight_sum(n, kEpa, h, r.v[j]), 1e-12);
    EXPECT_NEAR(r.values[j], 2.5, 2.5 * 3.0 / (n * h));
  }
}

TEST(KernelRegression, LinearTrendRiemannError) {
  for (std::size_t n : {500u, 4000u}) {
    const double h = 0.05;
    std::vector<double> y(n);
    for (std::size_t i = 1; i <= n; ++i) y[i - 1] = double(i) / double(n);
    const auto r = kernel_regression(y, kEpa, h, interior_grid(h, 21), [](double u) { return u; });
    for (std::size_t j = 0; j < r.v.size(); ++j) {
      // ∫ K_h(u - v) u du = v for a symmetric kernel; the Riemann sum is off by O(1/(nh)).
      EXPECT_NEAR(r.values[j], r.v[j], 3.0 * kEpa.sup() / (double(n) * h)) << n;
      EXPECT_DOUBLE_EQ(r.values[j], r.reference[j]);
    }
  }
}

TEST(KernelRegression, BoundaryPointsExcluded) {
  const std::vector<double> y(200, 1.0);
  const auto r = kernel_regression(y, kEpa, 0.2, {0.05, 0.1, 0.5, 0.95});
  EXPECT_EQ(r.excluded, 2u);
  EXPECT_EQ(r.v, (std::vector<double>{0.1, 0.5}));
}

TEST(KernelRegression, EmptyWindowIsAnError) {
  const std::vector<double> y(3, 1.0);
  EXPECT_THROW(kernel_regression(y, kEpa, 0.01, {0.5}), ModelError);
}

TEST(KernelWeights, NormalizationForInteriorPoints) {
  for (std::size_t n : {200u, 2000u, 20000u}) {
    const double h = 0.1;
    for (double v : interior_grid(h, 9)) {
      EXPECT_NEAR(kernel_weight_sum(n, kEpa, h, v), 1.0, 2.0 * kEpa.sup() / (double(n) * h));
    }
  }
}

TEST(KernelDensity, IntegratesToWeightSum) {
  const Path p = simulate_path(ar1(0.5), 2000, 3);
  const double h1 = 0.2, h2 = 0.3, v = 0.5;
  std::vector<double> xg;
  for (int j = 0; j <= 2000; ++j) xg.push_back(-10.0 + 0.01 * j);
  const auto r = kernel_density(p.values, kEpa, kEpa, h1, h2, xg, {v});
  double integral = 0.0;
  for (std::size_t j = 0; j + 1 < r.values.size(); ++j) integral += 0.005 * (r.values[j] + r.values[j + 1]);
  EXPECT_NEAR(integral, kernel_weight_sum(2000, kEpa, h1, v), 1e-4);
  EXPECT_TRUE(std::all_of(r.values.begin(), r.values.end(), [](double g) { return g >= 0.0; }));
}

TEST(KernelDensity, IidNormalAtZero) {
  const double phi0 = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  const Path p = simulate_path(ar1(0.0), 200000, 8);
  const auto r = kernel_density(p.values, kEpa, kEpa, 0.4, 0.2, {0.0}, {0.5});
  // Smoothing bias ≈ h2²/2 ∫u²K φ''(0) with ∫u²K = 1/20 on [-1/2, 1/2].
  EXPECT_NEAR(r.values[0], phi0, 0.01);
}

TEST(LocalEdf, FullMassAndMonotone) {
  const Path p = simulate_path(tvar(), 3000, 4);
  std::vector<double> xg;
  for (int j = -40; j <= 40; ++j) xg.push_back(0.1 * j);
  xg.push_back(1e9);
  const auto r = local_edf(p.values, kEpa, 0.2, xg, 0.5);
  EXPECT_TRUE(std::is_sorted(r.values.begin(), r.values.end()));
  EXPECT_NEAR(r.values.back(), kernel_weight_sum(3000, kEpa, 0.2, 0.5), 1e-12);
  EXPECT_NEAR(r.values.back(), 1.0, 3.0 * kEpa.sup() / (3000 * 0.2));
}

TEST(LocalMad, ConstantPathAndFoldedNormal) {
  // The local mean is the unnormalized weighted sum, so a constant path leaves
  // c S |1 - S| with S the kernel weight sum; that vanishes as nh grows.
  double prev = INFINITY;
  for (std::size_t n : {500u, 5000u, 50000u}) {
    const std::vector<double> c(n, 4.0);
    const double s = kernel_weight_sum(n, kEpa, 0.2, 0.5);
    const double mad = local_mad(c, kEpa, 0.2, 0.5);
    EXPECT_NEAR(mad, 4.0 * s * std::abs(1.0 - s), 1e-12);
    EXPECT_LT(mad, prev);
    prev = mad;
  }
  const Path p = simulate_path(ar1(0.0), 200000, 10);
  EXPECT_NEAR(local_mad(p.values, kEpa, 0.5, 0.5), std::sqrt(2.0 / std::numbers::pi), 0.01);
}

TEST(StationaryLaw, Ar1MatchesNormalLaw) {
  // X̃(v) ~ N(0, 4/3) for AR(1) with a = 0.5.
  const StationaryLaw law(ar1(0.5), 0.5, 100000, 3);
  const double sd = std::sqrt(4.0 / 3.0);
  for (double x : {-1.5, 0.0, 0.7}) {
    EXPECT_NEAR(law.cdf(x), 0.5 * std::erfc(-x / (sd * std::sqrt(2.0))), 0.01) << x;
    EXPECT_NEAR(law.pdf(x), std::exp(-x * x / (2 * sd * sd)) / (sd * std::sqrt(2 * std::numbers::pi)), 0.01) << x;
  }
  EXPECT_NEAR(law.mean(), 0.0, 0.03);
  EXPECT_NEAR(law.abs_deviation(0.0), sd * std::sqrt(2.0 / std::numbers::pi), 0.02);
}

TEST(MEstimate, NewtonMatchesClosedForm) {
  const Path p = simulate_path(tvar(), 2000, 6);
  const auto obj = MObjective::ar_least_squares();
  const double h = 0.2;
  const auto grid = interior_grid(h, 9);
  const auto est = m_estimate(p, obj, kEpa, h, grid);
  for (std::size_t j = 0; j < est.result.v.size(); ++j) {
    EXPECT_NEAR(est.result.values[j], ar_closed_form(p, kEpa, h, est.result.v[j]), 1e-10);
    EXPECT_LE(est.gradient_norm[j], 1e-8);
  }
}

TEST(MEstimate, ConstantCoefficientConsistency) {
  const Path p = simulate_path(ar1(0.4), 50000, 2);
  const auto est = m_estimate(p, MObjective::ar_least_squares(), kEpa, 0.2, {0.3, 0.5, 0.7});
  for (double a : est.result.values) EXPECT_NEAR(a, 0.4, 0.03);
}

TEST(MEstimate, BahadurResidualSmallerThanFirstOrder) {
  const RecursiveModel m = tvar();
  const Path p = simulate_path(m, 8000, 17);
  const auto obj = MObjective::ar_least_squares();
  BahadurTruth truth;
  truth.theta0 = [&](double v) { return std::vector<double>{m.a(v)}; };
  truth.information = [&](double v) {
    const double a = m.a(v);
    return std::vector<double>{2.0 / (1.0 - a * a)};  // 2 E X̃_0² for the squared loss
  };
  const auto est = m_estimate(p, obj, kEpa, 0.2, interior_grid(0.2, 5), &truth);
  ASSERT_EQ(est.bahadur_residual.size(), 5u);
  double res = 0.0, first = 0.0;
  for (std::size_t j = 0; j < 5; ++j) {
    res = std::max(res, est.bahadur_residual[j]);
    first = std::max(first, est.first_order[j]);
  }
  EXPECT_LT(res, first);
}

TEST(MEstimate, InformationMatrixMonteCarlo) {
  const auto obj = MObjective::ar_least_squares();
  const std::vector<double> theta{0.5};
  const auto info = information_matrix(obj, ar1(0.5), 0.5, theta, 200000, 4);
  EXPECT_NEAR(info[0], 2.0 * 4.0 / 3.0, 0.05);
}

TEST(EdfBrackets, CoverageAndCount) {
  RecursiveModel m = tvar();
  const auto params = BracketParams::from_model(m, kEpa);
  for (double gamma : {0.5, 0.2, 0.1}) {
    const auto g = edf_brackets(gamma, params);
    EXPECT_EQ(g.x.front(), -INFINITY);
    EXPECT_EQ(g.x.back(), INFINITY);
    EXPECT_TRUE(std::is_sorted(g.x.begin(), g.x.end()));
    double max_gap = 0.0;
    for (std::size_t j = 2; j + 1 < g.x.size(); ++j) max_gap = std::max(max_gap, g.x[j] - g.x[j - 1]);
    EXPECT_LE(max_gap, g.spacing * (1 + 1e-12));
    EXPECT_EQ(g.count, g.x.size() - 1);
    EXPECT_LE(double(g.count), g.c_n * std::pow(gamma, -2.0 / params.s - 2.0));
    // Every probe point lies in some closed bracket.
    CounterRng rng(1, 1);
    for (int t = 0; t < 1000; ++t) {
      const double x = std::tan(std::numbers::pi * (rng.uniform01() - 0.5));
      const auto it = std::lower_bound(g.x.begin(), g.x.end(), x);
      ASSERT_TRUE(it != g.x.begin() && it != g.x.end());
    }
  }
  EXPECT_THROW(edf_brackets(1.5, params), ModelError);
}

TEST(EdfBrackets, CentralBracketNormBelowGamma) {
  const RecursiveModel m = tvar();
  const double gamma = 0.5, h = 0.2, v = 0.5;
  const auto g = edf_brackets(gamma, BracketParams::from_model(m, kEpa));
  const std::size_t mid = g.x.size() / 2;
  const double lo = g.x[mid - 1], hi = g.x[mid];
  const std::size_t n = 1000;
  double acc = 0.0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const Path p = simulate_path(m, n, replication_seed(3, r));
    for (std::size_t i = 1; i <= n; ++i) {
      const double d = std::sqrt(h) * kEpa.scaled(double(i) / n - v, h);
      if (p.x(i) > lo && p.x(i) <= hi) acc += d * d;
    }
  }
  EXPECT_LE(std::sqrt(acc / (reps * double(n))), gamma);
}

TEST(Discretization, FinerGridChangesSupByLittle) {
  const Path p = simulate_path(ar1(0.5), 4000, 12);
  const double h = 0.1;
  const auto coarse = kernel_regression(p.values, kEpa, h, interior_grid(h, 41));
  const auto fine = kernel_regression(p.values, kEpa, h, interior_grid(h, 81));
  const auto sup = [](const EstimatorResult& r) {
    double s = 0.0;
    for (double x : r.values) s = std::max(s, std::abs(x));
    return s;
  };
  double mass = 0.0;
  for (double x : p.values) mass += std::abs(x);
  mass /= double(p.values.size());
  const double dv = (1.0 - h) / 80.0;
  EXPECT_LE(std::abs(sup(fine) - sup(coarse)), kEpa.lipschitz() * dv / (h * h) * mass);
}

TEST(EstimatorResult, CsvColumns) {
  const std::vector<double> y(100, 1.0);
  std::ostringstream out;
  write_csv(out, kernel_regression(y, kEpa, 0.2, {0.5}, [](double) { return 1.0; }));
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "v,estimate,reference");
}
