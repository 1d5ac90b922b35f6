#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Dense>

#include "locstat/empirical_process.hpp"
#include "locstat/rng.hpp"

using namespace locstat;

namespace {

RecursiveModel ar1(double a) {
  RecursiveModel m;
  m.a = Polynomial::constant(a);
  return m;
}

FunctionClass global(Base b) { return {std::move(b), Factor::global()}; }

CovarianceSpec local_spec() {
  CovarianceSpec s;
  s.kind = CovarianceCase::local;
  s.v = 0.5;
  s.h = 0.1;
  return s;
}

}  // namespace

TEST(EvaluateGn, ConstantIsExactlyZero) {
  const FunctionClass f = global(Base::constant(3.0));
  const Path p = simulate_path(ar1(0.5), 500, 1);
  EXPECT_EQ(evaluate_gn(f, p, analytic_centering(f, ar1(0.5), 500)), 0.0);
}

TEST(EvaluateGn, IidIdentityHasUnitVariance) {
  const RecursiveModel m = ar1(0.0);
  const FunctionClass f = global(Base::identity());
  const Centering c = analytic_centering(f, m, 400);
  std::vector<double> g(2000);
  for (std::size_t r = 0; r < g.size(); ++r) g[r] = evaluate_gn(f, simulate_path(m, 400, replication_seed(2, r)), c);
  const double v = stats::variance(g);
  EXPECT_GE(v, 0.9);
  EXPECT_LE(v, 1.1);
}

TEST(EvaluateGn, Homogeneous) {
  const RecursiveModel m = ar1(0.5);
  const Path p = simulate_path(m, 300, 4);
  const FunctionClass f = global(Base::identity());
  const FunctionClass f3 = global(Base::identity().scaled(3.0));
  EXPECT_NEAR(evaluate_gn(f3, p, analytic_centering(f3, m, 300)), 3.0 * evaluate_gn(f, p, analytic_centering(f, m, 300)),
              1e-12);
}

TEST(Centering, AnalyticUnavailableForDependentIndicator) {
  const FunctionClass f = global(Base::indicator(0.0));
  EXPECT_FALSE(has_analytic_centering(f, ar1(0.5)));
  EXPECT_THROW(analytic_centering(f, ar1(0.5), 10), ModelError);
  EXPECT_TRUE(has_analytic_centering(f, ar1(0.0)));
}

TEST(Centering, MonteCarloMatchesAnalyticForIdentity) {
  RecursiveModel m = ar1(0.5);
  m.b = Polynomial({0.0, 2.0});
  const FunctionClass f = global(Base::identity());
  const auto exact = analytic_centering(f, m, 50);
  const auto mc = mc_centering(f, m, 50, 4000, 6);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_NEAR(mc.means[i], exact.means[i], 0.1) << i;
}

TEST(MartingaleParts, SumIdentity) {
  RecursiveModel m;
  m.a = Polynomial({0.2, 0.2});
  m.scale = ScaleFamily::arch(Polynomial::constant(0.5), Polynomial::constant(0.3));
  const Path p = simulate_path(m, 400, 12);
  for (const Base& b : {Base::indicator(0.3), Base::kernel_density(0.0, 0.5), Base::identity(), Base::abs_deviation(0.1)}) {
    const FunctionClass f{b, Factor::local(Kernel::epanechnikov(), 0.3, 0.5)};
    const Centering c = mc_centering(f, m, 400, 50, 3);
    const auto parts = martingale_parts(f, p, m, c);
    EXPECT_NEAR(parts.g1 + parts.g2, parts.total, 1e-10) << b.name();
    EXPECT_NEAR(parts.total, evaluate_gn(f, p, c), 1e-12) << b.name();
  }
}

TEST(MartingaleParts, IidSecondPartVanishes) {
  const RecursiveModel m = ar1(0.0);
  for (const Base& b : {Base::indicator(0.3), Base::kernel_density(0.0, 0.5), Base::abs_deviation(0.2)}) {
    const FunctionClass f = global(b);
    const auto parts = martingale_parts(f, simulate_path(m, 300, 5), m, analytic_centering(f, m, 300));
    EXPECT_NEAR(parts.g2, 0.0, 1e-7) << b.name();
  }
}

TEST(MartingaleParts, IncrementsAreUncorrelated) {
  const RecursiveModel m = ar1(0.5);
  const FunctionClass f = global(Base::indicator(0.2));
  double sxy = 0.0, sxx = 0.0;
  std::size_t pairs = 0;
  for (std::size_t r = 0; r < 100; ++r) {
    const auto d = martingale_increments(f, simulate_path(m, 200, replication_seed(31, r)), m);
    for (std::size_t i = 1; i < d.size(); ++i) {
      sxy += d[i] * d[i - 1];
      sxx += d[i] * d[i];
    }
    pairs += d.size() - 1;
  }
  EXPECT_LT(std::abs(sxy / sxx), 4.0 / std::sqrt(double(pairs)));
}

TEST(LongRunCovariance, IidIdentityLocal) {
  const auto r = long_run_covariance(Base::identity(), Base::identity(), ar1(0.0), local_spec(), {200, 4000}, 1);
  EXPECT_NEAR(r.sigma, 1.2, 4.0 * r.mc_se + 0.01);
  EXPECT_FALSE(r.tail_flag);
}

TEST(LongRunCovariance, Ar1IdentityLocal) {
  const auto r = long_run_covariance(Base::identity(), Base::identity(), ar1(0.5), local_spec(), {200, 4000}, 2);
  EXPECT_NEAR(r.sigma, 4.8, 4.0 * r.mc_se + 0.05);
  EXPECT_EQ(r.lag_truncation, default_lag_truncation(ar1(0.5)));
}

TEST(LongRunCovariance, GlobalCaseIntegratesOverTime) {
  // With a(u) constant the integrand does not depend on u, so Σ^(1) equals the frozen value.
  CovarianceSpec s;
  s.kind = CovarianceCase::global;
  s.u_grid = 5;
  const auto r = long_run_covariance(Base::identity(), Base::identity(), ar1(0.5), s, {100, 4000}, 3);
  EXPECT_NEAR(r.sigma, 4.0, 4.0 * r.mc_se + 0.05);
}

TEST(LongRunCovariance, SymmetricAndPositiveSemidefinite) {
  const Base f = Base::indicator(0.0), g = Base::identity();
  const LongRunMc mc{100, 3000};
  const double fg = long_run_covariance(f, g, ar1(0.5), local_spec(), mc, 9).sigma;
  const double gf = long_run_covariance(g, f, ar1(0.5), local_spec(), mc, 9).sigma;
  const double ff = long_run_covariance(f, f, ar1(0.5), local_spec(), mc, 9).sigma;
  const double gg = long_run_covariance(g, g, ar1(0.5), local_spec(), mc, 9).sigma;
  EXPECT_NEAR(fg, gf, 1e-10);
  Eigen::Matrix2d S;
  S << ff, fg, gf, gg;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(S);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-3 * es.eigenvalues().maxCoeff());
}

TEST(VarianceBoundCheck, IidPassesAndScaledDownControlFails) {
  const FunctionClass f{Base::identity(), Factor::local(Kernel::epanechnikov(), 0.2, 0.5)};
  const auto iid = variance_bound_check(f, ar1(0.0), 1000, 400, 1);
  EXPECT_TRUE(iid.pass);
  EXPECT_NEAR(iid.v, iid.f2n, 1e-15);
  const auto ar = variance_bound_check(f, ar1(0.5), 1000, 400, 2);
  EXPECT_TRUE(ar.pass) << ar.var_hat << " vs " << ar.v * ar.v;
  const auto control = variance_bound_check(f, ar1(0.5), 1000, 400, 2, 1, 0.1);
  EXPECT_FALSE(control.pass);
  EXPECT_EQ(control.var_hat, ar.var_hat);
}

TEST(VarianceBoundCheck, ThreadInvariant) {
  const FunctionClass f = global(Base::indicator(0.0));
  const auto a = variance_bound_check(f, ar1(0.5), 200, 150, 4, 1);
  const auto b = variance_bound_check(f, ar1(0.5), 200, 150, 4, 3);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}
