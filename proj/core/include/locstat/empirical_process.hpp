#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "locstat/dependence.hpp"
#include "locstat/function_class.hpp"
#include "locstat/process_models.hpp"

namespace locstat {

enum class CenteringKind { mc, analytic };

/// E f(X_i, i/n) for i = 1..n.
struct Centering {
  CenteringKind kind = CenteringKind::analytic;
  std::vector<double> means;
};

/// Closed-form means: constant bases, the identity base (mean recursion), and any base
/// under a model whose observations are independent. Throws ModelError otherwise.
Centering analytic_centering(const FunctionClass& f, const ProcessModel& model, std::size_t n);

/// True if analytic_centering supports (f, model).
[[nodiscard]] bool has_analytic_centering(const FunctionClass& f, const ProcessModel& model);

/// Averages over `reps` independent paths drawn from the centering stream of `seed`.
Centering mc_centering(const FunctionClass& f, const ProcessModel& model, std::size_t n, std::size_t reps,
                       std::uint64_t seed, unsigned threads = 1);

/// G_n(f) = n^{-1/2} Σ_i (f(X_i, i/n) - E f(X_i, i/n)).
[[nodiscard]] double evaluate_gn(const FunctionClass& f, const Path& path, const Centering& centering);

struct MartingaleParts {
  double g1;     ///< n^{-1/2} Σ (f(X_i) - E[f(X_i) | G_{i-1}])
  double g2;     ///< n^{-1/2} Σ (E[f(X_i) | G_{i-1}] - E f(X_i))
  double total;  ///< evaluate_gn with the same centering
};

MartingaleParts martingale_parts(const FunctionClass& f, const Path& path, const RecursiveModel& model,
                                 const Centering& centering);

/// Martingale increments f(X_i) - E[f(X_i) | G_{i-1}], i = 1..n.
std::vector<double> martingale_increments(const FunctionClass& f, const Path& path, const RecursiveModel& model);

enum class CovarianceCase { global, local };

struct CovarianceSpec {
  CovarianceCase kind = CovarianceCase::local;
  Polynomial omega = Polynomial::constant(1.0);
  double v = 0.5;
  double h = 0.1;
  Kernel kernel = Kernel::epanechnikov();
  std::size_t lag_truncation = 0;  ///< 0 selects the smallest J with β(J)/β(1) < 1e-3
  std::size_t u_grid = 64;
};

struct LongRunMc {
  std::size_t paths = 200;
  std::size_t length = 4000;
};

struct CovarianceResult {
  CovarianceCase kind;
  std::string f;
  std::string g;
  double sigma;
  double mc_se;
  bool tail_flag;
  double tail_estimate;
  std::size_t lag_truncation;
};

nlohmann::json to_json(const CovarianceResult& r);

/// Default lag truncation for a model: smallest J with β(J)/β(1) < 1e-3 for its analytic profile.
[[nodiscard]] std::size_t default_lag_truncation(const ProcessModel& model);

/// Σ_{j∈Z} Cov(f̄(X̃_0(u)), ḡ(X̃_j(u))) at a frozen u, with per-path standard error and
/// the extrapolated truncation tail.
struct LongRunAtU {
  double sigma;
  double se;
  double tail_estimate;
};
LongRunAtU long_run_at(const Base& f, const Base& g, const ProcessModel& model, double u, std::size_t lags,
                       const LongRunMc& mc, std::uint64_t seed, unsigned threads = 1);

/// Σ^(1) = ∫ ω(u)^2 Σ_j Cov(...) du (trapezoid on the u grid) or
/// Σ^(2) = ∫K^2 ω(v)^2 Σ_j Cov(... at v ...). Only the bases of f and g enter.
CovarianceResult long_run_covariance(const Base& f, const Base& g, const ProcessModel& model,
                                     const CovarianceSpec& spec, const LongRunMc& mc, std::uint64_t seed,
                                     unsigned threads = 1);

struct VarianceCheck {
  double var_hat;
  double var_se;
  double f2n;
  double d_n;
  double v;
  double v_scale;
  DecayProfile profile;
  bool pass;
};

nlohmann::json to_json(const VarianceCheck& r);

/// Compares the Monte Carlo variance of G_n(f) with (v_scale V(f))^2, where V uses the
/// class profile from class_decay_bound. Passes iff var_hat ≤ (v_scale V)^2 (1 + 4 se/var_hat).
VarianceCheck variance_bound_check(const FunctionClass& f, const ProcessModel& model, std::size_t n,
                                   std::size_t reps, std::uint64_t seed, unsigned threads = 1,
                                   double v_scale = 1.0);

}  // namespace locstat
