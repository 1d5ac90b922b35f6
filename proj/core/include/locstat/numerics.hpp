#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace locstat {

/// Quadrature or series evaluation did not reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model or function class violates its invariants.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct QuadResult {
  double value;
  double error;
};

/// Adaptive Gauss-Kronrod (15-point) on [a, b]; throws NumericalError with the
/// achieved residual when the relative tolerance is missed.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-8, double abs_floor = 1e-15);

/// Sum of t(j) for j >= start, where t is positive, decreasing and eventually smooth.
/// Uses an explicit head of `head` terms and an Euler-Maclaurin tail
/// (integral + t/2 - t'/12) whose integral is computed numerically.
double series_tail_sum(const std::function<double(double)>& t, std::uint64_t start,
                       std::uint64_t head = 200);

/// Smallest q ≥ 1 with pred(q) for a predicate that switches once from false to true.
/// Doubling then bisection; throws NumericalError if no q below 2^62 qualifies.
std::uint64_t first_true(const std::function<bool(std::uint64_t)>& pred);

/// Polynomial a(u) = c0 + c1 u + ... evaluated by Horner's rule.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);
  static Polynomial constant(double c) { return Polynomial({c}); }

  [[nodiscard]] double operator()(double u) const noexcept;
  [[nodiscard]] double derivative(double u) const noexcept;
  [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return c_; }

  /// Extremes over a 1001-point grid of [0, 1] plus the endpoints.
  [[nodiscard]] double sup_abs() const noexcept;
  [[nodiscard]] double inf() const noexcept;
  [[nodiscard]] double sup() const noexcept;
  [[nodiscard]] double derivative_sup_abs() const noexcept;
  [[nodiscard]] bool is_constant() const noexcept;

 private:
  std::vector<double> c_{0.0};
};

/// Runs fn(i) for i in [0, count) on up to `threads` workers. fn must only write
/// to slot i of caller-owned storage, so the result does not depend on `threads`.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

namespace stats {

double mean(std::span<const double> x);
/// Unbiased sample variance.
double variance(std::span<const double> x);
double median(std::vector<double> x);
double quantile(std::vector<double> x, double p);

/// Standard error of the unbiased sample variance, from the fourth central moment.
double variance_se(std::span<const double> x);

/// Sup distance between the empirical CDF of x and the normal CDF N(mu, sd^2).
double ks_normal(std::vector<double> x, double mu, double sd);

}  // namespace stats

}  // namespace locstat
