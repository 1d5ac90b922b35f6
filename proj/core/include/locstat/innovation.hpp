#pragma once

#include <string>

#include "locstat/rng.hpp"

namespace locstat {

enum class InnovationKind { normal, student_t, uniform };

/// Law of the i.i.d. innovations. All three families are centered.
class Innovation {
 public:
  static Innovation normal(double sd = 1.0);
  /// Standard Student-t with `df` degrees of freedom (df > 2).
  static Innovation student_t(double df);
  /// Uniform on [-half_width, half_width]; the default has unit variance.
  static Innovation uniform(double half_width = 1.7320508075688772);

  [[nodiscard]] InnovationKind kind() const noexcept { return kind_; }
  /// sd for normal, df for Student-t, half-width for uniform.
  [[nodiscard]] double parameter() const noexcept { return param_; }
  [[nodiscard]] std::string name() const;

  double sample(CounterRng& rng) const;

  [[nodiscard]] double pdf(double x) const;
  [[nodiscard]] double cdf(double x) const;
  [[nodiscard]] double quantile(double p) const;
  [[nodiscard]] double variance() const;

  /// ‖ε‖_q = (E|ε|^q)^{1/q}; +inf when the moment does not exist.
  [[nodiscard]] double lq_norm(double q) const;

  /// sup_x g(x), sup_x |g'(x)| and sup_x |x g(x)| for the density g.
  [[nodiscard]] double pdf_sup() const;
  [[nodiscard]] double pdf_derivative_sup() const;
  [[nodiscard]] double pdf_moment_sup() const;
  /// sup_x |x g'(x)|.
  [[nodiscard]] double pdf_derivative_moment_sup() const;
  /// True if the density is continuously differentiable on R.
  [[nodiscard]] bool smooth_density() const noexcept { return kind_ != InnovationKind::uniform; }

 private:
  Innovation(InnovationKind kind, double param) : kind_(kind), param_(param) {}
  InnovationKind kind_;
  double param_;
};

}  // namespace locstat
