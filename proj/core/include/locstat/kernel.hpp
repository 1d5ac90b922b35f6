#pragma once

#include <string>
#include <vector>

namespace locstat {

enum class KernelShape { epanechnikov, triangular, custom };

/// Smoothing kernel supported in [-1/2, 1/2], Lipschitz, integrating to one.
class Kernel {
 public:
  /// K(u) = 6 (1/4 - u^2) on [-1/2, 1/2].
  static Kernel epanechnikov();
  /// K(u) = 2 - 4|u| on [-1/2, 1/2].
  static Kernel triangular();
  /// Piecewise-linear through equally spaced samples on [-1/2, 1/2]. The end samples
  /// must be zero (Lipschitz on R) and the trapezoid integral must be 1 within 1e-10.
  static Kernel custom(std::vector<double> samples);

  [[nodiscard]] double operator()(double u) const noexcept;
  /// K_h(x) = K(x / h) / h.
  [[nodiscard]] double scaled(double x, double h) const noexcept { return (*this)(x / h) / h; }

  [[nodiscard]] KernelShape shape() const noexcept { return shape_; }
  [[nodiscard]] std::string name() const;
  [[nodiscard]] const std::vector<double>& samples() const noexcept { return samples_; }

  [[nodiscard]] double lipschitz() const noexcept { return lipschitz_; }
  [[nodiscard]] double integral() const noexcept { return integral_; }
  /// ∫ K(u)^2 du.
  [[nodiscard]] double l2_squared() const noexcept { return l2_squared_; }
  [[nodiscard]] double sup() const noexcept { return sup_; }
  /// ∫ |K(u)| du.
  [[nodiscard]] double l1() const noexcept { return l1_; }

 private:
  Kernel() = default;
  KernelShape shape_ = KernelShape::epanechnikov;
  std::vector<double> samples_;
  double lipschitz_ = 0, integral_ = 0, l2_squared_ = 0, sup_ = 0, l1_ = 0;
};

}  // namespace locstat
