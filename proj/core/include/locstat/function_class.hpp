#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "locstat/kernel.hpp"
#include "locstat/numerics.hpp"

namespace locstat {

enum class BaseKind { constant, identity, abs_deviation, indicator, kernel, generic };

/// The z-dependent part f̄(z) of f(z, u) = D(u) f̄(z).
class Base {
 public:
  static Base constant(double c);
  static Base identity();
  /// |z - θ|.
  static Base abs_deviation(double theta);
  /// 1{z <= x}.
  static Base indicator(double x);
  /// sqrt(h2) K̃_{h2}(z - x) = K̃((z - x)/h2) / sqrt(h2).
  static Base kernel_density(double x, double h2, Kernel kernel = Kernel::epanechnikov());
  /// Arbitrary function; `lipschitz` is its Lipschitz constant in z (inf if unknown).
  static Base generic(std::function<double(double)> fn, std::string name, double lipschitz);

  [[nodiscard]] double operator()(double z) const;

  [[nodiscard]] BaseKind kind() const noexcept { return kind_; }
  /// Location parameter: c, θ or x depending on the kind.
  [[nodiscard]] double location() const noexcept { return loc_; }
  [[nodiscard]] double bandwidth() const noexcept { return h2_; }
  /// Multiplier applied by scaled(); 1 for freshly built bases.
  [[nodiscard]] double scale() const noexcept { return scale_; }
  [[nodiscard]] const Kernel& kernel() const noexcept { return kernel_; }
  [[nodiscard]] std::string name() const;

  /// sup_z |f̄(z)|, +inf for unbounded bases.
  [[nodiscard]] double sup_abs() const noexcept;
  /// Lipschitz constant in z for the bases that are Lipschitz (inf otherwise).
  [[nodiscard]] double lipschitz() const noexcept;

  /// Same base scaled by a (f̄ -> a f̄); only constant, identity-like and generic bases keep their kind.
  [[nodiscard]] Base scaled(double a) const;

 private:
  Base() = default;
  BaseKind kind_ = BaseKind::identity;
  double loc_ = 0.0;
  double h2_ = 1.0;
  double scale_ = 1.0;
  Kernel kernel_ = Kernel::epanechnikov();
  std::function<double(double)> fn_;
  std::string name_;
  double lipschitz_ = 1.0;
};

enum class FactorKind { global, local };

/// The u-dependent factor D_{f,n}(u): a weight ω(u), optionally localized as
/// ω(u) sqrt(h) K_h(u - v) = ω(u) K((u - v)/h) / sqrt(h).
class Factor {
 public:
  static Factor global(Polynomial omega = Polynomial::constant(1.0));
  static Factor local(Kernel kernel, double h, double v, Polynomial omega = Polynomial::constant(1.0));

  [[nodiscard]] double operator()(double u) const noexcept;
  [[nodiscard]] FactorKind kind() const noexcept { return kind_; }
  [[nodiscard]] const Polynomial& omega() const noexcept { return omega_; }
  [[nodiscard]] const Kernel& kernel() const noexcept { return kernel_; }
  [[nodiscard]] double bandwidth() const noexcept { return h_; }
  [[nodiscard]] double center() const noexcept { return v_; }
  [[nodiscard]] std::string name() const;

 private:
  Factor() = default;
  FactorKind kind_ = FactorKind::global;
  Polynomial omega_ = Polynomial::constant(1.0);
  Kernel kernel_ = Kernel::epanechnikov();
  double h_ = 1.0;
  double v_ = 0.5;
};

/// Hölder metadata of the class: |f̄(z) - f̄(z')| ≤ L |z - z'|^s (R(z) + R(z')), R ≤ c_r.
struct HolderData {
  double lipschitz = 1.0;
  double s = 1.0;
  double c_r = 1.0;
  double c_fbar = 1.0;
};

struct Normalizers {
  double d_n;        ///< (1/n Σ D(i/n)^2)^{1/2}
  double d_n_inf;    ///< (1/n Σ D^∞(i/n)^2)^{1/2}
  double d_nu_n_inf; ///< (1/n Σ D^∞(i/n)^ν)^{1/ν}
};

/// One member f(z, u) = D(u) f̄(z).
struct FunctionClass {
  Base base;
  Factor factor;
  HolderData holder{};

  [[nodiscard]] double operator()(double z, double u) const { return factor(u) * base(z); }
  [[nodiscard]] std::string name() const { return base.name() + "*" + factor.name(); }
};

/// Normalizers over a family of members sharing the sample size n; for a single
/// member D^∞ = |D|. Computed exactly on the grid i/n.
Normalizers class_normalizers(std::span<const FunctionClass> members, std::size_t n, double nu = 2.0);

}  // namespace locstat
