#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "locstat/function_class.hpp"
#include "locstat/innovation.hpp"
#include "locstat/numerics.hpp"

namespace locstat {

enum class ScaleKind { affine_abs, arch };

/// σ(x, u) = c0(u) + c1(u)|x|  (affine_abs)  or  sqrt(c0(u) + c1(u) x^2)  (arch).
class ScaleFamily {
 public:
  static ScaleFamily constant(double sigma) {
    return affine_abs(Polynomial::constant(sigma), Polynomial::constant(0.0));
  }
  static ScaleFamily affine_abs(Polynomial c0, Polynomial c1);
  static ScaleFamily arch(Polynomial c0, Polynomial c1);

  [[nodiscard]] double operator()(double x, double u) const noexcept;
  [[nodiscard]] ScaleKind kind() const noexcept { return kind_; }
  [[nodiscard]] const Polynomial& c0() const noexcept { return c0_; }
  [[nodiscard]] const Polynomial& c1() const noexcept { return c1_; }

  /// χ_σ: sup over u of the Lipschitz constant in x.
  [[nodiscard]] double lipschitz() const noexcept;
  /// inf over (x, u) of σ, attained at x = 0.
  [[nodiscard]] double min_value() const noexcept;
  /// sup_u σ(0, u).
  [[nodiscard]] double at_zero_sup() const noexcept;
  /// Constant in |σ(x,u) - σ(x,u')| ≤ C |u - u'| (1 + |x|).
  [[nodiscard]] double holder_u() const noexcept;
  [[nodiscard]] ScaleFamily frozen_at(double u) const;

 private:
  ScaleKind kind_ = ScaleKind::affine_abs;
  Polynomial c0_ = Polynomial::constant(1.0);
  Polynomial c1_ = Polynomial::constant(0.0);
};

/// X_i = a(i/n) X_{i-1} + b(i/n) + σ(X_{i-1}, i/n) ε_i.
struct RecursiveModel {
  Polynomial a = Polynomial::constant(0.0);
  Polynomial b = Polynomial::constant(0.0);
  ScaleFamily scale = ScaleFamily::constant(1.0);
  Innovation innovation = Innovation::normal();
  std::string tag = "recursive";

  [[nodiscard]] double mean(double x, double u) const noexcept { return a(u) * x + b(u); }
  [[nodiscard]] double sigma(double x, double u) const noexcept { return scale(x, u); }

  [[nodiscard]] double chi_m() const noexcept { return a.sup_abs(); }
  [[nodiscard]] double chi_sigma() const noexcept { return scale.lipschitz(); }
  [[nodiscard]] double sigma_min() const noexcept { return scale.min_value(); }
  /// χ_m + ‖ε‖_q χ_σ.
  [[nodiscard]] double contraction(double q = 2.0) const;
  /// C_X with sup_{i,n} ‖X_i‖_q ≤ C_X: (sup|b| + sup σ(0,·) ‖ε‖_q) / (1 - contraction).
  [[nodiscard]] double moment_bound(double q = 2.0) const;
  /// C_m: |m(x,u) - m(x,u')| ≤ C_m |u - u'| (1 + |x|).
  [[nodiscard]] double holder_mean() const noexcept;
  /// True if neither m nor σ depends on x (the data are independent).
  [[nodiscard]] bool independent() const noexcept { return chi_m() == 0.0 && chi_sigma() == 0.0; }

  [[nodiscard]] RecursiveModel frozen_at(double u) const;
  /// Throws ModelError if σ_min ≤ 0 or the contraction in L^{2s} is ≥ 1.
  void validate(double s = 1.0) const;
};

enum class DecayTemplate { geometric, polynomial };

/// X_i = a_0(i/n) ε_i + Σ_{j≥1} a_j(i/n) ε_{i-j} with a_j(u) = w(u) T_j,
/// T_j = scale ρ^j (geometric) or scale j^{-α} (polynomial).
struct LinearModel {
  Polynomial a0 = Polynomial::constant(1.0);
  Polynomial modulation = Polynomial::constant(1.0);
  DecayTemplate decay = DecayTemplate::geometric;
  double scale = 1.0;
  double rate = 0.5;  ///< ρ or α
  Innovation innovation = Innovation::normal();
  double truncation_tol = 1e-10;
  std::size_t max_history = 2'000'000;
  std::string tag = "linear";

  [[nodiscard]] double coefficient(std::size_t j, double u) const noexcept;
  /// T_j without the modulation.
  [[nodiscard]] double template_weight(std::size_t j) const noexcept;
  /// A_j ≥ sup_u |a_j(u)|.
  [[nodiscard]] double envelope(std::size_t j) const noexcept;
  /// Upper bound on Σ_{j>J} A_j.
  [[nodiscard]] double envelope_tail(std::size_t J) const noexcept;
  /// Smallest J with envelope_tail(J) ‖ε‖_2 < truncation_tol.
  [[nodiscard]] std::size_t truncation() const;

  [[nodiscard]] LinearModel frozen_at(double u) const;
  void validate() const;
};

using ProcessModel = std::variant<RecursiveModel, LinearModel>;

[[nodiscard]] std::string model_tag(const ProcessModel& model);
[[nodiscard]] const Innovation& model_innovation(const ProcessModel& model);
void validate_model(const ProcessModel& model);

/// One realization X_1..X_n with the innovations ε_{1-P}..ε_n it consumed
/// (P = burn-in for recursive models, truncation J for linear models).
struct Path {
  std::vector<double> values;
  std::vector<double> innovations;
  std::size_t prefix = 0;
  std::vector<double> prehistory;  ///< X_{1-P}..X_0 (recursive models only)
  double x0 = 0.0;                 ///< X_0; zero when P = 0
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string model_tag;

  /// ε_i for 1 - prefix ≤ i ≤ n.
  [[nodiscard]] double innovation(long i) const {
    return innovations.at(static_cast<std::size_t>(i - 1 + static_cast<long>(prefix)));
  }
  /// X_i for 0 ≤ i ≤ n (X_0 = x0).
  [[nodiscard]] double x(std::size_t i) const { return i == 0 ? x0 : values.at(i - 1); }
};

/// ceil(log(1e-12) / log(χ_m + ‖ε‖_2 χ_σ)), zero for independent data.
[[nodiscard]] std::size_t default_burn_in(const RecursiveModel& model);

/// History length P consumed by simulate_path.
[[nodiscard]] std::size_t history_length(const ProcessModel& model, std::optional<std::size_t> burn_in);

/// Recursive models start from X_{-B} = 0 and use u = 1/n for i ≤ 0.
Path simulate_path(const ProcessModel& model, std::size_t n, std::uint64_t seed,
                   std::optional<std::size_t> burn_in = std::nullopt);

/// Same recursion driven by given innovations ε_{1-prefix}..ε_n.
Path path_from_innovations(const ProcessModel& model, std::size_t n, std::vector<double> innovations,
                           std::size_t prefix);

/// Path of the stationary approximation X̃_i(u): coefficients frozen at u.
Path simulate_stationary(const ProcessModel& model, double u, std::size_t n, std::uint64_t seed,
                         std::optional<std::size_t> burn_in = std::nullopt);

/// (X, X^{*(i-k)}): the second path replaces ε_{i-k} by an independent copy.
std::pair<Path, Path> simulate_coupled(const ProcessModel& model, std::size_t n, std::size_t k,
                                       std::size_t i, std::uint64_t seed,
                                       std::optional<std::size_t> burn_in = std::nullopt);

/// X_i^{*(i-k)} - X_i for a path, with ε_{i-k} replaced by eps_star.
/// Only indices i-k..i are recomputed.
[[nodiscard]] double coupled_difference(const ProcessModel& model, const Path& path, std::size_t i,
                                        std::size_t k, double eps_star);

/// E[f̄(m(z,u) + σ(z,u) ε)^κ]^{1/κ} for κ ∈ {1, 2}.
[[nodiscard]] double conditional_functional(const RecursiveModel& model, const Base& base, double z_prev,
                                            double u, int kappa);

/// CSV with header index,u,X.
void write_path_csv(std::ostream& out, const Path& path);

}  // namespace locstat
