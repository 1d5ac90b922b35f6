#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "locstat/kernel.hpp"
#include "locstat/process_models.hpp"

namespace locstat {

/// Estimates on a grid of v values, or of (x, v) pairs sorted by v then x.
struct EstimatorResult {
  std::string estimator;
  std::vector<double> v;
  std::vector<double> x;  ///< empty for curves indexed by v alone
  std::vector<double> values;
  std::vector<double> reference;  ///< empty when no ground truth is available
  double h1 = 0.0;
  double h2 = 0.0;  ///< second bandwidth (density) or 0
  std::size_t excluded = 0;  ///< requested v outside [h/2, 1 - h/2]
};

/// Columns v[,x],estimate[,reference].
void write_csv(std::ostream& out, const EstimatorResult& r);
nlohmann::json summary_json(const EstimatorResult& r);

/// (1/n) Σ K_h(i/n - v).
[[nodiscard]] double kernel_weight_sum(std::size_t n, const Kernel& k, double h, double v);

/// `count` equally spaced points spanning [h/2, 1 - h/2].
[[nodiscard]] std::vector<double> interior_grid(double h, std::size_t count);

/// Law of X̃_1(v) represented as a mixture over stationary draws of the conditional
/// location m and scale s: X̃_1(v) = m + s ε given the past.
class StationaryLaw {
 public:
  StationaryLaw(const ProcessModel& model, double v, std::size_t draws, std::uint64_t seed);

  [[nodiscard]] double cdf(double x) const;
  [[nodiscard]] double pdf(double x) const;
  [[nodiscard]] double mean() const noexcept { return mean_; }
  /// E|X̃(v) - θ| from the raw stationary draws.
  [[nodiscard]] double abs_deviation(double theta) const;
  [[nodiscard]] double v() const noexcept { return v_; }
  [[nodiscard]] std::size_t size() const noexcept { return loc_.size(); }

 private:
  double v_;
  Innovation innovation_;
  std::vector<double> loc_;
  std::vector<double> scale_;
  std::vector<double> values_;
  double mean_ = 0.0;
};

/// ĝ(v) = (1/n) Σ K_h(i/n - v) Y_i; the reference replaces Y_i by trend(i/n).
EstimatorResult kernel_regression(std::span<const double> y, const Kernel& k, double h,
                                  const std::vector<double>& v_grid,
                                  const std::function<double(double)>& trend = {});

/// ĝ(x, v) = (1/n) Σ K_{h1}(i/n - v) K̃_{h2}(X_i - x).
EstimatorResult kernel_density(std::span<const double> x, const Kernel& k, const Kernel& k_tilde, double h1,
                               double h2, const std::vector<double>& x_grid, const std::vector<double>& v_grid,
                               const std::function<double(double x, double v)>& reference = {});

/// Ĝ(x, v) = (1/n) Σ K_h(i/n - v) 1{X_i ≤ x}.
EstimatorResult local_edf(std::span<const double> x, const Kernel& k, double h, const std::vector<double>& x_grid,
                          double v, const std::function<double(double x)>& reference = {});

/// mad_n(v) = (1/n) Σ K_h(i/n - v) |X_i - X̄_n(v)| with X̄_n(v) = (1/n) Σ K_h(i/n - v) X_i.
[[nodiscard]] double local_mad(std::span<const double> x, const Kernel& k, double h, double v);

/// Base |z - μ| + (2G(μ) - 1) z whose long-run variance gives the MAD asymptotic variance.
[[nodiscard]] Base mad_influence_base(const StationaryLaw& law);

/// Loss ℓ_θ(z) on observations z = (X_i, X_{i-1}) with θ in a box.
struct MObjective {
  std::size_t dim = 1;
  std::function<double(std::span<const double> theta, double x1, double x0)> loss;
  std::function<void(std::span<const double> theta, double x1, double x0, std::span<double> grad)> gradient;
  /// Row-major dim x dim.
  std::function<void(std::span<const double> theta, double x1, double x0, std::span<double> hess)> hessian;
  std::vector<double> lower;
  std::vector<double> upper;
  double lipschitz = 1.0;
  std::string name;

  /// ℓ_a(x1, x0) = (x1 - a x0)^2 on [lower, upper].
  static MObjective ar_least_squares(double lower = -0.99, double upper = 0.99);
};

struct MEstimate {
  EstimatorResult result;  ///< values[j * dim + d] is coordinate d at v[j]
  std::vector<double> gradient_norm;
  std::vector<int> iterations;  ///< Newton iterations, -1 when the fallback search was used
  std::vector<double> bahadur_residual;  ///< |(θ̂ - θ0) + I^{-1} ∇L(θ0)|, empty without θ0
  std::vector<double> first_order;  ///< |θ̂ - θ0|, empty without θ0
};

/// Truth for the Bahadur residual: θ0(v) and I(v) = E ∇²ℓ_{θ0(v)}(Z̃(v)).
struct BahadurTruth {
  std::function<std::vector<double>(double)> theta0;
  /// I(v), row-major.
  std::function<std::vector<double>(double)> information;
};

/// I(v) by Monte Carlo over a stationary path of length `draws` at v.
[[nodiscard]] std::vector<double> information_matrix(const MObjective& obj, const ProcessModel& model, double v,
                                                     std::span<const double> theta0, std::size_t draws,
                                                     std::uint64_t seed);

/// θ̂(v) = argmin_θ (1/n) Σ K_h(i/n - v) ℓ_θ(X_i, X_{i-1}), X_0 taken from the path.
/// Projected Newton with step halving (50 iterations), then golden section (dim 1) or
/// a coarse grid. Throws NumericalError when both fail or the Hessian is not positive
/// definite at the optimum.
MEstimate m_estimate(const Path& path, const MObjective& obj, const Kernel& k, double h,
                     const std::vector<double>& v_grid, const BahadurTruth* truth = nullptr);

/// Weighted least squares Σ w x0 x1 / Σ w x0^2 for the AR loss.
[[nodiscard]] double ar_closed_form(const Path& path, const Kernel& k, double h, double v);

/// Constants of the EDF bracket construction.
struct BracketParams {
  double c_m;        ///< C_M ≥ sup ‖m(X_{i-1}, u)‖_{2s}
  double c_sigma;    ///< C_Σ ≥ sup ‖σ(X_{i-1}, u)‖_{2s}
  double c_eps;      ///< ‖ε‖_{2s}
  double sigma_min;
  double g_sup;      ///< sup of the innovation density
  double s = 1.0;
  double k_sup;      ///< sup of the localizing kernel

  static BracketParams from_model(const RecursiveModel& model, const Kernel& k, double s = 1.0);
};

struct BracketGrid {
  std::vector<double> x;  ///< -inf, x_{-N}, ..., x_N, +inf
  std::size_t count;      ///< number of brackets, x.size() - 1
  double x_n;
  double spacing;         ///< γ² σ_min / (|g_ε|_∞ |K|²_∞)
  double c_n;             ///< count ≤ c_n γ^{-2/s-2}
};

/// Brackets [f_{x_{j-1}}, f_{x_j}] for f_x = √h K_h(· - v) 1{· ≤ x}: x_N = C_γ (1 + C_ε a^{-1/(2s)}),
/// C_γ = max(C_M, C_Σ) a^{-1/(2s)}, a = γ²/(3|K|²_∞), with interior gaps at most the spacing.
BracketGrid edf_brackets(double gamma, const BracketParams& p);

}  // namespace locstat
