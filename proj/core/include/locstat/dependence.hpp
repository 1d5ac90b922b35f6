#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "locstat/function_class.hpp"
#include "locstat/process_models.hpp"

namespace locstat {

enum class DecayKind { independent, geometric, polynomial };

/// Dominating dependence sequence Δ(k): c ρ^k, c k^{-α}, or zero beyond k = 0.
struct DecayProfile {
  DecayKind kind = DecayKind::independent;
  double c = 0.0;
  double alpha = 0.0;
  double rho = 0.0;

  static DecayProfile independent(double c = 0.0);
  static DecayProfile geometric(double c, double rho);
  static DecayProfile polynomial(double c, double alpha);

  /// Δ(k) for k ≥ 1; Δ(0) is taken to be c.
  [[nodiscard]] double operator()(double k) const noexcept;
  [[nodiscard]] DecayProfile scaled(double factor) const;
  /// Profile dominating k ↦ Δ(k - 1) for k ≥ 1.
  [[nodiscard]] DecayProfile lagged() const;
  [[nodiscard]] std::string name() const;
};

bool operator==(const DecayProfile& a, const DecayProfile& b);

/// {kind, c, rho} or {kind, c, alpha}.
nlohmann::json to_json(const DecayProfile& p);

/// β(q) = Σ_{j≥q} Δ(j). Closed form for geometric profiles; polynomial profiles use a
/// 128-term head plus an Euler-Maclaurin tail (relative error far below 1e-10).
[[nodiscard]] double beta(const DecayProfile& p, std::uint64_t q);

/// q*(x) = min{q ≥ 1 : β(q) ≤ q x}.
[[nodiscard]] std::uint64_t q_star(const DecayProfile& p, double x);

/// r(δ) = max{r > 0 : q*(r) r ≤ δ}.
///
/// Computed exactly as δ / q0 with q0 = min{q : β(q) ≤ δ}. The map r ↦ q*(r) r jumps
/// down whenever q* drops, so it is not monotone and bisection on it is unreliable.
[[nodiscard]] double r_of_delta(const DecayProfile& p, double delta);

/// Weights ω(q) = q^{1/ν} log(eq)^{3/2}, 𝓛(q) = log log(e^e q), Φ(q) = q 𝓛(q).
struct BernsteinWeights {
  double nu = 2.0;
  [[nodiscard]] double omega(double q) const;
  [[nodiscard]] double ell(double q) const;
  [[nodiscard]] double phi(double q) const { return q * ell(q); }
};

/// β̃(q) = Σ_{j≥q} Δ(j) ω(j) 𝓛(j) and q̃*(z) = min{q : β̃(q) ≤ Φ(q) z}.
class BernsteinFunctionals {
 public:
  /// Throws ModelError when Δ ω 𝓛 is not summable (polynomial α ≤ 1 + 1/ν + 0.05).
  BernsteinFunctionals(DecayProfile profile, double nu);

  [[nodiscard]] const BernsteinWeights& weights() const noexcept { return w_; }
  [[nodiscard]] const DecayProfile& profile() const noexcept { return p_; }
  [[nodiscard]] double beta_tilde(std::uint64_t q) const;
  [[nodiscard]] std::uint64_t q_tilde_star(double z) const;

 private:
  DecayProfile p_;
  BernsteinWeights w_;
};

/// Minimum margin by which α must exceed 1 + 1/ν for β̃ to be accepted.
inline constexpr double kSummabilityMargin = 0.05;

struct DeltaAtIndex {
  std::size_t i;
  double value;
  double se;
};

struct DeltaEstimate {
  std::size_t k;
  double value;  ///< max over the index set
  double se;     ///< standard error at the maximizing index
  std::size_t argmax;
  std::vector<DeltaAtIndex> per_index;
};

/// {n/4, n/2, 3n/4, n} with duplicates removed and indices clamped to ≥ 1.
[[nodiscard]] std::vector<std::size_t> default_index_set(std::size_t n);

/// Monte Carlo δ_ν(k) = max_{i ∈ i_set} ‖X_i - X_i^{*(i-k)}‖_ν for each lag in `lags`.
/// All lags share the simulated paths; replication r uses replication_seed(seed, r).
/// The standard error follows from the delta method applied to the mean of |·|^ν.
std::vector<DeltaEstimate> estimate_delta_profile(const ProcessModel& model, std::size_t n,
                                                  const std::vector<std::size_t>& lags, double nu,
                                                  std::size_t reps, std::vector<std::size_t> i_set,
                                                  std::uint64_t seed, unsigned threads = 1);

DeltaEstimate estimate_delta_mc(const ProcessModel& model, std::size_t n, std::size_t k, double nu,
                                std::size_t reps, std::vector<std::size_t> i_set, std::uint64_t seed,
                                unsigned threads = 1);

/// Δ dominating δ_{2s}^X: geometric with ρ = χ_m + ‖ε‖_{2s} χ_σ for recursive models,
/// the A_j template times 2‖ε‖_{2s} for linear models.
[[nodiscard]] DecayProfile analytic_decay_bound(const ProcessModel& model, double s = 1.0);

/// Δ dominating the dependence of the quantity whose projections control Var(G_n(f)):
/// f̄(X_i) itself for Lipschitz bases, E[f̄(X_i) | G_{i-1}] for indicator and kernel bases.
[[nodiscard]] DecayProfile class_decay_bound(const ProcessModel& model, const Base& base, double s = 1.0);

/// True if class_decay_bound routes the base through the conditional mean.
[[nodiscard]] bool uses_conditional_route(const Base& base) noexcept;

enum class SubmultKind { beta, beta_tilde_normalized };

struct SubmultReport {
  double constant;  ///< max over the grid of g(q1 q2) / (g(q1) g(q2))
  std::uint64_t q1;
  std::uint64_t q2;
  std::uint64_t q_max;
};

/// g = β or β̃/Φ over q1, q2 ∈ [1, q_max].
SubmultReport check_submultiplicativity(const DecayProfile& p, SubmultKind kind, std::uint64_t q_max,
                                        double nu = 2.0);

/// Closed-form sandwich lower ≤ value ≤ upper. `shape` is the closed-form expression
/// without constants; lower = c_lower shape and upper = c_upper shape.
struct Sandwich {
  double shape;
  double c_lower;
  double c_upper;
  [[nodiscard]] double lower() const { return c_lower * shape; }
  [[nodiscard]] double upper() const { return c_upper * shape; }
};

/// q*(x) ≍ max{x^{-1/α}, 1} (polynomial) or max{log x^{-1}, 1} (geometric).
[[nodiscard]] Sandwich q_star_closed_form(const DecayProfile& p, double x);
/// r(δ) ≍ min{δ^{α/(α-1)}, δ} (polynomial) or δ / max{log δ^{-1}, 1} (geometric).
[[nodiscard]] Sandwich r_closed_form(const DecayProfile& p, double delta);

}  // namespace locstat
