#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include "locstat/dependence.hpp"
#include "locstat/function_class.hpp"
#include "locstat/process_models.hpp"

namespace locstat {

struct McEstimate {
  double value;
  double se;
};

/// ‖f‖_{ν,n} = (1/n Σ_i E|f(X_i, i/n)|^ν)^{1/ν} by Monte Carlo over `reps` paths.
McEstimate norm_nu_n(const FunctionClass& f, const ProcessModel& model, double nu, std::size_t n,
                     std::size_t reps, std::uint64_t seed, unsigned threads = 1);

/// V = f2n + Σ_{k≥1} min{f2n, D_n Δ(k)}, evaluated exactly as k0 f2n + D_n β(k0)
/// with k0 = min{k ≥ 1 : D_n Δ(k) ≤ f2n}.
[[nodiscard]] double v_norm(double f2n, double d_n, const DecayProfile& p);

/// f2n with v_norm(f2n) = value (V is continuous and strictly increasing in f2n).
[[nodiscard]] double v_norm_inverse(double value, double d_n, const DecayProfile& p);

/// Closed-form bounds on V with κ2 = c D_n:
///   polynomial  max{σ, b_l σ^{(α-1)/α}} ≤ V ≤ σ + b σ max{σ^{-1/α}, 1},
///     b = 2α/(α-1) (κ2 ∨ 1)^{1/α},  b_l = α/(α-1) κ2^{1/α};
///   geometric   max{σ, b_l σ log(κ2/σ)} ≤ V ≤ σ + b σ max{log σ^{-1}, 1},
///     b = 2 (log κ2 ∨ 1)/log(1/ρ) [1 + 2 log(1/ρ)/(1-ρ)],  b_l = (ρ/(1-ρ) + 1/log(1/ρ))/2,
///     the logarithmic lower branch applying only when σ/κ2 < ρ².
struct VClosedForm {
  double shape;  ///< σ max{σ^{-1/α}, 1} or σ max{log σ^{-1}, 1}
  double lower;
  double upper;
  double b_lower;
  double b_upper;
};
[[nodiscard]] VClosedForm v_closed_form(double f2n, double d_n, const DecayProfile& p);

/// Ṽ = f2n + Σ_{j≥1} min{f2n, D_n Δ(j) ω(j)} 𝓛(j).
[[nodiscard]] double v_tilde(double f2n, double d_n, const DecayProfile& p, double nu);

/// H(k) = max{1, log k}.
[[nodiscard]] double h_of_k(double k);

/// m(n, δ, k) = r(δ/D_n) D_n^∞ √n / √H(k).
[[nodiscard]] double m_threshold(std::size_t n, double delta, double k_count, double d_n, double d_n_inf,
                                 const DecayProfile& p);

enum class EntropyWeight { unit, psi };

/// ψ(ε) = √log(ε^{-1} ∨ 1) · log log(ε^{-1} ∨ e).
[[nodiscard]] double psi_weight(double eps);

/// ∫_0^σ √(1 ∨ H(ε)) w(ε) dε over octave panels [σ 2^{-j-1}, σ 2^{-j}], j < 60, plus a
/// power-law remainder on [0, σ 2^{-60}]. Throws NumericalError naming the local exponent
/// when the integrand behaves like ε^{-p} with p ≥ 0.95.
double entropy_integral(const std::function<double(double)>& entropy, double sigma,
                        EntropyWeight weight = EntropyWeight::unit, double rel_tol = 1e-6);

/// (φ_m^∧(x), φ_m^∨(x)) with φ^∧ = (x ∨ -m) ∧ m and φ^∨ = x - φ^∧.
[[nodiscard]] std::pair<double, double> truncate(double x, double m);

}  // namespace locstat
