#include "locstat/seminorm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "locstat/rng.hpp"

namespace locstat {

McEstimate norm_nu_n(const FunctionClass& f, const ProcessModel& model, double nu, std::size_t n,
                     std::size_t reps, std::uint64_t seed, unsigned threads) {
  if (reps < 100) throw std::invalid_argument("norm_nu_n needs reps >= 100");
  if (!(nu > 0.0)) throw std::invalid_argument("norm_nu_n needs nu > 0");
  std::vector<double> per_rep(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    const Path path = simulate_path(model, n, replication_seed(seed, r));
    double acc = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      acc += std::pow(std::abs(f(path.x(i), static_cast<double>(i) / static_cast<double>(n))), nu);
    }
    per_rep[r] = acc / static_cast<double>(n);
  });
  const double m = stats::mean(per_rep);
  const double sd_mean = std::sqrt(stats::variance(per_rep) / static_cast<double>(reps));
  const double value = std::pow(m, 1.0 / nu);
  return {value, m > 0.0 ? sd_mean * std::pow(m, 1.0 / nu - 1.0) / nu : 0.0};
}

double v_norm(double f2n, double d_n, const DecayProfile& p) {
  if (!(f2n >= 0.0)) throw std::invalid_argument("v_norm needs f2n >= 0");
  if (!(d_n > 0.0)) throw std::invalid_argument("v_norm needs D_n > 0");
  if (f2n == 0.0) return 0.0;
  if (p.kind == DecayKind::independent) return f2n;
  const std::uint64_t k0 = first_true([&](std::uint64_t k) { return d_n * p(static_cast<double>(k)) <= f2n; });
  return static_cast<double>(k0) * f2n + d_n * beta(p, k0);
}

double v_norm_inverse(double value, double d_n, const DecayProfile& p) {
  if (!(value >= 0.0)) throw std::invalid_argument("v_norm_inverse needs value >= 0");
  if (value == 0.0) return 0.0;
  // V(f) ≥ f, so the root lies in [0, value].
  double lo = 0.0, hi = value;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (v_norm(mid, d_n, p) < value) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

VClosedForm v_closed_form(double f2n, double d_n, const DecayProfile& p) {
  if (!(f2n >= 0.0)) throw std::invalid_argument("v_closed_form needs f2n >= 0");
  if (!(d_n > 0.0)) throw std::invalid_argument("v_closed_form needs D_n > 0");
  const double s = f2n;
  const double k2 = p.c * d_n;
  switch (p.kind) {
    case DecayKind::independent: return {s, s, s, 0.0, 0.0};
    case DecayKind::polynomial: {
      const double a = p.alpha;
      const double b = 2.0 * a / (a - 1.0) * std::pow(std::max(k2, 1.0), 1.0 / a);
      const double bl = a / (a - 1.0) * std::pow(k2, 1.0 / a);
      if (s == 0.0) return {0.0, 0.0, 0.0, bl, b};
      const double shape = s * std::max(std::pow(s, -1.0 / a), 1.0);
      return {shape, std::max(s, bl * std::pow(s, (a - 1.0) / a)), s + b * shape, bl, b};
    }
    case DecayKind::geometric: {
      const double rho = p.rho;
      const double L = std::log(1.0 / rho);
      const double b = 2.0 * std::max(std::log(k2), 1.0) / L * (1.0 + 2.0 * L / (1.0 - rho));
      const double bl = 0.5 * (rho / (1.0 - rho) + 1.0 / L);
      if (s == 0.0) return {0.0, 0.0, 0.0, bl, b};
      const double shape = s * std::max(std::log(1.0 / s), 1.0);
      const double lower = s / k2 < rho * rho ? std::max(s, bl * s * std::log(k2 / s)) : s;
      return {shape, lower, s + b * shape, bl, b};
    }
  }
  return {s, s, s, 0.0, 0.0};
}

double v_tilde(double f2n, double d_n, const DecayProfile& p, double nu) {
  if (!(f2n >= 0.0)) throw std::invalid_argument("v_tilde needs f2n >= 0");
  if (!(d_n > 0.0)) throw std::invalid_argument("v_tilde needs D_n > 0");
  if (p.kind == DecayKind::independent) return f2n;
  const BernsteinFunctionals bf(p, nu);
  if (f2n == 0.0) return 0.0;
  const auto& w = bf.weights();
  const auto term = [&](std::uint64_t j) {
    const double x = static_cast<double>(j);
    return d_n * p(x) * w.omega(x);
  };
  // Beyond j_dec the weighted term Δ(j) ω(j) is decreasing.
  double j_dec_real;
  if (p.kind == DecayKind::geometric) {
    j_dec_real = (1.0 / nu + 1.5) / std::log(1.0 / p.rho);
  } else {
    j_dec_real = std::exp(1.5 / (p.alpha - 1.0 / nu) - 1.0);
  }
  const auto j_dec = static_cast<std::uint64_t>(std::max(1.0, std::ceil(j_dec_real)));
  double sum = f2n;
  for (std::uint64_t j = 1; j < j_dec; ++j) sum += std::min(f2n, term(j)) * w.ell(static_cast<double>(j));
  const std::uint64_t J = j_dec - 1 + first_true([&](std::uint64_t t) { return term(j_dec - 1 + t) <= f2n; });
  for (std::uint64_t j = j_dec; j < J; ++j) sum += f2n * w.ell(static_cast<double>(j));
  return sum + d_n * bf.beta_tilde(J);
}

double h_of_k(double k) { return std::max(1.0, std::log(k)); }

double m_threshold(std::size_t n, double delta, double k_count, double d_n, double d_n_inf,
                   const DecayProfile& p) {
  if (n < 1 || !(delta > 0.0) || !(k_count >= 1.0) || !(d_n > 0.0)) {
    throw std::invalid_argument("m_threshold needs n >= 1, delta > 0, k >= 1, D_n > 0");
  }
  return r_of_delta(p, delta / d_n) * d_n_inf * std::sqrt(static_cast<double>(n)) / std::sqrt(h_of_k(k_count));
}

double psi_weight(double eps) {
  const double inv = 1.0 / eps;
  return std::sqrt(std::log(std::max(inv, 1.0))) * std::log(std::log(std::max(inv, std::exp(1.0))));
}

double entropy_integral(const std::function<double(double)>& entropy, double sigma, EntropyWeight weight,
                        double rel_tol) {
  if (!(sigma > 0.0)) throw std::invalid_argument("entropy_integral needs sigma > 0");
  const auto g = [&](double e) {
    const double base = std::sqrt(std::max(1.0, entropy(e)));
    return weight == EntropyWeight::psi ? base * psi_weight(e) : base;
  };
  constexpr int kOctaves = 60;
  const double floor_eps = std::ldexp(sigma, -kOctaves);
  const double g_last = g(floor_eps);
  const double g_prev = g(2.0 * floor_eps);
  const double p = (g_last > 0.0 && g_prev > 0.0) ? std::log2(g_last / g_prev) : 0.0;
  if (p >= 0.95) {
    std::ostringstream s;
    s << "entropy integrand grows like eps^-p near 0 with p = " << p << " >= 0.95; the integral diverges";
    throw NumericalError(s.str());
  }
  double total = g_last * floor_eps / (1.0 - std::max(p, 0.0));
  // Small panels first.
  for (int j = kOctaves - 1; j >= 0; --j) {
    total += integrate(g, std::ldexp(sigma, -j - 1), std::ldexp(sigma, -j), rel_tol, 1e-300).value;
  }
  return total;
}

std::pair<double, double> truncate(double x, double m) {
  if (!(m > 0.0)) throw std::invalid_argument("truncate needs m > 0");
  const double hat = std::min(std::max(x, -m), m);
  return {hat, x - hat};
}

}  // namespace locstat
