#include "locstat/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "locstat/rng.hpp"

namespace locstat {

namespace {

constexpr double kE = 2.718281828459045;

// Σ_{j≥q} j^{-α}: explicit head, then Euler-Maclaurin with three correction terms.
double hurwitz_zeta(double alpha, std::uint64_t q) {
  constexpr std::uint64_t head = 128;
  const std::uint64_t n_tail = q + head;
  double sum = 0.0;
  for (std::uint64_t j = n_tail; j-- > q;) sum += std::pow(static_cast<double>(j), -alpha);
  const double N = static_cast<double>(n_tail);
  const double tail = std::pow(N, 1.0 - alpha) / (alpha - 1.0) + 0.5 * std::pow(N, -alpha) +
                      alpha * std::pow(N, -alpha - 1.0) / 12.0 -
                      alpha * (alpha + 1.0) * (alpha + 2.0) * std::pow(N, -alpha - 3.0) / 720.0;
  return sum + tail;
}

}  // namespace

DecayProfile DecayProfile::independent(double c) {
  if (!(c >= 0.0)) throw ModelError("decay profile needs c >= 0");
  return {DecayKind::independent, c, 0.0, 0.0};
}

DecayProfile DecayProfile::geometric(double c, double rho) {
  if (!(c > 0.0)) throw ModelError("geometric decay profile needs c > 0");
  if (!(rho > 0.0 && rho < 1.0)) throw ModelError("geometric decay profile needs rho in (0,1)");
  return {DecayKind::geometric, c, 0.0, rho};
}

DecayProfile DecayProfile::polynomial(double c, double alpha) {
  if (!(c > 0.0)) throw ModelError("polynomial decay profile needs c > 0");
  if (!(alpha > 1.0)) throw ModelError("polynomial decay profile needs alpha > 1 (summability)");
  return {DecayKind::polynomial, c, alpha, 0.0};
}

double DecayProfile::operator()(double k) const noexcept {
  if (k <= 0.0) return c;
  switch (kind) {
    case DecayKind::independent: return 0.0;
    case DecayKind::geometric: return c * std::pow(rho, k);
    case DecayKind::polynomial: return c * std::pow(k, -alpha);
  }
  return 0.0;
}

DecayProfile DecayProfile::scaled(double factor) const {
  if (!(factor >= 0.0) || !std::isfinite(factor)) throw ModelError("decay profile scale must be finite and >= 0");
  DecayProfile p = *this;
  p.c *= factor;
  if (p.c == 0.0) p.kind = DecayKind::independent;
  return p;
}

DecayProfile DecayProfile::lagged() const {
  DecayProfile p = *this;
  switch (kind) {
    case DecayKind::independent: break;
    case DecayKind::geometric: p.c = c / rho; break;
    // (k-1)^{-α} ≤ 2^α k^{-α} for k ≥ 2, and Δ(0) = c ≤ 2^α c at k = 1.
    case DecayKind::polynomial: p.c = c * std::pow(2.0, alpha); break;
  }
  return p;
}

std::string DecayProfile::name() const {
  std::ostringstream s;
  switch (kind) {
    case DecayKind::independent: s << "independent"; break;
    case DecayKind::geometric: s << "geometric(c=" << c << ",rho=" << rho << ")"; break;
    case DecayKind::polynomial: s << "polynomial(c=" << c << ",alpha=" << alpha << ")"; break;
  }
  return s.str();
}

bool operator==(const DecayProfile& a, const DecayProfile& b) {
  return a.kind == b.kind && a.c == b.c && a.alpha == b.alpha && a.rho == b.rho;
}

nlohmann::json to_json(const DecayProfile& p) {
  switch (p.kind) {
    case DecayKind::independent: return {{"kind", "independent"}, {"c", p.c}};
    case DecayKind::geometric: return {{"kind", "geometric"}, {"c", p.c}, {"rho", p.rho}};
    case DecayKind::polynomial: return {{"kind", "polynomial"}, {"c", p.c}, {"alpha", p.alpha}};
  }
  return {};
}

double beta(const DecayProfile& p, std::uint64_t q) {
  if (q < 1) q = 1;
  switch (p.kind) {
    case DecayKind::independent: return 0.0;
    case DecayKind::geometric: return p.c * std::pow(p.rho, static_cast<double>(q)) / (1.0 - p.rho);
    case DecayKind::polynomial: return p.c * hurwitz_zeta(p.alpha, q);
  }
  return 0.0;
}

std::uint64_t q_star(const DecayProfile& p, double x) {
  if (!(x > 0.0)) throw std::invalid_argument("q_star needs x > 0");
  return first_true([&](std::uint64_t q) { return beta(p, q) <= static_cast<double>(q) * x; });
}

double r_of_delta(const DecayProfile& p, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("r_of_delta needs delta > 0");
  // q*(r) r ≤ δ  ⟺  r ≤ δ/q and β(q) ≤ q r for q = q*(r); the largest such r is δ/q0.
  const std::uint64_t q0 = first_true([&](std::uint64_t q) { return beta(p, q) <= delta; });
  return delta / static_cast<double>(q0);
}

double BernsteinWeights::omega(double q) const {
  return std::pow(q, 1.0 / nu) * std::pow(1.0 + std::log(q), 1.5);
}

double BernsteinWeights::ell(double q) const { return std::log(kE + std::log(q)); }

BernsteinFunctionals::BernsteinFunctionals(DecayProfile profile, double nu) : p_(profile), w_{nu} {
  if (!(nu >= 2.0)) throw ModelError("Bernstein weights need nu >= 2");
  if (p_.kind == DecayKind::polynomial && !(p_.alpha > 1.0 + 1.0 / nu + kSummabilityMargin)) {
    std::ostringstream s;
    s << "sum of Delta(j) omega(j) L(j) is not numerically summable: alpha = " << p_.alpha
      << " must exceed 1 + 1/nu + " << kSummabilityMargin << " = " << 1.0 + 1.0 / nu + kSummabilityMargin;
    throw ModelError(s.str());
  }
}

double BernsteinFunctionals::beta_tilde(std::uint64_t q) const {
  if (q < 1) q = 1;
  if (p_.kind == DecayKind::independent) return 0.0;
  const auto term = [&](double j) { return p_(j) * w_.omega(j) * w_.ell(j); };
  std::uint64_t head = 200;
  if (p_.kind == DecayKind::geometric) {
    head = std::max<std::uint64_t>(head, static_cast<std::uint64_t>(std::ceil(40.0 / std::log(1.0 / p_.rho))));
  }
  return series_tail_sum(term, q, head);
}

std::uint64_t BernsteinFunctionals::q_tilde_star(double z) const {
  if (!(z > 0.0)) throw std::invalid_argument("q_tilde_star needs z > 0");
  return first_true(
      [&](std::uint64_t q) { return beta_tilde(q) <= w_.phi(static_cast<double>(q)) * z; });
}

std::vector<std::size_t> default_index_set(std::size_t n) {
  std::vector<std::size_t> idx{n / 4, n / 2, (3 * n) / 4, n};
  for (auto& i : idx) i = std::max<std::size_t>(i, 1);
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

std::vector<DeltaEstimate> estimate_delta_profile(const ProcessModel& model, std::size_t n,
                                                  const std::vector<std::size_t>& lags, double nu,
                                                  std::size_t reps, std::vector<std::size_t> i_set,
                                                  std::uint64_t seed, unsigned threads) {
  if (reps < 100) throw std::invalid_argument("estimate_delta_mc needs reps >= 100");
  if (!(nu >= 1.0)) throw std::invalid_argument("estimate_delta_mc needs nu >= 1");
  if (n < 1) throw std::invalid_argument("estimate_delta_mc needs n >= 1");
  if (i_set.empty()) i_set = default_index_set(n);
  for (auto i : i_set) {
    if (i < 1 || i > n) throw std::invalid_argument("index set must lie in [1, n]");
  }
  validate_model(model);
  const std::size_t P = history_length(model, std::nullopt);
  for (auto k : lags) {
    for (auto i : i_set) {
      if (static_cast<long>(i) - static_cast<long>(k) < 1 - static_cast<long>(P)) {
        std::ostringstream s;
        s << "lag " << k << " at index " << i << " reaches before the stored history (length " << P << ")";
        throw std::out_of_range(s.str());
      }
    }
  }

  const Innovation& eps = model_innovation(model);
  const std::size_t cells = lags.size() * i_set.size();
  std::vector<double> powers(reps * cells);
  parallel_for(reps, threads, [&](std::size_t r) {
    const std::uint64_t rs = replication_seed(seed, r);
    const Path path = simulate_path(model, n, rs);
    for (std::size_t a = 0; a < i_set.size(); ++a) {
      CounterRng rng(rs, stream_id(Stream::coupling, i_set[a]));
      for (std::size_t b = 0; b < lags.size(); ++b) {
        CounterRng sub = rng.split(lags[b]);
        const double star = eps.sample(sub);
        const double d = coupled_difference(model, path, i_set[a], lags[b], star);
        powers[r * cells + b * i_set.size() + a] = std::pow(std::abs(d), nu);
      }
    }
  });

  std::vector<DeltaEstimate> out;
  out.reserve(lags.size());
  std::vector<double> column(reps);
  for (std::size_t b = 0; b < lags.size(); ++b) {
    DeltaEstimate est{lags[b], -1.0, 0.0, 0, {}};
    for (std::size_t a = 0; a < i_set.size(); ++a) {
      for (std::size_t r = 0; r < reps; ++r) column[r] = powers[r * cells + b * i_set.size() + a];
      const double m = stats::mean(column);
      const double sd_mean = std::sqrt(stats::variance(column) / static_cast<double>(reps));
      const double value = std::pow(m, 1.0 / nu);
      // Delta method for m ↦ m^{1/ν}.
      const double se = m > 0.0 ? sd_mean * std::pow(m, 1.0 / nu - 1.0) / nu : 0.0;
      est.per_index.push_back({i_set[a], value, se});
      if (value > est.value) {
        est.value = value;
        est.se = se;
        est.argmax = i_set[a];
      }
    }
    out.push_back(std::move(est));
  }
  return out;
}

DeltaEstimate estimate_delta_mc(const ProcessModel& model, std::size_t n, std::size_t k, double nu,
                                std::size_t reps, std::vector<std::size_t> i_set, std::uint64_t seed,
                                unsigned threads) {
  return estimate_delta_profile(model, n, {k}, nu, reps, std::move(i_set), seed, threads).front();
}

DecayProfile analytic_decay_bound(const ProcessModel& model, double s) {
  const double q = 2.0 * s;
  if (const auto* rm = std::get_if<RecursiveModel>(&model)) {
    rm->validate(s);
    const double eps_q = rm->innovation.lq_norm(q);
    // ‖σ(X_{i-1})‖_q ≤ sup σ(0,·) + χ_σ C_X; each later step contracts by ρ.
    const double c = 2.0 * eps_q * (rm->scale.at_zero_sup() + rm->chi_sigma() * rm->moment_bound(q));
    if (rm->independent()) return DecayProfile::independent(c);
    return DecayProfile::geometric(c, rm->contraction(q));
  }
  const auto& lm = std::get<LinearModel>(model);
  lm.validate();
  const double eps_q = lm.innovation.lq_norm(q);
  if (!std::isfinite(eps_q)) throw ModelError("innovation has no finite moment of order 2s");
  const double c = 2.0 * eps_q * lm.modulation.sup_abs() * lm.scale;
  if (c == 0.0) return DecayProfile::independent(2.0 * eps_q * lm.a0.sup_abs());
  return lm.decay == DecayTemplate::geometric ? DecayProfile::geometric(c, lm.rate)
                                               : DecayProfile::polynomial(c, lm.rate);
}

bool uses_conditional_route(const Base& base) noexcept {
  return base.kind() == BaseKind::indicator || base.kind() == BaseKind::kernel;
}

DecayProfile class_decay_bound(const ProcessModel& model, const Base& base, double s) {
  if (base.kind() == BaseKind::constant) return DecayProfile::independent(0.0);
  const DecayProfile x = analytic_decay_bound(model, s);
  if (!uses_conditional_route(base)) {
    const double L = base.lipschitz();
    if (!std::isfinite(L)) throw ModelError("base " + base.name() + " has no finite Lipschitz constant");
    return x.kind == DecayKind::independent ? DecayProfile::independent(L * x.c) : x.scaled(L);
  }

  const Innovation& eps = model_innovation(model);
  const double a = std::abs(base.scale());
  if (const auto* rm = std::get_if<RecursiveModel>(&model)) {
    if (rm->independent()) return DecayProfile::independent(0.0);
    const double sm = rm->sigma_min();
    // Lipschitz constant of z ↦ E[f̄(m(z) + σ(z) ε)], differentiating along m and σ.
    double lip;
    if (base.kind() == BaseKind::indicator) {
      lip = (eps.pdf_sup() * rm->chi_m() + eps.pdf_moment_sup() * rm->chi_sigma()) / sm;
    } else {
      if (!eps.smooth_density()) throw ModelError("kernel base needs a differentiable innovation density");
      const double mass = std::sqrt(base.bandwidth()) * base.kernel().l1();
      lip = mass *
            (eps.pdf_derivative_sup() * rm->chi_m() +
             (eps.pdf_sup() + eps.pdf_derivative_moment_sup()) * rm->chi_sigma()) /
            (sm * sm);
    }
    // X_{i-1} is one step behind X_i, so the lag shifts by one.
    return x.lagged().scaled(a * lip);
  }

  const auto& lm = std::get<LinearModel>(model);
  if (x.kind == DecayKind::independent) return DecayProfile::independent(0.0);
  const double a0 = lm.a0.inf();
  double lip;
  if (base.kind() == BaseKind::indicator) {
    lip = eps.pdf_sup() / a0;
  } else {
    if (!eps.smooth_density()) throw ModelError("kernel base needs a differentiable innovation density");
    lip = std::sqrt(base.bandwidth()) * base.kernel().l1() * eps.pdf_derivative_sup() / (a0 * a0);
  }
  // The conditional mean depends on Σ_{j≥1} a_j ε_{i-j}, whose coupling distance is ≤ Δ_X.
  return x.scaled(a * lip);
}

SubmultReport check_submultiplicativity(const DecayProfile& p, SubmultKind kind, std::uint64_t q_max,
                                        double nu) {
  if (q_max < 4) throw std::invalid_argument("check_submultiplicativity needs q_max >= 4");
  SubmultReport rep{0.0, 1, 1, q_max};
  if (p.kind == DecayKind::independent) return rep;
  std::vector<double> g(q_max * q_max + 1, 0.0);
  if (kind == SubmultKind::beta) {
    for (std::uint64_t q = 1; q <= q_max * q_max; ++q) g[q] = beta(p, q);
  } else {
    const BernsteinFunctionals bf(p, nu);
    for (std::uint64_t q = 1; q <= q_max * q_max; ++q) {
      g[q] = bf.beta_tilde(q) / bf.weights().phi(static_cast<double>(q));
    }
  }
  for (std::uint64_t a = 1; a <= q_max; ++a) {
    for (std::uint64_t b = 1; b <= q_max; ++b) {
      const double den = g[a] * g[b];
      if (!(den > 0.0)) continue;
      const double ratio = g[a * b] / den;
      if (ratio > rep.constant) {
        rep.constant = ratio;
        rep.q1 = a;
        rep.q2 = b;
      }
    }
  }
  return rep;
}

namespace {

// β(q)/q ∈ [c q^{-α}, C q^{-α}] and β(q) ∈ [c q^{1-α}, C q^{1-α}].
struct PolyConstants {
  double c, C;
};
PolyConstants poly_constants(const DecayProfile& p) {
  return {p.c / (p.alpha - 1.0), p.c * p.alpha / (p.alpha - 1.0)};
}

struct GeoConstants {
  double c1, C1;
};
// β(q) = C ρ^q with C = c/(1-ρ). C is raised to max(C, 8, 1/L) for the upper bound,
// and the lower constant is capped at 1 because q* ≥ 1.
GeoConstants geo_constants(const DecayProfile& p) {
  const double L = std::log(1.0 / p.rho);
  const double C = std::max({p.c / (1.0 - p.rho), 8.0, 1.0 / L});
  return {std::min(1.0, 1.0 / (4.0 * L)), 2.0 * (1.0 + std::log(C * L)) / L};
}

}  // namespace

Sandwich q_star_closed_form(const DecayProfile& p, double x) {
  if (!(x > 0.0)) throw std::invalid_argument("q_star_closed_form needs x > 0");
  switch (p.kind) {
    case DecayKind::independent: return {1.0, 1.0, 1.0};
    case DecayKind::polynomial: {
      const auto [c, C] = poly_constants(p);
      const double shape = std::max(std::pow(x, -1.0 / p.alpha), 1.0);
      return {shape, std::pow(std::min(c, 1.0), 1.0 / p.alpha), 2.0 * std::pow(std::max(C, 1.0), 1.0 / p.alpha)};
    }
    case DecayKind::geometric: {
      const auto g = geo_constants(p);
      return {std::max(std::log(1.0 / x), 1.0), g.c1, g.C1};
    }
  }
  return {1.0, 1.0, 1.0};
}

Sandwich r_closed_form(const DecayProfile& p, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("r_closed_form needs delta > 0");
  switch (p.kind) {
    case DecayKind::independent: return {delta, 1.0, 1.0};
    case DecayKind::polynomial: {
      const auto [c, C] = poly_constants(p);
      const double e = p.alpha / (p.alpha - 1.0);
      const double inv = 1.0 / (p.alpha - 1.0);
      return {std::min(std::pow(delta, e), delta), std::pow(2.0, -e) * std::pow(std::max(C, 1.0), -inv),
              std::pow(2.0, e) * std::pow(std::min(c, 1.0), -inv)};
    }
    case DecayKind::geometric: {
      const auto g = geo_constants(p);
      const double shape = delta / std::max(std::log(1.0 / delta), 1.0);
      // r ≤ δ forces the upper constant to be at least one where the shape equals δ.
      const double upper = std::max(1.0, 2.0 / g.c1 * (1.0 + std::log(1.0 / (2.0 * g.c1))));
      const double lower = 1.0 / (g.C1 * 2.0 * (1.0 + std::log(2.0 * g.C1)));
      return {shape, lower, upper};
    }
  }
  return {delta, 1.0, 1.0};
}

}  // namespace locstat
