#include "locstat/process_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "locstat/csv.hpp"
#include "locstat/rng.hpp"

namespace locstat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Polynomial freeze(const Polynomial& p, double u) { return Polynomial::constant(p(u)); }

double time_of(long i, std::size_t n) {
  return i >= 1 ? static_cast<double>(i) / static_cast<double>(n) : 1.0 / static_cast<double>(n);
}

}  // namespace

// ---------------------------------------------------------------- ScaleFamily

ScaleFamily ScaleFamily::affine_abs(Polynomial c0, Polynomial c1) {
  ScaleFamily s;
  s.kind_ = ScaleKind::affine_abs;
  s.c0_ = std::move(c0);
  s.c1_ = std::move(c1);
  return s;
}

ScaleFamily ScaleFamily::arch(Polynomial c0, Polynomial c1) {
  ScaleFamily s;
  s.kind_ = ScaleKind::arch;
  s.c0_ = std::move(c0);
  s.c1_ = std::move(c1);
  return s;
}

double ScaleFamily::operator()(double x, double u) const noexcept {
  if (kind_ == ScaleKind::affine_abs) return c0_(u) + c1_(u) * std::abs(x);
  return std::sqrt(c0_(u) + c1_(u) * x * x);
}

double ScaleFamily::lipschitz() const noexcept {
  const double c1 = c1_.sup_abs();
  return kind_ == ScaleKind::affine_abs ? c1 : std::sqrt(c1);
}

double ScaleFamily::min_value() const noexcept {
  const double c0 = c0_.inf();
  if (kind_ == ScaleKind::affine_abs) return c0;
  return c0 > 0.0 ? std::sqrt(c0) : 0.0;
}

double ScaleFamily::at_zero_sup() const noexcept {
  const double c0 = c0_.sup();
  return kind_ == ScaleKind::affine_abs ? c0 : std::sqrt(std::max(c0, 0.0));
}

double ScaleFamily::holder_u() const noexcept {
  const double d0 = c0_.derivative_sup_abs();
  const double d1 = c1_.derivative_sup_abs();
  if (kind_ == ScaleKind::affine_abs) return std::max(d0, d1);
  // |sqrt(A) - sqrt(B)| ≤ |A - B| / (sqrt(A) + sqrt(B)) per coordinate.
  const double t0 = d0 == 0.0 ? 0.0 : d0 / (2.0 * std::sqrt(c0_.inf()));
  double t1 = 0.0;
  if (d1 != 0.0) t1 = c1_.inf() > 0.0 ? d1 / (2.0 * std::sqrt(c1_.inf())) : kInf;
  return std::max(t0, t1);
}

ScaleFamily ScaleFamily::frozen_at(double u) const {
  ScaleFamily s = *this;
  s.c0_ = freeze(c0_, u);
  s.c1_ = freeze(c1_, u);
  return s;
}

// ------------------------------------------------------------- RecursiveModel

double RecursiveModel::contraction(double q) const {
  const double chi_s = chi_sigma();
  if (chi_s == 0.0) return chi_m();
  return chi_m() + innovation.lq_norm(q) * chi_s;
}

double RecursiveModel::moment_bound(double q) const {
  const double rho = contraction(q);
  if (!(rho < 1.0)) return kInf;
  return (b.sup_abs() + scale.at_zero_sup() * innovation.lq_norm(q)) / (1.0 - rho);
}

double RecursiveModel::holder_mean() const noexcept {
  return std::max(a.derivative_sup_abs(), b.derivative_sup_abs());
}

RecursiveModel RecursiveModel::frozen_at(double u) const {
  RecursiveModel m = *this;
  m.a = freeze(a, u);
  m.b = freeze(b, u);
  m.scale = scale.frozen_at(u);
  return m;
}

void RecursiveModel::validate(double s) const {
  if (scale.c1().inf() < 0.0) throw ModelError("scale slope c1(u) must be nonnegative on [0,1]");
  if (!(sigma_min() > 0.0)) {
    std::ostringstream msg;
    msg << "scale family has sigma_min = " << sigma_min() << "; need sigma(x,u) >= sigma_min > 0";
    throw ModelError(msg.str());
  }
  const double rho = contraction(2.0 * s);
  if (!(rho < 1.0)) {
    std::ostringstream msg;
    msg << "contraction violated: chi_m + ||eps||_" << 2.0 * s << " * chi_sigma = " << chi_m() << " + "
        << innovation.lq_norm(2.0 * s) << " * " << chi_sigma() << " = " << rho << " >= 1";
    throw ModelError(msg.str());
  }
}

// ---------------------------------------------------------------- LinearModel

double LinearModel::template_weight(std::size_t j) const noexcept {
  if (j == 0) return 1.0;
  const double jj = static_cast<double>(j);
  return decay == DecayTemplate::geometric ? scale * std::pow(rate, jj) : scale * std::pow(jj, -rate);
}

double LinearModel::coefficient(std::size_t j, double u) const noexcept {
  return j == 0 ? a0(u) : modulation(u) * template_weight(j);
}

double LinearModel::envelope(std::size_t j) const noexcept {
  return j == 0 ? a0.sup_abs() : modulation.sup_abs() * template_weight(j);
}

double LinearModel::envelope_tail(std::size_t J) const noexcept {
  const double w = modulation.sup_abs() * scale;
  const double jj = static_cast<double>(J);
  if (decay == DecayTemplate::geometric) return w * std::pow(rate, jj + 1.0) / (1.0 - rate);
  // Σ_{j>J} j^{-α} ≤ ∫_J^∞ x^{-α} dx for J ≥ 1.
  if (J == 0) return kInf;
  return w * std::pow(jj, 1.0 - rate) / (rate - 1.0);
}

std::size_t LinearModel::truncation() const {
  const double eps2 = innovation.lq_norm(2.0);
  const double target = truncation_tol / eps2;
  std::size_t lo = 1;
  if (envelope_tail(lo) < target) return lo;
  std::size_t hi = 2;
  while (!(envelope_tail(hi) < target)) {
    if (hi > max_history) {
      std::ostringstream msg;
      msg << "linear model needs more than " << max_history << " lags to reach truncation tolerance "
          << truncation_tol;
      throw ModelError(msg.str());
    }
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (envelope_tail(mid) < target ? hi : lo) = mid;
  }
  return hi;
}

LinearModel LinearModel::frozen_at(double u) const {
  LinearModel m = *this;
  m.a0 = freeze(a0, u);
  m.modulation = freeze(modulation, u);
  return m;
}

void LinearModel::validate() const {
  if (decay == DecayTemplate::geometric && !(rate > 0.0 && rate < 1.0))
    throw ModelError("geometric coefficient template needs rho in (0, 1) (summable)");
  if (decay == DecayTemplate::polynomial && !(rate > 1.0))
    throw ModelError("polynomial coefficient template needs alpha > 1 (summable)");
  if (!(scale > 0.0)) throw ModelError("coefficient template scale must be positive");
  if (!(a0.inf() > 0.0)) throw ModelError("linear model needs inf_u a0(u) > 0");
}

// ----------------------------------------------------------------- generic

std::string model_tag(const ProcessModel& model) {
  return std::visit([](const auto& m) { return m.tag; }, model);
}

const Innovation& model_innovation(const ProcessModel& model) {
  return std::visit([](const auto& m) -> const Innovation& { return m.innovation; }, model);
}

void validate_model(const ProcessModel& model) {
  std::visit([](const auto& m) { m.validate(); }, model);
}

std::size_t default_burn_in(const RecursiveModel& model) {
  const double rho = model.contraction(2.0);
  if (rho <= 0.0) return 0;
  if (!(rho < 1.0)) throw ModelError("burn-in undefined: contraction >= 1");
  return static_cast<std::size_t>(std::ceil(std::log(1e-12) / std::log(rho)));
}

std::size_t history_length(const ProcessModel& model, std::optional<std::size_t> burn_in) {
  if (const auto* rec = std::get_if<RecursiveModel>(&model)) {
    return burn_in ? *burn_in : default_burn_in(*rec);
  }
  return std::get<LinearModel>(model).truncation();
}

Path path_from_innovations(const ProcessModel& model, std::size_t n, std::vector<double> innovations,
                           std::size_t prefix) {
  if (n < 1) throw std::invalid_argument("simulate: n must be >= 1");
  if (innovations.size() != prefix + n)
    throw std::invalid_argument("simulate: innovation record must have prefix + n entries");
  Path path;
  path.n = n;
  path.prefix = prefix;
  path.model_tag = model_tag(model);
  path.values.resize(n);

  if (const auto* rec = std::get_if<RecursiveModel>(&model)) {
    path.prehistory.resize(prefix);
    double x = 0.0;
    for (std::size_t idx = 0; idx < prefix + n; ++idx) {
      const long i = static_cast<long>(idx) + 1 - static_cast<long>(prefix);
      const double u = time_of(i, n);
      x = rec->mean(x, u) + rec->sigma(x, u) * innovations[idx];
      if (i <= 0) {
        path.prehistory[idx] = x;
      } else {
        path.values[static_cast<std::size_t>(i) - 1] = x;
      }
    }
    path.x0 = prefix > 0 ? path.prehistory.back() : 0.0;
  } else {
    const auto& lin = std::get<LinearModel>(model);
    std::vector<double> w(prefix + 1);
    for (std::size_t j = 1; j <= prefix; ++j) w[j] = lin.template_weight(j);
    for (std::size_t i = 1; i <= n; ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(n);
      const std::size_t at = i - 1 + prefix;  // position of ε_i
      double acc = 0.0;
      for (std::size_t j = prefix; j >= 1; --j) acc += w[j] * innovations[at - j];
      path.values[i - 1] = lin.a0(u) * innovations[at] + lin.modulation(u) * acc;
    }
  }
  path.innovations = std::move(innovations);
  return path;
}

namespace {

std::vector<double> draw_innovations(const Innovation& law, std::size_t count, std::uint64_t seed) {
  CounterRng rng(seed, stream_id(Stream::innovations, 0));
  std::vector<double> eps(count);
  for (auto& e : eps) e = law.sample(rng);
  return eps;
}

}  // namespace

Path simulate_path(const ProcessModel& model, std::size_t n, std::uint64_t seed,
                   std::optional<std::size_t> burn_in) {
  validate_model(model);
  if (n < 1) throw std::invalid_argument("simulate_path: n must be >= 1");
  const std::size_t prefix = history_length(model, burn_in);
  Path path = path_from_innovations(model, n, draw_innovations(model_innovation(model), prefix + n, seed),
                                    prefix);
  path.seed = seed;
  return path;
}

Path simulate_stationary(const ProcessModel& model, double u, std::size_t n, std::uint64_t seed,
                         std::optional<std::size_t> burn_in) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("simulate_stationary: u must lie in [0, 1]");
  const ProcessModel frozen = std::visit([u](const auto& m) -> ProcessModel { return m.frozen_at(u); }, model);
  return simulate_path(frozen, n, seed, burn_in);
}

std::pair<Path, Path> simulate_coupled(const ProcessModel& model, std::size_t n, std::size_t k,
                                       std::size_t i, std::uint64_t seed,
                                       std::optional<std::size_t> burn_in) {
  if (k < 1) throw std::invalid_argument("simulate_coupled: lag k must be >= 1");
  if (i < 1 || i > n) throw std::invalid_argument("simulate_coupled: index i must lie in [1, n]");
  Path base = simulate_path(model, n, seed, burn_in);
  const long target = static_cast<long>(i) - static_cast<long>(k);
  if (target < 1 - static_cast<long>(base.prefix)) {
    std::ostringstream msg;
    msg << "simulate_coupled: i - k = " << target << " precedes the stored history (starts at "
        << 1 - static_cast<long>(base.prefix) << ")";
    throw std::out_of_range(msg.str());
  }
  CounterRng rng(seed, stream_id(Stream::coupling, 0));
  const double eps_star = model_innovation(model).sample(rng);
  std::vector<double> eps = base.innovations;
  eps[static_cast<std::size_t>(target - 1 + static_cast<long>(base.prefix))] = eps_star;
  Path coupled = path_from_innovations(model, n, std::move(eps), base.prefix);
  coupled.seed = seed;
  return {std::move(base), std::move(coupled)};
}

double coupled_difference(const ProcessModel& model, const Path& path, std::size_t i, std::size_t k,
                          double eps_star) {
  if (i < 1 || i > path.n) throw std::invalid_argument("coupled_difference: index i must lie in [1, n]");
  const long target = static_cast<long>(i) - static_cast<long>(k);
  if (target < 1 - static_cast<long>(path.prefix)) {
    std::ostringstream msg;
    msg << "lag " << k << " at index " << i << " exceeds the stored history of " << path.prefix;
    throw std::out_of_range(msg.str());
  }
  if (const auto* rec = std::get_if<RecursiveModel>(&model)) {
    // State before step i-k.
    const long before = target - 1;
    double x = 0.0;
    if (before >= 1) {
      x = path.values[static_cast<std::size_t>(before) - 1];
    } else if (before > -static_cast<long>(path.prefix)) {
      x = path.prehistory[static_cast<std::size_t>(before - 1 + static_cast<long>(path.prefix))];
    }
    for (long j = target; j <= static_cast<long>(i); ++j) {
      const double u = time_of(j, path.n);
      const double e = j == target ? eps_star : path.innovation(j);
      x = rec->mean(x, u) + rec->sigma(x, u) * e;
    }
    return x - path.values[i - 1];
  }
  const auto& lin = std::get<LinearModel>(model);
  if (k > path.prefix) return 0.0;
  const double u = static_cast<double>(i) / static_cast<double>(path.n);
  return lin.coefficient(k, u) * (eps_star - path.innovation(target));
}

// ---------------------------------------------------- conditional functional

namespace {

/// ∫ h(e) g(e) de over the innovation support, split at the given points.
double integrate_over_innovation(const Innovation& law, const std::function<double(double)>& h,
                                 std::vector<double> breaks) {
  double lo = -kInf, hi = kInf;
  if (law.kind() == InnovationKind::uniform) {
    lo = -law.parameter();
    hi = law.parameter();
  }
  std::vector<double> pts{lo};
  std::sort(breaks.begin(), breaks.end());
  for (double b : breaks)
    if (b > lo && b < hi) pts.push_back(b);
  pts.push_back(hi);
  const auto integrand = [&](double e) {
    const double g = law.pdf(e);
    return g == 0.0 ? 0.0 : h(e) * g;
  };
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < pts.size(); ++j) total += integrate(integrand, pts[j], pts[j + 1], 1e-8, 1e-14).value;
  return total;
}

}  // namespace

double conditional_functional(const RecursiveModel& model, const Base& base, double z_prev, double u,
                              int kappa) {
  if (kappa != 1 && kappa != 2) throw std::invalid_argument("conditional_functional: kappa must be 1 or 2");
  const double m = model.mean(z_prev, u);
  const double s = model.sigma(z_prev, u);
  const double a = base.scale();
  const Innovation& law = model.innovation;

  switch (base.kind()) {
    case BaseKind::constant: return kappa == 1 ? base.location() : std::abs(base.location());
    case BaseKind::identity:
      return kappa == 1 ? a * m : std::abs(a) * std::sqrt(m * m + s * s * law.variance());
    case BaseKind::indicator: {
      const double p = law.cdf((base.location() - m) / s);
      return kappa == 1 ? a * p : std::abs(a) * std::sqrt(p);
    }
    case BaseKind::kernel: {
      // Substitute z = x + h2 ω: E[f̄^κ] = h2^{1-κ/2} ∫ K̃(ω)^κ g((x + h2 ω - m)/s) / s dω.
      const double h2 = base.bandwidth();
      const double x = base.location();
      const Kernel& kt = base.kernel();
      std::vector<double> pts{-0.5, 0.5};
      if (law.kind() == InnovationKind::uniform) {
        for (double edge : {-law.parameter(), law.parameter()}) {
          const double w = (m + s * edge - x) / h2;
          if (w > -0.5 && w < 0.5) pts.push_back(w);
        }
        std::sort(pts.begin(), pts.end());
      }
      const auto integrand = [&](double w) {
        return std::pow(kt(w), kappa) * law.pdf((x + h2 * w - m) / s) / s;
      };
      double acc = 0.0;
      for (std::size_t j = 0; j + 1 < pts.size(); ++j) acc += integrate(integrand, pts[j], pts[j + 1], 1e-8, 1e-14).value;
      const double moment = std::pow(h2, 1.0 - 0.5 * kappa) * acc;
      return kappa == 1 ? a * moment : std::abs(a) * std::sqrt(moment);
    }
    case BaseKind::abs_deviation:
    case BaseKind::generic: {
      std::vector<double> breaks;
      if (base.kind() == BaseKind::abs_deviation) breaks.push_back((base.location() - m) / s);
      const auto h = [&](double e) {
        const double v = base(m + s * e);
        return kappa == 1 ? v : v * v;
      };
      const double moment = integrate_over_innovation(law, h, breaks);
      return kappa == 1 ? moment : std::sqrt(moment);
    }
  }
  return 0.0;
}

void write_path_csv(std::ostream& out, const Path& path) {
  CsvWriter csv(out);
  csv.header({"index", "u", "X"});
  for (std::size_t i = 1; i <= path.n; ++i) {
    csv.cell(i).cell(static_cast<double>(i) / static_cast<double>(path.n)).cell(path.values[i - 1]);
    csv.end_row();
  }
}

}  // namespace locstat
