#include "locstat/empirical_process.hpp"

#include <cmath>
#include <sstream>

#include "locstat/rng.hpp"
#include "locstat/seminorm.hpp"

namespace locstat {

namespace {

double u_of(std::size_t i, std::size_t n) { return static_cast<double>(i) / static_cast<double>(n); }

// Linear models whose weights beyond lag 0 vanish are independent; they are recast as
// X_i = a_0(i/n) ε_i so conditional_functional applies.
std::optional<RecursiveModel> independent_form(const ProcessModel& model) {
  if (const auto* rm = std::get_if<RecursiveModel>(&model)) {
    if (rm->independent()) return *rm;
    return std::nullopt;
  }
  const auto& lm = std::get<LinearModel>(model);
  if (lm.modulation.sup_abs() * lm.scale != 0.0) return std::nullopt;
  RecursiveModel r;
  r.a = Polynomial::constant(0.0);
  r.b = Polynomial::constant(0.0);
  r.scale = ScaleFamily::affine_abs(lm.a0, Polynomial::constant(0.0));
  r.innovation = lm.innovation;
  r.tag = lm.tag;
  return r;
}

}  // namespace

bool has_analytic_centering(const FunctionClass& f, const ProcessModel& model) {
  const BaseKind k = f.base.kind();
  return k == BaseKind::constant || k == BaseKind::identity || independent_form(model).has_value();
}

Centering analytic_centering(const FunctionClass& f, const ProcessModel& model, std::size_t n) {
  if (n < 1) throw std::invalid_argument("centering needs n >= 1");
  Centering c{CenteringKind::analytic, std::vector<double>(n)};
  const BaseKind k = f.base.kind();
  if (k == BaseKind::constant) {
    for (std::size_t i = 1; i <= n; ++i) c.means[i - 1] = f(0.0, u_of(i, n));
    return c;
  }
  if (k == BaseKind::identity) {
    if (const auto* rm = std::get_if<RecursiveModel>(&model)) {
      // The mean follows the noiseless recursion from the same zero start as simulate_path.
      const std::size_t burn = history_length(model, std::nullopt);
      double mu = 0.0;
      const double u0 = u_of(1, n);
      for (std::size_t t = 0; t < burn; ++t) mu = rm->mean(mu, u0);
      for (std::size_t i = 1; i <= n; ++i) {
        mu = rm->mean(mu, u_of(i, n));
        c.means[i - 1] = f(mu, u_of(i, n));
      }
    } else {
      for (std::size_t i = 1; i <= n; ++i) c.means[i - 1] = f(0.0, u_of(i, n));
    }
    return c;
  }
  const auto ind = independent_form(model);
  if (!ind) {
    throw ModelError("analytic centering is unavailable for base " + f.base.name() +
                     " under a dependent model; use mc centering");
  }
  for (std::size_t i = 1; i <= n; ++i) {
    const double u = u_of(i, n);
    c.means[i - 1] = f.factor(u) * conditional_functional(*ind, f.base, 0.0, u, 1);
  }
  return c;
}

Centering mc_centering(const FunctionClass& f, const ProcessModel& model, std::size_t n, std::size_t reps,
                       std::uint64_t seed, unsigned threads) {
  if (reps < 1) throw std::invalid_argument("mc centering needs reps >= 1");
  const std::uint64_t base_seed = splitmix64(seed ^ stream_id(Stream::centering, 0));
  std::vector<double> first(n);
  std::vector<double> acc(n, 0.0);
  constexpr std::size_t kChunk = 128;
  std::vector<std::vector<double>> block;
  for (std::size_t start = 0; start < reps; start += kChunk) {
    const std::size_t len = std::min(kChunk, reps - start);
    block.assign(len, std::vector<double>(n));
    parallel_for(len, threads, [&](std::size_t r) {
      const Path path = simulate_path(model, n, replication_seed(base_seed, start + r));
      for (std::size_t i = 1; i <= n; ++i) block[r][i - 1] = f(path.x(i), u_of(i, n));
    });
    for (std::size_t r = 0; r < len; ++r) {
      if (start + r == 0) {
        first = block[r];
        continue;
      }
      // Shifted by the first draw so constant functionals are reproduced exactly.
      for (std::size_t i = 0; i < n; ++i) acc[i] += block[r][i] - first[i];
    }
  }
  Centering c{CenteringKind::mc, std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) c.means[i] = first[i] + acc[i] / static_cast<double>(reps);
  return c;
}

double evaluate_gn(const FunctionClass& f, const Path& path, const Centering& centering) {
  const std::size_t n = path.n;
  if (centering.means.size() != n) throw std::invalid_argument("centering length does not match the path");
  double acc = 0.0;
  for (std::size_t i = 1; i <= n; ++i) acc += f(path.x(i), u_of(i, n)) - centering.means[i - 1];
  return acc / std::sqrt(static_cast<double>(n));
}

std::vector<double> martingale_increments(const FunctionClass& f, const Path& path, const RecursiveModel& model) {
  const std::size_t n = path.n;
  std::vector<double> inc(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const double u = u_of(i, n);
    inc[i - 1] = f(path.x(i), u) - f.factor(u) * conditional_functional(model, f.base, path.x(i - 1), u, 1);
  }
  return inc;
}

MartingaleParts martingale_parts(const FunctionClass& f, const Path& path, const RecursiveModel& model,
                                 const Centering& centering) {
  const std::size_t n = path.n;
  if (centering.means.size() != n) throw std::invalid_argument("centering length does not match the path");
  double g1 = 0.0, g2 = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double u = u_of(i, n);
    const double cond = f.factor(u) * conditional_functional(model, f.base, path.x(i - 1), u, 1);
    g1 += f(path.x(i), u) - cond;
    g2 += cond - centering.means[i - 1];
  }
  const double s = std::sqrt(static_cast<double>(n));
  return {g1 / s, g2 / s, evaluate_gn(f, path, centering)};
}

std::size_t default_lag_truncation(const ProcessModel& model) {
  const DecayProfile p = analytic_decay_bound(model);
  if (p.kind == DecayKind::independent) return 0;
  const double b1 = beta(p, 1);
  return first_true([&](std::uint64_t J) { return beta(p, J) < 1e-3 * b1; });
}

LongRunAtU long_run_at(const Base& f, const Base& g, const ProcessModel& model, double u, std::size_t lags,
                       const LongRunMc& mc, std::uint64_t seed, unsigned threads) {
  if (mc.paths < 2 || mc.length <= 2 * lags + 1) {
    throw std::invalid_argument("long-run covariance needs >= 2 paths longer than 2J+1");
  }
  const std::size_t L = mc.length;
  const std::size_t R = mc.paths;
  std::vector<std::vector<double>> F(R, std::vector<double>(L)), G(R, std::vector<double>(L));
  const std::uint64_t base_seed = splitmix64(seed ^ stream_id(Stream::stationary, 0));
  parallel_for(R, threads, [&](std::size_t r) {
    const Path p = simulate_stationary(model, u, L, replication_seed(base_seed, r));
    for (std::size_t t = 0; t < L; ++t) {
      F[r][t] = f(p.values[t]);
      G[r][t] = g(p.values[t]);
    }
  });
  // Pooled means over all paths.
  double mf = 0.0, mg = 0.0;
  for (std::size_t r = 0; r < R; ++r) {
    mf += stats::mean(F[r]);
    mg += stats::mean(G[r]);
  }
  mf /= static_cast<double>(R);
  mg /= static_cast<double>(R);

  std::vector<double> per_path(R), edge(R);
  parallel_for(R, threads, [&](std::size_t r) {
    const auto& x = F[r];
    const auto& y = G[r];
    double total = 0.0;
    double last = 0.0;
    for (std::size_t j = 0; j <= lags; ++j) {
      double fwd = 0.0, bwd = 0.0;
      for (std::size_t t = 0; t + j < L; ++t) {
        fwd += (x[t] - mf) * (y[t + j] - mg);
        bwd += (x[t + j] - mf) * (y[t] - mg);
      }
      const double w = 1.0 / static_cast<double>(L - j);
      total += j == 0 ? fwd * w : (fwd + bwd) * w;
      if (j == lags) last = 0.5 * (fwd + bwd) * w;
    }
    per_path[r] = total;
    edge[r] = last;
  });
  const double sigma = stats::mean(per_path);
  const double se = std::sqrt(stats::variance(per_path) / static_cast<double>(R));
  // Extrapolate the omitted lags along the analytic profile: Σ_{|j|>J} |γ(j)| ≈ 2|γ(J)| β(J+1)/Δ(J).
  double tail = 0.0;
  const DecayProfile p = analytic_decay_bound(model);
  if (p.kind != DecayKind::independent && lags > 0) {
    tail = 2.0 * std::abs(stats::mean(edge)) * beta(p, lags + 1) / p(static_cast<double>(lags));
  }
  return {sigma, se, tail};
}

CovarianceResult long_run_covariance(const Base& f, const Base& g, const ProcessModel& model,
                                     const CovarianceSpec& spec, const LongRunMc& mc, std::uint64_t seed,
                                     unsigned threads) {
  const std::size_t J = spec.lag_truncation > 0 ? spec.lag_truncation : default_lag_truncation(model);
  CovarianceResult out{spec.kind, f.name(), g.name(), 0.0, 0.0, false, 0.0, J};
  if (spec.kind == CovarianceCase::local) {
    if (!(spec.v > 0.0 && spec.v < 1.0) || !(spec.h > 0.0)) {
      throw ModelError("local covariance needs v in (0,1) and h > 0");
    }
    const auto r = long_run_at(f, g, model, spec.v, J, mc, seed, threads);
    const double w = spec.kernel.l2_squared() * spec.omega(spec.v) * spec.omega(spec.v);
    out.sigma = w * r.sigma;
    out.mc_se = w * r.se;
    out.tail_estimate = w * r.tail_estimate;
  } else {
    if (spec.u_grid < 2) throw std::invalid_argument("global covariance needs u_grid >= 2");
    double var = 0.0;
    for (std::size_t k = 0; k < spec.u_grid; ++k) {
      const double u = static_cast<double>(k) / static_cast<double>(spec.u_grid - 1);
      const double trap = (k == 0 || k + 1 == spec.u_grid ? 0.5 : 1.0) / static_cast<double>(spec.u_grid - 1);
      const auto r = long_run_at(f, g, model, u, J, mc, splitmix64(seed + k), threads);
      const double w = trap * spec.omega(u) * spec.omega(u);
      out.sigma += w * r.sigma;
      out.tail_estimate += w * r.tail_estimate;
      var += w * w * r.se * r.se;
    }
    out.mc_se = std::sqrt(var);
  }
  out.tail_flag = out.tail_estimate > 0.05 * std::abs(out.sigma);
  return out;
}

nlohmann::json to_json(const CovarianceResult& r) {
  return {{"case", r.kind == CovarianceCase::global ? "global" : "local"},
          {"f", r.f},
          {"g", r.g},
          {"sigma", r.sigma},
          {"mc_se", r.mc_se},
          {"tail_flag", r.tail_flag},
          {"tail_estimate", r.tail_estimate},
          {"lag_truncation", r.lag_truncation}};
}

VarianceCheck variance_bound_check(const FunctionClass& f, const ProcessModel& model, std::size_t n,
                                   std::size_t reps, std::uint64_t seed, unsigned threads, double v_scale) {
  if (reps < 100) throw std::invalid_argument("variance_bound_check needs reps >= 100");
  std::vector<double> sums(reps), squares(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    const Path path = simulate_path(model, n, replication_seed(seed, r));
    double s = 0.0, q = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      const double v = f(path.x(i), u_of(i, n));
      s += v;
      q += v * v;
    }
    sums[r] = s / std::sqrt(static_cast<double>(n));
    squares[r] = q / static_cast<double>(n);
  });
  // Var(G_n(f)) does not depend on the centering, so the raw sums suffice.
  VarianceCheck out{};
  out.var_hat = stats::variance(sums);
  out.var_se = stats::variance_se(sums);
  out.f2n = std::sqrt(stats::mean(squares));
  const FunctionClass members[] = {f};
  out.d_n = class_normalizers(members, n).d_n;
  out.profile = class_decay_bound(model, f.base);
  out.v_scale = v_scale;
  out.v = v_scale * v_norm(out.f2n, out.d_n, out.profile);
  const double rel = out.var_hat > 0.0 ? out.var_se / out.var_hat : 0.0;
  out.pass = out.var_hat <= out.v * out.v * (1.0 + 4.0 * rel);
  return out;
}

nlohmann::json to_json(const VarianceCheck& r) {
  return {{"var_hat", r.var_hat}, {"var_se", r.var_se}, {"f2n", r.f2n},   {"d_n", r.d_n},
          {"V", r.v},             {"V_scale", r.v_scale}, {"profile", to_json(r.profile)}, {"pass", r.pass}};
}

}  // namespace locstat
