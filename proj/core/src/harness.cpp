#include "locstat/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "config_node.hpp"
#include "locstat/estimators.hpp"
#include "locstat/rng.hpp"
#include "locstat/seminorm.hpp"

namespace locstat {

namespace {

using nlohmann::json;
using detail::Node;

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t k) { return splitmix64(seed ^ stream_id(Stream::experiment, k)); }

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

ExperimentReport start_report(const ExperimentConfig& cfg) {
  ExperimentReport r;
  r.name = cfg.name;
  r.kind = cfg.kind;
  r.config = cfg.raw;
  r.config_hash = config_hash(cfg.raw);
  r.seed = cfg.seed;
  r.version = LOCSTAT_VERSION;
  r.negative_control = cfg.negative_control;
  r.details = json::object();
  r.plot = json::array();
  return r;
}

/// Records a check and its deliberately wrong variant. In negative-control mode the wrong
/// variant is judged as a primary verdict, so the report must fail.
void judge(ExperimentReport& r, const std::string& criterion, const std::string& check, bool pass,
           const std::string& detail) {
  r.verdicts.push_back({criterion, check, pass, detail});
}

void control(ExperimentReport& r, const std::string& criterion, const std::string& check, bool wrong_passes,
             const std::string& detail) {
  if (r.negative_control) {
    r.verdicts.push_back({criterion, check, wrong_passes, detail});
  } else {
    r.controls.push_back({criterion, check, !wrong_passes, detail});
  }
}

std::vector<std::size_t> require_n_list(const ExperimentConfig& cfg, std::vector<std::size_t> fallback) {
  return cfg.n_list.empty() ? fallback : cfg.n_list;
}

double median(std::vector<double> x) { return stats::median(std::move(x)); }

/// Max over min of the medians; 1 when every median is zero (a deterministic statistic).
double spread(const std::vector<double>& medians) {
  const auto [lo, hi] = std::minmax_element(medians.begin(), medians.end());
  if (*hi == 0.0) return 1.0;
  if (*lo == 0.0) return std::numeric_limits<double>::infinity();
  return *hi / *lo;
}

Centering centering_for(const FunctionClass& f, const ProcessModel& model, std::size_t n, std::size_t reps,
                        std::uint64_t seed, unsigned threads) {
  if (has_analytic_centering(f, model)) return analytic_centering(f, model, n);
  return mc_centering(f, model, n, reps, seed, threads);
}

double factor_sup(const Factor& f, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 1; i <= n; ++i) m = std::max(m, std::abs(f(static_cast<double>(i) / static_cast<double>(n))));
  return m;
}

}  // namespace

ExperimentReport run_rate_experiment(const ExperimentConfig& cfg, unsigned threads) {
  Node s(cfg.section, "/rate", {"estimator", "trend", "noise_scale", "grid", "x_grid", "h2", "centering_reps", "nu"});
  const std::string est = s.text("estimator", "kernel_regression");
  if (est != "kernel_regression" && est != "kernel_density") {
    throw ConfigError("/rate/estimator", "unknown estimator '" + est + "' (kernel_regression, kernel_density)");
  }
  const bool density = est == "kernel_density";
  const Polynomial trend = s.poly("trend", 0.0);
  const double noise = s.number("noise_scale", 1.0);
  const std::size_t grid = s.count("grid", 41);
  const std::size_t centering_reps = s.count("centering_reps", 2000);
  const double nu = s.number("nu", 4.0);
  std::vector<double> x_grid{-1.0, -0.5, 0.0, 0.5, 1.0};
  if (s.has("x_grid")) {
    const json& xg = s.raw("x_grid");
    if (!xg.is_array() || xg.empty()) throw ConfigError("/rate/x_grid", "expected a non-empty list");
    x_grid.clear();
    for (const auto& v : xg) {
      if (!v.is_number()) throw ConfigError("/rate/x_grid", "expected numbers");
      x_grid.push_back(v.get<double>());
    }
  }
  const BandwidthRule h2_rule = s.has("h2") ? bandwidth_from_json(s.raw("h2"), "/rate/h2") : cfg.bandwidth;
  if (grid < 1) throw ConfigError("/rate/grid", "grid must contain at least one point");
  if (cfg.replications < 10) throw ConfigError("/replications", "rate experiments need at least 10 replications");

  ExperimentReport r = start_report(cfg);
  const auto n_list = require_n_list(cfg, {500, 2000, 8000});
  const DecayProfile prof = analytic_decay_bound(cfg.model);
  std::vector<double> med, med_control;
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    const std::size_t n = n_list[k];
    const double h = cfg.bandwidth.at(n);
    const double h2 = h2_rule.at(n);
    if (!(h > 0.0 && h < 1.0)) throw ConfigError("/bandwidth", "bandwidth " + fmt(h) + " outside (0, 1) at n = " + std::to_string(n));
    if (prof.kind == DecayKind::polynomial) {
      const double nd = static_cast<double>(n);
      const double floor_h = std::pow(std::log(nd) / std::pow(nd, 1.0 - 2.0 / nu), (prof.alpha - 1.0) / prof.alpha);
      if (h < floor_h) {
        r.warnings.push_back("n = " + std::to_string(n) + ": h = " + fmt(h) +
                             " is below the polynomial-decay lower bound " + fmt(floor_h));
      }
    }
    const auto v_grid = interior_grid(h, grid);
    const std::uint64_t seed = sub_seed(cfg.seed, k);

    // Means entering E ĝ.
    std::vector<double> mean_x;
    std::vector<std::vector<double>> dens_means;
    if (!density) {
      mean_x = analytic_centering({Base::identity(), Factor::global(), {}}, cfg.model, n).means;
    } else {
      for (double x : x_grid) {
        const FunctionClass fx{Base::kernel_density(x, h2, cfg.kernel), Factor::global(), {}};
        dens_means.push_back(centering_for(fx, cfg.model, n, centering_reps, seed, threads).means);
      }
    }
    const double nd = static_cast<double>(n);
    std::vector<double> sup(cfg.replications);
    parallel_for(cfg.replications, threads, [&](std::size_t rep) {
      const Path p = simulate_path(cfg.model, n, replication_seed(seed, rep));
      double worst = 0.0;
      if (!density) {
        std::vector<double> y(n);
        for (std::size_t i = 1; i <= n; ++i) y[i - 1] = trend(static_cast<double>(i) / nd) + noise * p.x(i);
        const auto res = kernel_regression(y, cfg.kernel, h, v_grid, [&](double u) {
          const auto i = static_cast<std::size_t>(std::llround(u * nd));
          return trend(u) + noise * mean_x[i - 1];
        });
        for (std::size_t j = 0; j < res.values.size(); ++j) worst = std::max(worst, std::abs(res.values[j] - res.reference[j]));
      } else {
        const auto res = kernel_density(p.values, cfg.kernel, cfg.kernel, h, h2, x_grid, v_grid);
        // res is ordered by v then sorted x; x_grid order is restored through the sort below.
        std::vector<std::size_t> order(x_grid.size());
        for (std::size_t a = 0; a < order.size(); ++a) order[a] = a;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x_grid[a] < x_grid[b]; });
        const double sq = std::sqrt(h2);
        for (std::size_t j = 0; j < res.values.size(); ++j) {
          const std::size_t xi = order[j % x_grid.size()];
          double ref = 0.0;
          for (std::size_t i = 1; i <= n; ++i) {
            const double w = cfg.kernel.scaled(static_cast<double>(i) / nd - res.v[j], h);
            if (w != 0.0) ref += w * dens_means[xi][i - 1] / sq;
          }
          worst = std::max(worst, std::abs(res.values[j] - ref / nd));
        }
      }
      sup[rep] = worst;
    });
    const double tau = density ? std::sqrt(std::log(nd) / (nd * h * h2)) : std::sqrt(std::log(nd) / (nd * h));
    std::vector<double> ratio(sup.size()), ratio_bad(sup.size());
    for (std::size_t i = 0; i < sup.size(); ++i) {
      ratio[i] = sup[i] / tau;
      ratio_bad[i] = sup[i] * nd;
    }
    med.push_back(median(ratio));
    med_control.push_back(median(ratio_bad));
    r.rows.push_back({"rate", n, "h", h});
    if (density) r.rows.push_back({"rate", n, "h2", h2});
    r.rows.push_back({"rate", n, "tau", tau});
    r.rows.push_back({"rate", n, "median_sup_error", median(sup)});
    r.rows.push_back({"rate", n, "median_ratio", med.back()});
    r.rows.push_back({"rate", n, "median_ratio_tau_1_over_n", med_control.back()});
  }
  const double sp = spread(med);
  r.details["estimator"] = est;
  r.details["median_ratio_spread"] = sp;
  judge(r, "rate", "median sup-error / tau_n varies by less than the factor", sp < cfg.tol.rate_factor,
        "max/min of medians = " + fmt(sp) + ", factor " + fmt(cfg.tol.rate_factor));
  const bool deterministic = std::all_of(med.begin(), med.end(), [](double m) { return m == 0.0; });
  if (!deterministic) {
    const double sp_bad = spread(med_control);
    control(r, "rate", "wrong rate tau_n = 1/n", sp_bad < cfg.tol.rate_factor,
            "max/min of medians under 1/n = " + fmt(sp_bad));
  } else {
    r.warnings.push_back("sup error is identically zero; the 1/n control is not informative");
  }
  return r;
}

ExperimentReport run_clt_experiment(const ExperimentConfig& cfg, unsigned threads) {
  Node s(cfg.section, "/clt",
         {"statistic", "v", "x", "lrv_paths", "lrv_length", "lag_truncation", "reference_draws"});
  const std::string stat = s.text("statistic", "identity");
  if (stat != "identity" && stat != "mad" && stat != "edf") {
    throw ConfigError("/clt/statistic", "unknown statistic '" + stat + "' (identity, mad, edf)");
  }
  const double v = s.number("v", 0.5);
  if (!(v > 0.0 && v < 1.0)) throw ConfigError("/clt/v", "v must lie in (0, 1)");
  // A list of x values turns the EDF statistic into a vector.
  std::vector<double> xs{0.0};
  if (s.has("x")) {
    const json& xj = s.raw("x");
    if (xj.is_number()) {
      xs = {xj.get<double>()};
    } else if (xj.is_array() && !xj.empty() && stat == "edf") {
      xs.clear();
      for (std::size_t i = 0; i < xj.size(); ++i) {
        if (!xj[i].is_number()) throw ConfigError("/clt/x/" + std::to_string(i), "expected a number");
        xs.push_back(xj[i].get<double>());
      }
      if (!std::is_sorted(xs.begin(), xs.end())) throw ConfigError("/clt/x", "x values must be increasing");
    } else {
      throw ConfigError("/clt/x", "expected a number (or a list for the edf statistic)");
    }
  }
  const LongRunMc lrv{s.count("lrv_paths", 200), s.count("lrv_length", 4000)};
  const std::size_t lag = s.count("lag_truncation", 0);
  const std::size_t ref_draws = s.count("reference_draws", 100000);
  if (cfg.replications < 100) throw ConfigError("/replications", "clt experiments need at least 100 replications");

  ExperimentReport r = start_report(cfg);
  const auto n_list = require_n_list(cfg, {2000});
  std::optional<StationaryLaw> law;
  if (stat != "identity") law.emplace(cfg.model, v, ref_draws, sub_seed(cfg.seed, 1000));
  std::vector<Base> bases;
  std::vector<double> centres;
  if (stat == "identity") {
    bases.push_back(Base::identity());
    centres.push_back(0.0);
  } else if (stat == "mad") {
    bases.push_back(mad_influence_base(*law));
    centres.push_back(law->abs_deviation(law->mean()));
  } else {
    for (double x : xs) {
      bases.push_back(Base::indicator(x));
      centres.push_back(law->cdf(x));
    }
  }
  const std::size_t m = bases.size();
  const auto label = [&](std::size_t a) { return stat == "edf" ? "x = " + fmt(xs[a]) : stat; };

  for (std::size_t k = 0; k < n_list.size(); ++k) {
    const std::size_t n = n_list[k];
    const double h = cfg.bandwidth.at(n);
    const double nh = static_cast<double>(n) * h;
    if (nh < 50.0) {
      throw ConfigError("/bandwidth", "n h = " + fmt(nh) + " < 50 at n = " + std::to_string(n) + "; refusing the CLT check");
    }
    if (!(v >= 0.5 * h && v <= 1.0 - 0.5 * h)) throw ConfigError("/clt/v", "v lies outside [h/2, 1 - h/2]");
    CovarianceSpec spec;
    spec.kind = CovarianceCase::local;
    spec.v = v;
    spec.h = h;
    spec.kernel = cfg.kernel;
    spec.lag_truncation = lag;
    std::vector<double> sigma(m * m);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a; b < m; ++b) {
        const CovarianceResult c =
            long_run_covariance(bases[a], bases[b], cfg.model, spec, lrv, sub_seed(cfg.seed, 2000 + k), threads);
        sigma[a * m + b] = sigma[b * m + a] = c.sigma;
        if (a == b) r.rows.push_back({"clt", n, "sigma_oracle_se[" + label(a) + "]", c.mc_se});
        if (c.tail_flag) r.warnings.push_back("n = " + std::to_string(n) + ": long-run covariance truncation tail is large");
      }
    }

    const FunctionClass f{Base::identity(), Factor::local(cfg.kernel, h, v), {}};
    Centering cent;
    if (stat == "identity") cent = analytic_centering(f, cfg.model, n);
    const double w_sum = kernel_weight_sum(n, cfg.kernel, h, v);
    const double root = std::sqrt(nh);
    const std::uint64_t seed = sub_seed(cfg.seed, k);
    std::vector<std::vector<double>> t(m, std::vector<double>(cfg.replications));
    parallel_for(cfg.replications, threads, [&](std::size_t rep) {
      const Path p = simulate_path(cfg.model, n, replication_seed(seed, rep));
      if (stat == "identity") {
        t[0][rep] = evaluate_gn(f, p, cent);
      } else if (stat == "edf") {
        const auto g = local_edf(p.values, cfg.kernel, h, xs, v).values;
        for (std::size_t a = 0; a < m; ++a) t[a][rep] = root * (g[a] - w_sum * centres[a]);
      } else {
        t[0][rep] = root * (local_mad(p.values, cfg.kernel, h, v) - centres[0]);
      }
    });

    const double band = 1.63 / std::sqrt(static_cast<double>(cfg.replications)) * cfg.tol.ks_safety;
    const std::string at = " at n = " + std::to_string(n);
    r.rows.push_back({"clt", n, "h", h});
    r.rows.push_back({"clt", n, "ks_band", band});
    for (std::size_t a = 0; a < m; ++a) {
      const double sig = sigma[a * m + a];
      const double var = stats::variance(t[a]);
      const double ratio = var / sig;
      const double mu = stats::mean(t[a]);
      const double ks_fit = stats::ks_normal(t[a], mu, std::sqrt(var));
      const double ks_oracle = stats::ks_normal(t[a], 0.0, std::sqrt(sig));
      const std::string tag = "[" + label(a) + "]";
      r.rows.push_back({"clt", n, "sigma_oracle" + tag, sig});
      r.rows.push_back({"clt", n, "variance" + tag, var});
      r.rows.push_back({"clt", n, "variance_se" + tag, stats::variance_se(t[a])});
      r.rows.push_back({"clt", n, "variance_ratio" + tag, ratio});
      r.rows.push_back({"clt", n, "mean" + tag, mu});
      r.rows.push_back({"clt", n, "ks_fitted_normal" + tag, ks_fit});
      r.rows.push_back({"clt", n, "ks_oracle_normal" + tag, ks_oracle});
      judge(r, "clt", "variance within tolerance of the long-run oracle, " + label(a) + at,
            std::abs(ratio - 1.0) <= cfg.tol.variance_rel,
            "var = " + fmt(var) + ", Sigma = " + fmt(sig) + ", ratio = " + fmt(ratio));
      judge(r, "clt", "KS distance to the fitted normal below the 1% band, " + label(a) + at, ks_fit < band,
            "KS = " + fmt(ks_fit) + ", band = " + fmt(band));
      const double ratio_bad = var / (2.0 * sig);
      control(r, "clt", "variance against 2 Sigma, " + label(a) + at, std::abs(ratio_bad - 1.0) <= cfg.tol.variance_rel,
              "ratio against 2 Sigma = " + fmt(ratio_bad));
    }
    if (m > 1) {
      // Relative Frobenius distance between the empirical covariance matrix and Sigma.
      const auto frobenius = [&](double scale) {
        double num = 0.0, den = 0.0;
        for (std::size_t a = 0; a < m; ++a) {
          const double ma = stats::mean(t[a]);
          for (std::size_t b = 0; b < m; ++b) {
            const double mb = stats::mean(t[b]);
            double c = 0.0;
            for (std::size_t rep = 0; rep < cfg.replications; ++rep) c += (t[a][rep] - ma) * (t[b][rep] - mb);
            c /= static_cast<double>(cfg.replications - 1);
            num += std::pow(c - scale * sigma[a * m + b], 2);
            den += std::pow(scale * sigma[a * m + b], 2);
          }
        }
        return std::sqrt(num / den);
      };
      const double fro = frobenius(1.0);
      r.rows.push_back({"clt", n, "frobenius_relative", fro});
      judge(r, "clt", "covariance matrix within tolerance in Frobenius norm" + at, fro <= cfg.tol.variance_rel,
            "relative Frobenius distance " + fmt(fro));
      const double fro_bad = frobenius(2.0);
      control(r, "clt", "covariance matrix against 2 Sigma" + at, fro_bad <= cfg.tol.variance_rel,
              "relative Frobenius distance " + fmt(fro_bad));
    }
  }
  r.details["statistic"] = stat;
  r.details["v"] = v;
  if (stat == "edf") r.details["x"] = xs;
  return r;
}

ExperimentReport run_variance_experiment(const ExperimentConfig& cfg, unsigned threads) {
  Node s(cfg.section, "/variance", {"suite", "class"});
  std::vector<NamedModel> models;
  std::vector<NamedClass> classes;
  if (s.has("class")) {
    models.push_back({model_tag(cfg.model), cfg.model});
    classes.push_back({"configured", class_from_json(s.raw("class"), "/variance/class", cfg.kernel)});
  } else {
    const std::string suite = s.text("suite", "builtin");
    if (suite != "builtin") throw ConfigError("/variance/suite", "unknown suite '" + suite + "' (builtin)");
    models = builtin_models();
    classes = builtin_classes();
  }
  if (cfg.replications < 100) throw ConfigError("/replications", "variance experiments need at least 100 replications");
  ExperimentReport r = start_report(cfg);
  const auto n_list = require_n_list(cfg, {2000});
  std::uint64_t k = 0;
  json combos = json::array();
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const std::size_t n = n_list[ni];
    for (const auto& m : models) {
      for (const auto& c : classes) {
        const VarianceCheck vc = variance_bound_check(c.f, m.model, n, cfg.replications, sub_seed(cfg.seed, k++), threads);
        const std::string label = m.name + "/" + c.name;
        r.rows.push_back({label, n, "var_hat", vc.var_hat});
        r.rows.push_back({label, n, "var_se", vc.var_se});
        r.rows.push_back({label, n, "V_squared", vc.v * vc.v});
        json cj = to_json(vc);
        cj["model"] = m.name;
        cj["class"] = c.name;
        cj["n"] = n;
        combos.push_back(cj);
        judge(r, "variance", "Var(G_n f) <= V(f)^2 for " + label + " at n = " + std::to_string(n), vc.pass,
              "var = " + fmt(vc.var_hat) + " (se " + fmt(vc.var_se) + "), V^2 = " + fmt(vc.v * vc.v));
        const bool control_combo = models.size() == 1 || (m.name == "ar1" && c.name == "identity_global");
        if (control_combo) {
          const double v10 = 0.1 * vc.v;
          const double rel = vc.var_hat > 0.0 ? vc.var_se / vc.var_hat : 0.0;
          const bool wrong = vc.var_hat <= v10 * v10 * (1.0 + 4.0 * rel);
          control(r, "variance", "bound with V/10 for " + label + " at n = " + std::to_string(n), wrong,
                  "var = " + fmt(vc.var_hat) + ", (V/10)^2 = " + fmt(v10 * v10));
        }
      }
    }
  }
  r.details["checks"] = combos;
  return r;
}

ExperimentReport run_tail_experiment(const ExperimentConfig& cfg, unsigned threads) {
  Node s(cfg.section, "/tail", {"class", "y", "nu", "grid_points", "centering_reps", "control_scale"});
  const FunctionClass f = s.has("class") ? class_from_json(s.raw("class"), "/tail/class", cfg.kernel)
                                         : FunctionClass{Base::indicator(0.0), Factor::global(), {}};
  const double y = s.number("y", 10.0);
  const double nu = s.number("nu", 2.0);
  const std::size_t points = s.count("grid_points", 12);
  const std::size_t centering_reps = s.count("centering_reps", 4000);
  const double control_scale = s.number("control_scale", 0.1);
  if (!std::isfinite(f.base.sup_abs())) throw ConfigError("/tail/class", "tail experiments need a bounded class");
  if (points < 3) throw ConfigError("/tail/grid_points", "need at least 3 grid points");
  if (cfg.replications < 100) throw ConfigError("/replications", "tail experiments need at least 100 replications");

  ExperimentReport r = start_report(cfg);
  const auto n_list = require_n_list(cfg, {2000, 8000});
  const DecayProfile prof = class_decay_bound(cfg.model, f.base);
  const double reps = static_cast<double>(cfg.replications);

  struct PerN {
    std::size_t n;
    double v_tilde, phi, m, rms;
    std::vector<double> x, p, se;
    std::vector<double> abs_g;
  };
  std::vector<PerN> per;
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    const std::size_t n = n_list[k];
    const std::uint64_t seed = sub_seed(cfg.seed, k);
    const Centering cent = centering_for(f, cfg.model, n, centering_reps, seed, threads);
    std::vector<double> g(cfg.replications), sq(cfg.replications);
    parallel_for(cfg.replications, threads, [&](std::size_t rep) {
      const Path p = simulate_path(cfg.model, n, replication_seed(seed, rep));
      g[rep] = std::abs(evaluate_gn(f, p, cent));
      double acc = 0.0;
      for (std::size_t i = 1; i <= n; ++i) {
        const double val = f(p.x(i), static_cast<double>(i) / static_cast<double>(n));
        acc += val * val;
      }
      sq[rep] = acc / static_cast<double>(n);
    });
    const FunctionClass members[] = {f};
    const Normalizers norms = class_normalizers(members, n, nu);
    const double f2n = std::sqrt(stats::mean(sq));
    const double m = f.base.sup_abs() * factor_sup(f.factor, n);
    const double root_n = std::sqrt(static_cast<double>(n));
    const double rms = std::sqrt(stats::variance(g) + std::pow(stats::mean(g), 2));
    PerN pn{n, v_tilde(f2n, norms.d_n, prof, nu), 1.0, m, rms, {}, {}, {}, g};
    if (prof.kind != DecayKind::independent) {
      const BernsteinFunctionals bf(prof, nu);
      pn.phi = bf.weights().phi(static_cast<double>(bf.q_tilde_star(m / (root_n * norms.d_n_inf * y))));
    }
    std::vector<double> sorted_g = g;
    std::sort(sorted_g.begin(), sorted_g.end());
    const double q99 = stats::quantile(sorted_g, 0.99);
    const auto beyond = static_cast<std::size_t>(std::count_if(g.begin(), g.end(), [&](double a) { return a > q99; }));
    if (beyond < 20) {
      throw ConfigError("/replications", "only " + std::to_string(beyond) +
                                             " exceedances beyond the 99th percentile at n = " + std::to_string(n) +
                                             "; at least 20 are needed (raise replications)");
    }
    const double x_lo = stats::quantile(sorted_g, 0.5);
    const double x_hi = sorted_g[sorted_g.size() - 21];
    for (std::size_t j = 0; j < points; ++j) {
      const double xv = x_lo + (x_hi - x_lo) * static_cast<double>(j) / static_cast<double>(points - 1);
      const auto above = static_cast<double>(sorted_g.end() - std::upper_bound(sorted_g.begin(), sorted_g.end(), xv));
      const double p = above / reps;
      pn.x.push_back(xv);
      pn.p.push_back(p);
      pn.se.push_back(std::sqrt(p * (1.0 - p) / reps));
    }
    const double cap = 2.0 * root_n * m;
    const auto beyond_cap = std::count_if(g.begin(), g.end(), [&](double a) { return a > cap; });
    r.rows.push_back({"tail", n, "f2n", f2n});
    r.rows.push_back({"tail", n, "d_n", norms.d_n});
    r.rows.push_back({"tail", n, "V_tilde", pn.v_tilde});
    r.rows.push_back({"tail", n, "Phi_q", pn.phi});
    r.rows.push_back({"tail", n, "M", m});
    r.rows.push_back({"tail", n, "rms_G", rms});
    r.rows.push_back({"tail", n, "p_beyond_2_sqrt_n_M", static_cast<double>(beyond_cap) / reps});
    judge(r, "tail", "|G_n| <= 2 sqrt(n) M at n = " + std::to_string(n), beyond_cap == 0,
          std::to_string(beyond_cap) + " replications exceed " + fmt(cap));
    per.push_back(std::move(pn));
  }

  const auto z_of = [](const PerN& pn, double xv, double vt) {
    return xv * xv / (vt * vt + pn.m * pn.phi * xv / std::sqrt(static_cast<double>(pn.n)));
  };
  // Universal constants are fitted once, on the smallest n: slope by least squares on the
  // log scale, then the smallest c0 for which the envelope covers every empirical point.
  const PerN& base = per.front();
  std::vector<double> zs, ls;
  for (std::size_t j = 0; j < base.x.size(); ++j) {
    if (base.p[j] > 0.0) {
      zs.push_back(z_of(base, base.x[j], base.v_tilde));
      ls.push_back(std::log(base.p[j]));
    }
  }
  const double zm = stats::mean(zs), lm = stats::mean(ls);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t j = 0; j < zs.size(); ++j) {
    sxy += (zs[j] - zm) * (ls[j] - lm);
    sxx += (zs[j] - zm) * (zs[j] - zm);
  }
  const double slope = sxx > 0.0 ? -sxy / sxx : 0.0;
  judge(r, "tail", "fitted envelope decays (c1 > 0)", slope > 0.0, "1/c1 = " + fmt(slope));
  if (!(slope > 0.0)) return r;
  const double c1 = 1.0 / slope;
  double log_c0 = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < zs.size(); ++j) log_c0 = std::max(log_c0, ls[j] + zs[j] / c1);
  const double c0 = std::exp(log_c0);
  r.details["c0"] = c0;
  r.details["c1"] = c1;
  r.details["y"] = y;
  r.details["profile"] = to_json(prof);

  const double k_sig = cfg.tol.mc_sigmas;
  const auto dominated = [&](const PerN& pn, double vt, std::string& worst) {
    bool ok = true;
    double worst_gap = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pn.x.size(); ++j) {
      const double env = c0 * std::exp(-z_of(pn, pn.x[j], vt) / c1);
      const double gap = (pn.p[j] - env) / std::max(pn.se[j], 1.0 / reps);
      if (gap > worst_gap) {
        worst_gap = gap;
        worst = "x = " + fmt(pn.x[j]) + ": empirical " + fmt(pn.p[j]) + " vs envelope " + fmt(env);
      }
      if (pn.p[j] > env + k_sig * pn.se[j]) ok = false;
    }
    return ok;
  };
  for (const auto& pn : per) {
    std::string worst;
    const bool ok = dominated(pn, pn.v_tilde, worst);
    judge(r, "tail", "fitted envelope dominates the empirical tail at n = " + std::to_string(pn.n), ok,
          "c0 = " + fmt(c0) + ", c1 = " + fmt(c1) + "; tightest point " + worst);
    std::string worst_bad;
    const bool bad = dominated(pn, control_scale * pn.v_tilde, worst_bad);
    control(r, "tail", "envelope with V_tilde scaled by " + fmt(control_scale) + " at n = " + std::to_string(pn.n), bad,
            "tightest point " + worst_bad);
    json block{{"n", pn.n}, {"x", pn.x}, {"empirical", pn.p}};
    std::vector<double> env;
    for (double xv : pn.x) env.push_back(c0 * std::exp(-z_of(pn, xv, pn.v_tilde) / c1));
    block["envelope"] = env;
    // Gaussian-regime reference 2(1 - Phi(x / sd)), informational.
    std::vector<double> gauss;
    for (double xv : pn.x) gauss.push_back(std::erfc(xv / (pn.rms * std::sqrt(2.0))));
    block["gaussian"] = gauss;
    r.plot.push_back(block);
  }
  if (per.size() >= 2) {
    const auto crossover = [](const PerN& pn) {
      return pn.v_tilde * pn.v_tilde * std::sqrt(static_cast<double>(pn.n)) / (pn.m * pn.phi);
    };
    const PerN& last = per.back();
    const double observed = crossover(last) / crossover(base);
    const double expected = std::sqrt(static_cast<double>(last.n) / static_cast<double>(base.n));
    const double q = observed / expected;
    r.rows.push_back({"tail", base.n, "crossover", crossover(base)});
    r.rows.push_back({"tail", last.n, "crossover", crossover(last)});
    judge(r, "tail", "crossover scales like sqrt(n) within the factor",
          q <= cfg.tol.crossover_factor && q >= 1.0 / cfg.tol.crossover_factor,
          "crossover ratio " + fmt(observed) + " vs sqrt(n) ratio " + fmt(expected));
  }
  return r;
}

ExperimentReport run_bracket_experiment(const ExperimentConfig& cfg, unsigned threads) {
  Node s(cfg.section, "/bracket", {"gammas", "v", "h", "samples", "s"});
  const auto* rm = std::get_if<RecursiveModel>(&cfg.model);
  if (!rm) throw ConfigError("/model", "bracket experiments need a recursive model");
  std::vector<double> gammas{0.5, 0.2, 0.1};
  if (s.has("gammas")) {
    const json& gj = s.raw("gammas");
    if (!gj.is_array() || gj.empty()) throw ConfigError("/bracket/gammas", "expected a non-empty list");
    gammas.clear();
    for (const auto& g : gj) {
      if (!g.is_number()) throw ConfigError("/bracket/gammas", "expected numbers");
      gammas.push_back(g.get<double>());
    }
  }
  const double v = s.number("v", 0.5);
  const double h = s.number("h", 0.2);
  const std::size_t samples = s.count("samples", 12);
  const double smooth = s.number("s", 1.0);
  if (samples < 2) throw ConfigError("/bracket/samples", "need at least 2 sampled brackets");
  if (cfg.replications < 100) throw ConfigError("/replications", "bracket experiments need at least 100 replications");
  const Factor factor = Factor::local(cfg.kernel, h, v);
  const std::size_t n = require_n_list(cfg, {1000}).front();
  const BracketParams params = BracketParams::from_model(*rm, cfg.kernel, smooth);

  ExperimentReport r = start_report(cfg);
  r.details["params"] = {{"c_m", params.c_m},         {"c_sigma", params.c_sigma}, {"c_eps", params.c_eps},
                         {"sigma_min", params.sigma_min}, {"g_sup", params.g_sup}, {"s", params.s},
                         {"k_sup", params.k_sup}};

  struct Sampled {
    double gamma;
    std::size_t j;
    double a, b;
  };
  std::vector<Sampled> picks;
  json grids = json::array();
  for (double gamma : gammas) {
    const BracketGrid g = edf_brackets(gamma, params);
    bool covers = std::isinf(g.x.front()) && g.x.front() < 0 && std::isinf(g.x.back()) && g.x.back() > 0;
    double max_gap = 0.0;
    for (std::size_t j = 1; j < g.x.size(); ++j) {
      covers = covers && g.x[j] > g.x[j - 1];
      if (j >= 2 && j + 1 < g.x.size()) max_gap = std::max(max_gap, g.x[j] - g.x[j - 1]);
    }
    const double bound = g.c_n * std::pow(gamma, -2.0 / smooth - 2.0);
    const std::size_t at = static_cast<std::size_t>(std::round(1.0 / gamma * 1000.0));
    r.rows.push_back({"bracket", at, "gamma", gamma});
    r.rows.push_back({"bracket", at, "count", static_cast<double>(g.count)});
    r.rows.push_back({"bracket", at, "count_bound", bound});
    r.rows.push_back({"bracket", at, "x_N", g.x_n});
    r.rows.push_back({"bracket", at, "spacing", g.spacing});
    grids.push_back({{"gamma", gamma}, {"count", g.count}, {"bound", bound}, {"x_N", g.x_n}, {"spacing", g.spacing},
                     {"c_N", g.c_n}, {"max_interior_gap", max_gap}});
    judge(r, "bracket", "brackets cover R for gamma = " + fmt(gamma), covers && max_gap <= g.spacing * (1 + 1e-12),
          "largest interior gap " + fmt(max_gap) + " vs spacing " + fmt(g.spacing));
    judge(r, "bracket", "count <= C_N gamma^(-2/s-2) for gamma = " + fmt(gamma), static_cast<double>(g.count) <= bound,
          "N = " + std::to_string(g.count) + ", bound = " + fmt(bound));
    // Both unbounded brackets, the one containing 0, and evenly spaced interior ones.
    std::vector<std::size_t> js{1, g.count};
    const auto zero_at = static_cast<std::size_t>(std::upper_bound(g.x.begin(), g.x.end(), 0.0) - g.x.begin());
    js.push_back(std::clamp<std::size_t>(zero_at, 1, g.count));
    for (std::size_t t = 1; t + 1 < samples; ++t) js.push_back(1 + t * (g.count - 1) / (samples - 1));
    std::sort(js.begin(), js.end());
    js.erase(std::unique(js.begin(), js.end()), js.end());
    for (std::size_t j : js) picks.push_back({gamma, j, g.x[j - 1], g.x[j]});
  }
  r.details["grids"] = grids;

  // One set of paths serves every sampled bracket.
  const std::uint64_t seed = sub_seed(cfg.seed, 0);
  std::vector<double> d2(n);
  for (std::size_t i = 1; i <= n; ++i) {
    const double w = factor(static_cast<double>(i) / static_cast<double>(n));
    d2[i - 1] = w * w;
  }
  std::vector<std::vector<double>> per_rep(cfg.replications, std::vector<double>(picks.size()));
  parallel_for(cfg.replications, threads, [&](std::size_t rep) {
    const Path p = simulate_path(cfg.model, n, replication_seed(seed, rep));
    for (std::size_t q = 0; q < picks.size(); ++q) {
      double acc = 0.0;
      for (std::size_t i = 1; i <= n; ++i) {
        const double xv = p.x(i);
        if (xv > picks[q].a && xv <= picks[q].b) acc += d2[i - 1];
      }
      per_rep[rep][q] = acc / static_cast<double>(n);
    }
  });
  json sizes = json::array();
  for (double gamma : gammas) {
    bool ok = true, bad = true;
    double worst = 0.0;
    for (std::size_t q = 0; q < picks.size(); ++q) {
      if (picks[q].gamma != gamma) continue;
      std::vector<double> col(cfg.replications);
      for (std::size_t rep = 0; rep < cfg.replications; ++rep) col[rep] = per_rep[rep][q];
      const double m2 = stats::mean(col);
      const double norm = std::sqrt(m2);
      const double se = m2 > 0.0 ? std::sqrt(stats::variance(col) / static_cast<double>(col.size())) / (2.0 * norm) : 0.0;
      worst = std::max(worst, norm);
      ok = ok && norm - cfg.tol.mc_sigmas * se <= gamma;
      bad = bad && norm - cfg.tol.mc_sigmas * se <= 0.1 * gamma;
      sizes.push_back({{"gamma", gamma}, {"j", picks[q].j}, {"lower", picks[q].a}, {"upper", picks[q].b},
                       {"norm", norm}, {"se", se}});
    }
    judge(r, "bracket", "sampled bracket norms <= gamma for gamma = " + fmt(gamma), ok,
          "largest sampled norm " + fmt(worst));
    control(r, "bracket", "sampled bracket norms <= gamma/10 for gamma = " + fmt(gamma), bad,
            "largest sampled norm " + fmt(worst) + " vs " + fmt(0.1 * gamma));
  }
  r.details["sizes"] = sizes;
  return r;
}

ExperimentReport run_bahadur_experiment(const ExperimentConfig& cfg, unsigned threads) {
  Node s(cfg.section, "/bahadur", {"grid", "information_draws", "lower", "upper"});
  const auto* rm = std::get_if<RecursiveModel>(&cfg.model);
  if (!rm) throw ConfigError("/model", "bahadur experiments need a recursive model");
  if (rm->b.sup_abs() != 0.0) throw ConfigError("/model/b", "the AR loss identifies a(u) only when b = 0");
  const std::size_t grid = s.count("grid", 9);
  const std::size_t draws = s.count("information_draws", 1000000);
  const MObjective obj = MObjective::ar_least_squares(s.number("lower", -0.99), s.number("upper", 0.99));
  if (cfg.replications < 10) throw ConfigError("/replications", "bahadur experiments need at least 10 replications");

  ExperimentReport r = start_report(cfg);
  const auto n_list = require_n_list(cfg, {1000, 8000});
  const RecursiveModel model = *rm;
  std::vector<double> med, med_bad;
  double worst_closed = 0.0, worst_grad = 0.0;
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    const std::size_t n = n_list[k];
    const double h = cfg.bandwidth.at(n);
    const auto v_grid = interior_grid(h, grid);
    // I(v) depends only on v; one Monte Carlo evaluation per grid point.
    std::vector<std::vector<double>> info(v_grid.size());
    for (std::size_t j = 0; j < v_grid.size(); ++j) {
      const std::vector<double> t0{model.a(v_grid[j])};
      info[j] = information_matrix(obj, model, v_grid[j], t0, draws, sub_seed(cfg.seed, 5000 + j));
    }
    BahadurTruth truth{[&](double v) { return std::vector<double>{model.a(v)}; },
                       [&](double v) {
                         const auto it = std::lower_bound(v_grid.begin(), v_grid.end(), v - 1e-15);
                         return info[static_cast<std::size_t>(it - v_grid.begin())];
                       }};
    const std::uint64_t seed = sub_seed(cfg.seed, k);
    std::vector<double> ratio(cfg.replications), closed(cfg.replications), grad(cfg.replications),
        first(cfg.replications), resid(cfg.replications);
    parallel_for(cfg.replications, threads, [&](std::size_t rep) {
      const Path p = simulate_path(cfg.model, n, replication_seed(seed, rep));
      const MEstimate me = m_estimate(p, obj, cfg.kernel, h, v_grid, &truth);
      const double res = *std::max_element(me.bahadur_residual.begin(), me.bahadur_residual.end());
      const double fo = *std::max_element(me.first_order.begin(), me.first_order.end());
      double cf = 0.0;
      for (std::size_t j = 0; j < me.result.v.size(); ++j) {
        cf = std::max(cf, std::abs(me.result.values[j] - ar_closed_form(p, cfg.kernel, h, me.result.v[j])));
      }
      ratio[rep] = res / fo;
      first[rep] = fo;
      resid[rep] = res;
      closed[rep] = cf;
      grad[rep] = *std::max_element(me.gradient_norm.begin(), me.gradient_norm.end());
    });
    med.push_back(median(ratio));
    med_bad.push_back(1.0);  // residual without the correction is the first-order error itself
    worst_closed = std::max(worst_closed, *std::max_element(closed.begin(), closed.end()));
    worst_grad = std::max(worst_grad, *std::max_element(grad.begin(), grad.end()));
    r.rows.push_back({"bahadur", n, "h", h});
    r.rows.push_back({"bahadur", n, "median_sup_first_order", median(first)});
    r.rows.push_back({"bahadur", n, "median_sup_residual", median(resid)});
    r.rows.push_back({"bahadur", n, "median_ratio", med.back()});
    r.rows.push_back({"bahadur", n, "max_closed_form_gap", *std::max_element(closed.begin(), closed.end())});
  }
  const auto decreasing = [](const std::vector<double>& m) {
    for (std::size_t i = 1; i < m.size(); ++i) {
      if (!(m[i] < m[i - 1])) return false;
    }
    return m.size() >= 2;
  };
  std::string meds;
  for (double m : med) meds += (meds.empty() ? "" : ", ") + fmt(m);
  judge(r, "bahadur", "median sup residual / first-order error strictly decreases in n", decreasing(med),
        "medians " + meds);
  judge(r, "bahadur", "Newton matches the weighted least-squares closed form to 1e-10", worst_closed <= 1e-10,
        "max gap " + fmt(worst_closed));
  judge(r, "bahadur", "first-order condition at every accepted v", worst_grad <= 1e-8,
        "max gradient norm " + fmt(worst_grad));
  control(r, "bahadur", "residual with the correction term omitted", decreasing(med_bad),
          "ratio is identically 1 without the correction");
  return r;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, unsigned threads) {
  switch (cfg.kind) {
    case ExperimentKind::rate: return run_rate_experiment(cfg, threads);
    case ExperimentKind::clt: return run_clt_experiment(cfg, threads);
    case ExperimentKind::variance: return run_variance_experiment(cfg, threads);
    case ExperimentKind::tail: return run_tail_experiment(cfg, threads);
    case ExperimentKind::bracket: return run_bracket_experiment(cfg, threads);
    case ExperimentKind::bahadur: return run_bahadur_experiment(cfg, threads);
  }
  throw ConfigError("/kind", "unsupported experiment kind");
}

}  // namespace locstat
