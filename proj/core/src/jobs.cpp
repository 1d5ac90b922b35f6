#include "locstat/jobs.hpp"

#include <cmath>
#include <sstream>

#include "config_node.hpp"
#include "locstat/csv.hpp"
#include "locstat/dependence.hpp"
#include "locstat/empirical_process.hpp"
#include "locstat/estimators.hpp"
#include "locstat/numerics.hpp"

namespace locstat {

namespace {

using nlohmann::json;
using detail::Node;

std::vector<double> number_list(const Node& s, const char* key, std::vector<double> fallback) {
  if (!s.has(key)) return fallback;
  const json& v = s.raw(key);
  if (!v.is_array() || v.empty()) throw ConfigError(s.at(key), "expected a non-empty list");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(s.at(key) + "/" + std::to_string(i), "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::size_t sample_size(const Node& s, std::size_t fallback) {
  const std::size_t n = s.count("n", fallback);
  if (n < 2) throw ConfigError(s.at("n"), "n must be at least 2");
  return n;
}

JobOutput simulate_job(const JobConfig& cfg) {
  Node s(cfg.section, "/simulate", {"n", "burn_in", "stationary_at"});
  const std::size_t n = sample_size(s, 1000);
  std::optional<std::size_t> burn;
  if (s.has("burn_in")) burn = s.count("burn_in");
  Path p;
  if (s.has("stationary_at")) {
    const double u = s.number("stationary_at");
    if (!(u >= 0.0 && u <= 1.0)) throw ConfigError("/simulate/stationary_at", "u must lie in [0, 1]");
    p = simulate_stationary(cfg.model, u, n, cfg.seed, burn);
  } else {
    p = simulate_path(cfg.model, n, cfg.seed, burn);
  }
  std::ostringstream csv;
  write_path_csv(csv, p);
  JobOutput out;
  out.files.emplace_back("path.csv", csv.str());
  out.summary = {{"n", n},
                 {"history", p.prefix},
                 {"model", p.model_tag},
                 {"mean", stats::mean(p.values)},
                 {"variance", stats::variance(p.values)}};
  return out;
}

JobOutput depmeasure_job(const JobConfig& cfg, unsigned threads) {
  Node s(cfg.section, "/depmeasure", {"n", "k_max", "nu", "replications", "indices"});
  const std::size_t n = sample_size(s, 200);
  const std::size_t k_max = s.count("k_max", 8);
  const double nu = s.number("nu", 2.0);
  const std::size_t reps = s.count("replications", 2000);
  if (k_max < 1 || k_max >= n) throw ConfigError("/depmeasure/k_max", "k_max must lie in [1, n)");
  if (!(nu >= 1.0)) throw ConfigError("/depmeasure/nu", "nu must be at least 1");
  if (reps < 2) throw ConfigError("/depmeasure/replications", "need at least 2 replications");
  std::vector<std::size_t> idx = default_index_set(n);
  if (s.has("indices")) {
    idx.clear();
    for (double v : number_list(s, "indices", {})) {
      if (v < 1 || v > static_cast<double>(n) || v != std::floor(v)) {
        throw ConfigError("/depmeasure/indices", "indices must be integers in [1, n]");
      }
      idx.push_back(static_cast<std::size_t>(v));
    }
  }
  std::vector<std::size_t> lags;
  for (std::size_t k = 1; k <= k_max; ++k) lags.push_back(k);
  const auto est = estimate_delta_profile(cfg.model, n, lags, nu, reps, idx, cfg.seed, threads);
  const DecayProfile prof = analytic_decay_bound(cfg.model, nu / 2.0);

  std::ostringstream d;
  CsvWriter w(d);
  w.header({"k", "delta_hat", "se", "argmax", "Delta", "beta"});
  bool dominated = true;
  for (const auto& e : est) {
    const double bound = prof(static_cast<double>(e.k));
    dominated = dominated && e.value <= bound + 4.0 * e.se;
    w.cell(e.k).cell(e.value).cell(e.se).cell(e.argmax).cell(bound).cell(beta(prof, e.k));
    w.end_row();
  }
  std::ostringstream c;
  CsvWriter wc(c);
  wc.header({"x", "q_star", "r"});
  for (int e = 1; e <= 6; ++e) {
    const double x = std::pow(10.0, -e);
    wc.cell(x).cell(static_cast<std::size_t>(q_star(prof, x))).cell(r_of_delta(prof, x));
    wc.end_row();
  }
  JobOutput out;
  out.files.emplace_back("delta.csv", d.str());
  out.files.emplace_back("calculus.csv", c.str());
  out.summary = {{"n", n}, {"nu", nu}, {"replications", reps}, {"profile", to_json(prof)},
                 {"dominated_within_4se", dominated}};
  return out;
}

JobOutput estimate_job(const JobConfig& cfg) {
  Node s(cfg.section, "/estimate",
         {"estimator", "n", "grid", "x_grid", "v", "trend", "noise_scale", "h2", "lower", "upper"});
  const std::string est = s.text("estimator");
  const std::size_t n = sample_size(s, 2000);
  const std::size_t grid = s.count("grid", 41);
  if (grid < 1) throw ConfigError("/estimate/grid", "grid must contain at least one point");
  const double h = cfg.bandwidth.at(n);
  const auto v_grid = interior_grid(h, grid);
  const Path p = simulate_path(cfg.model, n, cfg.seed);
  const double nd = static_cast<double>(n);

  EstimatorResult r;
  if (est == "kernel_regression") {
    const Polynomial trend = s.poly("trend", 0.0);
    const double noise = s.number("noise_scale", 1.0);
    const auto mean_x = analytic_centering({Base::identity(), Factor::global(), {}}, cfg.model, n).means;
    std::vector<double> y(n);
    for (std::size_t i = 1; i <= n; ++i) y[i - 1] = trend(static_cast<double>(i) / nd) + noise * p.x(i);
    r = kernel_regression(y, cfg.kernel, h, v_grid, [&](double u) {
      const auto i = static_cast<std::size_t>(std::llround(u * nd));
      return trend(u) + noise * mean_x[i - 1];
    });
  } else if (est == "kernel_density") {
    const double h2 = s.has("h2") ? bandwidth_from_json(s.raw("h2"), "/estimate/h2").at(n) : h;
    r = kernel_density(p.values, cfg.kernel, cfg.kernel, h, h2, number_list(s, "x_grid", {-1.0, 0.0, 1.0}), v_grid);
  } else if (est == "local_edf") {
    r = local_edf(p.values, cfg.kernel, h, number_list(s, "x_grid", {-1.0, 0.0, 1.0}), s.number("v", 0.5));
  } else if (est == "local_mad") {
    r.estimator = "local_mad";
    r.h1 = h;
    r.v = v_grid;
    for (double v : v_grid) r.values.push_back(local_mad(p.values, cfg.kernel, h, v));
  } else if (est == "ar_m_estimate") {
    const MObjective obj = MObjective::ar_least_squares(s.number("lower", -0.99), s.number("upper", 0.99));
    r = m_estimate(p, obj, cfg.kernel, h, v_grid).result;
    if (const auto* rm = std::get_if<RecursiveModel>(&cfg.model); rm && rm->b.sup_abs() == 0.0) {
      for (double v : r.v) r.reference.push_back(rm->a(v));
    }
  } else {
    throw ConfigError("/estimate/estimator", "unknown estimator '" + est +
                                                 "' (kernel_regression, kernel_density, local_edf, local_mad, "
                                                 "ar_m_estimate)");
  }
  std::ostringstream csv;
  write_csv(csv, r);
  JobOutput out;
  out.files.emplace_back("estimate.csv", csv.str());
  out.summary = summary_json(r);
  out.summary["n"] = n;
  return out;
}

}  // namespace

std::string to_string(JobKind k) {
  switch (k) {
    case JobKind::simulate: return "simulate";
    case JobKind::depmeasure: return "depmeasure";
    case JobKind::estimate: return "estimate";
  }
  return "unknown";
}

JobConfig job_from_json(const json& j, JobKind kind) {
  const std::string key = to_string(kind);
  Node n(j, "", {"name", "seed", "model", "kernel", "bandwidth", "simulate", "depmeasure", "estimate"});
  for (const char* other : {"simulate", "depmeasure", "estimate"}) {
    if (key != other && j.contains(other)) {
      throw ConfigError(std::string("/") + other, "section does not match subcommand '" + key + "'");
    }
  }
  JobConfig c;
  c.kind = kind;
  c.raw = j;
  c.name = n.text("name", key);
  c.seed = n.count("seed", 1);
  c.model = n.has("model") ? model_from_json(n.raw("model"), "/model") : ProcessModel(RecursiveModel{});
  c.kernel = kernel_from_name(n.text("kernel", "epanechnikov"), "/kernel");
  if (n.has("bandwidth")) c.bandwidth = bandwidth_from_json(n.raw("bandwidth"), "/bandwidth");
  c.section = j.contains(key) ? j.at(key) : json::object();
  if (!c.section.is_object()) throw ConfigError("/" + key, "expected a mapping");
  return c;
}

JobOutput run_job(const JobConfig& cfg, unsigned threads) {
  switch (cfg.kind) {
    case JobKind::simulate: return simulate_job(cfg);
    case JobKind::depmeasure: return depmeasure_job(cfg, threads);
    case JobKind::estimate: return estimate_job(cfg);
  }
  throw ConfigError("", "unsupported job");
}

}  // namespace locstat
