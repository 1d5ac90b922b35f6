#include "locstat/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "locstat/csv.hpp"
#include "locstat/rng.hpp"

namespace locstat {

namespace {

constexpr double kEdgeSlack = 1e-12;

bool interior(double v, double h) { return v >= 0.5 * h - kEdgeSlack && v <= 1.0 - 0.5 * h + kEdgeSlack; }

void check_bandwidth(double h, const char* what) {
  if (!(h > 0.0 && h < 1.0)) {
    std::ostringstream s;
    s << what << ": bandwidth must lie in (0, 1), got " << h;
    throw ModelError(s.str());
  }
}

/// Indices i in [1, n] with (i/n - v)/h inside the kernel support [-1/2, 1/2].
struct Window {
  std::size_t lo;
  std::size_t hi;  ///< inclusive; lo > hi when empty
};

Window window(std::size_t n, double h, double v) {
  const double nd = static_cast<double>(n);
  const double a = std::max(1.0, std::ceil((v - 0.5 * h) * nd));
  const double b = std::min(nd, std::floor((v + 0.5 * h) * nd));
  return {static_cast<std::size_t>(a), static_cast<std::size_t>(std::max(0.0, b))};
}

/// w_i = K_h(i/n - v) / n over the window; throws when every weight vanishes.
std::vector<std::pair<std::size_t, double>> weights(std::size_t n, const Kernel& k, double h, double v) {
  const Window w = window(n, h, v);
  std::vector<std::pair<std::size_t, double>> out;
  const double nd = static_cast<double>(n);
  for (std::size_t i = w.lo; i <= w.hi && i >= 1; ++i) {
    const double kw = k.scaled(static_cast<double>(i) / nd - v, h) / nd;
    if (kw != 0.0) out.emplace_back(i, kw);
  }
  if (out.empty()) {
    std::ostringstream s;
    s << "empty kernel window at v = " << v << " with h = " << h << " and n = " << n;
    throw ModelError(s.str());
  }
  return out;
}

std::vector<double> sorted(std::vector<double> g) {
  std::sort(g.begin(), g.end());
  return g;
}

}  // namespace

void write_csv(std::ostream& out, const EstimatorResult& r) {
  CsvWriter w(out);
  std::vector<std::string> head{"v"};
  if (!r.x.empty()) head.emplace_back("x");
  head.emplace_back("estimate");
  if (!r.reference.empty()) head.emplace_back("reference");
  w.header(head);
  for (std::size_t j = 0; j < r.values.size(); ++j) {
    w.cell(r.v[j]);
    if (!r.x.empty()) w.cell(r.x[j]);
    w.cell(r.values[j]);
    if (!r.reference.empty()) w.cell(r.reference[j]);
    w.end_row();
  }
}

nlohmann::json summary_json(const EstimatorResult& r) {
  nlohmann::json j{{"estimator", r.estimator},
                   {"points", r.values.size()},
                   {"h1", r.h1},
                   {"h2", r.h2},
                   {"excluded", r.excluded}};
  if (!r.values.empty()) {
    const auto [lo, hi] = std::minmax_element(r.values.begin(), r.values.end());
    j["min"] = *lo;
    j["max"] = *hi;
  }
  if (!r.reference.empty()) {
    double sup = 0.0;
    for (std::size_t i = 0; i < r.values.size(); ++i) sup = std::max(sup, std::abs(r.values[i] - r.reference[i]));
    j["sup_error"] = sup;
  }
  return j;
}

double kernel_weight_sum(std::size_t n, const Kernel& k, double h, double v) {
  double acc = 0.0;
  for (const auto& [i, w] : weights(n, k, h, v)) acc += w;
  return acc;
}

std::vector<double> interior_grid(double h, std::size_t count) {
  check_bandwidth(h, "interior_grid");
  if (count == 0) return {};
  if (count == 1) return {0.5};
  std::vector<double> g(count);
  for (std::size_t j = 0; j < count; ++j) {
    g[j] = 0.5 * h + (1.0 - h) * static_cast<double>(j) / static_cast<double>(count - 1);
  }
  return g;
}

StationaryLaw::StationaryLaw(const ProcessModel& model, double v, std::size_t draws, std::uint64_t seed)
    : v_(v), innovation_(model_innovation(model)) {
  if (draws < 100) throw std::invalid_argument("StationaryLaw needs at least 100 draws");
  const Path p = simulate_stationary(model, v, draws, splitmix64(seed ^ stream_id(Stream::reference, 0)));
  loc_.resize(draws);
  scale_.resize(draws);
  values_ = p.values;
  if (const auto* rm = std::get_if<RecursiveModel>(&model)) {
    for (std::size_t t = 1; t <= draws; ++t) {
      loc_[t - 1] = rm->mean(p.x(t - 1), v);
      scale_[t - 1] = rm->sigma(p.x(t - 1), v);
    }
  } else {
    const double a0 = std::get<LinearModel>(model).a0(v);
    for (std::size_t t = 1; t <= draws; ++t) {
      scale_[t - 1] = std::abs(a0);
      loc_[t - 1] = p.x(t) - a0 * p.innovation(static_cast<long>(t));
    }
  }
  mean_ = stats::mean(loc_);
}

double StationaryLaw::cdf(double x) const {
  double acc = 0.0;
  for (std::size_t t = 0; t < loc_.size(); ++t) acc += innovation_.cdf((x - loc_[t]) / scale_[t]);
  return acc / static_cast<double>(loc_.size());
}

double StationaryLaw::pdf(double x) const {
  double acc = 0.0;
  for (std::size_t t = 0; t < loc_.size(); ++t) acc += innovation_.pdf((x - loc_[t]) / scale_[t]) / scale_[t];
  return acc / static_cast<double>(loc_.size());
}

double StationaryLaw::abs_deviation(double theta) const {
  double acc = 0.0;
  for (double x : values_) acc += std::abs(x - theta);
  return acc / static_cast<double>(values_.size());
}

EstimatorResult kernel_regression(std::span<const double> y, const Kernel& k, double h,
                                  const std::vector<double>& v_grid, const std::function<double(double)>& trend) {
  check_bandwidth(h, "kernel_regression");
  const std::size_t n = y.size();
  EstimatorResult r;
  r.estimator = "kernel_regression";
  r.h1 = h;
  for (double v : sorted(v_grid)) {
    if (!interior(v, h)) {
      ++r.excluded;
      continue;
    }
    double est = 0.0, ref = 0.0;
    for (const auto& [i, w] : weights(n, k, h, v)) {
      est += w * y[i - 1];
      if (trend) ref += w * trend(static_cast<double>(i) / static_cast<double>(n));
    }
    r.v.push_back(v);
    r.values.push_back(est);
    if (trend) r.reference.push_back(ref);
  }
  return r;
}

EstimatorResult kernel_density(std::span<const double> x, const Kernel& k, const Kernel& k_tilde, double h1,
                               double h2, const std::vector<double>& x_grid, const std::vector<double>& v_grid,
                               const std::function<double(double, double)>& reference) {
  check_bandwidth(h1, "kernel_density");
  if (!(h2 > 0.0)) throw ModelError("kernel_density: h2 must be positive");
  if (std::abs(k_tilde.integral() - 1.0) > 1e-8) throw ModelError("kernel_density: second kernel must integrate to 1");
  const std::size_t n = x.size();
  EstimatorResult r;
  r.estimator = "kernel_density";
  r.h1 = h1;
  r.h2 = h2;
  const auto xs = sorted(x_grid);
  for (double v : sorted(v_grid)) {
    if (!interior(v, h1)) {
      ++r.excluded;
      continue;
    }
    const auto w = weights(n, k, h1, v);
    for (double xg : xs) {
      double est = 0.0;
      for (const auto& [i, wi] : w) est += wi * k_tilde.scaled(x[i - 1] - xg, h2);
      r.v.push_back(v);
      r.x.push_back(xg);
      r.values.push_back(est);
      if (reference) r.reference.push_back(reference(xg, v));
    }
  }
  return r;
}

EstimatorResult local_edf(std::span<const double> x, const Kernel& k, double h, const std::vector<double>& x_grid,
                          double v, const std::function<double(double)>& reference) {
  check_bandwidth(h, "local_edf");
  if (!(v > 0.0 && v < 1.0)) throw ModelError("local_edf: v must lie in (0, 1)");
  EstimatorResult r;
  r.estimator = "local_edf";
  r.h1 = h;
  if (!interior(v, h)) {
    r.excluded = 1;
    return r;
  }
  const auto w = weights(x.size(), k, h, v);
  // One pass over the window sorted by X_i gives the whole curve.
  std::vector<std::pair<double, double>> pts;
  pts.reserve(w.size());
  for (const auto& [i, wi] : w) pts.emplace_back(x[i - 1], wi);
  std::sort(pts.begin(), pts.end());
  std::size_t pos = 0;
  double acc = 0.0;
  for (double xg : sorted(x_grid)) {
    while (pos < pts.size() && pts[pos].first <= xg) acc += pts[pos++].second;
    r.v.push_back(v);
    r.x.push_back(xg);
    r.values.push_back(acc);
    if (reference) r.reference.push_back(reference(xg));
  }
  return r;
}

double local_mad(std::span<const double> x, const Kernel& k, double h, double v) {
  check_bandwidth(h, "local_mad");
  if (!(v > 0.0 && v < 1.0)) throw ModelError("local_mad: v must lie in (0, 1)");
  const auto w = weights(x.size(), k, h, v);
  double center = 0.0;
  for (const auto& [i, wi] : w) center += wi * x[i - 1];
  double mad = 0.0;
  for (const auto& [i, wi] : w) mad += wi * std::abs(x[i - 1] - center);
  return mad;
}

Base mad_influence_base(const StationaryLaw& law) {
  const double mu = law.mean();
  const double slope = 2.0 * law.cdf(mu) - 1.0;
  std::ostringstream name;
  name << "mad_influence(mu=" << mu << ")";
  return Base::generic([mu, slope](double z) { return std::abs(z - mu) + slope * z; }, name.str(),
                       1.0 + std::abs(slope));
}

MObjective MObjective::ar_least_squares(double lower, double upper) {
  if (!(lower < upper)) throw ModelError("ar_least_squares: empty parameter box");
  MObjective o;
  o.dim = 1;
  o.loss = [](std::span<const double> t, double x1, double x0) {
    const double e = x1 - t[0] * x0;
    return e * e;
  };
  o.gradient = [](std::span<const double> t, double x1, double x0, std::span<double> g) {
    g[0] = -2.0 * x0 * (x1 - t[0] * x0);
  };
  o.hessian = [](std::span<const double>, double, double x0, std::span<double> hs) { hs[0] = 2.0 * x0 * x0; };
  o.lower = {lower};
  o.upper = {upper};
  o.lipschitz = 2.0;
  o.name = "ar_least_squares";
  return o;
}

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct LocalObjective {
  const MObjective& obj;
  std::vector<std::pair<std::size_t, double>> w;
  const Path& path;

  double value(const Vec& t) const {
    double acc = 0.0;
    for (const auto& [i, wi] : w) acc += wi * obj.loss({t.data(), obj.dim}, path.x(i), path.x(i - 1));
    return acc;
  }
  Vec gradient(const Vec& t) const {
    Vec g = Vec::Zero(static_cast<Eigen::Index>(obj.dim));
    Vec gi(static_cast<Eigen::Index>(obj.dim));
    for (const auto& [i, wi] : w) {
      obj.gradient({t.data(), obj.dim}, path.x(i), path.x(i - 1), {gi.data(), obj.dim});
      g += wi * gi;
    }
    return g;
  }
  Mat hessian(const Vec& t) const {
    const auto d = static_cast<Eigen::Index>(obj.dim);
    Mat hs = Mat::Zero(d, d);
    Mat hi(d, d);
    for (const auto& [i, wi] : w) {
      obj.hessian({t.data(), obj.dim}, path.x(i), path.x(i - 1), {hi.data(), obj.dim * obj.dim});
      hs += wi * hi;
    }
    // Row-major and column-major agree once symmetrized.
    return 0.5 * (hs + hs.transpose());
  }
};

Vec project(Vec t, const MObjective& o) {
  for (std::size_t d = 0; d < o.dim; ++d) {
    const auto e = static_cast<Eigen::Index>(d);
    t[e] = std::clamp(t[e], o.lower[d], o.upper[d]);
  }
  return t;
}

/// Gradient norm with components pointing out of an active bound removed.
double projected_gradient_norm(const Vec& t, const Vec& g, const MObjective& o) {
  double acc = 0.0;
  for (std::size_t d = 0; d < o.dim; ++d) {
    const auto e = static_cast<Eigen::Index>(d);
    double gd = g[e];
    if (t[e] <= o.lower[d] && gd > 0.0) gd = 0.0;
    if (t[e] >= o.upper[d] && gd < 0.0) gd = 0.0;
    acc += gd * gd;
  }
  return std::sqrt(acc);
}

constexpr double kGradTol = 1e-10;
constexpr double kAcceptTol = 1e-8;

struct NewtonOutcome {
  Vec theta;
  int iterations;
  bool converged;
};

NewtonOutcome newton(const LocalObjective& f, Vec t) {
  const MObjective& o = f.obj;
  t = project(t, o);
  double val = f.value(t);
  for (int it = 1; it <= 50; ++it) {
    const Vec g = f.gradient(t);
    if (projected_gradient_norm(t, g, o) <= kGradTol) return {t, it - 1, true};
    const Mat hs = f.hessian(t);
    Eigen::LDLT<Mat> ldlt(hs);
    Vec step;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0.0).all()) {
      step = -ldlt.solve(g);
    } else {
      step = -g;
    }
    double lambda = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 40; ++halving, lambda *= 0.5) {
      const Vec cand = project(t + lambda * step, o);
      const double cv = f.value(cand);
      if (cv <= val) {
        moved = (cand - t).norm() > 0.0;
        t = cand;
        val = cv;
        break;
      }
    }
    if (!moved) return {t, it, projected_gradient_norm(t, f.gradient(t), o) <= kAcceptTol};
  }
  return {t, 50, projected_gradient_norm(t, f.gradient(t), o) <= kAcceptTol};
}

Vec golden_section(const LocalObjective& f) {
  const MObjective& o = f.obj;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = o.lower[0], b = o.upper[0];
  Vec t1(1), t2(1);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  t1[0] = c;
  t2[0] = d;
  double fc = f.value(t1), fd = f.value(t2);
  for (int it = 0; it < 200 && b - a > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      t1[0] = c;
      fc = f.value(t1);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      t2[0] = d;
      fd = f.value(t2);
    }
  }
  Vec t(1);
  t[0] = 0.5 * (a + b);
  return t;
}

Vec coarse_grid(const LocalObjective& f) {
  const MObjective& o = f.obj;
  constexpr int kPoints = 21;
  const auto d = static_cast<Eigen::Index>(o.dim);
  Vec best = project(Vec::Zero(d), o);
  double best_val = f.value(best);
  std::vector<int> idx(o.dim, 0);
  while (true) {
    Vec t(d);
    for (std::size_t c = 0; c < o.dim; ++c) {
      t[static_cast<Eigen::Index>(c)] = o.lower[c] + (o.upper[c] - o.lower[c]) * idx[c] / (kPoints - 1.0);
    }
    const double val = f.value(t);
    if (val < best_val) {
      best_val = val;
      best = t;
    }
    std::size_t c = 0;
    while (c < o.dim && ++idx[c] == kPoints) idx[c++] = 0;
    if (c == o.dim) break;
  }
  return best;
}

}  // namespace

std::vector<double> information_matrix(const MObjective& obj, const ProcessModel& model, double v,
                                       std::span<const double> theta0, std::size_t draws, std::uint64_t seed) {
  if (theta0.size() != obj.dim) throw std::invalid_argument("information_matrix: theta0 has the wrong dimension");
  const Path p = simulate_stationary(model, v, draws, splitmix64(seed ^ stream_id(Stream::reference, 1)));
  std::vector<double> acc(obj.dim * obj.dim, 0.0), hs(obj.dim * obj.dim);
  for (std::size_t t = 1; t <= draws; ++t) {
    obj.hessian(theta0, p.x(t), p.x(t - 1), hs);
    for (std::size_t e = 0; e < hs.size(); ++e) acc[e] += hs[e];
  }
  for (double& a : acc) a /= static_cast<double>(draws);
  return acc;
}

MEstimate m_estimate(const Path& path, const MObjective& obj, const Kernel& k, double h,
                     const std::vector<double>& v_grid, const BahadurTruth* truth) {
  check_bandwidth(h, "m_estimate");
  if (obj.lower.size() != obj.dim || obj.upper.size() != obj.dim) {
    throw ModelError("m_estimate: parameter box does not match the dimension");
  }
  const auto d = static_cast<Eigen::Index>(obj.dim);
  MEstimate out;
  out.result.estimator = "m_estimate:" + obj.name;
  out.result.h1 = h;
  for (double v : sorted(v_grid)) {
    if (!interior(v, h)) {
      ++out.result.excluded;
      continue;
    }
    LocalObjective f{obj, weights(path.n, k, h, v), path};
    Vec start = project(Vec::Zero(d), obj);
    NewtonOutcome res = newton(f, start);
    if (!res.converged) {
      const Vec seed_point = obj.dim == 1 ? golden_section(f) : coarse_grid(f);
      res = newton(f, seed_point);
      res.iterations = -1;
      if (!res.converged) {
        std::ostringstream s;
        s << "m_estimate: Newton and the fallback search both failed at v = " << v << " (gradient norm "
          << projected_gradient_norm(res.theta, f.gradient(res.theta), obj) << ")";
        throw NumericalError(s.str());
      }
    }
    const Vec g = f.gradient(res.theta);
    Eigen::LDLT<Mat> ldlt(f.hessian(res.theta));
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all()) {
      std::ostringstream s;
      s << "m_estimate: Hessian is not positive definite at the optimum for v = " << v;
      throw NumericalError(s.str());
    }
    out.result.v.push_back(v);
    for (Eigen::Index c = 0; c < d; ++c) out.result.values.push_back(res.theta[c]);
    out.gradient_norm.push_back(projected_gradient_norm(res.theta, g, obj));
    out.iterations.push_back(res.iterations);
    if (truth) {
      const auto t0v = truth->theta0(v);
      const auto info = truth->information(v);
      Vec t0 = Eigen::Map<const Vec>(t0v.data(), d);
      // Row-major input; the symmetric part is what enters.
      Mat im = Eigen::Map<const Mat>(info.data(), d, d);
      im = 0.5 * (im + im.transpose());
      Eigen::LDLT<Mat> il(im);
      if (il.info() != Eigen::Success || !(il.vectorD().array() > 0.0).all()) {
        std::ostringstream s;
        s << "m_estimate: information matrix is singular at v = " << v;
        throw NumericalError(s.str());
      }
      const Vec first = res.theta - t0;
      const Vec resid = first + il.solve(f.gradient(t0));
      out.bahadur_residual.push_back(resid.norm());
      out.first_order.push_back(first.norm());
      for (Eigen::Index c = 0; c < d; ++c) out.result.reference.push_back(t0[c]);
    }
  }
  return out;
}

double ar_closed_form(const Path& path, const Kernel& k, double h, double v) {
  double num = 0.0, den = 0.0;
  for (const auto& [i, w] : weights(path.n, k, h, v)) {
    num += w * path.x(i) * path.x(i - 1);
    den += w * path.x(i - 1) * path.x(i - 1);
  }
  if (!(den > 0.0)) throw NumericalError("ar_closed_form: zero weighted design");
  return num / den;
}

BracketParams BracketParams::from_model(const RecursiveModel& model, const Kernel& k, double s) {
  const double q = 2.0 * s;
  const double cx = model.moment_bound(q);
  // Minkowski: ‖m(X)‖_q ≤ sup|b| + χ_m ‖X‖_q, and likewise σ(x) ≤ σ(0) + χ_σ |x|.
  BracketParams p{};
  p.c_m = model.b.sup_abs() + model.chi_m() * cx;
  p.c_sigma = model.scale.at_zero_sup() + model.chi_sigma() * cx;
  p.c_eps = model.innovation.lq_norm(q);
  p.sigma_min = model.sigma_min();
  p.g_sup = model.innovation.pdf_sup();
  p.s = s;
  p.k_sup = k.sup();
  return p;
}

BracketGrid edf_brackets(double gamma, const BracketParams& p) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ModelError("edf_brackets: gamma must lie in (0, 1]");
  if (!(p.sigma_min > 0.0 && p.g_sup > 0.0 && p.k_sup > 0.0 && p.s > 0.0)) {
    throw ModelError("edf_brackets: sigma_min, g_sup, k_sup and s must be positive");
  }
  const double k2 = p.k_sup * p.k_sup;
  const double a_pow = std::pow(gamma * gamma / (3.0 * k2), -1.0 / (2.0 * p.s));
  const double c_gamma = std::max(p.c_m, p.c_sigma) * a_pow;
  BracketGrid g{};
  g.x_n = c_gamma * (1.0 + p.c_eps * a_pow);
  g.spacing = gamma * gamma * p.sigma_min / (p.g_sup * k2);
  // Equal gaps of at most `spacing` across [-x_N, x_N].
  const auto gaps = static_cast<std::size_t>(std::max(1.0, std::ceil(2.0 * g.x_n / g.spacing)));
  constexpr double inf = std::numeric_limits<double>::infinity();
  g.x.reserve(gaps + 3);
  g.x.push_back(-inf);
  for (std::size_t j = 0; j <= gaps; ++j) {
    g.x.push_back(-g.x_n + 2.0 * g.x_n * static_cast<double>(j) / static_cast<double>(gaps));
  }
  g.x.back() = g.x_n;
  g.x.push_back(inf);
  g.count = g.x.size() - 1;
  // count ≤ 2 x_N / spacing + 3 and x_N ≤ A γ^{-2/s} for γ ≤ 1.
  const double root = std::pow(3.0 * k2, 1.0 / (2.0 * p.s));
  const double a_const = std::max(p.c_m, p.c_sigma) * root * (1.0 + p.c_eps * root);
  g.c_n = 2.0 * a_const * p.g_sup * k2 / p.sigma_min + 3.0;
  return g;
}

}  // namespace locstat
