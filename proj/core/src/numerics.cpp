#include "locstat/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace locstat {

namespace {

struct Panel {
  double a, b, value, error;
};

// One 15-point Gauss-Kronrod panel. Boost reports the error in the mapped [-1, 1]
// coordinates, so it is rescaled by the half-width here.
Panel gk_panel(const std::function<double(double)>& f, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  const double v = gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &err);
  return {a, b, v, err * 0.5 * (b - a)};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                     double abs_floor) {
  if (a == b) return {0.0, 0.0};
  if (b < a) {
    const auto r = integrate(f, b, a, rel_tol, abs_floor);
    return {-r.value, r.error};
  }
  // Infinite limits are mapped onto finite intervals.
  std::function<double(double)> g = f;
  double lo = a, hi = b;
  const bool inf_a = std::isinf(a), inf_b = std::isinf(b);
  if (inf_a && inf_b) {
    g = [&f](double t) {
      const double d = 1.0 - t * t;
      const double v = f(t / d) * (1.0 + t * t) / (d * d);
      return std::isfinite(v) ? v : 0.0;
    };
    lo = -1.0;
    hi = 1.0;
  } else if (inf_b) {
    g = [&f, a](double t) {
      const double d = 1.0 - t;
      const double v = f(a + t / d) / (d * d);
      return std::isfinite(v) ? v : 0.0;
    };
    lo = 0.0;
    hi = 1.0;
  } else if (inf_a) {
    g = [&f, b](double t) {
      const double d = 1.0 - t;
      const double v = f(b - t / d) / (d * d);
      return std::isfinite(v) ? v : 0.0;
    };
    lo = 0.0;
    hi = 1.0;
  }

  constexpr std::size_t kMaxPanels = 4000;
  std::vector<Panel> panels{gk_panel(g, lo, hi)};
  const auto worst = [](const Panel& x, const Panel& y) { return x.error < y.error; };
  double value = panels.front().value;
  double error = panels.front().error;
  while (!(error <= std::max(rel_tol * std::abs(value), abs_floor)) && panels.size() < kMaxPanels) {
    std::pop_heap(panels.begin(), panels.end(), worst);
    const Panel p = panels.back();
    panels.pop_back();
    const double mid = 0.5 * (p.a + p.b);
    if (!(mid > p.a && mid < p.b)) {
      panels.push_back(p);
      std::push_heap(panels.begin(), panels.end(), worst);
      break;
    }
    for (const Panel& c : {gk_panel(g, p.a, mid), gk_panel(g, mid, p.b)}) {
      panels.push_back(c);
      std::push_heap(panels.begin(), panels.end(), worst);
    }
    // Re-sum to avoid drift from repeated subtraction.
    value = 0.0;
    error = 0.0;
    for (const auto& q : panels) {
      value += q.value;
      error += q.error;
    }
  }
  if (!std::isfinite(value) || !(error <= std::max(rel_tol * std::abs(value), abs_floor))) {
    std::ostringstream msg;
    msg << "quadrature on [" << a << ", " << b << "] did not converge: value " << value
        << ", achieved residual " << error << " (tolerance " << rel_tol << ")";
    throw NumericalError(msg.str());
  }
  return {value, error};
}

double series_tail_sum(const std::function<double(double)>& t, std::uint64_t start,
                       std::uint64_t head) {
  if (start < 1) start = 1;
  const std::uint64_t n_tail = start + head;
  double sum = 0.0;
  // Add small terms first.
  for (std::uint64_t j = n_tail; j-- > start;) sum += t(static_cast<double>(j));
  const double x = static_cast<double>(n_tail);
  const double step = 1e-3 * x;
  const double deriv = (t(x + step) - t(x - step)) / (2.0 * step);
  // u = x e^y turns power-law tails into exponentially decaying integrands.
  const double tail_integral =
      integrate([&](double y) {
        const double u = x * std::exp(y);
        const double v = std::isfinite(u) ? t(u) * u : 0.0;
        return std::isfinite(v) ? v : 0.0;
      }, 0.0,
                std::numeric_limits<double>::infinity(), 1e-12, 1e-300)
          .value;
  return sum + tail_integral + 0.5 * t(x) - deriv / 12.0;
}

std::uint64_t first_true(const std::function<bool(std::uint64_t)>& pred) {
  if (pred(1)) return 1;
  std::uint64_t hi = 2;
  while (!pred(hi)) {
    if (hi > (std::uint64_t{1} << 61)) throw NumericalError("integer search did not terminate below 2^62");
    hi *= 2;
  }
  std::uint64_t lo = hi / 2;
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (pred(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

Polynomial::Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
  if (c_.empty()) c_.push_back(0.0);
}

double Polynomial::operator()(double u) const noexcept {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * u + *it;
  return acc;
}

double Polynomial::derivative(double u) const noexcept {
  double acc = 0.0;
  for (std::size_t k = c_.size(); k-- > 1;) acc = acc * u + static_cast<double>(k) * c_[k];
  return acc;
}

namespace {

template <class F>
double grid_extreme(F&& f, bool take_max) {
  double best = take_max ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 1000; ++k) {
    const double v = f(k / 1000.0);
    best = take_max ? std::max(best, v) : std::min(best, v);
  }
  return best;
}

}  // namespace

double Polynomial::sup_abs() const noexcept {
  return grid_extreme([this](double u) { return std::abs((*this)(u)); }, true);
}
double Polynomial::inf() const noexcept {
  return grid_extreme([this](double u) { return (*this)(u); }, false);
}
double Polynomial::sup() const noexcept {
  return grid_extreme([this](double u) { return (*this)(u); }, true);
}
double Polynomial::derivative_sup_abs() const noexcept {
  return grid_extreme([this](double u) { return std::abs(derivative(u)); }, true);
}
bool Polynomial::is_constant() const noexcept {
  return std::all_of(c_.begin() + 1, c_.end(), [](double v) { return v == 0.0; });
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace stats {

double mean(std::span<const double> x) {
  if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
  // Shifted accumulation: exact for constant samples.
  const double x0 = x[0];
  double acc = 0.0;
  for (double v : x) acc += v - x0;
  return x0 + acc / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return acc / static_cast<double>(x.size() - 1);
}

double quantile(std::vector<double> x, double p) {
  if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(x.begin(), x.end());
  const double pos = p * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, x.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * x[lo] + w * x[hi];
}

double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

double variance_se(std::span<const double> x) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 4) return std::numeric_limits<double>::infinity();
  const double m = mean(x);
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d2 = (v - m) * (v - m);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;
  return std::sqrt(std::max(m4 - m2 * m2 * (n - 3.0) / (n - 1.0), 0.0) / n);
}

double ks_normal(std::vector<double> x, double mu, double sd) {
  std::sort(x.begin(), x.end());
  const boost::math::normal_distribution<double> law(mu, sd);
  const auto n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = boost::math::cdf(law, x[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace stats

}  // namespace locstat
