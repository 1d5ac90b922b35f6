#include "locstat/innovation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/student_t_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include "locstat/numerics.hpp"

namespace locstat {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

Innovation Innovation::normal(double sd) {
  if (!(sd > 0.0)) throw ModelError("normal innovation needs sd > 0");
  return {InnovationKind::normal, sd};
}

Innovation Innovation::student_t(double df) {
  if (!(df > 2.0)) throw ModelError("Student-t innovation needs df > 2 (finite variance)");
  return {InnovationKind::student_t, df};
}

Innovation Innovation::uniform(double half_width) {
  if (!(half_width > 0.0)) throw ModelError("uniform innovation needs half_width > 0");
  return {InnovationKind::uniform, half_width};
}

std::string Innovation::name() const {
  std::ostringstream s;
  switch (kind_) {
    case InnovationKind::normal: s << "normal(sd=" << param_ << ")"; break;
    case InnovationKind::student_t: s << "student_t(df=" << param_ << ")"; break;
    case InnovationKind::uniform: s << "uniform(half_width=" << param_ << ")"; break;
  }
  return s.str();
}

double Innovation::sample(CounterRng& rng) const {
  switch (kind_) {
    case InnovationKind::normal: return boost::random::normal_distribution<double>(0.0, param_)(rng);
    case InnovationKind::student_t: return boost::random::student_t_distribution<double>(param_)(rng);
    case InnovationKind::uniform:
      return boost::random::uniform_real_distribution<double>(-param_, param_)(rng);
  }
  return 0.0;
}

double Innovation::pdf(double x) const {
  switch (kind_) {
    case InnovationKind::normal:
      return boost::math::pdf(boost::math::normal_distribution<double>(0.0, param_), x);
    case InnovationKind::student_t:
      return boost::math::pdf(boost::math::students_t_distribution<double>(param_), x);
    case InnovationKind::uniform: return std::abs(x) <= param_ ? 0.5 / param_ : 0.0;
  }
  return 0.0;
}

double Innovation::cdf(double x) const {
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  switch (kind_) {
    case InnovationKind::normal:
      return boost::math::cdf(boost::math::normal_distribution<double>(0.0, param_), x);
    case InnovationKind::student_t:
      return boost::math::cdf(boost::math::students_t_distribution<double>(param_), x);
    case InnovationKind::uniform:
      if (x <= -param_) return 0.0;
      if (x >= param_) return 1.0;
      return 0.5 * (x + param_) / param_;
  }
  return 0.0;
}

double Innovation::quantile(double p) const {
  switch (kind_) {
    case InnovationKind::normal:
      return boost::math::quantile(boost::math::normal_distribution<double>(0.0, param_), p);
    case InnovationKind::student_t:
      return boost::math::quantile(boost::math::students_t_distribution<double>(param_), p);
    case InnovationKind::uniform: return -param_ + 2.0 * param_ * p;
  }
  return 0.0;
}

double Innovation::variance() const {
  switch (kind_) {
    case InnovationKind::normal: return param_ * param_;
    case InnovationKind::student_t: return param_ / (param_ - 2.0);
    case InnovationKind::uniform: return param_ * param_ / 3.0;
  }
  return 0.0;
}

double Innovation::lq_norm(double q) const {
  using boost::math::tgamma;
  switch (kind_) {
    case InnovationKind::normal:
      return param_ * std::pow(std::pow(2.0, q / 2.0) * tgamma((q + 1.0) / 2.0) / std::sqrt(kPi), 1.0 / q);
    case InnovationKind::student_t: {
      const double nu = param_;
      if (q >= nu) return kInf;
      const double m = std::pow(nu, q / 2.0) * tgamma((q + 1.0) / 2.0) * tgamma((nu - q) / 2.0) /
                       (std::sqrt(kPi) * tgamma(nu / 2.0));
      return std::pow(m, 1.0 / q);
    }
    case InnovationKind::uniform: return param_ / std::pow(q + 1.0, 1.0 / q);
  }
  return kInf;
}

double Innovation::pdf_sup() const { return pdf(0.0); }

double Innovation::pdf_derivative_sup() const {
  switch (kind_) {
    case InnovationKind::normal: return std::exp(-0.5) / (param_ * param_ * std::sqrt(2.0 * kPi));
    case InnovationKind::student_t: {
      // |g'(x)| = (nu+1)|x|/(nu+x^2) g(x), maximal at x^2 = nu/(nu+2).
      const double nu = param_;
      const double x = std::sqrt(nu / (nu + 2.0));
      return (nu + 1.0) * x / (nu + x * x) * pdf(x);
    }
    case InnovationKind::uniform: return kInf;
  }
  return kInf;
}

double Innovation::pdf_moment_sup() const {
  switch (kind_) {
    case InnovationKind::normal: return std::exp(-0.5) / std::sqrt(2.0 * kPi);
    case InnovationKind::student_t: return pdf(1.0);
    case InnovationKind::uniform: return 0.5;
  }
  return kInf;
}

double Innovation::pdf_derivative_moment_sup() const {
  switch (kind_) {
    case InnovationKind::normal:
      // x g'(x) = -(x/sd)^2 φ(x/sd)/sd, maximal at |x| = sqrt(2) sd.
      return 2.0 * std::exp(-1.0) / (std::sqrt(2.0 * kPi) * param_);
    case InnovationKind::student_t: {
      // |x g'(x)| = (nu+1) x^2/(nu+x^2) g(x), maximal at x^2 = 2 nu / (nu - 1).
      const double nu = param_;
      const double x2 = 2.0 * nu / (nu - 1.0);
      return (nu + 1.0) * x2 / (nu + x2) * pdf(std::sqrt(x2));
    }
    case InnovationKind::uniform: return kInf;
  }
  return kInf;
}

}  // namespace locstat
