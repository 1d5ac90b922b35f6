#include "locstat/function_class.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace locstat {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Base Base::constant(double c) {
  Base b;
  b.kind_ = BaseKind::constant;
  b.loc_ = c;
  b.lipschitz_ = 0.0;
  return b;
}

Base Base::identity() {
  Base b;
  b.kind_ = BaseKind::identity;
  return b;
}

Base Base::abs_deviation(double theta) {
  Base b;
  b.kind_ = BaseKind::abs_deviation;
  b.loc_ = theta;
  return b;
}

Base Base::indicator(double x) {
  Base b;
  b.kind_ = BaseKind::indicator;
  b.loc_ = x;
  b.lipschitz_ = kInf;
  return b;
}

Base Base::kernel_density(double x, double h2, Kernel kernel) {
  if (!(h2 > 0.0)) throw ModelError("kernel base needs h2 > 0");
  Base b;
  b.kind_ = BaseKind::kernel;
  b.loc_ = x;
  b.h2_ = h2;
  b.lipschitz_ = kernel.lipschitz() / std::pow(h2, 1.5);
  b.kernel_ = std::move(kernel);
  return b;
}

Base Base::generic(std::function<double(double)> fn, std::string name, double lipschitz) {
  Base b;
  b.kind_ = BaseKind::generic;
  b.fn_ = std::move(fn);
  b.name_ = std::move(name);
  b.lipschitz_ = lipschitz;
  return b;
}

double Base::operator()(double z) const {
  switch (kind_) {
    case BaseKind::constant: return loc_;
    case BaseKind::identity: return scale_ * z;
    case BaseKind::abs_deviation: return scale_ * std::abs(z - loc_);
    case BaseKind::indicator: return z <= loc_ ? scale_ : 0.0;
    case BaseKind::kernel: return scale_ * kernel_((z - loc_) / h2_) / std::sqrt(h2_);
    case BaseKind::generic: return scale_ * fn_(z);
  }
  return 0.0;
}

std::string Base::name() const {
  std::ostringstream s;
  if (scale_ != 1.0) s << scale_ << "*";
  switch (kind_) {
    case BaseKind::constant: s << "const(" << loc_ << ")"; break;
    case BaseKind::identity: s << "identity"; break;
    case BaseKind::abs_deviation: s << "absdev(" << loc_ << ")"; break;
    case BaseKind::indicator: s << "indicator(" << loc_ << ")"; break;
    case BaseKind::kernel: s << "kernel(" << loc_ << ",h2=" << h2_ << ")"; break;
    case BaseKind::generic: s << name_; break;
  }
  return s.str();
}

double Base::sup_abs() const noexcept {
  switch (kind_) {
    case BaseKind::constant: return std::abs(loc_);
    case BaseKind::indicator: return std::abs(scale_);
    case BaseKind::kernel: return std::abs(scale_) * kernel_.sup() / std::sqrt(h2_);
    default: return kInf;
  }
}

double Base::lipschitz() const noexcept { return std::abs(scale_) * lipschitz_; }

Base Base::scaled(double a) const {
  Base b = *this;
  if (kind_ == BaseKind::constant) {
    b.loc_ *= a;
  } else {
    b.scale_ *= a;
  }
  return b;
}

Factor Factor::global(Polynomial omega) {
  Factor f;
  f.kind_ = FactorKind::global;
  f.omega_ = std::move(omega);
  return f;
}

Factor Factor::local(Kernel kernel, double h, double v, Polynomial omega) {
  if (!(h > 0.0 && h < 1.0)) throw ModelError("local factor needs bandwidth h in (0, 1)");
  if (!(v > 0.0 && v < 1.0)) throw ModelError("local factor needs center v in (0, 1)");
  Factor f;
  f.kind_ = FactorKind::local;
  f.kernel_ = std::move(kernel);
  f.h_ = h;
  f.v_ = v;
  f.omega_ = std::move(omega);
  return f;
}

double Factor::operator()(double u) const noexcept {
  if (kind_ == FactorKind::global) return omega_(u);
  return omega_(u) * kernel_((u - v_) / h_) / std::sqrt(h_);
}

std::string Factor::name() const {
  std::ostringstream s;
  if (kind_ == FactorKind::global) {
    s << "global";
  } else {
    s << "local(v=" << v_ << ",h=" << h_ << "," << kernel_.name() << ")";
  }
  return s.str();
}

Normalizers class_normalizers(std::span<const FunctionClass> members, std::size_t n, double nu) {
  if (members.empty() || n == 0) throw ModelError("class_normalizers needs members and n >= 1");
  double d_n_sq = 0.0;
  double sum_inf_sq = 0.0;
  double sum_inf_nu = 0.0;
  const auto nn = static_cast<double>(n);
  for (const auto& m : members) {
    double acc = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      const double d = m.factor(static_cast<double>(i) / nn);
      acc += d * d;
    }
    d_n_sq = std::max(d_n_sq, acc / nn);
  }
  for (std::size_t i = 1; i <= n; ++i) {
    double sup = 0.0;
    for (const auto& m : members) sup = std::max(sup, std::abs(m.factor(static_cast<double>(i) / nn)));
    sum_inf_sq += sup * sup;
    sum_inf_nu += std::pow(sup, nu);
  }
  return {std::sqrt(d_n_sq), std::sqrt(sum_inf_sq / nn), std::pow(sum_inf_nu / nn, 1.0 / nu)};
}

}  // namespace locstat
