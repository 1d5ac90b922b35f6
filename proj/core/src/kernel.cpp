#include "locstat/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "locstat/numerics.hpp"

namespace locstat {

Kernel Kernel::epanechnikov() {
  Kernel k;
  k.shape_ = KernelShape::epanechnikov;
  k.lipschitz_ = 6.0;
  k.integral_ = 1.0;
  k.l2_squared_ = 6.0 / 5.0;
  k.sup_ = 1.5;
  k.l1_ = 1.0;
  return k;
}

Kernel Kernel::triangular() {
  Kernel k;
  k.shape_ = KernelShape::triangular;
  k.lipschitz_ = 4.0;
  k.integral_ = 1.0;
  k.l2_squared_ = 4.0 / 3.0;
  k.sup_ = 2.0;
  k.l1_ = 1.0;
  return k;
}

Kernel Kernel::custom(std::vector<double> samples) {
  if (samples.size() < 3) throw ModelError("custom kernel needs at least 3 samples");
  if (samples.front() != 0.0 || samples.back() != 0.0)
    throw ModelError("custom kernel samples must vanish at u = -1/2 and u = 1/2");
  Kernel k;
  k.shape_ = KernelShape::custom;
  const double dx = 1.0 / static_cast<double>(samples.size() - 1);
  for (std::size_t j = 0; j + 1 < samples.size(); ++j) {
    const double a = samples[j], b = samples[j + 1];
    k.integral_ += 0.5 * (a + b) * dx;
    k.l2_squared_ += (a * a + a * b + b * b) / 3.0 * dx;
    k.lipschitz_ = std::max(k.lipschitz_, std::abs(b - a) / dx);
    if (a * b >= 0) {
      k.l1_ += 0.5 * (std::abs(a) + std::abs(b)) * dx;
    } else {
      k.l1_ += 0.5 * (a * a + b * b) / (std::abs(a) + std::abs(b)) * dx;
    }
  }
  for (double s : samples) k.sup_ = std::max(k.sup_, std::abs(s));
  if (std::abs(k.integral_ - 1.0) > 1e-10) {
    std::ostringstream msg;
    msg << "custom kernel integrates to " << k.integral_ << ", expected 1";
    throw ModelError(msg.str());
  }
  if (!(k.l2_squared_ > 0.0)) throw ModelError("custom kernel has zero L2 norm");
  k.samples_ = std::move(samples);
  return k;
}

double Kernel::operator()(double u) const noexcept {
  if (!(std::abs(u) <= 0.5)) return 0.0;
  switch (shape_) {
    case KernelShape::epanechnikov: return 6.0 * (0.25 - u * u);
    case KernelShape::triangular: return 2.0 - 4.0 * std::abs(u);
    case KernelShape::custom: {
      const double pos = (u + 0.5) * static_cast<double>(samples_.size() - 1);
      const auto j = std::min(static_cast<std::size_t>(pos), samples_.size() - 2);
      const double w = pos - static_cast<double>(j);
      return (1.0 - w) * samples_[j] + w * samples_[j + 1];
    }
  }
  return 0.0;
}

std::string Kernel::name() const {
  switch (shape_) {
    case KernelShape::epanechnikov: return "epanechnikov";
    case KernelShape::triangular: return "triangular";
    case KernelShape::custom: return "custom";
  }
  return "custom";
}

}  // namespace locstat
