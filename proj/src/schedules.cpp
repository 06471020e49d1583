#include "dmsgd/schedules.hpp"

namespace dmsgd {

StepSchedule StepSchedule::power_law(double c, double p) {
  if (c <= 0.0) throw BadParam("power-law scale c must be positive");
  if (p < 0.0) throw BadParam("power-law exponent must be non-negative");
  return StepSchedule(ScheduleFamily::PowerLaw, c, p, 1);
}

StepSchedule StepSchedule::rate_law(int m) {
  if (m < 1) throw BadParam("rate-law worker count must be positive");
  return StepSchedule(ScheduleFamily::RateLaw, 1.0, 0.5, m);
}

StepSchedule StepSchedule::constant(double c) {
  if (c <= 0.0) throw BadParam("constant step must be positive");
  return StepSchedule(ScheduleFamily::Constant, c, 0.0, 1);
}

double StepSchedule::step_at(long long n) const {
  if (n < 1) throw BadParam("step index starts at 1");
  switch (family_) {
    case ScheduleFamily::PowerLaw:
      return c_ / std::pow(static_cast<double>(n), p_);
    case ScheduleFamily::RateLaw:
      return std::sqrt(static_cast<double>(m_)) / std::sqrt(static_cast<double>(n));
    case ScheduleFamily::Constant:
      return c_;
  }
  return c_;
}

RmVerdict StepSchedule::robbins_monro_valid() const {
  switch (family_) {
    case ScheduleFamily::PowerLaw:
      if (p_ <= 0.5) return {false, "sum of eps^2 diverges (p <= 1/2)"};
      if (p_ > 1.0) return {false, "sum of eps converges (p > 1)"};
      return {true, "power law with p in (1/2, 1]"};
    case ScheduleFamily::RateLaw:
      return {false, "rate-law schedule, rate-regime experiments only"};
    case ScheduleFamily::Constant:
      return {false, "constant step, hitting-time regime only"};
  }
  return {false, "unknown family"};
}

double StepSchedule::partial_sum(long long n) const {
  if (n < 1) throw BadParam("partial sum index starts at 1");
  if (prefix_.empty()) prefix_.push_back(0.0);
  const auto want = static_cast<std::size_t>(n);
  while (prefix_.size() <= want) {
    prefix_.push_back(prefix_.back() +
                      step_at(static_cast<long long>(prefix_.size())));
  }
  return prefix_[want];
}

}  // namespace dmsgd
