#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "dmsgd/errors.hpp"

namespace dmsgd {

enum class ScheduleFamily { PowerLaw, RateLaw, Constant };

struct RmVerdict {
  bool valid = false;
  std::string reason;
};

// Step-size family eps_n. PowerLaw: c / n^p. RateLaw: sqrt(m) / sqrt(n).
// Constant: c (early-stage hitting-time experiments only).
class StepSchedule {
 public:
  static StepSchedule power_law(double c, double p);
  static StepSchedule rate_law(int m);
  static StepSchedule constant(double c);

  ScheduleFamily family() const { return family_; }
  double c() const { return c_; }
  double p() const { return p_; }
  int m() const { return m_; }

  double step_at(long long n) const;
  RmVerdict robbins_monro_valid() const;

  // Sum_{i=1}^{n} eps_i; cached running accumulation.
  double partial_sum(long long n) const;

 private:
  StepSchedule(ScheduleFamily family, double c, double p, int m)
      : family_(family), c_(c), p_(p), m_(m) {}

  ScheduleFamily family_;
  double c_ = 1.0;
  double p_ = 1.0;
  int m_ = 1;
  mutable std::vector<double> prefix_;  // prefix_[n] = partial_sum(n)
};

}  // namespace dmsgd
