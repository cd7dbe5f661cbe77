// Textbook discrete PID written independently of the library, used as the
// equivalence oracle for the nonlinear-gain controller with k1 = 0:
// trapezoidal integral with zero initial previous error, first-order-filtered
// backward-difference derivative (filter seeded on the first call), output
// clamp, conditional integration while saturated.
#pragma once

#include <algorithm>

namespace testsupport {

class ReferencePid {
public:
  ReferencePid(double kp, double ki, double kd, double lo, double hi, double tau)
      : kp_(kp), ki_(ki), kd_(kd), lo_(lo), hi_(hi), tau_(tau) {}

  double update(double e, double dt) {
    if (first_) {
      ef_ = e;
      ep_ = 0.0;
      first_ = false;
    }
    const double tau = tau_ > 0.0 ? tau_ : 5.0 * dt;
    const double ef_next = ef_ + dt / (tau + dt) * (e - ef_);
    const double deriv = (ef_next - ef_) / dt;
    const double cand = acc_ + 0.5 * dt * (e + ep_);
    double u = kp_ * e + ki_ * cand + kd_ * deriv;
    const bool freeze = (u > hi_ && e > 0.0) || (u < lo_ && e < 0.0);
    if (freeze)
      u = kp_ * e + ki_ * acc_ + kd_ * deriv;
    else
      acc_ = cand;
    ep_ = e;
    ef_ = ef_next;
    return std::clamp(u, lo_, hi_);
  }

private:
  double kp_, ki_, kd_, lo_, hi_, tau_;
  double acc_ = 0.0, ep_ = 0.0, ef_ = 0.0;
  bool first_ = true;
};

}  // namespace testsupport
