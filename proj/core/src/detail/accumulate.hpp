#pragma once

#include <cstddef>
#include <span>

namespace embcomm::detail {

// Compensated (Kahan) summation; needed where tolerances are tighter than
// naive accumulation over ~1e7 terms can hold.
inline double kahan_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    double y = v - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace embcomm::detail
