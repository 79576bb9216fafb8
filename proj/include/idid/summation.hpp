#pragma once

#include <cmath>

namespace idid {

/// Neumaier-compensated accumulator. Sums agree across input permutations
/// to within a couple of ulps, which makes order-independence testable.
class CompensatedSum {
 public:
  void add(double value) {
    double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      comp_ += (sum_ - t) + value;
    } else {
      comp_ += (value - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace idid
