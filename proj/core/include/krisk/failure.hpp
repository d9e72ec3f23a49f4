#pragma once

namespace krisk {

/// Side of the threshold on which the response is out of specification.
enum class Orientation {
  Upper,  // A = [m, +inf)
  Lower,  // A = (-inf, m]
};

struct FailureSpec {
  double threshold = 0.0;
  Orientation orientation = Orientation::Upper;

  /// Whether a true response value is a defective.
  bool failed(double y) const noexcept {
    return orientation == Orientation::Upper ? y > threshold : y < threshold;
  }
};

}  // namespace krisk
