#pragma once

#include <functional>
#include <vector>

namespace krisk {

struct NelderMeadOptions {
  int max_evaluations = 400;
  double initial_step = 0.5;
  /// Stop when the simplex value spread falls below this.
  double value_tolerance = 1e-8;
  double point_tolerance = 1e-7;
};

struct NelderMeadResult {
  std::vector<double> point;
  double value = 0.0;
  int evaluations = 0;
};

/// Unconstrained derivative-free minimisation. Non-finite objective values
/// are treated as +infinity so the simplex retreats from them.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start,
                             const NelderMeadOptions& options = {});

}  // namespace krisk
