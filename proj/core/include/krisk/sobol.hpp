#pragma once

#include <cstdint>
#include <vector>

#include "krisk/linalg.hpp"

namespace krisk {

inline constexpr std::size_t kSobolMaxDimension = 8;

/// Gray-code Sobol generator (Joe-Kuo direction numbers) in [0,1)^D.
class SobolSequence {
 public:
  explicit SobolSequence(std::size_t dimension);

  std::size_t dimension() const noexcept { return dim_; }
  /// Next point; the very first call returns the origin (index 0).
  std::vector<double> next();
  void skip(std::uint64_t count);

 private:
  std::size_t dim_;
  std::uint64_t index_ = 0;
  std::vector<std::uint32_t> state_;
  std::vector<std::vector<std::uint32_t>> directions_;
};

/// First `count` Sobol points after the origin, as a count x D matrix.
Matrix sobol_points(std::size_t dimension, std::size_t count);

}  // namespace krisk
