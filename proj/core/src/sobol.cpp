#include "krisk/sobol.hpp"

#include <array>
#include <bit>
#include <string>

#include "krisk/error.hpp"

namespace krisk {
namespace {

constexpr int kBits = 32;

struct Primitive {
  unsigned degree;
  std::uint32_t coeffs;
  std::array<std::uint32_t, 5> m;
};

// Dimensions 2..8 of the new-joe-kuo-6.21201 table.
constexpr std::array<Primitive, kSobolMaxDimension - 1> kTable{{
    {1, 0, {1, 0, 0, 0, 0}},
    {2, 1, {1, 3, 0, 0, 0}},
    {3, 1, {1, 3, 1, 0, 0}},
    {3, 2, {1, 1, 1, 0, 0}},
    {4, 1, {1, 1, 3, 3, 0}},
    {4, 4, {1, 3, 5, 13, 0}},
    {5, 2, {1, 1, 5, 5, 17}},
}};

std::vector<std::uint32_t> directions_for(std::size_t d) {
  std::vector<std::uint32_t> v(kBits);
  if (d == 0) {
    for (int i = 0; i < kBits; ++i) v[i] = 1u << (kBits - 1 - i);
    return v;
  }
  const auto& p = kTable[d - 1];
  const unsigned s = p.degree;
  for (unsigned i = 0; i < s && i < kBits; ++i) v[i] = p.m[i] << (kBits - 1 - i);
  for (unsigned i = s; i < kBits; ++i) {
    std::uint32_t value = v[i - s] ^ (v[i - s] >> s);
    for (unsigned k = 1; k < s; ++k) {
      if ((p.coeffs >> (s - 1 - k)) & 1u) value ^= v[i - k];
    }
    v[i] = value;
  }
  return v;
}

}  // namespace

SobolSequence::SobolSequence(std::size_t dimension) : dim_(dimension) {
  if (dimension == 0 || dimension > kSobolMaxDimension) {
    throw Error(ErrorCode::UnsupportedDimension,
                "Sobol sequence supports dimensions 1.." +
                    std::to_string(kSobolMaxDimension) + ", got " +
                    std::to_string(dimension));
  }
  state_.assign(dim_, 0);
  directions_.reserve(dim_);
  for (std::size_t d = 0; d < dim_; ++d) directions_.push_back(directions_for(d));
}

std::vector<double> SobolSequence::next() {
  std::vector<double> out(dim_);
  constexpr double kScale = 1.0 / 4294967296.0;
  for (std::size_t d = 0; d < dim_; ++d) out[d] = state_[d] * kScale;
  // Advance by flipping the direction number of the lowest zero bit.
  const int c = std::countr_one(index_);
  if (c >= kBits) throw Error(ErrorCode::NumericalBreakdown, "Sobol sequence exhausted");
  for (std::size_t d = 0; d < dim_; ++d) state_[d] ^= directions_[d][c];
  ++index_;
  return out;
}

void SobolSequence::skip(std::uint64_t count) {
  for (std::uint64_t i = 0; i < count; ++i) next();
}

Matrix sobol_points(std::size_t dimension, std::size_t count) {
  SobolSequence seq(dimension);
  seq.skip(1);
  Matrix out(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dimension));
  for (std::size_t i = 0; i < count; ++i) {
    const auto p = seq.next();
    for (std::size_t d = 0; d < dimension; ++d) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = p[d];
    }
  }
  return out;
}

}  // namespace krisk
