#include <gtest/gtest.h>

#include "krisk/error.hpp"
#include "krisk/sobol.hpp"

TEST(Sobol, FirstPointsOneDimension) {
  const auto p = krisk::sobol_points(1, 3);
  EXPECT_EQ(p(0, 0), 0.5);
  EXPECT_EQ(p(1, 0), 0.75);
  EXPECT_EQ(p(2, 0), 0.25);
}

TEST(Sobol, MatchesReferenceFiveDimensions) {
  // unscrambled Joe-Kuo sequence, indices 1..8
  const double ref[8][5] = {
      {0.5, 0.5, 0.5, 0.5, 0.5},
      {0.75, 0.25, 0.25, 0.25, 0.75},
      {0.25, 0.75, 0.75, 0.75, 0.25},
      {0.375, 0.375, 0.625, 0.875, 0.375},
      {0.875, 0.875, 0.125, 0.375, 0.875},
      {0.625, 0.125, 0.875, 0.625, 0.625},
      {0.125, 0.625, 0.375, 0.125, 0.125},
      {0.1875, 0.3125, 0.9375, 0.4375, 0.5625},
  };
  const auto p = krisk::sobol_points(5, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_EQ(p(i, j), ref[i][j]) << i << "," << j;
}

TEST(Sobol, MatchesReferenceEightDimensionsFarIndex) {
  const double ref[8] = {0.2197265625, 0.0966796875, 0.5185546875, 0.6767578125,
                         0.2802734375, 0.9072265625, 0.0458984375, 0.8994140625};
  const auto p = krisk::sobol_points(8, 1000);
  for (int j = 0; j < 8; ++j) EXPECT_EQ(p(999, j), ref[j]);
}

TEST(Sobol, DyadicStratification) {
  // Including the origin, the first 2^k points put exactly 2^(k-j) points in
  // each dyadic interval of length 2^-j, coordinate by coordinate.
  const int k = 10;
  const int m = 1 << k;
  krisk::SobolSequence seq(6);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < m; ++i) pts.push_back(seq.next());
  for (int dim = 0; dim < 6; ++dim) {
    for (int j = 1; j <= k; ++j) {
      std::vector<int> counts(1u << j, 0);
      for (const auto& p : pts) counts[static_cast<std::size_t>(p[dim] * (1 << j))]++;
      for (int c : counts) EXPECT_EQ(c, m >> j);
    }
  }
}

TEST(Sobol, UnitRangeAndSkip) {
  const auto p = krisk::sobol_points(4, 5000);
  EXPECT_GE(p.minCoeff(), 0.0);
  EXPECT_LT(p.maxCoeff(), 1.0);
  krisk::SobolSequence a(4), b(4);
  for (int i = 0; i < 37; ++i) a.next();
  b.skip(37);
  EXPECT_EQ(a.next(), b.next());
}

TEST(Sobol, UnsupportedDimension) {
  EXPECT_THROW(krisk::sobol_points(9, 10), krisk::Error);
  EXPECT_THROW(krisk::SobolSequence(0), krisk::Error);
  try {
    krisk::sobol_points(9, 1);
  } catch (const krisk::Error& e) {
    EXPECT_EQ(e.code(), krisk::ErrorCode::UnsupportedDimension);
  }
}
