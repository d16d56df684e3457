#include <gtest/gtest.h>

#include <vector>

#include "hmdp/indexing.hpp"
#include "hmdp/matrix.hpp"

namespace hmdp {
namespace {

TEST(MixedRadix, RowMajorWithFirstDigitMostSignificant) {
  const MixedRadix r({2, 3});
  EXPECT_EQ(r.size(), 6u);
  const std::vector<int> d{1, 2};
  EXPECT_EQ(r.encode(d), 5u);
  EXPECT_EQ(r.decode(3), (std::vector<int>{1, 0}));
  EXPECT_EQ(r.digit(4, 0), 1);
  EXPECT_EQ(r.digit(4, 1), 1);
  EXPECT_EQ(r.stride(0), 3u);
}

TEST(MixedRadix, EncodeDecodeAreInverse) {
  const MixedRadix r({3, 1, 4, 2});
  std::vector<int> buf(4);
  for (std::size_t c = 0; c < r.size(); ++c) {
    r.decode(c, buf);
    EXPECT_EQ(r.encode(buf), c);
  }
}

TEST(MixedRadix, RejectsOutOfRangeDigits) {
  const MixedRadix r({2, 2});
  const std::vector<int> bad{0, 2};
  EXPECT_THROW((void)r.encode(bad), std::out_of_range);
}

TEST(NextLexicographic, VisitsEveryVectorInOrder) {
  std::vector<int> d{0, 0};
  const std::vector<int> limits{1, 2};
  std::vector<std::vector<int>> seen;
  do {
    seen.push_back(d);
  } while (next_lexicographic(d, limits));
  const std::vector<std::vector<int>> want{{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 1}, {1, 2}};
  EXPECT_EQ(seen, want);
}

TEST(Matrix, FromRowsAndAccess) {
  const Matrix m = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_DOUBLE_EQ(m(1, 2), 6.0);
  EXPECT_DOUBLE_EQ(m.row(1)[0], 4.0);
  EXPECT_DOUBLE_EQ(max_abs_diff(m, Matrix::from_rows({{1, 2, 3}, {4, 5, 6.5}})), 0.5);
  EXPECT_THROW(Matrix::from_rows({{1, 2}, {3}}), std::invalid_argument);
}

}  // namespace
}  // namespace hmdp
