#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hmdp {

/// Row-major mixed-radix codec: digit 0 is the most significant.
///
/// Used for joint states (radices n_1..n_N), remaining-budget vectors
/// (radices b_1+1..b_N+1) and allocation codes (radix K per subprocess).
class MixedRadix {
 public:
  MixedRadix() = default;
  explicit MixedRadix(std::vector<std::size_t> radices);

  std::size_t digits() const { return radices_.size(); }
  std::size_t radix(std::size_t i) const { return radices_[i]; }
  std::size_t stride(std::size_t i) const { return strides_[i]; }
  std::span<const std::size_t> radices() const { return radices_; }

  /// Number of codes, i.e. the product of all radices (1 for zero digits).
  std::size_t size() const { return size_; }

  std::size_t encode(std::span<const int> digits) const;
  std::vector<int> decode(std::size_t code) const;
  void decode(std::size_t code, std::span<int> out) const;
  int digit(std::size_t code, std::size_t i) const {
    return static_cast<int>((code / strides_[i]) % radices_[i]);
  }

  bool operator==(const MixedRadix& other) const { return radices_ == other.radices_; }

 private:
  std::vector<std::size_t> radices_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 1;
};

/// Advances `digits` to the next vector in lexicographic order with
/// digits[i] <= limits[i]. Returns false once the sequence wraps around.
bool next_lexicographic(std::span<int> digits, std::span<const int> limits);

}  // namespace hmdp
