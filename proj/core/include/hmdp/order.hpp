#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace hmdp {

/// Finite partial order on {0, ..., n-1}, stored as a dense relation table.
///
/// Every factory validates reflexivity, antisymmetry and transitivity and
/// throws std::invalid_argument when one of them fails.
class PartialOrder {
 public:
  PartialOrder() = default;

  /// The index order 0 < 1 < ... < n-1.
  static PartialOrder index_order(std::size_t n);

  /// Reflexive-transitive closure of the given (lo, hi) pairs, meaning lo <= hi.
  static PartialOrder from_relations(std::size_t n,
                                     std::span<const std::pair<std::size_t, std::size_t>> leq_pairs);

  /// Takes a full relation table (row-major, leq[i * n + j] means i <= j).
  static PartialOrder from_table(std::size_t n, std::vector<char> leq);

  /// Componentwise order on the row-major product of the factor ground sets.
  static PartialOrder product(std::span<const PartialOrder> factors);

  std::size_t size() const { return n_; }
  bool leq(std::size_t i, std::size_t j) const { return rel_[i * n_ + j] != 0; }
  bool comparable(std::size_t i, std::size_t j) const { return leq(i, j) || leq(j, i); }

  bool is_total() const;
  bool is_index_order() const;

  /// An ordering of the ground set in which i appears before j whenever i < j.
  std::vector<std::size_t> linear_extension() const;

  /// All pairs (i, j) with i < j strictly.
  std::vector<std::pair<std::size_t, std::size_t>> strict_pairs() const;

  /// Returns true iff `members` (a 0/1 mask) is closed upwards.
  bool is_upper_set(std::span<const char> members) const;

  bool operator==(const PartialOrder&) const = default;

 private:
  PartialOrder(std::size_t n, std::vector<char> rel) : n_(n), rel_(std::move(rel)) {}
  void validate() const;

  std::size_t n_ = 0;
  std::vector<char> rel_;
};

}  // namespace hmdp
