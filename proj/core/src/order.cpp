#include "hmdp/order.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "hmdp/indexing.hpp"

namespace hmdp {

PartialOrder PartialOrder::index_order(std::size_t n) {
  std::vector<char> rel(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) rel[i * n + j] = 1;
  return PartialOrder(n, std::move(rel));
}

PartialOrder PartialOrder::from_relations(std::size_t n,
                                          std::span<const std::pair<std::size_t, std::size_t>> leq_pairs) {
  std::vector<char> rel(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) rel[i * n + i] = 1;
  for (const auto& [lo, hi] : leq_pairs) {
    if (lo >= n || hi >= n) throw std::invalid_argument("order relation refers to a state outside 0.." +
                                                        std::to_string(n - 1));
    rel[lo * n + hi] = 1;
  }
  // Warshall closure
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (rel[i * n + k])
        for (std::size_t j = 0; j < n; ++j)
          if (rel[k * n + j]) rel[i * n + j] = 1;
  PartialOrder order(n, std::move(rel));
  order.validate();
  return order;
}

PartialOrder PartialOrder::from_table(std::size_t n, std::vector<char> leq) {
  if (leq.size() != n * n) throw std::invalid_argument("order table has the wrong size");
  for (auto& c : leq) c = c ? 1 : 0;
  PartialOrder order(n, std::move(leq));
  order.validate();
  return order;
}

PartialOrder PartialOrder::product(std::span<const PartialOrder> factors) {
  std::vector<std::size_t> radices;
  for (const auto& f : factors) radices.push_back(f.size());
  const MixedRadix index(radices);
  const std::size_t n = index.size();
  std::vector<char> rel(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      bool le = true;
      for (std::size_t k = 0; k < factors.size() && le; ++k)
        le = factors[k].leq(static_cast<std::size_t>(index.digit(i, k)), static_cast<std::size_t>(index.digit(j, k)));
      rel[i * n + j] = le ? 1 : 0;
    }
  }
  return PartialOrder(n, std::move(rel));
}

void PartialOrder::validate() const {
  for (std::size_t i = 0; i < n_; ++i)
    if (!leq(i, i)) throw std::invalid_argument("order is not reflexive at " + std::to_string(i));
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (leq(i, j) && leq(j, i))
        throw std::invalid_argument("order is not antisymmetric: " + std::to_string(i) + " and " +
                                    std::to_string(j) + " are mutually related");
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = 0; k < n_; ++k)
      if (leq(i, k))
        for (std::size_t j = 0; j < n_; ++j)
          if (leq(k, j) && !leq(i, j))
            throw std::invalid_argument("order is not transitive: " + std::to_string(i) + " <= " +
                                        std::to_string(k) + " <= " + std::to_string(j));
}

bool PartialOrder::is_total() const {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (!comparable(i, j)) return false;
  return true;
}

bool PartialOrder::is_index_order() const { return *this == index_order(n_); }

std::vector<std::size_t> PartialOrder::linear_extension() const {
  // Sorting by the number of strict predecessors respects the order.
  std::vector<std::size_t> below(n_, 0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      if (i != j && leq(j, i)) ++below[i];
  std::vector<std::size_t> ext(n_);
  std::iota(ext.begin(), ext.end(), 0);
  std::stable_sort(ext.begin(), ext.end(), [&](std::size_t a, std::size_t b) { return below[a] < below[b]; });
  return ext;
}

std::vector<std::pair<std::size_t, std::size_t>> PartialOrder::strict_pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      if (i != j && leq(i, j)) out.emplace_back(i, j);
  return out;
}

bool PartialOrder::is_upper_set(std::span<const char> members) const {
  for (std::size_t i = 0; i < n_; ++i) {
    if (!members[i]) continue;
    for (std::size_t j = 0; j < n_; ++j)
      if (leq(i, j) && !members[j]) return false;
  }
  return true;
}

}  // namespace hmdp
