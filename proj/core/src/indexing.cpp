#include "hmdp/indexing.hpp"

#include <stdexcept>

namespace hmdp {

MixedRadix::MixedRadix(std::vector<std::size_t> radices) : radices_(std::move(radices)) {
  strides_.assign(radices_.size(), 1);
  size_ = 1;
  for (std::size_t i = radices_.size(); i-- > 0;) {
    if (radices_[i] == 0) throw std::invalid_argument("mixed radix with a zero radix");
    strides_[i] = size_;
    size_ *= radices_[i];
  }
}

std::size_t MixedRadix::encode(std::span<const int> digits) const {
  if (digits.size() != radices_.size()) throw std::invalid_argument("digit count mismatch");
  std::size_t code = 0;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (digits[i] < 0 || static_cast<std::size_t>(digits[i]) >= radices_[i])
      throw std::out_of_range("digit out of range");
    code += static_cast<std::size_t>(digits[i]) * strides_[i];
  }
  return code;
}

std::vector<int> MixedRadix::decode(std::size_t code) const {
  std::vector<int> out(radices_.size());
  decode(code, out);
  return out;
}

void MixedRadix::decode(std::size_t code, std::span<int> out) const {
  for (std::size_t i = 0; i < radices_.size(); ++i)
    out[i] = static_cast<int>((code / strides_[i]) % radices_[i]);
}

bool next_lexicographic(std::span<int> digits, std::span<const int> limits) {
  for (std::size_t i = digits.size(); i-- > 0;) {
    if (digits[i] < limits[i]) {
      ++digits[i];
      return true;
    }
    digits[i] = 0;
  }
  return false;
}

}  // namespace hmdp
