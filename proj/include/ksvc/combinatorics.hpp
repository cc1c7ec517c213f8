#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ksvc {

using BigInt = boost::multiprecision::cpp_int;

/// Lexicographic enumeration of the k-subsets of {0, ..., n-1}.
class KSubsetEnumerator {
 public:
  KSubsetEnumerator(std::size_t n, std::size_t k) : n_(n), k_(k) {}

  /// Advances to the next subset; false once exhausted.
  bool next() {
    if (!started_) {
      started_ = true;
      if (k_ > n_) return false;
      current_.resize(k_);
      for (std::size_t i = 0; i < k_; ++i) current_[i] = i;
      return true;
    }
    std::size_t i = k_;
    while (i > 0 && current_[i - 1] == n_ - k_ + i - 1) --i;
    if (i == 0) return false;
    ++current_[i - 1];
    for (std::size_t j = i; j < k_; ++j) current_[j] = current_[j - 1] + 1;
    return true;
  }

  const std::vector<std::size_t>& current() const { return current_; }

 private:
  std::size_t n_;
  std::size_t k_;
  bool started_ = false;
  std::vector<std::size_t> current_;
};

inline BigInt binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  BigInt out = 1;
  for (std::size_t i = 0; i < k; ++i) out = out * (n - i) / (i + 1);
  return out;
}

/// All distinct orderings of a multiset, in lexicographic order.
template <class T>
std::vector<std::vector<T>> distinct_permutations(std::vector<T> values) {
  std::sort(values.begin(), values.end());
  std::vector<std::vector<T>> out;
  do {
    out.push_back(values);
  } while (std::next_permutation(values.begin(), values.end()));
  return out;
}

}  // namespace ksvc
