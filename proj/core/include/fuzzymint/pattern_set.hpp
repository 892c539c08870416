#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fuzzymint {

// Immutable collection of distinct, non-empty byte-string patterns. Pattern
// ids are positions in insertion order and stay stable for the lifetime of
// every automaton and match record built from the set.
class PatternSet {
 public:
  PatternSet() = default;
  explicit PatternSet(std::vector<std::string> patterns);

  // Parses one pattern per line; blank lines and lines starting with '#' are
  // ignored. Throws std::invalid_argument on duplicates or empty results.
  static PatternSet from_lines(std::string_view text);
  static PatternSet from_file(const std::string& path);

  std::size_t size() const { return patterns_.size(); }
  bool empty() const { return patterns_.empty(); }
  const std::string& operator[](std::size_t id) const { return patterns_[id]; }
  const std::vector<std::string>& patterns() const { return patterns_; }

  std::size_t max_len() const { return max_len_; }
  std::size_t min_len() const { return min_len_; }
  std::size_t total_len() const { return total_len_; }

 private:
  std::vector<std::string> patterns_;
  std::size_t max_len_ = 0;
  std::size_t min_len_ = 0;
  std::size_t total_len_ = 0;
};

}  // namespace fuzzymint
