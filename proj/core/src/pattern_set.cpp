#include "fuzzymint/pattern_set.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace fuzzymint {

PatternSet::PatternSet(std::vector<std::string> patterns)
    : patterns_(std::move(patterns)) {
  if (patterns_.empty()) {
    throw std::invalid_argument("pattern set is empty");
  }
  std::unordered_set<std::string_view> seen;
  min_len_ = patterns_.front().size();
  for (std::size_t id = 0; id < patterns_.size(); ++id) {
    const std::string& p = patterns_[id];
    if (p.empty()) {
      throw std::invalid_argument("empty pattern at index " + std::to_string(id));
    }
    if (!seen.insert(p).second) {
      throw std::invalid_argument("duplicate pattern at index " +
                                  std::to_string(id) + ": \"" + p + "\"");
    }
    max_len_ = std::max(max_len_, p.size());
    min_len_ = std::min(min_len_, p.size());
    total_len_ += p.size();
  }
}

PatternSet PatternSet::from_lines(std::string_view text) {
  std::vector<std::string> patterns;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty() && line.front() != '#') {
      patterns.emplace_back(line);
    }
    if (nl == text.size()) break;
    pos = nl + 1;
  }
  return PatternSet(std::move(patterns));
}

PatternSet PatternSet::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open pattern file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_lines(buf.str());
}

}  // namespace fuzzymint
