#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fuzzymint {

struct TokenizedText {
  std::string original;
  std::vector<std::string> tokens;
  // Tokens joined by single spaces; always matches
  //   ([a-z0-9]+( [a-z0-9]+)*)?
  std::string canonical;
};

// Lowercases ASCII letters, collapses every run of non-alphanumeric bytes to a
// single space, and trims leading/trailing separators. Idempotent on its own
// canonical output.
TokenizedText tokenize(std::string_view text);

}  // namespace fuzzymint
