#include "fuzzymint/tokenize.hpp"

namespace fuzzymint {

namespace {

inline bool is_alnum_ascii(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9');
}

inline char lower_ascii(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? char(c - 'A' + 'a') : char(c);
}

}  // namespace

TokenizedText tokenize(std::string_view text) {
  TokenizedText out;
  out.original.assign(text);
  std::string token;
  auto flush = [&] {
    if (!token.empty()) {
      out.tokens.push_back(token);
      if (!out.canonical.empty()) out.canonical.push_back(' ');
      out.canonical += token;
      token.clear();
    }
  };
  for (unsigned char c : text) {
    if (is_alnum_ascii(c)) {
      token.push_back(lower_ascii(c));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

}  // namespace fuzzymint
