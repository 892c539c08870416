#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fuzzymint {

// Symbol domain for normalized similarity scores. Symbols are raw bytes; the
// alphabet size only affects the Euclid normalization, but every byte value in
// a compared text must be < size.
struct Alphabet {
  unsigned size = 256;
};

enum class MetricKind { euclid, hamming, levenshtein };

std::string to_string(MetricKind kind);
std::optional<MetricKind> metric_from_string(std::string_view name);

// Unit operation costs reproduce the classic edit distance; only the
// Levenshtein measure consults these.
struct EditCosts {
  double insert = 1.0;
  double erase = 1.0;
  double substitute = 1.0;
};

struct SimilarityMetric {
  MetricKind kind = MetricKind::hamming;
  Alphabet alphabet{};
  EditCosts costs{};
};

// Normalized Euclidean similarity between equal-length byte strings:
//   1 - sqrt(sum (a_i - b_i)^2) / (sqrt(n) * |sigma|)
// Throws std::invalid_argument on empty input, length mismatch, or a symbol
// value outside the alphabet.
double euclid_similarity(std::string_view a, std::string_view b,
                         Alphabet alphabet = {});

// Normalized Hamming similarity between equal-length byte strings:
//   1 - mismatches / n
double hamming_similarity(std::string_view a, std::string_view b);

// Weighted Levenshtein distance (insert/delete/substitute costs). Unit costs
// give the classic edit distance.
double levenshtein_distance(std::string_view a, std::string_view b,
                            EditCosts costs = {});

// 1 - levenshtein_distance(a, b) / max(|a|, |b|), clamped to [0, 1] so exotic
// cost settings cannot escape the score range. Requires max(|a|, |b|) >= 1.
double levenshtein_similarity(std::string_view a, std::string_view b,
                              EditCosts costs = {});

// Metric dispatch used by the scanners. Levenshtein accepts unequal lengths
// natively; for Euclid/Hamming the overlapping prefix is compared and every
// surplus position is charged as a maximal mismatch (|sigma|-1 for Euclid, a
// plain mismatch for Hamming), normalized by max(|a|, |b|).
double similarity(const SimilarityMetric& metric, std::string_view a,
                  std::string_view b);

}  // namespace fuzzymint
