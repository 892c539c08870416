#include "fuzzymint/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fuzzymint {

namespace {

void check_alphabet(std::string_view s, Alphabet alphabet) {
  for (unsigned char c : s) {
    if (c >= alphabet.size) {
      throw std::invalid_argument("symbol value " + std::to_string(c) +
                                  " outside alphabet of size " +
                                  std::to_string(alphabet.size));
    }
  }
}

}  // namespace

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::euclid: return "euclid";
    case MetricKind::hamming: return "hamming";
    case MetricKind::levenshtein: return "levenshtein";
  }
  return "?";
}

std::optional<MetricKind> metric_from_string(std::string_view name) {
  if (name == "euclid") return MetricKind::euclid;
  if (name == "hamming") return MetricKind::hamming;
  if (name == "levenshtein") return MetricKind::levenshtein;
  return std::nullopt;
}

double euclid_similarity(std::string_view a, std::string_view b,
                         Alphabet alphabet) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("euclid_similarity: empty input");
  }
  if (a.size() != b.size()) {
    throw std::invalid_argument("euclid_similarity: length mismatch");
  }
  if (alphabet.size < 2) {
    throw std::invalid_argument("euclid_similarity: alphabet size < 2");
  }
  check_alphabet(a, alphabet);
  check_alphabet(b, alphabet);
  std::uint64_t sq = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int d = int(static_cast<unsigned char>(a[i])) -
                  int(static_cast<unsigned char>(b[i]));
    sq += std::uint64_t(d) * d;
  }
  const double n = double(a.size());
  return 1.0 - std::sqrt(double(sq)) / (std::sqrt(n) * double(alphabet.size));
}

double hamming_similarity(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("hamming_similarity: empty input");
  }
  if (a.size() != b.size()) {
    throw std::invalid_argument("hamming_similarity: length mismatch");
  }
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mismatches += a[i] != b[i];
  }
  return 1.0 - double(mismatches) / double(a.size());
}

double levenshtein_distance(std::string_view a, std::string_view b,
                            EditCosts costs) {
  if (costs.insert < 0 || costs.erase < 0 || costs.substitute < 0) {
    throw std::invalid_argument("levenshtein_distance: negative cost");
  }
  // Two-row dynamic program; rows indexed by positions in b.
  std::vector<double> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = double(j) * costs.insert;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = double(i) * costs.erase;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const double sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0.0 : costs.substitute);
      cur[j] = std::min({prev[j] + costs.erase, cur[j - 1] + costs.insert, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double levenshtein_similarity(std::string_view a, std::string_view b,
                              EditCosts costs) {
  const std::size_t n = std::max(a.size(), b.size());
  if (n == 0) {
    throw std::invalid_argument("levenshtein_similarity: both inputs empty");
  }
  const double score = 1.0 - levenshtein_distance(a, b, costs) / double(n);
  return std::clamp(score, 0.0, 1.0);
}

double similarity(const SimilarityMetric& metric, std::string_view a,
                  std::string_view b) {
  if (metric.kind == MetricKind::levenshtein) {
    return levenshtein_similarity(a, b, metric.costs);
  }
  const std::size_t n = std::max(a.size(), b.size());
  if (n == 0) {
    throw std::invalid_argument("similarity: both inputs empty");
  }
  const std::size_t common = std::min(a.size(), b.size());
  const std::size_t surplus = n - common;
  if (metric.kind == MetricKind::hamming) {
    std::size_t mismatches = surplus;
    for (std::size_t i = 0; i < common; ++i) mismatches += a[i] != b[i];
    return 1.0 - double(mismatches) / double(n);
  }
  // Euclid: surplus positions are charged the maximal per-symbol difference.
  if (metric.alphabet.size < 2) {
    throw std::invalid_argument("similarity: alphabet size < 2");
  }
  check_alphabet(a, metric.alphabet);
  check_alphabet(b, metric.alphabet);
  std::uint64_t sq = 0;
  for (std::size_t i = 0; i < common; ++i) {
    const int d = int(static_cast<unsigned char>(a[i])) -
                  int(static_cast<unsigned char>(b[i]));
    sq += std::uint64_t(d) * d;
  }
  const std::uint64_t dmax = metric.alphabet.size - 1;
  sq += std::uint64_t(surplus) * dmax * dmax;
  return 1.0 -
         std::sqrt(double(sq)) / (std::sqrt(double(n)) * double(metric.alphabet.size));
}

}  // namespace fuzzymint
