#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fuzzymint/pattern_set.hpp"
#include "fuzzymint/similarity.hpp"

namespace fuzzymint {

// One accepted occurrence. end_offset is one past the last matched symbol, so
// the aligned input slice is input[end_offset - |pattern| .. end_offset).
struct MatchRecord {
  std::uint32_t pattern_id = 0;
  std::uint64_t end_offset = 0;
  double score = 1.0;
  bool exact = true;

  friend bool operator==(const MatchRecord&, const MatchRecord&) = default;
};

inline bool record_order(const MatchRecord& a, const MatchRecord& b) {
  if (a.end_offset != b.end_offset) return a.end_offset < b.end_offset;
  return a.pattern_id < b.pattern_id;
}

// Scan policy shared by the NDFA matcher and the naive baseline.
struct ScanConfig {
  SimilarityMetric metric{};
  double t_local = 0.75;           // gate for tolerated substitutions
  double t_global = 0.75;          // final emission threshold
  double disjoint_percent = 0.25;  // max disjoint fraction of the keyword
  std::size_t max_active_states = 64;
  // Window-level early reject: a walk candidate is dropped once its divergence
  // from the input exceeds floor(disjoint_percent * window) mismatches (edit
  // operations for Levenshtein). Safe for recall: any record within the
  // keyword-level disjoint budget stays within the window-level one whenever
  // window >= |pattern|.
  bool window_early_reject = true;
};

struct ScanStats {
  std::uint64_t positions = 0;
  std::uint64_t rule2_evals = 0;
  std::uint64_t rule2_fires = 0;
  std::uint64_t rule2_pushes = 0;     // trie edges examined by rule-2 walks
  std::uint64_t active_overflow = 0;  // truncations by max_active_states
  std::uint64_t emit_checks = 0;
  std::size_t max_active_seen = 0;
};

// Serializes records as a JSON array, sorted by (end_offset, pattern_id),
// scores with 6 decimal places.
std::string matches_to_json(const std::vector<MatchRecord>& records,
                            const PatternSet& patterns);

}  // namespace fuzzymint
