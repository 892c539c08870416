#pragma once

#include <string_view>
#include <vector>

#include "fuzzymint/match.hpp"
#include "fuzzymint/pattern_set.hpp"

namespace fuzzymint {

// Reference scanners, deliberately naive: for every input position and every
// pattern, the full-length similarity is computed and thresholded. They
// define ground truth for recall/precision comparisons and the denominator
// of every throughput ratio. No skipping, no early exit; the only concession
// is reusing DP row buffers across positions.

// Applies cfg.t_global and cfg.disjoint_percent exactly like emit_candidate:
// a record appears iff score >= t_global and the disjoint fraction
// (position-wise mismatches / |pattern|, or edit distance / |pattern| for
// Levenshtein) is <= disjoint_percent. Sorted by (end_offset, pattern_id).
std::vector<MatchRecord> baseline_scan(const PatternSet& patterns,
                                       const ScanConfig& config,
                                       std::string_view input);

// Byte-equality substring scan; the oracle for exact matching.
std::vector<MatchRecord> naive_exact_scan(const PatternSet& patterns,
                                          std::string_view input);

}  // namespace fuzzymint
