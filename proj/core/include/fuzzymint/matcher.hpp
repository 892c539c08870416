#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "fuzzymint/automaton.hpp"
#include "fuzzymint/match.hpp"

namespace fuzzymint {

// One NDFA configuration: a trie node plus the input offset where its spelled
// prefix is aligned. Every state created while reading position i satisfies
// start == i + 1 - depth(node), so a node identifies its state within a step.
struct ActiveState {
  NodeId node = kRootNode;
  std::uint64_t start = 0;

  friend bool operator==(const ActiveState&, const ActiveState&) = default;
};

using ActiveSet = std::vector<ActiveState>;

// Best similarity between this node's candidate continuations and the input
// starting at `start`. Candidates are prefix(node) + s for each window suffix
// s (the prefix alone when the list is empty); each is compared against the
// equally long input slice, clamped at the input end. Reference evaluator for
// the approximate-advance rule; the scanner computes the same decision
// incrementally.
double local_window_score(const Automaton& automaton,
                          const SimilarityMetric& metric, NodeId node,
                          std::string_view input, std::uint64_t start);

// Whether the approximate advance (rule 2) fires for a state at `node`
// aligned at `start` while reading input position start + depth(node).
// True iff some candidate continuation scores >= t_local and (when
// window_early_reject is set) diverges from the input by at most
// floor(disjoint_percent * window) mismatches / unit edits.
bool approximate_advance_fires(const Automaton& automaton,
                               const ScanConfig& config, NodeId node,
                               std::string_view input, std::uint64_t start);

// Keyword-level acceptance at a fixed alignment: scores the pattern against
// input[end_offset - m, end_offset), applies t_global and the disjoint
// budget, and flags byte-exact occurrences. nullopt when rejected.
std::optional<MatchRecord> emit_candidate(const Automaton& automaton,
                                          const ScanConfig& config,
                                          std::uint32_t pattern_id,
                                          std::string_view input,
                                          std::uint64_t end_offset);

// Approximate multi-pattern scan over the whole input. The Levenshtein
// scanner requires unit edit costs (throws otherwise); the naive scanners
// accept arbitrary non-negative costs.
std::vector<MatchRecord> scan(const Automaton& automaton,
                              const ScanConfig& config, std::string_view input,
                              ScanStats* stats = nullptr);

// Chunked scan: the input is split into `threads` ranges scanned
// concurrently, each warmed up over an overlap of max pattern length + window
// bytes; results are identical to the serial scan.
std::vector<MatchRecord> scan_parallel(const Automaton& automaton,
                                       const ScanConfig& config,
                                       std::string_view input, unsigned threads,
                                       ScanStats* stats = nullptr);

// The active set before any input is read: just the root.
ActiveSet initial_active_set();

// One NDFA transition on input[i]: exact advances, approximate advances below
// states whose local window score clears t_local, and failure fallbacks for
// states with no edge on input[i]; the root is always re-added. Verified
// emissions for end offset i + 1 are appended to `out`. The returned set is
// deduplicated by node, capped at max_active_states (deepest states win), and
// sorted by node id.
ActiveSet step(const Automaton& automaton, const ScanConfig& config,
               const ActiveSet& active, std::string_view input, std::uint64_t i,
               std::vector<MatchRecord>* out, ScanStats* stats = nullptr);

}  // namespace fuzzymint
