#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fuzzymint/match.hpp"
#include "fuzzymint/pattern_set.hpp"

namespace fuzzymint {

using NodeId = std::uint32_t;
inline constexpr NodeId kInvalidNode = std::numeric_limits<NodeId>::max();
inline constexpr NodeId kRootNode = 0;

struct BuildOptions {
  unsigned window = 0;  // sliding-window length w; must be >= 1 for build()
  // A window walk that runs out of trie edges may follow at most this many
  // failure jumps (each jump consumes no walk symbol) before it is cut off.
  unsigned max_fail_jumps = 1;
  // Caps how many candidate recordings jump-using walks may contribute per
  // node. Jump-free walks are always enumerated exhaustively.
  std::size_t max_suffix_visits = 4096;
  // Precompute the per-node window-suffix lists at build time. Turn off for
  // very large pattern sets; lists are then derived on demand.
  bool materialize_suffixes = true;
};

struct BuildStats {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::size_t suffix_entries = 0;  // total materialized window-suffix strings
  std::size_t truncated_entries = 0;  // entries shorter than the window
  bool window_exceeds_patterns = false;  // w > max pattern length
  double build_seconds = 0.0;
};

// Keyword trie with failure links and per-node window-suffix lists; the
// static structure shared by the exact scanner and the NDFA matcher.
class Automaton {
 public:
  using Edge = std::pair<unsigned char, NodeId>;

  struct Node {
    NodeId parent = kInvalidNode;
    unsigned char edge = 0;  // symbol on the edge from parent
    NodeId fail = kRootNode;
    std::uint32_t depth = 0;
    std::uint32_t kids_begin = 0;  // span into the shared edge arena
    std::uint32_t kids_end = 0;
    std::vector<std::uint32_t> own_outputs;  // patterns ending exactly here
    std::vector<std::uint32_t> all_outputs;  // own + inherited via fail chain
    std::vector<std::string> window_suffixes;  // sorted, deduplicated
  };

  // Stage 1: trie only (no failure links, no suffix lists).
  static Automaton build_trie(PatternSet patterns);
  // Stage 2: BFS failure links + merged output sets.
  void compute_failures();
  // Stage 3: per-node window-suffix lists for the given window length.
  void compute_window_suffixes(unsigned window);
  // All stages. options.window must be >= 1.
  static Automaton build(PatternSet patterns, const BuildOptions& options);

  const PatternSet& patterns() const { return patterns_; }
  const BuildOptions& options() const { return options_; }
  const BuildStats& stats() const { return stats_; }
  unsigned window() const { return options_.window; }

  std::size_t node_count() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_[id]; }
  std::uint32_t depth(NodeId id) const { return nodes_[id].depth; }
  NodeId fail(NodeId id) const { return nodes_[id].fail; }

  std::span<const Edge> children(NodeId id) const {
    const Node& n = nodes_[id];
    return {edges_.data() + n.kids_begin, n.kids_end - n.kids_begin};
  }

  // Child on symbol c, or kInvalidNode.
  NodeId child(NodeId id, unsigned char c) const {
    if (id == kRootNode) return root_goto_[c];
    for (const Edge& e : children(id))
      if (e.first == c) return e.second;
    return kInvalidNode;
  }

  // Classic Aho-Corasick transition: follows failure links until a child on c
  // exists, or lands at the root.
  NodeId transition(NodeId id, unsigned char c) const {
    for (;;) {
      NodeId next = child(id, c);
      if (next != kInvalidNode) return next;
      if (id == kRootNode) return kRootNode;
      id = nodes_[id].fail;
    }
  }

  // The trie string spelled from the root to this node.
  std::string prefix(NodeId id) const;

  // Window-suffix list for a node: returns the stored list when materialized,
  // otherwise computes it on demand (same enumeration, same ordering).
  std::vector<std::string> window_suffixes(NodeId id) const;

  // Whether the node's window-suffix list is non-empty. O(1); available even
  // when lists are not materialized (probed at build time).
  bool has_window_candidates(NodeId id) const {
    return has_candidates_[id] != 0;
  }

  // Enumerates window-suffix walks below `start` in deterministic order.
  // The visitor sees each walk edge and each recording point:
  //   bool push(unsigned char sym)  extend the walk; return false to prune
  //                                 the subtree (pop is not called then)
  //   void pop()                    retract the last pushed edge
  //   bool record(bool full)        candidate endpoint at the current walk
  //                                 (full: length == window); return false
  //                                 to abort the whole enumeration
  // Recording points: walk length == window (full), and any node where a
  // pattern ends while 0 < length < window (a pattern-completing truncation;
  // these keep recall intact when matches end before the window does).
  // Walks that run out of children follow at most options().max_fail_jumps
  // failure jumps; recordings made by jump-using walks count against
  // options().max_suffix_visits, after which no further jumps are taken.
  template <class Visitor>
  void walk_window_suffixes(NodeId start, Visitor&& visitor) const {
    std::size_t jump_records = 0;
    walk_impl(start, 0, 0, jump_records, visitor);
  }

  // Exact multi-pattern scan (score 1.0, exact records only).
  std::vector<MatchRecord> exact_scan(std::string_view input) const;

  bool failures_ready() const { return failures_ready_; }
  bool suffixes_ready() const { return suffixes_ready_; }

 private:
  Automaton() = default;

  template <class Visitor>
  bool walk_impl(NodeId node, unsigned len, unsigned jumps,
                 std::size_t& jump_records, Visitor& visitor) const {
    const unsigned w = options_.window;
    if (len == w) {
      if (jumps > 0) ++jump_records;
      return visitor.record(true);
    }
    if (len > 0 && !nodes_[node].own_outputs.empty()) {
      if (jumps > 0) ++jump_records;
      if (!visitor.record(false)) return false;
    }
    const auto kids = children(node);
    if (kids.empty()) {
      // Dead end before the window is full: continue through a failure jump
      // if the budget (and the recording cap) still allows it. Dead ends are
      // pattern ends, so the truncated candidate was already recorded above.
      if (jumps < options_.max_fail_jumps &&
          jump_records < options_.max_suffix_visits && node != kRootNode) {
        return walk_impl(nodes_[node].fail, len, jumps + 1, jump_records,
                         visitor);
      }
      return true;
    }
    for (const Edge& e : kids) {
      if (jumps > 0 && jump_records >= options_.max_suffix_visits) break;
      if (!visitor.push(e.first)) continue;
      bool keep_going =
          walk_impl(e.second, len + 1, jumps, jump_records, visitor);
      visitor.pop();
      if (!keep_going) return false;
    }
    return true;
  }

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;  // all child lists, per node, sorted by symbol
  std::vector<char> has_candidates_;
  std::vector<NodeId> root_goto_ = std::vector<NodeId>(256, kInvalidNode);
  PatternSet patterns_{};
  BuildOptions options_{};
  BuildStats stats_{};
  bool failures_ready_ = false;
  bool suffixes_ready_ = false;
};

}  // namespace fuzzymint
