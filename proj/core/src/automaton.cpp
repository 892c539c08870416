#include "fuzzymint/automaton.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <stdexcept>

namespace fuzzymint {

namespace {

// Collects walk symbols into window-suffix strings.
struct SuffixCollector {
  std::string current;
  std::vector<std::string>* out;

  bool push(unsigned char sym) {
    current.push_back(static_cast<char>(sym));
    return true;
  }
  void pop() { current.pop_back(); }
  bool record(bool /*full*/) {
    if (!current.empty()) out->push_back(current);
    return true;
  }
};

// Answers "does any walk record anything?" without storing the strings.
struct SuffixProbe {
  bool found = false;

  bool push(unsigned char) { return !found; }
  void pop() {}
  bool record(bool) {
    found = true;
    return false;
  }
};

}  // namespace

Automaton Automaton::build_trie(PatternSet patterns) {
  if (patterns.empty()) {
    throw std::invalid_argument("cannot build an automaton without patterns");
  }
  Automaton aut;
  aut.patterns_ = std::move(patterns);
  // Grow the trie with per-node child vectors, then flatten them into one
  // contiguous edge arena (the matcher iterates child lists constantly).
  std::vector<std::vector<Edge>> kids;
  aut.nodes_.emplace_back();
  kids.emplace_back();
  auto find_child = [&](NodeId id, unsigned char c) -> NodeId {
    if (id == kRootNode) return aut.root_goto_[c];
    for (const Edge& e : kids[id])
      if (e.first == c) return e.second;
    return kInvalidNode;
  };
  for (std::uint32_t id = 0; id < aut.patterns_.size(); ++id) {
    const std::string& p = aut.patterns_[id];
    NodeId cur = kRootNode;
    for (char ch : p) {
      auto c = static_cast<unsigned char>(ch);
      NodeId next = find_child(cur, c);
      if (next == kInvalidNode) {
        next = static_cast<NodeId>(aut.nodes_.size());
        Node n;
        n.parent = cur;
        n.edge = c;
        n.depth = aut.nodes_[cur].depth + 1;
        aut.nodes_.push_back(std::move(n));
        kids.emplace_back();
        if (cur == kRootNode) aut.root_goto_[c] = next;
        auto& list = kids[cur];
        auto pos = std::lower_bound(
            list.begin(), list.end(), c,
            [](const Edge& e, unsigned char sym) { return e.first < sym; });
        list.insert(pos, {c, next});
      }
      cur = next;
    }
    aut.nodes_[cur].own_outputs.push_back(id);
  }
  for (NodeId id = 0; id < aut.nodes_.size(); ++id) {
    aut.nodes_[id].kids_begin = static_cast<std::uint32_t>(aut.edges_.size());
    aut.edges_.insert(aut.edges_.end(), kids[id].begin(), kids[id].end());
    aut.nodes_[id].kids_end = static_cast<std::uint32_t>(aut.edges_.size());
  }
  aut.stats_.node_count = aut.nodes_.size();
  aut.stats_.edge_count = aut.nodes_.size() - 1;
  return aut;
}

void Automaton::compute_failures() {
  std::deque<NodeId> queue;
  for (const Edge& e : children(kRootNode)) {
    nodes_[e.second].fail = kRootNode;
    nodes_[e.second].all_outputs = nodes_[e.second].own_outputs;
    queue.push_back(e.second);
  }
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    for (const Edge& e : children(u)) {
      NodeId v = e.second;
      // The parent's failure target is already final (BFS order), so one
      // transition from it yields the longest proper suffix in the trie.
      NodeId f = transition(nodes_[u].fail, e.first);
      nodes_[v].fail = (f == v) ? kRootNode : f;
      nodes_[v].all_outputs = nodes_[v].own_outputs;
      const auto& inherited = nodes_[nodes_[v].fail].all_outputs;
      nodes_[v].all_outputs.insert(nodes_[v].all_outputs.end(),
                                   inherited.begin(), inherited.end());
      queue.push_back(v);
    }
  }
  failures_ready_ = true;
}

void Automaton::compute_window_suffixes(unsigned window) {
  if (window == 0) {
    throw std::invalid_argument("window length must be >= 1");
  }
  if (!failures_ready_) {
    throw std::logic_error("failure links must be computed before suffixes");
  }
  options_.window = window;
  stats_.window_exceeds_patterns = window > patterns_.max_len();
  stats_.suffix_entries = 0;
  stats_.truncated_entries = 0;
  has_candidates_.assign(nodes_.size(), 0);
  if (!options_.materialize_suffixes) {
    for (NodeId id = 0; id < nodes_.size(); ++id) {
      SuffixProbe probe;
      walk_window_suffixes(id, probe);
      has_candidates_[id] = probe.found ? 1 : 0;
    }
    suffixes_ready_ = true;
    return;
  }
  for (NodeId id = 0; id < nodes_.size(); ++id) {
    std::vector<std::string> list;
    SuffixCollector collector{std::string(), &list};
    walk_window_suffixes(id, collector);
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    for (const std::string& s : list) {
      if (s.size() < window) ++stats_.truncated_entries;
    }
    stats_.suffix_entries += list.size();
    has_candidates_[id] = list.empty() ? 0 : 1;
    nodes_[id].window_suffixes = std::move(list);
  }
  suffixes_ready_ = true;
}

Automaton Automaton::build(PatternSet patterns, const BuildOptions& options) {
  auto t0 = std::chrono::steady_clock::now();
  Automaton aut = build_trie(std::move(patterns));
  aut.options_ = options;
  aut.compute_failures();
  aut.compute_window_suffixes(options.window);
  auto t1 = std::chrono::steady_clock::now();
  aut.stats_.build_seconds = std::chrono::duration<double>(t1 - t0).count();
  return aut;
}

std::string Automaton::prefix(NodeId id) const {
  std::string out(nodes_[id].depth, '\0');
  std::size_t pos = out.size();
  while (id != kRootNode) {
    out[--pos] = static_cast<char>(nodes_[id].edge);
    id = nodes_[id].parent;
  }
  return out;
}

std::vector<std::string> Automaton::window_suffixes(NodeId id) const {
  if (options_.materialize_suffixes && suffixes_ready_) {
    return nodes_[id].window_suffixes;
  }
  if (options_.window == 0) {
    throw std::logic_error("window length is not set");
  }
  std::vector<std::string> list;
  SuffixCollector collector{std::string(), &list};
  walk_window_suffixes(id, collector);
  std::sort(list.begin(), list.end());
  list.erase(std::unique(list.begin(), list.end()), list.end());
  return list;
}

std::vector<MatchRecord> Automaton::exact_scan(std::string_view input) const {
  if (!failures_ready_) {
    throw std::logic_error("failure links must be computed before scanning");
  }
  std::vector<MatchRecord> records;
  NodeId cur = kRootNode;
  for (std::size_t i = 0; i < input.size(); ++i) {
    cur = transition(cur, static_cast<unsigned char>(input[i]));
    for (std::uint32_t pid : nodes_[cur].all_outputs) {
      records.push_back(MatchRecord{pid, i + 1, 1.0, true});
    }
  }
  std::sort(records.begin(), records.end(), record_order);
  return records;
}

}  // namespace fuzzymint
