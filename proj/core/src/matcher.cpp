#include "fuzzymint/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <thread>

#include "fuzzymint/similarity.hpp"
#include "json.hpp"

namespace fuzzymint {

namespace {

constexpr double kEps = 1e-9;
constexpr std::int32_t kInfDist = 1 << 29;

bool unit_costs(const EditCosts& c) {
  return c.insert == 1.0 && c.erase == 1.0 && c.substitute == 1.0;
}

void validate_euclid_bytes(std::string_view s, unsigned size) {
  for (unsigned char c : s) {
    if (c >= size) {
      throw std::invalid_argument("symbol value " + std::to_string(c) +
                                  " outside alphabet of size " +
                                  std::to_string(size));
    }
  }
}

// Scanner for one metric. States carry incremental accumulators comparing
// their node's prefix with the input slice they are aligned to; the
// approximate-advance test reuses them and extends the comparison along the
// automaton's window walks, pruning on the divergence budget and on the best
// score still reachable.
//
// The window walks run over a flattened pre-order copy of the trie (subtrees
// are contiguous slices with skip links), which replaces the recursive
// traversal with a cache-friendly linear sweep. On top of that, the byte
// metrics precompute a column-major table of all depth-r prefixes: every walk
// evaluated while consuming input position i compares prefixes against the
// same input window, so one vectorized scan per position yields the prefix
// divergence of every depth-r continuation point, shared by all active
// states via a small ring of count arrays. Prefix divergence is monotone
// along a path, so thresholding the depth-r counts reproduces exactly the
// set of subtrees the plain walk would enter.
template <MetricKind K>
class Engine {
 public:
  struct AccHamming {
    std::uint32_t mism = 0;
  };
  struct AccEuclid {
    std::uint32_t mism = 0;
    std::uint64_t sq = 0;
  };
  struct AccLevenshtein {
    std::vector<std::int32_t> row;  // banded DP row
  };
  using Acc = std::conditional_t<
      K == MetricKind::hamming, AccHamming,
      std::conditional_t<K == MetricKind::euclid, AccEuclid, AccLevenshtein>>;
  struct State {
    NodeId node = kRootNode;
    std::uint64_t start = 0;
    Acc acc;
  };

  Engine(const Automaton& aut, const ScanConfig& cfg, std::string_view input)
      : aut_(aut), cfg_(cfg), input_(input) {
    w_ = aut_.window();
    if (w_ == 0) throw std::logic_error("automaton has no window length");
    limit_factor_ = 1.0 - cfg_.t_local;
    win_budget_ = cfg_.window_early_reject
                      ? static_cast<std::int32_t>(std::floor(
                            cfg_.disjoint_percent * double(w_) + kEps))
                      : kInfDist;
    if (win_budget_ < 0) win_budget_ = 0;
    max_depth_ = static_cast<std::uint32_t>(aut_.patterns().max_len());
    max_fail_jumps_ = aut_.options().max_fail_jumps;
    max_suffix_visits_ = aut_.options().max_suffix_visits;
    if constexpr (K == MetricKind::euclid) {
      sigma_ = cfg_.metric.alphabet.size;
      if (sigma_ < 2) throw std::invalid_argument("alphabet size < 2");
      dmax2_ = std::uint64_t(sigma_ - 1) * (sigma_ - 1);
      lf2s2_ = limit_factor_ * limit_factor_ * double(sigma_) * double(sigma_);
      if (sigma_ < 256) {
        validate_euclid_bytes(input_, sigma_);
        for (const std::string& p : aut_.patterns().patterns())
          validate_euclid_bytes(p, sigma_);
      }
    }
    if constexpr (K == MetricKind::levenshtein) {
      if (!unit_costs(cfg_.metric.costs)) {
        throw std::invalid_argument(
            "the scanner supports unit edit costs only; non-unit costs are "
            "available through the naive scanners");
      }
      double h = limit_factor_ * double(max_depth_ + w_) + kEps;
      band_h_ = static_cast<std::int32_t>(std::floor(h));
      band_h_ = std::min(band_h_, std::int32_t(max_depth_ + w_));
      if (cfg_.window_early_reject) band_h_ = std::min(band_h_, win_budget_);
      if (band_h_ < 0) band_h_ = 0;
      band_w_ = 2 * band_h_ + 1;
      // One row per walk length, padded with an infinity sentinel on each
      // side so the DP step needs no boundary branches.
      row_stride_ = band_w_ + 2;
      rows_flat_.assign(std::size_t(w_ + 1) * row_stride_, kInfDist);
    }
    cap_by_depth_.resize(max_depth_ + 1);
    for (std::uint32_t d = 0; d <= max_depth_; ++d) {
      const auto score_cap = static_cast<std::int32_t>(
          std::floor(limit_factor_ * double(d + w_) + kEps));
      cap_by_depth_[d] = std::min(win_budget_, score_cap);
    }
    if constexpr (K == MetricKind::euclid) {
      sqcap_by_depth_.resize(max_depth_ + 1);
      isqcap_by_depth_.resize(max_depth_ + 1);
      for (std::uint32_t d = 0; d <= max_depth_; ++d) {
        sqcap_by_depth_[d] = lf2s2_ * double(d + w_) + 1e-6;
        // Integer form for the prologue: s > cap <=> s > floor(cap) for
        // integral s, so the pruning decision is unchanged.
        isqcap_by_depth_[d] =
            std::int64_t(std::floor(sqcap_by_depth_[d]));
      }
    }
    mism_stack_.assign(w_ + 1, 0);
    sq_stack_.assign(w_ + 1, 0);
    stamp_.assign(aut_.node_count(), 0);
    out_flag_.resize(aut_.node_count());
    for (NodeId id = 0; id < aut_.node_count(); ++id)
      out_flag_[id] = aut_.node(id).all_outputs.empty() ? 0 : 1;
    build_flat();
  }

  // ---- flattened walk plan ----------------------------------------------

  static constexpr std::uint8_t kFlagOutput = 1;   // a pattern ends here
  static constexpr std::uint8_t kFlagLeaf = 2;     // no children
  static constexpr std::uint8_t kPadByte = 0xFF;   // filler for short columns

  struct FlatEntry {
    NodeId node = kRootNode;
    std::uint32_t skip = 0;   // index one past this node's subtree
    std::uint32_t depth = 0;  // depth in the trie
    unsigned char sym = 0;    // symbol on the edge from the parent
    std::uint8_t flags = 0;
  };

  void build_flat() {
    const std::size_t n = aut_.node_count();
    flat_.resize(n);
    flat_pos_.resize(n);
    std::vector<std::pair<NodeId, std::uint32_t>> stack;  // node, child cursor
    std::uint32_t out = 0;
    auto emit = [&](NodeId id) {
      flat_pos_[id] = out;
      FlatEntry& e = flat_[out++];
      e.node = id;
      e.depth = aut_.depth(id);
      e.sym = aut_.node(id).edge;
      e.flags = (aut_.node(id).own_outputs.empty() ? 0 : kFlagOutput) |
                (aut_.children(id).empty() ? kFlagLeaf : 0);
    };
    emit(kRootNode);
    stack.emplace_back(kRootNode, 0);
    while (!stack.empty()) {
      const NodeId node = stack.back().first;
      const std::uint32_t cur = stack.back().second;
      const auto kids = aut_.children(node);
      if (cur < kids.size()) {
        ++stack.back().second;
        const NodeId ch = kids[cur].second;
        emit(ch);
        stack.emplace_back(ch, 0);
      } else {
        flat_[flat_pos_[node]].skip = out;
        stack.pop_back();
      }
    }
  }

  // ---- accumulator plumbing -------------------------------------------

  std::int32_t* row(unsigned len) {
    return rows_flat_.data() + std::size_t(len) * row_stride_ + 1;
  }

  // Row of DP distances D(depth, j) for j in [depth - H, depth + H]; cells
  // outside [0, input size - start] hold kInfDist.
  void lev_init_row(std::int32_t* out, std::uint64_t start) const {
    const std::int64_t avail = avail_from(start);
    for (std::int32_t k = 0; k < band_w_; ++k) {
      const std::int64_t j = std::int64_t(k) - band_h_;
      out[k] = (j >= 0 && j <= avail) ? std::int32_t(j) : kInfDist;
    }
  }

  // One banded DP step consuming pattern char pc; writes the row for pattern
  // length t_next and returns its minimum. Cells left of the valid range read
  // as infinity through the row padding; cells right of it are only ever read
  // through the padding as well, so the loop runs branch-free over the valid
  // span. Values may exceed kInfDist by small increments; every consumer
  // treats anything >= kInfDist as unreachable.
  std::int32_t lev_advance_row(const std::int32_t* prev, std::int32_t* out,
                               std::uint64_t t_next, std::uint64_t start,
                               unsigned char pc) const {
    const std::int64_t avail = avail_from(start);
    const std::int64_t t = std::int64_t(t_next);
    const std::int64_t k0 = std::int64_t(band_h_) - t;  // cell with j == 0
    const std::int64_t khi =
        std::min<std::int64_t>(band_w_ - 1, avail + band_h_ - t);
    std::int32_t row_min = kInfDist;
    if (k0 >= 0) {
      out[k0] = prev[k0 + 1] + 1;  // j == 0: delete every pattern char
      row_min = out[k0];
    }
    const std::int64_t km = std::max<std::int64_t>(k0 + 1, 0);
    const std::int64_t base = std::int64_t(start) + t - band_h_ - 1;
    for (std::int64_t k = km; k <= khi; ++k) {
      const std::int32_t del = prev[k + 1] + 1;
      const std::int32_t ins = out[k - 1] + 1;
      const std::int32_t sub =
          prev[k] +
          (pc != static_cast<unsigned char>(input_[std::size_t(base + k)]));
      std::int32_t m = del < ins ? del : ins;
      if (sub < m) m = sub;
      out[k] = m;
      if (m < row_min) row_min = m;
    }
    return row_min;
  }

  Acc root_acc(std::uint64_t start) const {
    Acc acc;
    if constexpr (K == MetricKind::levenshtein) {
      acc.row.resize(band_w_);
      lev_init_row(acc.row.data(), start);
    }
    return acc;
  }

  // The root's row only depends on how much input is left once that drops
  // below the band radius, so one cached row serves almost every position.
  const Acc& root_acc_cached(std::uint64_t start) const {
    if constexpr (K == MetricKind::levenshtein) {
      if (avail_from(start) < band_h_) {
        root_tail_acc_ = root_acc(start);
        return root_tail_acc_;
      }
      if (root_full_acc_.row.empty()) root_full_acc_ = root_acc(start);
      return root_full_acc_;
    } else {
      return root_empty_acc_;
    }
  }

  // Extends a state's accumulator across one trie edge with symbol `sym`; the
  // consumed input position is start + new_depth - 1 (surplus positions past
  // the input end are charged as full mismatches).
  Acc advance(const Acc& acc, unsigned char sym, std::uint64_t start,
              std::uint32_t new_depth) const {
    Acc out;
    const std::uint64_t idx = start + new_depth - 1;
    if constexpr (K == MetricKind::hamming) {
      out.mism = acc.mism +
                 (idx < input_.size()
                      ? (sym != static_cast<unsigned char>(input_[idx]))
                      : 1u);
    } else if constexpr (K == MetricKind::euclid) {
      if (idx < input_.size()) {
        const int d = int(sym) - int(static_cast<unsigned char>(input_[idx]));
        out.mism = acc.mism + (d != 0);
        out.sq = acc.sq + std::uint64_t(std::int64_t(d) * d);
      } else {
        out.mism = acc.mism + 1;
        out.sq = acc.sq + dmax2_;
      }
    } else {
      out.row.resize(band_w_);
      // Temporary padded copies keep the sentinel invariants for the
      // branch-free DP step.
      adv_prev_.assign(band_w_ + 2, kInfDist);
      adv_out_.assign(band_w_ + 2, kInfDist);
      std::copy(acc.row.begin(), acc.row.end(), adv_prev_.begin() + 1);
      lev_advance_row(adv_prev_.data() + 1, adv_out_.data() + 1, new_depth,
                      start, sym);
      std::copy(adv_out_.begin() + 1, adv_out_.end() - 1, out.row.begin());
    }
    return out;
  }

  // Rebuilds the accumulator of (node, start) from the input alone; used for
  // failure landings, whose prefixes are not extensions of the failing state.
  Acc spawn_acc(NodeId node, std::uint64_t start) const {
    prefix_buf_.clear();
    for (NodeId x = node; x != kRootNode; x = aut_.node(x).parent)
      prefix_buf_.push_back(aut_.node(x).edge);
    std::reverse(prefix_buf_.begin(), prefix_buf_.end());
    Acc acc = root_acc(start);
    for (std::uint32_t d = 0; d < prefix_buf_.size(); ++d)
      acc = advance(acc, prefix_buf_[d], start, d + 1);
    return acc;
  }

  // ---- approximate advance (rule 2) ------------------------------------

  struct EvalCtx {
    std::uint64_t start = 0;
    std::uint32_t d0 = 0;
    std::int32_t prune_cap = 0;  // divergence-count bound (window + score)
    double sq_cap = 0.0;         // euclid squared-distance bound
    bool fired = false;
  };

  // Candidate endpoint at walk length `len`; mirrors the recording rule of
  // the reference evaluator. Returns false to abort the enumeration once the
  // gate is known to fire.
  bool record_point(EvalCtx& c, unsigned len) {
    const std::uint64_t n_c = c.d0 + len;
    if constexpr (K == MetricKind::hamming) {
      if (double(mism_stack_[len]) <= limit_factor_ * double(n_c) + kEps) {
        c.fired = true;
        return false;
      }
    } else if constexpr (K == MetricKind::euclid) {
      if (double(sq_stack_[len]) <= lf2s2_ * double(n_c) + 1e-6) {
        c.fired = true;
        return false;
      }
    } else {
      const std::uint64_t avail = avail_from(c.start);
      const std::uint64_t sl = std::min(n_c, avail);
      const std::int64_t k =
          std::int64_t(band_h_) - (std::int64_t(n_c) - std::int64_t(sl));
      if (k >= 0) {
        const std::int32_t dist = row(len)[k];
        if (dist <= win_budget_ &&
            double(dist) <= limit_factor_ * double(n_c) + kEps) {
          c.fired = true;
          return false;
        }
      }
    }
    return true;
  }

  // One walk edge: extends the stack accumulators from len-1 to len and
  // applies the divergence prunes. Returns false when the subtree below the
  // edge cannot contribute.
  bool push_edge(unsigned char sym, unsigned len, EvalCtx& c) {
    ++stat_pushes_;
    const std::uint64_t idx = c.start + c.d0 + (len - 1);
    if constexpr (K == MetricKind::hamming) {
      const std::uint32_t add =
          idx < input_.size()
              ? (sym != static_cast<unsigned char>(input_[idx]))
              : 1u;
      const std::uint32_t nm = mism_stack_[len - 1] + add;
      if (std::int32_t(nm) > c.prune_cap) return false;
      mism_stack_[len] = nm;
    } else if constexpr (K == MetricKind::euclid) {
      std::uint32_t nm = mism_stack_[len - 1];
      std::uint64_t nsq = sq_stack_[len - 1];
      if (idx < input_.size()) {
        const int d =
            int(sym) - int(static_cast<unsigned char>(input_[idx]));
        nm += (d != 0);
        nsq += std::uint64_t(std::int64_t(d) * d);
      } else {
        nm += 1;
        nsq += dmax2_;
      }
      if (std::int32_t(nm) > c.prune_cap) return false;
      if (double(nsq) > c.sq_cap) return false;
      mism_stack_[len] = nm;
      sq_stack_[len] = nsq;
    } else {
      const std::int32_t row_min =
          lev_advance_row(row(len - 1), row(len), c.d0 + len, c.start, sym);
      if (row_min > c.prune_cap) return false;
    }
    return true;
  }

  // Window-suffix walk below `node` starting at walk length `len0`, iterating
  // the flattened subtree slice. Recording points, failure jumps, the jump
  // budget and the jump-recording cap follow the reference enumeration order
  // exactly. Returns false once the enumeration is aborted by a firing
  // recording point.
  // In anchor-collection mode (CA) a firing record never aborts the walk:
  // the node that discovered it (or, through failure jumps, the subtree node
  // the jump chain left from) is appended to the current slot's anchor list
  // and the enumeration continues, so every firing subtree gets marked.
  void note_anchor(NodeId a) { anchors_ring_[cur_slot_].push_back(a); }

  template <bool CA = false>
  bool run_walk(NodeId node, unsigned len0, unsigned jumps,
                std::size_t& jump_records, EvalCtx& c,
                NodeId origin = kInvalidNode) {
    if (len0 == w_) {
      if (jumps > 0) ++jump_records;
      if (!record_point(c, len0)) {
        if constexpr (CA) note_anchor(jumps > 0 ? origin : node);
        else return false;
      }
      return true;
    }
    const FlatEntry& fe = flat_[flat_pos_[node]];
    if (len0 > 0 && (fe.flags & kFlagOutput)) {
      if (jumps > 0) ++jump_records;
      if (!record_point(c, len0)) {
        if constexpr (CA) note_anchor(jumps > 0 ? origin : node);
        else return false;
      }
    }
    if (fe.flags & kFlagLeaf) {
      if (jumps < max_fail_jumps_ && jump_records < max_suffix_visits_ &&
          node != kRootNode) {
        return run_walk<CA>(aut_.fail(node), len0, jumps + 1, jump_records, c,
                            jumps > 0 ? origin : node);
      }
      return true;
    }
    const std::uint32_t base = flat_pos_[node];
    const std::uint32_t dbase = flat_[base].depth;
    std::uint32_t f = base + 1;
    const std::uint32_t end = flat_[base].skip;
    while (f < end) {
      if (jumps > 0 && jump_records >= max_suffix_visits_) return true;
      const FlatEntry& e = flat_[f];
      const unsigned elen = len0 + (e.depth - dbase);
      if (!push_edge(e.sym, elen, c)) {
        f = e.skip;
        continue;
      }
      if (elen == w_) {
        if (jumps > 0) ++jump_records;
        if (!record_point(c, elen)) {
          if constexpr (CA) note_anchor(jumps > 0 ? origin : e.node);
          else return false;
        }
        f = e.skip;
        continue;
      }
      if (e.flags & kFlagOutput) {
        if (jumps > 0) ++jump_records;
        if (!record_point(c, elen)) {
          if constexpr (CA) note_anchor(jumps > 0 ? origin : e.node);
          else return false;
        }
      }
      if (e.flags & kFlagLeaf) {
        if (jumps < max_fail_jumps_ && jump_records < max_suffix_visits_) {
          if (!run_walk<CA>(aut_.fail(e.node), elen, jumps + 1, jump_records,
                            c, jumps > 0 ? origin : e.node))
            return false;
        }
        f = e.skip;
        continue;
      }
      ++f;
    }
    return true;
  }

  // ---- depth-r prefix frontier (hamming + euclid) -----------------------

  struct Item {
    NodeId node = kRootNode;
    std::uint32_t col = 0;     // column index (trailing region when q < r)
    std::uint64_t prefix = 0;  // first q path symbols, packed little-endian
    std::uint8_t q = 0;        // trie depth of the item
    std::uint8_t flags = 0;
  };

  // Contiguous run of filler-padded columns sharing one depth q.
  struct ScalarGroup {
    std::uint8_t q = 0;
    std::uint32_t col_lo = 0;
    std::uint32_t col_hi = 0;
  };

  std::uint64_t packed_prefix(NodeId node) const {
    std::uint64_t p = 0;
    for (NodeId x = node; x != kRootNode; x = aut_.node(x).parent)
      p = (p << 8) | aut_.node(x).edge;
    return p;
  }

  void ensure_frontier() {
    if constexpr (K == MetricKind::levenshtein) {
      return;
    } else {
      if (frontier_built_ || input_.size() < 64) return;
      std::int32_t cap0 = K == MetricKind::hamming ? cap_by_depth_[0]
                                                   : win_budget_;
      if (cap0 < 0) cap0 = 0;
      // The counts can reject nothing above depth cap0; a couple of extra
      // symbols make random survivors rare. Byte counters and the packed
      // prefixes bound the depth at 8.
      const std::int32_t r_lim =
          std::int32_t(std::min({std::uint32_t(8), w_, max_depth_}));
      if (cap0 + 1 > r_lim) return;
      r_ = std::min(cap0 + 3, r_lim);
      std::uint32_t f = 1;  // flat_[0] is the root
      std::vector<std::uint32_t> flatpos;
      while (f < flat_.size()) {
        const FlatEntry& e = flat_[f];
        if (e.depth == std::uint32_t(r_)) {
          items_.push_back(Item{e.node, n_cols_++, packed_prefix(e.node),
                                std::uint8_t(e.depth), e.flags});
          flatpos.push_back(f);
          f = e.skip;
        } else {
          if (e.flags & (kFlagOutput | kFlagLeaf)) {
            items_.push_back(Item{e.node, n_scalar_++, packed_prefix(e.node),
                                  std::uint8_t(e.depth), e.flags});
            scalar_items_.push_back(std::uint32_t(items_.size() - 1));
            flatpos.push_back(f);
          }
          ++f;
        }
      }
      // Shallow recording points get trailing columns padded with a filler
      // byte; the scan tracks the filler's divergence so their counts can be
      // corrected back to the first q symbols. Grouping them by depth gives
      // each group one threshold, so the root evaluation can scan them the
      // same way it scans the full-depth columns.
      std::stable_sort(scalar_items_.begin(), scalar_items_.end(),
                       [&](std::uint32_t a, std::uint32_t b) {
                         return items_[a].q < items_[b].q;
                       });
      scalar_col_item_.resize(n_scalar_);
      for (std::uint32_t k = 0; k < n_scalar_; ++k) {
        Item& it = items_[scalar_items_[k]];
        it.col = n_cols_ + k;
        scalar_col_item_[k] = scalar_items_[k];
        if (scalar_groups_.empty() || scalar_groups_.back().q != it.q) {
          scalar_groups_.push_back(ScalarGroup{it.q, it.col, it.col + 1});
        } else {
          scalar_groups_.back().col_hi = it.col + 1;
        }
      }
      padded_ = (n_cols_ + n_scalar_ + 15) & ~15u;
      if (padded_ == 0) padded_ = 16;
      cols_.assign(std::size_t(r_) * padded_, 0);
      col_node_.resize(n_cols_);
      col_prefix_.resize(n_cols_);
      for (const Item& it : items_) {
        if (it.q == std::uint8_t(r_)) {
          col_node_[it.col] = it.node;
          col_prefix_[it.col] = it.prefix;
        }
        for (std::int32_t j = 0; j < r_; ++j)
          cols_[std::size_t(j) * padded_ + it.col] =
              j < std::int32_t(it.q) ? std::uint8_t(it.prefix >> (8 * j))
                                     : kPadByte;
      }
      const std::uint32_t rem = n_cols_ % 8;
      tail_keep_ = rem == 0 ? ~0ull : ((1ull << (rem * 8)) - 1);
      item_lo_.assign(aut_.node_count(), 0);
      item_hi_.assign(aut_.node_count(), 0);
      std::vector<std::uint32_t> col_flatpos(n_cols_);
      for (std::size_t idx = 0; idx < items_.size(); ++idx) {
        if (items_[idx].q == std::uint8_t(r_))
          col_flatpos[items_[idx].col] = flatpos[idx];
      }
      sub_lo_.assign(aut_.node_count(), 0);
      sub_hi_.assign(aut_.node_count(), 0);
      for (NodeId id = 0; id < aut_.node_count(); ++id) {
        if (aut_.depth(id) >= std::uint32_t(r_)) continue;
        const std::uint32_t lo = flat_pos_[id] + 1;
        const std::uint32_t hi = flat_[flat_pos_[id]].skip;
        item_lo_[id] = std::uint32_t(
            std::lower_bound(flatpos.begin(), flatpos.end(), lo) -
            flatpos.begin());
        item_hi_[id] = std::uint32_t(
            std::lower_bound(flatpos.begin(), flatpos.end(), hi) -
            flatpos.begin());
        sub_lo_[id] = std::uint32_t(
            std::lower_bound(col_flatpos.begin(), col_flatpos.end(), lo) -
            col_flatpos.begin());
        sub_hi_[id] = std::uint32_t(
            std::lower_bound(col_flatpos.begin(), col_flatpos.end(), hi) -
            col_flatpos.begin());
      }
      // Ancestor lists of the shallow recording points, so a tracked state's
      // evaluation can visit its own subtree's filler-padded items directly.
      scal_off_.assign(aut_.node_count() + 1, 0);
      for (std::uint32_t k = 0; k < n_scalar_; ++k) {
        const Item& it = items_[scalar_col_item_[k]];
        for (NodeId a = aut_.node(it.node).parent; a != kRootNode;
             a = aut_.node(a).parent)
          ++scal_off_[a + 1];
      }
      for (NodeId id = 0; id < aut_.node_count(); ++id)
        scal_off_[id + 1] += scal_off_[id];
      scal_lst_.resize(scal_off_[aut_.node_count()]);
      std::vector<std::uint32_t> scal_fill(scal_off_.begin(),
                                           scal_off_.end() - 1);
      for (std::uint32_t k = 0; k < n_scalar_; ++k) {
        const std::uint32_t idx = scalar_col_item_[k];
        for (NodeId a = aut_.node(items_[idx].node).parent; a != kRootNode;
             a = aut_.node(a).parent)
          scal_lst_[scal_fill[a]++] = idx;
      }
      ringc_.assign(std::size_t(r_) * padded_, 0);
      ring_step_.assign(r_, ~0ull);
      ring_pad_.assign(std::size_t(r_) * (r_ + 1), 0);
      // Processing columnar survivors before the interleaved scalar items is
      // only a reordering of recording points; it can change results solely
      // through the jump-recording cap, so the fast path requires the cap to
      // be unreachable within one evaluation.
      fast_order_ok_ = max_suffix_visits_ >= 2 * aut_.node_count() + 64;
      // Anchor reuse additionally needs every walk to stay inside the
      // window (record thresholds then depend on absolute depth only, and
      // the root's enumeration covers every state's scope).
      anchor_ok_ = fast_order_ok_ && max_depth_ <= w_;
      if (anchor_ok_) {
        // Ancestor-at-depth tables for attributing anchors to states. A node
        // at depth <= d has no ancestor strictly above it at depth d and
        // must never match, hence the invalid sentinel.
        anc_depth_.assign(std::size_t(r_ - 1) * aut_.node_count(),
                          kInvalidNode);
        for (NodeId id = 1; id < aut_.node_count(); ++id) {
          const NodeId par = aut_.node(id).parent;
          const std::uint32_t dep = aut_.depth(id);
          for (std::uint32_t d = 1; d < std::uint32_t(r_); ++d) {
            NodeId up;
            if (dep <= d) {
              up = kInvalidNode;
            } else if (dep == d + 1) {
              up = par;
            } else {
              up = anc_depth_[(d - 1) * aut_.node_count() + par];
            }
            anc_depth_[(d - 1) * aut_.node_count() + id] = up;
          }
        }
        for (auto& v : anchors_ring_) v.clear();
      }
      frontier_built_ = true;
    }
  }

  // Per-position vectorizable scan: divergence counts of every column prefix
  // against input[i, i + r), stored in the ring slot for step i. The restrict
  // qualifiers and local bounds let the compiler keep the inner loops SIMD.
  void frontier_scan(std::uint64_t i) {
    const std::uint32_t padded = padded_;
    const std::uint32_t slot = std::uint32_t(i % std::uint64_t(r_));
    cur_slot_ = slot;
    std::uint8_t* __restrict counts =
        ringc_.data() + std::size_t(slot) * padded;
    const std::uint8_t* __restrict base = cols_.data();
    ring_step_[slot] = i;
    if (anchor_ok_) anchors_ring_[slot].clear();
    const std::size_t n = input_.size();
    std::uint8_t mm[8];  // per-row divergence of the filler byte
    for (std::int32_t j = 0; j < r_; ++j) {
      const std::uint8_t* __restrict col = base + std::size_t(j) * padded;
      const std::uint64_t idx = i + std::uint64_t(j);
      if (idx < n) {
        const std::uint8_t ch = std::uint8_t(input_[idx]);
        mm[j] = ch != kPadByte;
        if (j == 0) {
          for (std::uint32_t e = 0; e < padded; ++e) counts[e] = col[e] != ch;
        } else {
          for (std::uint32_t e = 0; e < padded; ++e) counts[e] += col[e] != ch;
        }
      } else {
        mm[j] = 1;
        if (j == 0) {
          std::memset(counts, 1, padded);
        } else {
          for (std::uint32_t e = 0; e < padded; ++e) counts[e] += 1;
        }
      }
    }
    // Suffix sums: subtracting pad[q] turns a filler-padded column's count
    // into the divergence of its first q symbols alone.
    std::uint8_t* pad = ring_pad_.data() + std::size_t(slot) * (r_ + 1);
    pad[r_] = 0;
    for (std::int32_t j = r_ - 1; j >= 0; --j)
      pad[j] = std::uint8_t(pad[j + 1] + mm[j]);
    // Per-depth views of the ring for this position: a state at depth d
    // reads the slot written d steps ago.
    for (std::int32_t d = 0; d < r_; ++d) {
      const std::uint32_t s = slot >= std::uint32_t(d)
                                  ? slot - std::uint32_t(d)
                                  : slot + std::uint32_t(r_) - std::uint32_t(d);
      step_by_d_[d] = ring_step_[s];
      counts_by_d_[d] = ringc_.data() + std::size_t(s) * padded;
      pad_by_d_[d] = ring_pad_.data() + std::size_t(s) * (r_ + 1);
      anch_by_d_[d] = &anchors_ring_[s];
    }
  }

  // Total prefix divergence of the first q packed symbols against
  // input[start, start + q).
  void prefix_divergence(std::uint64_t prefix, std::uint64_t start,
                         unsigned q, std::uint32_t& cnt, std::uint64_t& sq) {
    cnt = 0;
    sq = 0;
    for (unsigned j = 0; j < q; ++j) {
      const std::uint8_t p = std::uint8_t(prefix >> (8 * j));
      const std::uint64_t idx = start + j;
      if (idx < input_.size()) {
        if constexpr (K == MetricKind::euclid) {
          const int d = int(p) - int(std::uint8_t(input_[idx]));
          cnt += d != 0;
          sq += std::uint64_t(std::int64_t(d) * d);
        } else {
          cnt += p != std::uint8_t(input_[idx]);
        }
      } else {
        cnt += 1;
        if constexpr (K == MetricKind::euclid) sq += dmax2_;
      }
    }
  }

  // A depth-r continuation point whose prefix divergence passed the bound.
  template <bool CA = false>
  bool columnar_survivor(std::uint32_t col, std::uint32_t cnt, EvalCtx& c,
                         std::size_t& jump_records) {
    const unsigned len0 = unsigned(r_) - c.d0;
    if constexpr (K == MetricKind::euclid) {
      std::uint32_t cnt2 = 0;
      std::uint64_t sq = 0;
      prefix_divergence(col_prefix_[col], c.start, unsigned(r_), cnt2, sq);
      if (double(sq) > c.sq_cap) return true;
      sq_stack_[len0] = sq;
    }
    mism_stack_[len0] = cnt;
    return run_walk<CA>(col_node_[col], len0, 0, jump_records, c);
  }

  // An output or leaf above the frontier depth: recording point and, for
  // leaves, the failure-jump continuation. Its divergence count comes from
  // the ring, corrected for the filler rows past its own depth.
  template <bool CA = false>
  bool scalar_item(const Item& it, EvalCtx& c, std::size_t& jump_records,
                   const std::uint8_t* counts, const std::uint8_t* pad) {
    const std::uint32_t cnt = std::uint32_t(counts[it.col]) - pad[it.q];
    if (std::int32_t(cnt) > c.prune_cap) return true;  // walk pruned earlier
    const unsigned len_at = it.q - c.d0;
    if constexpr (K == MetricKind::euclid) {
      std::uint32_t cnt2 = 0;
      std::uint64_t sq = 0;
      prefix_divergence(it.prefix, c.start, it.q, cnt2, sq);
      if (double(sq) > c.sq_cap) return true;
      sq_stack_[len_at] = sq;
    }
    mism_stack_[len_at] = cnt;
    if (it.flags & kFlagOutput) {
      if (!record_point(c, len_at)) {
        if constexpr (CA) note_anchor(it.node);
        else return false;
      }
    }
    if (it.flags & kFlagLeaf) {
      if (max_fail_jumps_ > 0 && jump_records < max_suffix_visits_) {
        return run_walk<CA>(aut_.fail(it.node), len_at, 1, jump_records, c,
                            it.node);
      }
    }
    return true;
  }

  void frontier_eval(NodeId node, EvalCtx& c) {
    const std::uint8_t* counts = counts_by_d_[c.d0];
    const std::uint8_t* pad = pad_by_d_[c.d0];
    std::size_t jump_records = 0;
    if (node == kRootNode && fast_order_ok_) {
      if (anchor_ok_) {
        frontier_eval_root<true>(c, counts, pad, jump_records);
        // A full enumeration shares one jump-recording budget across all
        // subtrees; if it ran out, the anchor list is incomplete and must
        // not answer per-state evaluations (per-state budgets bind
        // differently). The sentinel marks the slot as unusable.
        if (jump_records >= max_suffix_visits_)
          anchors_ring_[cur_slot_].push_back(kInvalidNode);
      } else {
        frontier_eval_root<false>(c, counts, pad, jump_records);
      }
      return;
    }
    for (std::uint32_t ii = item_lo_[node]; ii < item_hi_[node]; ++ii) {
      const Item& it = items_[ii];
      if (it.q == std::uint8_t(r_)) {
        const std::uint32_t cnt = counts[it.col];
        if (std::int32_t(cnt) > c.prune_cap) continue;
        if (!columnar_survivor(it.col, cnt, c, jump_records)) return;
      } else {
        if (!scalar_item(it, c, jump_records, counts, pad)) return;
      }
    }
  }

  // The root's threshold scan over the whole frontier. In anchor-collection
  // mode it enumerates every firing point instead of stopping at the first,
  // so later positions can answer per-state evaluations from the anchors.
  template <bool CA>
  void frontier_eval_root(EvalCtx& c, const std::uint8_t* counts,
                          const std::uint8_t* pad,
                          std::size_t& jump_records) {
    // Depth groups of filler-padded columns share one threshold each:
    // corrected count <= cap exactly when counts[col] <= cap + pad[q].
    for (const ScalarGroup& g : scalar_groups_) {
      const std::uint64_t capg = std::uint64_t(std::min<std::int32_t>(
          c.prune_cap + std::int32_t(pad[g.q]), 0x7F));
      const std::uint64_t gadd = (0x7Full - capg) * 0x0101010101010101ull;
      const std::uint32_t wlo = g.col_lo / 8;
      const std::uint32_t whi = (g.col_hi + 7) / 8;
      for (std::uint32_t wi = wlo; wi < whi; ++wi) {
        std::uint64_t x;
        std::memcpy(&x, counts + std::size_t(wi) * 8, 8);
        std::uint64_t le = ~(x + gadd) & 0x8080808080808080ull;
        if (wi == wlo && g.col_lo % 8 != 0)
          le &= ~0ull << ((g.col_lo % 8) * 8);
        const std::uint32_t hi_in = g.col_hi - wi * 8;
        if (hi_in < 8) le &= (1ull << (hi_in * 8)) - 1;
        while (le) {
          const int b = __builtin_ctzll(le) >> 3;
          le &= le - 1;
          const std::uint32_t col = wi * 8 + std::uint32_t(b);
          const Item& it = items_[scalar_col_item_[col - n_cols_]];
          if (!scalar_item<CA>(it, c, jump_records, counts, pad)) {
            if constexpr (!CA) return;
          }
        }
      }
    }
    // SWAR threshold scan: bytes hold counts <= r <= 8, so adding
    // 0x7F - cap sets the high bit exactly on counts above the bound.
    const std::uint64_t cap8 =
        std::uint64_t(std::min<std::int32_t>(c.prune_cap, 0x7F));
    const std::uint64_t add = (0x7Full - cap8) * 0x0101010101010101ull;
    const std::uint32_t words = (n_cols_ + 7) / 8;
    for (std::uint32_t wi = 0; wi < words; ++wi) {
      std::uint64_t x;
      std::memcpy(&x, counts + std::size_t(wi) * 8, 8);
      std::uint64_t le = ~(x + add) & 0x8080808080808080ull;
      if (wi + 1 == words) le &= tail_keep_;
      while (le) {
        const int b = __builtin_ctzll(le) >> 3;
        le &= le - 1;
        const std::uint32_t col = wi * 8 + std::uint32_t(b);
        if (!columnar_survivor<CA>(col, counts[col], c, jump_records)) {
          if constexpr (!CA) return;
        }
      }
    }
  }

  // Evaluation of one tracked state against the frontier: the same threshold
  // scan the root runs, restricted to the state's subtree columns and its
  // shallow recording points. The caller guarantees the frontier covers this
  // depth and start. Survivors are visited out of walk order, so this path
  // requires the visit budget to be unreachable (fast_order_ok_).
  bool slim_eval(NodeId node, std::uint32_t d0, std::uint64_t start,
                 const Acc& acc) {
    if constexpr (K == MetricKind::levenshtein) {
      return eval_fires(node, start, acc);
    } else {
      ++stat_evals_;
      EvalCtx c;
      c.start = start;
      c.d0 = d0;
      if constexpr (K == MetricKind::hamming) {
        c.prune_cap = cap_by_depth_[d0];
        if (std::int32_t(acc.mism) > c.prune_cap)
          return finish_eval(c, node, start, acc);
      } else {
        c.prune_cap = win_budget_;
        c.sq_cap = sqcap_by_depth_[d0];
        if (std::int32_t(acc.mism) > win_budget_ ||
            std::int64_t(acc.sq) > isqcap_by_depth_[d0])
          return finish_eval(c, node, start, acc);
      }
      const std::uint8_t* counts = counts_by_d_[d0];
      const std::uint8_t* pad = pad_by_d_[d0];
      std::size_t jump_records = 0;
      for (std::uint32_t k = scal_off_[node]; k < scal_off_[node + 1]; ++k) {
        const Item& it = items_[scal_lst_[k]];
        if (std::int32_t(std::uint32_t(counts[it.col]) - pad[it.q]) >
            c.prune_cap)
          continue;
        if (!scalar_item(it, c, jump_records, counts, pad))
          return finish_eval(c, node, start, acc);
      }
      const std::uint32_t lo = sub_lo_[node];
      const std::uint32_t hi = sub_hi_[node];
      if (lo < hi) {
        const std::uint64_t cap8 =
            std::uint64_t(std::min<std::int32_t>(c.prune_cap, 0x7F));
        const std::uint64_t add = (0x7Full - cap8) * 0x0101010101010101ull;
        const std::uint64_t himask =
            hi % 8 == 0 ? ~0ull : (1ull << ((hi % 8) * 8)) - 1;
        std::uint32_t wi = lo / 8;
        const std::uint32_t wlast = (hi - 1) / 8;
        std::uint64_t keep = ~0ull << ((lo % 8) * 8);
        for (; wi <= wlast; ++wi, keep = ~0ull) {
          std::uint64_t x;
          std::memcpy(&x, counts + std::size_t(wi) * 8, 8);
          std::uint64_t le = ~(x + add) & 0x8080808080808080ull & keep;
          if (wi == wlast) le &= himask;
          while (le) {
            const int b = __builtin_ctzll(le) >> 3;
            le &= le - 1;
            const std::uint32_t col = wi * 8 + std::uint32_t(b);
            if (!columnar_survivor(col, counts[col], c, jump_records))
              return finish_eval(c, node, start, acc);
          }
        }
      }
      return finish_eval(c, node, start, acc);
    }
  }

  // Does the approximate-advance gate fire for a tracked state? Routing:
  // when the root's enumeration for this start already ran with anchor
  // collection (fresh ring data), the answer is a membership test against
  // the collected anchors; otherwise fall back to the state's own frontier
  // scan or to the plain walk.
  bool state_fires(const State& st) {
    if constexpr (K == MetricKind::levenshtein) {
      return eval_fires(st.node, st.start, st.acc);
    } else {
      const std::uint32_t d0 = aut_.depth(st.node);
      if (d0 >= std::uint32_t(r_) || !frontier_built_ ||
          step_by_d_[d0] != st.start)
        return eval_fires(st.node, st.start, st.acc);
      if (!anchor_ok_) {
        if (!fast_order_ok_) return eval_fires(st.node, st.start, st.acc);
        return slim_eval(st.node, d0, st.start, st.acc);
      }
      const std::vector<NodeId>& as = *anch_by_d_[d0];
      if (!as.empty() && as.back() == kInvalidNode)
        return slim_eval(st.node, d0, st.start, st.acc);
      ++stat_evals_;
      // A firing walk from this state exists exactly when the root's
      // enumeration recorded an anchor inside this state's subtree: record
      // thresholds depend on the absolute prefix depth only, and the root's
      // tighter pruning never hides a record reachable within the window.
      for (NodeId a : as) {
        if (anc_depth_[(d0 - 1) * aut_.node_count() + a] == st.node) {
          ++stat_fires_;
          return true;
        }
      }
      if (!aut_.has_window_candidates(st.node)) {
        EvalCtx c;
        c.d0 = d0;
        return finish_eval(c, st.node, st.start, st.acc);
      }
      return false;
    }
  }

  bool eval_fires(NodeId node, std::uint64_t start, const Acc& acc) {
    ++stat_evals_;
    const std::uint32_t d0 = aut_.depth(node);
    EvalCtx ctx;
    ctx.start = start;
    ctx.d0 = d0;
    if constexpr (K == MetricKind::hamming) {
      ctx.prune_cap = cap_by_depth_[d0];
      if (std::int32_t(acc.mism) > ctx.prune_cap)
        return finish_eval(ctx, node, start, acc);
      mism_stack_[0] = acc.mism;
    } else if constexpr (K == MetricKind::euclid) {
      ctx.prune_cap = win_budget_;
      ctx.sq_cap = sqcap_by_depth_[d0];
      if (std::int32_t(acc.mism) > win_budget_ || double(acc.sq) > ctx.sq_cap)
        return finish_eval(ctx, node, start, acc);
      mism_stack_[0] = acc.mism;
      sq_stack_[0] = acc.sq;
    } else {
      ctx.prune_cap = cap_by_depth_[d0];
      std::int32_t row_min = kInfDist;
      for (std::int32_t x : acc.row) row_min = std::min(row_min, x);
      if (row_min > ctx.prune_cap) return finish_eval(ctx, node, start, acc);
      std::memcpy(row(0), acc.row.data(), std::size_t(band_w_) * 4);
    }
    if (frontier_built_ && d0 < std::uint32_t(r_) && step_by_d_[d0] == start) {
      frontier_eval(node, ctx);
    } else {
      std::size_t jump_records = 0;
      run_walk(node, 0, 0, jump_records, ctx);
    }
    return finish_eval(ctx, node, start, acc);
  }

  // Nodes with an empty window-suffix list (a static property) fall back to
  // the prefix-only comparison, mirroring the reference evaluator.
  bool finish_eval(EvalCtx& v, NodeId node, std::uint64_t start,
                   const Acc& acc) {
    bool fired = v.fired;
    if (!fired && !aut_.has_window_candidates(node) && node != kRootNode) {
      const std::uint64_t n_c = aut_.depth(node);
      if constexpr (K == MetricKind::hamming) {
        fired = std::int32_t(acc.mism) <= win_budget_ &&
                double(acc.mism) <= limit_factor_ * double(n_c) + kEps;
      } else if constexpr (K == MetricKind::euclid) {
        fired = std::int32_t(acc.mism) <= win_budget_ &&
                double(acc.sq) <= lf2s2_ * double(n_c) + 1e-6;
      } else {
        const std::uint64_t avail = avail_from(start);
        const std::uint64_t sl = std::min(n_c, avail);
        const std::int64_t k = std::int64_t(band_h_) -
                               (std::int64_t(n_c) - std::int64_t(sl));
        if (k >= 0) {
          const std::int32_t dist = acc.row[std::size_t(k)];
          fired = dist <= win_budget_ &&
                  double(dist) <= limit_factor_ * double(n_c) + kEps;
        }
      }
    }
    if (fired) ++stat_fires_;
    return fired;
  }

  // ---- stepping ---------------------------------------------------------

  void seed(const ActiveSet& active) {
    cur_.clear();
    for (const ActiveState& st : active) {
      if (st.node == kRootNode) continue;
      cur_.push_back(State{st.node, st.start, spawn_acc(st.node, st.start)});
    }
    std::sort(cur_.begin(), cur_.end(),
              [](const State& a, const State& b) { return a.node < b.node; });
    cur_.erase(std::unique(cur_.begin(), cur_.end(),
                           [](const State& a, const State& b) {
                             return a.node == b.node;
                           }),
               cur_.end());
  }

  ActiveSet extract(std::uint64_t next_i) const {
    ActiveSet out;
    out.push_back(ActiveState{kRootNode, next_i});
    for (const State& st : cur_) out.push_back(ActiveState{st.node, st.start});
    std::sort(out.begin() + 1, out.end(),
              [](const ActiveState& a, const ActiveState& b) {
                return a.node < b.node;
              });
    return out;
  }

  // Accumulators of equal nodes are equal by construction (both rebuild the
  // same path-against-input divergence), so the first insertion wins and
  // duplicates skip building the accumulator altogether.
  template <typename MakeAcc>
  void add_next(NodeId node, std::uint64_t start, MakeAcc&& make_acc) {
    if (stamp_[node] == stamp_gen_) return;
    stamp_[node] = stamp_gen_;
    next_.push_back(State{node, start, make_acc()});
  }

  void step_core(std::uint64_t i, std::uint64_t emit_lo, std::uint64_t emit_hi,
                 std::vector<MatchRecord>& out) {
    const auto c = static_cast<unsigned char>(input_[i]);
    if (frontier_built_) frontier_scan(i);
    ++stamp_gen_;
    next_.clear();
    // Rules 1-3 for the tracked (non-root) states. One pass over the child
    // span yields the exact-advance target and whether an approximate
    // advance could add anything.
    for (State& st : cur_) {
      const auto kids = aut_.children(st.node);
      NodeId exact = kInvalidNode;
      bool has_other = false;
      for (const Automaton::Edge& e : kids) {
        if (e.first == c) {
          exact = e.second;
        } else {
          has_other = true;
        }
      }
      const std::uint32_t d1 = aut_.depth(st.node) + 1;
      if (exact != kInvalidNode) {
        add_next(exact, st.start,
                 [&] { return advance(st.acc, c, st.start, d1); });
      } else {
        const NodeId land = aut_.transition(aut_.fail(st.node), c);
        if (land != kRootNode) {
          const std::uint32_t d = aut_.depth(land);
          if (d <= i + 1) {
            const std::uint64_t start = i + 1 - d;
            add_next(land, start, [&] { return spawn_acc(land, start); });
          }
        }
      }
      if (has_other && state_fires(st)) {
        for (const Automaton::Edge& e : kids) {
          if (e.first == c) continue;
          add_next(e.second, st.start, [&] {
            return advance(st.acc, e.first, st.start, d1);
          });
        }
      }
    }
    // The root: exact advance plus approximate advances when its local
    // window score clears the gate. The root itself is always re-added
    // (implicitly: it is never part of cur_).
    const NodeId root_exact = aut_.child(kRootNode, c);
    const Acc& racc = root_acc_cached(i);
    if (root_exact != kInvalidNode) {
      add_next(root_exact, i, [&] { return advance(racc, c, i, 1); });
    }
    if (eval_fires(kRootNode, i, racc)) {
      for (const Automaton::Edge& e : aut_.children(kRootNode)) {
        if (e.first == c) continue;
        add_next(e.second, i, [&] { return advance(racc, e.first, i, 1); });
      }
    }
    // The stamp in add_next already deduplicated by node; only the depth cap
    // needs an ordering, and it is a content-determined total order.
    const std::size_t cap = cfg_.max_active_states;
    if (cap > 0 && next_.size() > cap - 1) {
      std::sort(next_.begin(), next_.end(), [this](const State& a,
                                                   const State& b) {
        const auto da = aut_.depth(a.node), db = aut_.depth(b.node);
        if (da != db) return da > db;
        return a.node < b.node;
      });
      next_.resize(cap - 1);
      ++stat_overflow_;
    }
    cur_.swap(next_);
    ++stat_positions_;
    stat_max_active_ = std::max(stat_max_active_, cur_.size() + 1);
    // Emissions for end offset i + 1.
    const std::uint64_t end = i + 1;
    if (end <= emit_lo || end > emit_hi) return;
    emit_pids_.clear();
    for (const State& st : cur_) {
      if (!out_flag_[st.node]) continue;
      const auto& outputs = aut_.node(st.node).all_outputs;
      emit_pids_.insert(emit_pids_.end(), outputs.begin(), outputs.end());
    }
    if (emit_pids_.empty()) return;
    std::sort(emit_pids_.begin(), emit_pids_.end());
    emit_pids_.erase(std::unique(emit_pids_.begin(), emit_pids_.end()),
                     emit_pids_.end());
    for (std::uint32_t pid : emit_pids_) {
      ++stat_emit_checks_;
      if (auto rec = emit_candidate(aut_, cfg_, pid, input_, end)) {
        out.push_back(*rec);
      }
    }
  }

  void run(std::uint64_t i_begin, std::uint64_t i_end, std::uint64_t emit_lo,
           std::uint64_t emit_hi, std::vector<MatchRecord>& out) {
    ensure_frontier();
    cur_.clear();
    for (std::uint64_t i = i_begin; i < i_end; ++i) {
      step_core(i, emit_lo, emit_hi, out);
    }
  }

  void fill_stats(ScanStats* stats) const {
    if (!stats) return;
    stats->positions += stat_positions_;
    stats->rule2_evals += stat_evals_;
    stats->rule2_fires += stat_fires_;
    stats->rule2_pushes += stat_pushes_;
    stats->active_overflow += stat_overflow_;
    stats->emit_checks += stat_emit_checks_;
    stats->max_active_seen = std::max(stats->max_active_seen, stat_max_active_);
  }

  std::int64_t avail_from(std::uint64_t start) const {
    return start <= input_.size() ? std::int64_t(input_.size() - start) : 0;
  }

 private:
  const Automaton& aut_;
  const ScanConfig& cfg_;
  std::string_view input_;
  unsigned w_ = 0;
  std::uint32_t max_depth_ = 0;
  double limit_factor_ = 0.25;
  std::int32_t win_budget_ = kInfDist;
  unsigned max_fail_jumps_ = 0;
  std::size_t max_suffix_visits_ = 0;
  // euclid
  unsigned sigma_ = 256;
  std::uint64_t dmax2_ = 255 * 255;
  double lf2s2_ = 0.0;
  // levenshtein band
  std::int32_t band_h_ = 0;
  std::int32_t band_w_ = 1;
  std::int32_t row_stride_ = 0;

  std::vector<FlatEntry> flat_;
  std::vector<std::uint32_t> flat_pos_;
  std::vector<std::int32_t> cap_by_depth_;
  std::vector<double> sqcap_by_depth_;

  // frontier tables (built lazily for scans over byte metrics)
  bool frontier_built_ = false;
  bool fast_order_ok_ = false;
  std::int32_t r_ = 0;
  std::uint32_t n_cols_ = 0;
  std::uint32_t n_scalar_ = 0;
  std::uint32_t padded_ = 0;
  std::uint32_t cur_slot_ = 0;
  std::uint64_t tail_keep_ = ~0ull;
  std::vector<std::uint8_t> cols_, ringc_, ring_pad_;
  std::vector<std::uint64_t> ring_step_;
  std::vector<Item> items_;
  std::vector<std::uint32_t> scalar_items_;
  std::vector<ScalarGroup> scalar_groups_;
  std::vector<std::uint32_t> scalar_col_item_;
  std::vector<std::uint32_t> sub_lo_, sub_hi_;      // subtree column ranges
  std::vector<std::uint32_t> scal_off_, scal_lst_;  // per-node shallow items
  // Per-depth ring views, refreshed by every frontier_scan.
  std::uint64_t step_by_d_[8] = {};
  const std::uint8_t* counts_by_d_[8] = {};
  const std::uint8_t* pad_by_d_[8] = {};
  std::vector<std::int64_t> isqcap_by_depth_;  // floor of sqcap, prologue use
  // Fired anchors collected by the root's full enumeration, one list per
  // ring slot, plus per-depth views refreshed alongside the other tables.
  // anc_depth_[(d-1)*nodes + x] is x's ancestor at depth d (invalid when x
  // is not strictly below depth d), so a state at depth d fires exactly when
  // some anchor maps back to its node.
  bool anchor_ok_ = false;
  std::vector<NodeId> anchors_ring_[8];
  const std::vector<NodeId>* anch_by_d_[8] = {};
  std::vector<NodeId> anc_depth_;
  std::vector<std::uint32_t> item_lo_, item_hi_;
  std::vector<NodeId> col_node_;
  std::vector<std::uint64_t> col_prefix_;

  std::vector<State> cur_, next_;
  std::vector<std::uint64_t> stamp_;
  std::uint64_t stamp_gen_ = 0;
  std::vector<std::uint8_t> out_flag_;
  std::vector<std::uint32_t> mism_stack_;
  std::vector<std::uint64_t> sq_stack_;
  std::vector<std::int32_t> rows_flat_;
  mutable std::vector<std::int32_t> adv_prev_, adv_out_;
  mutable std::vector<unsigned char> prefix_buf_;
  std::vector<std::uint32_t> emit_pids_;
  Acc root_empty_acc_;
  mutable Acc root_full_acc_;
  mutable Acc root_tail_acc_;

  std::uint64_t stat_positions_ = 0, stat_evals_ = 0, stat_fires_ = 0;
  std::uint64_t stat_pushes_ = 0;
  std::uint64_t stat_overflow_ = 0, stat_emit_checks_ = 0;
  std::size_t stat_max_active_ = 0;
};

template <MetricKind K>
std::vector<MatchRecord> scan_impl(const Automaton& aut, const ScanConfig& cfg,
                                   std::string_view input, ScanStats* stats) {
  Engine<K> engine(aut, cfg, input);
  std::vector<MatchRecord> out;
  engine.run(0, input.size(), 0, input.size(), out);
  engine.fill_stats(stats);
  std::sort(out.begin(), out.end(), record_order);
  return out;
}

template <MetricKind K>
std::vector<MatchRecord> scan_parallel_impl(const Automaton& aut,
                                            const ScanConfig& cfg,
                                            std::string_view input,
                                            unsigned threads,
                                            ScanStats* stats) {
  const std::uint64_t n = input.size();
  const std::uint64_t overlap = aut.patterns().max_len() + aut.window();
  std::vector<std::vector<MatchRecord>> parts(threads);
  std::vector<ScanStats> part_stats(threads);
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (unsigned k = 0; k < threads; ++k) {
    workers.emplace_back([&, k] {
      const std::uint64_t lo = n * k / threads;
      const std::uint64_t hi = n * (k + 1) / threads;
      if (lo >= hi) return;
      const std::uint64_t begin = lo > overlap ? lo - overlap : 0;
      Engine<K> engine(aut, cfg, input);
      engine.run(begin, hi, lo, hi, parts[k]);
      engine.fill_stats(&part_stats[k]);
    });
  }
  for (auto& t : workers) t.join();
  std::vector<MatchRecord> out;
  for (unsigned k = 0; k < threads; ++k) {
    out.insert(out.end(), parts[k].begin(), parts[k].end());
    if (stats) {
      stats->positions += part_stats[k].positions;
      stats->rule2_evals += part_stats[k].rule2_evals;
      stats->rule2_fires += part_stats[k].rule2_fires;
      stats->rule2_pushes += part_stats[k].rule2_pushes;
      stats->active_overflow += part_stats[k].active_overflow;
      stats->emit_checks += part_stats[k].emit_checks;
      stats->max_active_seen =
          std::max(stats->max_active_seen, part_stats[k].max_active_seen);
    }
  }
  std::sort(out.begin(), out.end(), record_order);
  return out;
}

template <MetricKind K>
ActiveSet step_impl(const Automaton& aut, const ScanConfig& cfg,
                    const ActiveSet& active, std::string_view input,
                    std::uint64_t i, std::vector<MatchRecord>* out,
                    ScanStats* stats) {
  Engine<K> engine(aut, cfg, input);
  engine.seed(active);
  std::vector<MatchRecord> sink;
  engine.step_core(i, 0, input.size(), sink);
  engine.fill_stats(stats);
  if (out) out->insert(out->end(), sink.begin(), sink.end());
  return engine.extract(i + 1);
}

}  // namespace

double local_window_score(const Automaton& automaton,
                          const SimilarityMetric& metric, NodeId node,
                          std::string_view input, std::uint64_t start) {
  const std::string prefix = automaton.prefix(node);
  std::vector<std::string> suffixes = automaton.window_suffixes(node);
  std::vector<std::string> candidates;
  if (suffixes.empty()) {
    if (prefix.empty()) return 0.0;
    candidates.push_back(prefix);
  } else {
    candidates.reserve(suffixes.size());
    for (const std::string& s : suffixes) candidates.push_back(prefix + s);
  }
  double best = 0.0;
  for (const std::string& cand : candidates) {
    std::string_view slice;
    if (start < input.size()) {
      slice = input.substr(start, cand.size());
    }
    best = std::max(best, similarity(metric, cand, slice));
  }
  return best;
}

bool approximate_advance_fires(const Automaton& automaton,
                               const ScanConfig& config, NodeId node,
                               std::string_view input, std::uint64_t start) {
  switch (config.metric.kind) {
    case MetricKind::hamming: {
      Engine<MetricKind::hamming> e(automaton, config, input);
      return e.eval_fires(node, start, e.spawn_acc(node, start));
    }
    case MetricKind::euclid: {
      Engine<MetricKind::euclid> e(automaton, config, input);
      return e.eval_fires(node, start, e.spawn_acc(node, start));
    }
    case MetricKind::levenshtein: {
      Engine<MetricKind::levenshtein> e(automaton, config, input);
      return e.eval_fires(node, start, e.spawn_acc(node, start));
    }
  }
  return false;
}

std::optional<MatchRecord> emit_candidate(const Automaton& automaton,
                                          const ScanConfig& config,
                                          std::uint32_t pattern_id,
                                          std::string_view input,
                                          std::uint64_t end_offset) {
  const std::string& pattern = automaton.patterns()[pattern_id];
  const std::uint64_t m = pattern.size();
  if (end_offset < m || end_offset > input.size()) return std::nullopt;
  const std::string_view slice = input.substr(end_offset - m, m);
  const double score = similarity(config.metric, pattern, slice);
  if (score < config.t_global - kEps) return std::nullopt;
  double disjoint = 0.0;
  if (config.metric.kind == MetricKind::levenshtein) {
    disjoint =
        levenshtein_distance(pattern, slice, config.metric.costs) / double(m);
  } else {
    std::uint64_t mism = 0;
    for (std::uint64_t j = 0; j < m; ++j) mism += pattern[j] != slice[j];
    disjoint = double(mism) / double(m);
  }
  if (disjoint > config.disjoint_percent + kEps) return std::nullopt;
  return MatchRecord{pattern_id, end_offset, score, slice == pattern};
}

std::vector<MatchRecord> scan(const Automaton& automaton,
                              const ScanConfig& config, std::string_view input,
                              ScanStats* stats) {
  switch (config.metric.kind) {
    case MetricKind::hamming:
      return scan_impl<MetricKind::hamming>(automaton, config, input, stats);
    case MetricKind::euclid:
      return scan_impl<MetricKind::euclid>(automaton, config, input, stats);
    case MetricKind::levenshtein:
      return scan_impl<MetricKind::levenshtein>(automaton, config, input,
                                                stats);
  }
  return {};
}

std::vector<MatchRecord> scan_parallel(const Automaton& automaton,
                                       const ScanConfig& config,
                                       std::string_view input, unsigned threads,
                                       ScanStats* stats) {
  if (threads == 0) threads = 1;
  threads = unsigned(std::min<std::uint64_t>(threads, 256));
  if (threads > 1 && input.size() < threads * 2) threads = 1;
  if (threads == 1) return scan(automaton, config, input, stats);
  switch (config.metric.kind) {
    case MetricKind::hamming:
      return scan_parallel_impl<MetricKind::hamming>(automaton, config, input,
                                                     threads, stats);
    case MetricKind::euclid:
      return scan_parallel_impl<MetricKind::euclid>(automaton, config, input,
                                                    threads, stats);
    case MetricKind::levenshtein:
      return scan_parallel_impl<MetricKind::levenshtein>(automaton, config,
                                                         input, threads, stats);
  }
  return {};
}

ActiveSet initial_active_set() { return {ActiveState{kRootNode, 0}}; }

ActiveSet step(const Automaton& automaton, const ScanConfig& config,
               const ActiveSet& active, std::string_view input, std::uint64_t i,
               std::vector<MatchRecord>* out, ScanStats* stats) {
  if (i >= input.size()) {
    throw std::out_of_range("step: input position out of range");
  }
  switch (config.metric.kind) {
    case MetricKind::hamming:
      return step_impl<MetricKind::hamming>(automaton, config, active, input,
                                            i, out, stats);
    case MetricKind::euclid:
      return step_impl<MetricKind::euclid>(automaton, config, active, input, i,
                                           out, stats);
    case MetricKind::levenshtein:
      return step_impl<MetricKind::levenshtein>(automaton, config, active,
                                                input, i, out, stats);
  }
  return {};
}

std::string matches_to_json(const std::vector<MatchRecord>& records,
                            const PatternSet& patterns) {
  std::vector<MatchRecord> sorted = records;
  std::sort(sorted.begin(), sorted.end(), record_order);
  std::string out = "[";
  char score_buf[32];
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const MatchRecord& r = sorted[i];
    std::snprintf(score_buf, sizeof score_buf, "%.6f", r.score);
    if (i > 0) out += ",";
    out += "\n  {\"pattern_id\":";
    out += std::to_string(r.pattern_id);
    out += ",\"pattern\":";
    out += nlohmann::json(patterns[r.pattern_id]).dump();
    out += ",\"end_offset\":";
    out += std::to_string(r.end_offset);
    out += ",\"score\":";
    out += score_buf;
    out += ",\"exact\":";
    out += r.exact ? "true" : "false";
    out += "}";
  }
  out += records.empty() ? "]\n" : "\n]\n";
  return out;
}

}  // namespace fuzzymint
