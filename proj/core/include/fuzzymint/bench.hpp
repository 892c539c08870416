#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fuzzymint/automaton.hpp"
#include "fuzzymint/match.hpp"
#include "fuzzymint/pattern_set.hpp"
#include "fuzzymint/similarity.hpp"

namespace fuzzymint {

// One CSV row of an experiment report. Accuracy rows carry fp/fn with the
// timing fields zero; throughput rows fill all columns.
struct SweepRow {
  std::string scenario;  // "1" or "2"
  std::string metric;    // canonical metric name
  double t_local = 0.0;
  double t_global = 0.0;
  double p = 0.0;
  unsigned window = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  double matcher_bps = 0.0;
  double baseline_bps = 0.0;
  double speedup = 0.0;
};

struct ExperimentReport {
  std::vector<SweepRow> rows;
  std::string scenario;
  std::uint64_t seed = 0;
  std::size_t corpus_bytes = 0;
  std::size_t pattern_count = 0;
  std::size_t pattern_min_len = 0;
  std::size_t pattern_max_len = 0;
  double wall_seconds = 0.0;
};

enum class ScannerKind { matcher, baseline };

// Thresholds lo, lo+step, ..., up to hi (inclusive within rounding).
// Throws std::invalid_argument unless 0 <= lo <= hi <= 1 and step > 0.
std::vector<double> threshold_grid(double lo, double hi, double step);

// False positives (matcher-only records) and false negatives (baseline-only
// records), keyed by (pattern_id, end_offset). Both inputs sorted by
// record_order.
std::pair<std::uint64_t, std::uint64_t> fp_fn_counts(
    const std::vector<MatchRecord>& matcher_records,
    const std::vector<MatchRecord>& baseline_records);

// One accuracy row per grid threshold theta: the matcher runs with
// t_local = t_global = theta while fp/fn are counted against one fixed
// baseline reference at `reference` (default policy). A precomputed
// baseline_scan(patterns, reference, corpus) result can be passed to avoid
// recomputation; pass nullptr to compute it here.
// Throws std::invalid_argument when the grid is empty, descending, or out of
// [0, 1].
std::vector<SweepRow> sweep_thresholds(
    const Automaton& aut, const PatternSet& patterns, std::string_view corpus,
    MetricKind metric, const std::vector<double>& grid,
    const ScanConfig& reference,
    const std::vector<MatchRecord>* baseline_records = nullptr);

// Median bytes/second over `repetitions` timed scans after one discarded
// warm-up pass. Excludes automaton build time. Throws std::invalid_argument
// when repetitions < 3 or the corpus is empty.
double measure_throughput(ScannerKind scanner, const Automaton& aut,
                          const PatternSet& patterns, const ScanConfig& cfg,
                          std::string_view corpus, int repetitions);

// Full experiment for one scenario (1: pattern lengths 4-15, 2: doubled
// lengths 8-30): seeded patterns and corpus, per-metric threshold sweeps at
// window = max pattern length, and per-metric throughput rows at the fixed
// cross-scenario window below.
ExperimentReport run_scenario(int scenario, std::uint64_t seed,
                              int repetitions = 5);
std::vector<ExperimentReport> run_scenarios(std::uint64_t seed,
                                            int repetitions = 5);

// Throughput rows use one fixed window for both scenarios so the speed-up
// comparison isolates the pattern-length effect on the baseline.
inline constexpr unsigned kThroughputWindow = 15;

std::string report_csv(const std::vector<ExperimentReport>& reports);
std::string report_summary(const std::vector<ExperimentReport>& reports);

// Minimal SVG plots: fp/fn vs threshold per scenario and a speed-up bar
// chart. Returns the file paths written. Throws std::runtime_error on write
// failure.
std::vector<std::string> write_svg_plots(
    const std::vector<ExperimentReport>& reports, const std::string& dir);

}  // namespace fuzzymint
