#include "fuzzymint/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "fuzzymint/baseline.hpp"
#include "fuzzymint/datagen.hpp"
#include "fuzzymint/matcher.hpp"

namespace fuzzymint {

namespace {

constexpr double kGridEps = 1e-9;

// Keeps timed scan results observable so the compiler cannot elide the work.
volatile std::uint64_t g_bench_sink = 0;

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::pair<std::uint32_t, std::uint64_t> record_key(const MatchRecord& r) {
  return {r.pattern_id, r.end_offset};
}

void append_csv_row(std::string& out, const SweepRow& row) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%s,%s,%.2f,%.2f,%.2f,%u,%llu,%llu,%.3f,%.3f,%.3f\n",
                row.scenario.c_str(), row.metric.c_str(), row.t_local,
                row.t_global, row.p, row.window,
                static_cast<unsigned long long>(row.fp),
                static_cast<unsigned long long>(row.fn), row.matcher_bps,
                row.baseline_bps, row.speedup);
  out += buf;
}

}  // namespace

std::vector<double> threshold_grid(double lo, double hi, double step) {
  if (!(lo >= 0.0 && lo <= hi && hi <= 1.0)) {
    throw std::invalid_argument("threshold grid bounds require 0 <= lo <= hi <= 1");
  }
  if (!(step > 0.0)) throw std::invalid_argument("threshold grid step must be > 0");
  std::vector<double> grid;
  for (double v = lo; v <= hi + kGridEps; v += step) {
    grid.push_back(std::min(v, 1.0));
  }
  return grid;
}

std::pair<std::uint64_t, std::uint64_t> fp_fn_counts(
    const std::vector<MatchRecord>& matcher_records,
    const std::vector<MatchRecord>& baseline_records) {
  std::uint64_t fp = 0, fn = 0;
  std::size_t i = 0, j = 0;
  while (i < matcher_records.size() && j < baseline_records.size()) {
    const auto a = record_key(matcher_records[i]);
    const auto b = record_key(baseline_records[j]);
    const auto ka = std::make_pair(a.second, a.first);  // record_order: end, pid
    const auto kb = std::make_pair(b.second, b.first);
    if (ka == kb) {
      ++i;
      ++j;
    } else if (ka < kb) {
      ++fp;
      ++i;
    } else {
      ++fn;
      ++j;
    }
  }
  fp += matcher_records.size() - i;
  fn += baseline_records.size() - j;
  return {fp, fn};
}

std::vector<SweepRow> sweep_thresholds(
    const Automaton& aut, const PatternSet& patterns, std::string_view corpus,
    MetricKind metric, const std::vector<double>& grid,
    const ScanConfig& reference,
    const std::vector<MatchRecord>* baseline_records) {
  if (grid.empty()) throw std::invalid_argument("threshold grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) {
      throw std::invalid_argument("threshold grid values must lie in [0, 1]");
    }
    if (i > 0 && grid[i] < grid[i - 1]) {
      throw std::invalid_argument("threshold grid must be ascending");
    }
  }
  ScanConfig ref = reference;
  ref.metric.kind = metric;
  std::vector<MatchRecord> computed_baseline;
  if (!baseline_records) {
    computed_baseline = baseline_scan(patterns, ref, corpus);
    baseline_records = &computed_baseline;
  }
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (double theta : grid) {
    ScanConfig cfg = ref;
    cfg.t_local = theta;
    cfg.t_global = theta;
    const std::vector<MatchRecord> records = scan(aut, cfg, corpus);
    const auto [fp, fn] = fp_fn_counts(records, *baseline_records);
    SweepRow row;
    row.metric = to_string(metric);
    row.t_local = theta;
    row.t_global = theta;
    row.p = ref.disjoint_percent;
    row.window = aut.options().window;
    row.fp = fp;
    row.fn = fn;
    rows.push_back(std::move(row));
  }
  return rows;
}

double measure_throughput(ScannerKind scanner, const Automaton& aut,
                          const PatternSet& patterns, const ScanConfig& cfg,
                          std::string_view corpus, int repetitions) {
  if (repetitions < 3) {
    throw std::invalid_argument("throughput needs at least 3 repetitions");
  }
  if (corpus.empty()) throw std::invalid_argument("throughput corpus is empty");
  const auto run_once = [&]() -> std::size_t {
    if (scanner == ScannerKind::matcher) return scan(aut, cfg, corpus).size();
    return baseline_scan(patterns, cfg, corpus).size();
  };
  g_bench_sink = g_bench_sink + run_once();  // warm-up, discarded
  std::vector<double> seconds(static_cast<std::size_t>(repetitions));
  for (double& s : seconds) {
    const double t0 = now_seconds();
    g_bench_sink = g_bench_sink + run_once();
    s = std::max(now_seconds() - t0, 1e-9);
  }
  std::sort(seconds.begin(), seconds.end());
  const std::size_t mid = seconds.size() / 2;
  const double median = seconds.size() % 2 == 1
                            ? seconds[mid]
                            : 0.5 * (seconds[mid - 1] + seconds[mid]);
  return static_cast<double>(corpus.size()) / median;
}

ExperimentReport run_scenario(int scenario, std::uint64_t seed,
                              int repetitions) {
  if (scenario != 1 && scenario != 2) {
    throw std::invalid_argument("scenario must be 1 or 2");
  }
  const double wall_start = now_seconds();
  const std::size_t min_len = scenario == 1 ? 4 : 8;
  const std::size_t max_len = scenario == 1 ? 15 : 30;
  const PatternSet patterns = gen_patterns(75, min_len, max_len, seed);

  // 200 plants cycling over the pattern set with substitution rates
  // 0/5/10/15%, each plant's mutation stream independently seeded.
  constexpr double kSubRates[] = {0.0, 0.05, 0.10, 0.15};
  std::vector<std::pair<std::uint32_t, MutationSpec>> planted;
  planted.reserve(200);
  for (std::size_t i = 0; i < 200; ++i) {
    MutationSpec spec;
    spec.substitution_rate = kSubRates[i % 4];
    spec.seed = seed * 1000 + i;
    planted.emplace_back(static_cast<std::uint32_t>(i % patterns.size()), spec);
  }
  const Corpus corpus = gen_corpus(patterns, 2'508'800, planted, seed);

  // The experiments run on alphabet-index symbols: byte-position metrics are
  // invariant under the bijective remap, and the squared-distance metric gets
  // an alphabet whose per-symbol distance scale matches its size parameter
  // instead of the full byte range.
  std::vector<std::string> remapped;
  remapped.reserve(patterns.size());
  for (const std::string& p : patterns.patterns())
    remapped.push_back(to_alphabet_indices(p));
  const PatternSet index_patterns(std::move(remapped));
  const std::string index_text = to_alphabet_indices(corpus.text);
  const auto sigma =
      static_cast<unsigned>(kDatagenAlphabet.size());

  ExperimentReport report;
  report.scenario = std::to_string(scenario);
  report.seed = seed;
  report.corpus_bytes = corpus.text.size();
  report.pattern_count = patterns.size();
  report.pattern_min_len = patterns.min_len();
  report.pattern_max_len = patterns.max_len();

  BuildOptions sweep_opts;
  sweep_opts.window = static_cast<unsigned>(patterns.max_len());
  const Automaton sweep_aut = Automaton::build(index_patterns, sweep_opts);
  BuildOptions tp_opts;
  tp_opts.window = kThroughputWindow;
  const Automaton tp_aut = Automaton::build(index_patterns, tp_opts);

  const std::vector<double> grid = threshold_grid(0.50, 0.95, 0.05);
  for (MetricKind metric :
       {MetricKind::hamming, MetricKind::euclid, MetricKind::levenshtein}) {
    ScanConfig ref;
    ref.metric.kind = metric;
    ref.metric.alphabet.size = sigma;
    const std::vector<MatchRecord> baseline_ref =
        baseline_scan(index_patterns, ref, index_text);
    std::vector<SweepRow> rows = sweep_thresholds(
        sweep_aut, index_patterns, index_text, metric, grid, ref,
        &baseline_ref);
    for (SweepRow& row : rows) {
      row.scenario = report.scenario;
      report.rows.push_back(std::move(row));
    }

    SweepRow tp_row;
    tp_row.scenario = report.scenario;
    tp_row.metric = to_string(metric);
    tp_row.t_local = ref.t_local;
    tp_row.t_global = ref.t_global;
    tp_row.p = ref.disjoint_percent;
    tp_row.window = kThroughputWindow;
    const auto [fp, fn] =
        fp_fn_counts(scan(tp_aut, ref, index_text), baseline_ref);
    tp_row.fp = fp;
    tp_row.fn = fn;
    tp_row.matcher_bps = measure_throughput(ScannerKind::matcher, tp_aut,
                                            index_patterns, ref, index_text,
                                            repetitions);
    tp_row.baseline_bps = measure_throughput(ScannerKind::baseline, tp_aut,
                                             index_patterns, ref, index_text,
                                             repetitions);
    tp_row.speedup = tp_row.matcher_bps / tp_row.baseline_bps;
    report.rows.push_back(std::move(tp_row));
  }
  report.wall_seconds = now_seconds() - wall_start;
  return report;
}

std::vector<ExperimentReport> run_scenarios(std::uint64_t seed,
                                            int repetitions) {
  std::vector<ExperimentReport> reports;
  reports.push_back(run_scenario(1, seed, repetitions));
  reports.push_back(run_scenario(2, seed, repetitions));
  return reports;
}

std::string report_csv(const std::vector<ExperimentReport>& reports) {
  std::string out =
      "scenario,metric,t_local,t_global,p,window,fp,fn,matcher_bps,"
      "baseline_bps,speedup\n";
  for (const ExperimentReport& report : reports) {
    for (const SweepRow& row : report.rows) append_csv_row(out, row);
  }
  return out;
}

std::string report_summary(const std::vector<ExperimentReport>& reports) {
  std::string out;
  char buf[256];
  for (const ExperimentReport& report : reports) {
    std::snprintf(buf, sizeof(buf),
                  "scenario %s: %zu patterns (len %zu-%zu), corpus %zu bytes, "
                  "seed %llu, wall %.1fs\n",
                  report.scenario.c_str(), report.pattern_count,
                  report.pattern_min_len, report.pattern_max_len,
                  report.corpus_bytes,
                  static_cast<unsigned long long>(report.seed),
                  report.wall_seconds);
    out += buf;
    for (const SweepRow& row : report.rows) {
      if (row.baseline_bps > 0.0) {
        std::snprintf(buf, sizeof(buf),
                      "  %-12s w=%-3u t=%.2f  fp=%-6llu fn=%-6llu  "
                      "matcher %.2f MB/s vs baseline %.2f MB/s  speedup %.2fx\n",
                      row.metric.c_str(), row.window, row.t_global,
                      static_cast<unsigned long long>(row.fp),
                      static_cast<unsigned long long>(row.fn),
                      row.matcher_bps / 1e6, row.baseline_bps / 1e6,
                      row.speedup);
        out += buf;
      }
    }
  }
  return out;
}

std::vector<std::string> write_svg_plots(
    const std::vector<ExperimentReport>& reports, const std::string& dir) {
  constexpr int kW = 640, kH = 400, kPad = 50;
  constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c"};
  std::vector<std::string> written;
  const auto save = [&](const std::string& name, const std::string& body) {
    const std::string path = dir + "/" + name;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write plot: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
        << "\" height=\"" << kH << "\">\n<rect width=\"100%\" height=\"100%\" "
        << "fill=\"white\"/>\n"
        << body << "</svg>\n";
    if (!out) throw std::runtime_error("failed to write plot: " + path);
    written.push_back(path);
  };
  char buf[512];

  // fp/fn vs threshold, one plot per scenario; fp solid, fn dashed.
  for (const ExperimentReport& report : reports) {
    std::string body;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"20\" font-size=\"14\">scenario %s: "
                  "fp (solid) / fn (dashed) vs threshold</text>\n",
                  kPad, report.scenario.c_str());
    body += buf;
    std::uint64_t max_count = 1;
    for (const SweepRow& row : report.rows) {
      if (row.baseline_bps > 0.0) continue;
      max_count = std::max({max_count, row.fp, row.fn});
    }
    int color_idx = 0;
    std::string last_metric;
    for (std::size_t start = 0; start < report.rows.size(); ++start) {
      const SweepRow& first = report.rows[start];
      if (first.baseline_bps > 0.0 || first.metric == last_metric) continue;
      last_metric = first.metric;
      const char* color = kColors[color_idx++ % 3];
      for (int series = 0; series < 2; ++series) {
        std::string points;
        for (std::size_t i = start; i < report.rows.size(); ++i) {
          const SweepRow& row = report.rows[i];
          if (row.metric != first.metric || row.baseline_bps > 0.0) continue;
          const double x =
              kPad + (row.t_global - 0.5) / 0.45 * (kW - 2 * kPad);
          const std::uint64_t count = series == 0 ? row.fp : row.fn;
          const double y = kH - kPad -
                           static_cast<double>(count) /
                               static_cast<double>(max_count) *
                               (kH - 2 * kPad);
          std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", x, y);
          points += buf;
        }
        std::snprintf(buf, sizeof(buf),
                      "<polyline fill=\"none\" stroke=\"%s\"%s points=\"%s\"/>\n",
                      color, series == 1 ? " stroke-dasharray=\"6,4\"" : "",
                      points.c_str());
        body += buf;
      }
      std::snprintf(buf, sizeof(buf),
                    "<text x=\"%d\" y=\"%d\" font-size=\"12\" "
                    "fill=\"%s\">%s</text>\n",
                    kPad, 40 + 15 * color_idx, color, first.metric.c_str());
      body += buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" "
                  "stroke=\"black\"/>\n<line x1=\"%d\" y1=\"%d\" x2=\"%d\" "
                  "y2=\"%d\" stroke=\"black\"/>\n",
                  kPad, kH - kPad, kW - kPad, kH - kPad, kPad, kPad, kPad,
                  kH - kPad);
    body += buf;
    save("fp_fn_scenario" + report.scenario + ".svg", body);
  }

  // Speed-up bars across scenarios and metrics.
  {
    std::string body =
        "<text x=\"50\" y=\"20\" font-size=\"14\">speed-up (matcher / "
        "baseline)</text>\n";
    double max_speedup = 1.0;
    std::vector<std::pair<std::string, double>> bars;
    for (const ExperimentReport& report : reports) {
      for (const SweepRow& row : report.rows) {
        if (row.baseline_bps <= 0.0) continue;
        bars.emplace_back("s" + row.scenario + " " + row.metric, row.speedup);
        max_speedup = std::max(max_speedup, row.speedup);
      }
    }
    const double bar_w =
        bars.empty() ? 0.0
                     : static_cast<double>(kW - 2 * kPad) /
                           static_cast<double>(bars.size());
    for (std::size_t i = 0; i < bars.size(); ++i) {
      const double h = bars[i].second / max_speedup * (kH - 2 * kPad);
      const double x = kPad + static_cast<double>(i) * bar_w;
      std::snprintf(buf, sizeof(buf),
                    "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" "
                    "height=\"%.1f\" fill=\"%s\"/>\n<text x=\"%.1f\" "
                    "y=\"%d\" font-size=\"9\">%s %.1fx</text>\n",
                    x + 2, kH - kPad - h, bar_w - 4, h, kColors[i % 3], x + 2,
                    kH - kPad + 14, bars[i].first.c_str(), bars[i].second);
      body += buf;
    }
    save("speedup.svg", body);
  }
  return written;
}

}  // namespace fuzzymint
