#include "fuzzymint/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fuzzymint/similarity.hpp"

namespace fuzzymint {

namespace {

constexpr double kEps = 1e-9;

bool unit_costs(const EditCosts& c) {
  return c.insert == 1.0 && c.erase == 1.0 && c.substitute == 1.0;
}

}  // namespace

std::vector<MatchRecord> baseline_scan(const PatternSet& patterns,
                                       const ScanConfig& config,
                                       std::string_view input) {
  std::vector<MatchRecord> records;
  const double t = config.t_global;
  const double p = config.disjoint_percent;
  const MetricKind kind = config.metric.kind;
  const double sigma = double(config.metric.alphabet.size);
  if (kind == MetricKind::euclid) {
    const unsigned size = config.metric.alphabet.size;
    if (size < 2) throw std::invalid_argument("alphabet size < 2");
    if (size < 256) {
      auto check = [size](std::string_view sv) {
        for (unsigned char c : sv) {
          if (c >= size) {
            throw std::invalid_argument(
                "symbol value " + std::to_string(c) +
                " outside alphabet of size " + std::to_string(size));
          }
        }
      };
      check(input);
      for (const std::string& pat : patterns.patterns()) check(pat);
    }
  }
  std::vector<std::int32_t> prev_i, cur_i, tmp_i;
  std::vector<double> prev_d, cur_d;
  for (std::uint32_t pid = 0; pid < patterns.size(); ++pid) {
    const std::string& pat = patterns[pid];
    const std::size_t m = pat.size();
    if (m > input.size()) continue;
    // Per-pattern constants (identical doubles to recomputing them inline).
    const double denom = std::sqrt(double(m)) * sigma;
    prev_i.resize(m + 1);
    cur_i.resize(m + 1);
    tmp_i.resize(m + 1);
    for (std::size_t end = m; end <= input.size(); ++end) {
      const char* s = input.data() + (end - m);
      double score = 0.0, disjoint = 0.0;
      bool exact = false;
      switch (kind) {
        case MetricKind::hamming: {
          std::size_t mism = 0;
          for (std::size_t j = 0; j < m; ++j) mism += pat[j] != s[j];
          score = 1.0 - double(mism) / double(m);
          disjoint = double(mism) / double(m);
          exact = mism == 0;
          break;
        }
        case MetricKind::euclid: {
          std::uint64_t sq = 0;
          std::size_t mism = 0;
          for (std::size_t j = 0; j < m; ++j) {
            const int d = int(static_cast<unsigned char>(pat[j])) -
                          int(static_cast<unsigned char>(s[j]));
            sq += std::uint64_t(std::int64_t(d) * d);
            mism += d != 0;
          }
          score = 1.0 - std::sqrt(double(sq)) / denom;
          disjoint = double(mism) / double(m);
          exact = sq == 0;
          break;
        }
        case MetricKind::levenshtein: {
          double dist = 0.0;
          if (unit_costs(config.metric.costs)) {
            // Full DP over every cell, split into an independent pass (which
            // vectorizes) and the left-to-right insert chain; cell values are
            // identical to the single-pass recurrence.
            for (std::size_t j = 0; j <= m; ++j) prev_i[j] = std::int32_t(j);
            for (std::size_t ii = 1; ii <= m; ++ii) {
              const char pc = pat[ii - 1];
              for (std::size_t j = 1; j <= m; ++j) {
                const std::int32_t del = prev_i[j] + 1;
                const std::int32_t sub = prev_i[j - 1] + (pc != s[j - 1]);
                tmp_i[j] = del < sub ? del : sub;
              }
              std::int32_t left = std::int32_t(ii);
              cur_i[0] = left;
              for (std::size_t j = 1; j <= m; ++j) {
                ++left;
                if (tmp_i[j] < left) left = tmp_i[j];
                cur_i[j] = left;
              }
              std::swap(prev_i, cur_i);
            }
            dist = double(prev_i[m]);
          } else {
            const EditCosts& c = config.metric.costs;
            prev_d.resize(m + 1);
            cur_d.resize(m + 1);
            for (std::size_t j = 0; j <= m; ++j) prev_d[j] = double(j) * c.insert;
            for (std::size_t ii = 1; ii <= m; ++ii) {
              cur_d[0] = double(ii) * c.erase;
              const char pc = pat[ii - 1];
              for (std::size_t j = 1; j <= m; ++j) {
                const double sub =
                    prev_d[j - 1] + (pc == s[j - 1] ? 0.0 : c.substitute);
                cur_d[j] = std::min(
                    {prev_d[j] + c.erase, cur_d[j - 1] + c.insert, sub});
              }
              std::swap(prev_d, cur_d);
            }
            dist = prev_d[m];
          }
          score = std::clamp(1.0 - dist / double(m), 0.0, 1.0);
          disjoint = dist / double(m);
          exact = dist == 0.0;
          break;
        }
      }
      if (score >= t - kEps && disjoint <= p + kEps) {
        records.push_back(MatchRecord{pid, end, score, exact});
      }
    }
  }
  std::sort(records.begin(), records.end(), record_order);
  return records;
}

std::vector<MatchRecord> naive_exact_scan(const PatternSet& patterns,
                                          std::string_view input) {
  std::vector<MatchRecord> records;
  for (std::uint32_t pid = 0; pid < patterns.size(); ++pid) {
    const std::string& pat = patterns[pid];
    if (pat.size() > input.size()) continue;
    std::size_t pos = input.find(pat, 0);
    while (pos != std::string_view::npos) {
      records.push_back(MatchRecord{pid, pos + pat.size(), 1.0, true});
      pos = input.find(pat, pos + 1);
    }
  }
  std::sort(records.begin(), records.end(), record_order);
  return records;
}

}  // namespace fuzzymint
