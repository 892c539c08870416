#include "fuzzymint/datagen.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "fuzzymint/automaton.hpp"
#include "json.hpp"

namespace fuzzymint {

namespace {

char random_alphabet_char(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, kDatagenAlphabet.size() - 1);
  return kDatagenAlphabet[pick(rng)];
}

char random_other_char(std::mt19937_64& rng, char avoid) {
  for (;;) {
    const char c = random_alphabet_char(rng);
    if (c != avoid) return c;
  }
}

bool coin(std::mt19937_64& rng, double rate) {
  if (rate <= 0.0) return false;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < rate;
}

void validate_rate(double rate, const char* name) {
  if (!(rate >= 0.0 && rate <= 0.5)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 0.5]");
  }
}

// Number of distinct alphabet strings with lengths in [min_len, max_len],
// saturated so the distinctness feasibility check never overflows.
std::size_t distinct_capacity(std::size_t min_len, std::size_t max_len) {
  constexpr std::size_t kCap = static_cast<std::size_t>(1) << 62;
  std::size_t total = 0;
  for (std::size_t len = min_len; len <= max_len; ++len) {
    std::size_t per_len = 1;
    for (std::size_t i = 0; i < len; ++i) {
      if (per_len > kCap / kDatagenAlphabet.size()) return kCap;
      per_len *= kDatagenAlphabet.size();
    }
    if (total > kCap - per_len) return kCap;
    total += per_len;
  }
  return total;
}

}  // namespace

PatternSet gen_patterns(std::size_t count, std::size_t min_len,
                        std::size_t max_len, std::uint64_t seed) {
  if (count == 0) throw std::invalid_argument("pattern count is zero");
  if (min_len < 1 || min_len > max_len) {
    throw std::invalid_argument("pattern length bounds require 1 <= min <= max");
  }
  if (count > distinct_capacity(min_len, max_len)) {
    throw std::runtime_error("cannot generate that many distinct patterns");
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_len(min_len, max_len);
  std::vector<std::string> patterns;
  std::unordered_set<std::string> seen;
  patterns.reserve(count);
  std::size_t attempts = 0;
  const std::size_t max_attempts = count * 100 + 1000;
  while (patterns.size() < count) {
    if (++attempts > max_attempts) {
      throw std::runtime_error("pattern generation exceeded retry budget");
    }
    std::string p(pick_len(rng), '\0');
    for (char& c : p) c = random_alphabet_char(rng);
    if (!seen.insert(p).second) continue;
    patterns.push_back(std::move(p));
  }
  return PatternSet(std::move(patterns));
}

std::string mutate_pattern(std::string_view pattern, const MutationSpec& spec,
                           unsigned* substitutions, unsigned* insertions,
                           unsigned* deletions) {
  validate_rate(spec.substitution_rate, "substitution_rate");
  validate_rate(spec.insertion_rate, "insertion_rate");
  validate_rate(spec.deletion_rate, "deletion_rate");
  std::mt19937_64 rng(spec.seed);
  std::string out;
  out.reserve(pattern.size() + pattern.size() / 2);
  unsigned subs = 0, ins = 0, dels = 0;
  for (char c : pattern) {
    if (coin(rng, spec.deletion_rate)) {
      ++dels;
      continue;
    }
    if (coin(rng, spec.substitution_rate)) {
      c = random_other_char(rng, c);
      ++subs;
    }
    out.push_back(c);
    if (coin(rng, spec.insertion_rate)) {
      out.push_back(random_alphabet_char(rng));
      ++ins;
    }
  }
  if (substitutions) *substitutions = subs;
  if (insertions) *insertions = ins;
  if (deletions) *deletions = dels;
  return out;
}

Corpus gen_corpus(const PatternSet& patterns, std::size_t size_bytes,
                  const std::vector<std::pair<std::uint32_t, MutationSpec>>& planted,
                  std::uint64_t seed) {
  Corpus corpus;
  std::mt19937_64 rng(seed);

  // Mutate every plant up front so placement can check fits.
  corpus.plants.reserve(planted.size());
  for (const auto& [pattern_id, spec] : planted) {
    if (pattern_id >= patterns.size()) {
      throw std::invalid_argument("plant pattern_id out of range");
    }
    PlantRecord plant;
    plant.pattern_id = pattern_id;
    plant.mutated = mutate_pattern(patterns[pattern_id], spec,
                                   &plant.substitutions, &plant.insertions,
                                   &plant.deletions);
    corpus.plants.push_back(std::move(plant));
  }

  // One plant per equal segment of the corpus keeps them non-overlapping.
  const std::size_t n = corpus.plants.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t seg_begin = size_bytes / n * i;
    const std::size_t seg_end = i + 1 == n ? size_bytes : size_bytes / n * (i + 1);
    PlantRecord& plant = corpus.plants[i];
    if (plant.mutated.size() > seg_end - seg_begin) {
      throw std::runtime_error("corpus too small to host all plants");
    }
    std::uniform_int_distribution<std::size_t> pick_off(
        seg_begin, seg_end - plant.mutated.size());
    plant.offset = pick_off(rng);
  }

  corpus.text.resize(size_bytes);
  for (char& c : corpus.text) c = random_alphabet_char(rng);
  for (const PlantRecord& plant : corpus.plants) {
    std::copy(plant.mutated.begin(), plant.mutated.end(),
              corpus.text.begin() + static_cast<std::ptrdiff_t>(plant.offset));
  }

  // Re-roll background bytes until no exact pattern occurrence survives
  // entirely outside the plant spans (plants themselves may legitimately be
  // exact copies).
  std::vector<std::pair<std::uint64_t, std::uint64_t>> spans;
  spans.reserve(n);
  for (const PlantRecord& plant : corpus.plants) {
    spans.emplace_back(plant.offset, plant.offset + plant.mutated.size());
  }
  std::sort(spans.begin(), spans.end());
  const auto outside_all_spans = [&](std::uint64_t begin, std::uint64_t end) {
    auto it = std::upper_bound(spans.begin(), spans.end(),
                               std::make_pair(begin, ~std::uint64_t{0}));
    if (it != spans.end() && it->first < end) return false;
    if (it != spans.begin() && std::prev(it)->second > begin) return false;
    return true;
  };
  BuildOptions scan_opts;
  scan_opts.window = 1;
  scan_opts.materialize_suffixes = false;
  const Automaton aut = Automaton::build(patterns, scan_opts);
  for (int round = 0;; ++round) {
    if (round >= 100) {
      throw std::runtime_error("could not purge accidental exact occurrences");
    }
    bool dirty = false;
    for (const MatchRecord& r : aut.exact_scan(corpus.text)) {
      const std::uint64_t len = patterns[r.pattern_id].size();
      const std::uint64_t begin = r.end_offset - len;
      if (!outside_all_spans(begin, r.end_offset)) continue;
      for (std::uint64_t j = begin; j < r.end_offset; ++j) {
        corpus.text[j] = random_alphabet_char(rng);
      }
      dirty = true;
    }
    if (!dirty) break;
  }
  return corpus;
}

std::string ground_truth_json(const Corpus& corpus) {
  nlohmann::json plants = nlohmann::json::array();
  for (const PlantRecord& p : corpus.plants) {
    nlohmann::json jp;
    jp["pattern_id"] = p.pattern_id;
    jp["offset"] = p.offset;
    jp["length"] = p.mutated.size();
    jp["substitutions"] = p.substitutions;
    jp["insertions"] = p.insertions;
    jp["deletions"] = p.deletions;
    jp["mutated"] = p.mutated;
    plants.push_back(std::move(jp));
  }
  nlohmann::json root;
  root["size"] = corpus.text.size();
  root["plants"] = std::move(plants);
  return root.dump() + "\n";
}

std::string to_alphabet_indices(std::string_view text) {
  std::array<std::uint8_t, 256> index;
  index.fill(0xFF);
  for (std::size_t i = 0; i < kDatagenAlphabet.size(); ++i)
    index[static_cast<unsigned char>(kDatagenAlphabet[i])] =
        std::uint8_t(i);
  std::string out(text.size(), '\0');
  for (std::size_t i = 0; i < text.size(); ++i) {
    const std::uint8_t v = index[static_cast<unsigned char>(text[i])];
    if (v == 0xFF) {
      throw std::invalid_argument(
          "byte outside the generator alphabet at offset " +
          std::to_string(i));
    }
    out[i] = char(v);
  }
  return out;
}

}  // namespace fuzzymint
