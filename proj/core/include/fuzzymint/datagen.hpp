#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fuzzymint/pattern_set.hpp"

namespace fuzzymint {

// Alphabet used for generated patterns and corpus background.
inline constexpr std::string_view kDatagenAlphabet =
    "abcdefghijklmnopqrstuvwxyz0123456789";

// How to corrupt a planted pattern copy. Rates are per-character
// probabilities; each must lie in [0, 0.5]. The mutation stream is fully
// determined by `seed`.
struct MutationSpec {
  double substitution_rate = 0.0;
  double insertion_rate = 0.0;
  double deletion_rate = 0.0;
  std::uint64_t seed = 0;
};

// Ground truth for one planted occurrence: where the mutated copy landed and
// the true edit profile applied to it.
struct PlantRecord {
  std::uint32_t pattern_id = 0;
  std::uint64_t offset = 0;  // byte offset of `mutated` in the corpus
  std::string mutated;       // the planted bytes (may differ from the pattern)
  unsigned substitutions = 0;
  unsigned insertions = 0;
  unsigned deletions = 0;
};

struct Corpus {
  std::string text;
  std::vector<PlantRecord> plants;
};

// Deterministic pseudorandom pattern set: `count` pairwise-distinct strings
// over kDatagenAlphabet with lengths uniform in [min_len, max_len].
// Throws std::invalid_argument on bad bounds and std::runtime_error when the
// requested count cannot be satisfied with distinct strings.
PatternSet gen_patterns(std::size_t count, std::size_t min_len,
                        std::size_t max_len, std::uint64_t seed);

// Applies `spec` to one pattern. Per character: delete with
// deletion_rate, else substitute a different alphabet character with
// substitution_rate; after each emitted character, insert a random alphabet
// character with insertion_rate. Reports the realized edit counts.
std::string mutate_pattern(std::string_view pattern, const MutationSpec& spec,
                           unsigned* substitutions, unsigned* insertions,
                           unsigned* deletions);

// Pseudorandom background text of `size_bytes` with one mutated copy of the
// named pattern planted per `planted` entry, non-overlapping, at recorded
// offsets. Background bytes are re-rolled until no exact pattern occurrence
// survives outside the plant spans. Throws std::invalid_argument on bad
// specs/ids and std::runtime_error when the plants cannot fit.
Corpus gen_corpus(const PatternSet& patterns, std::size_t size_bytes,
                  const std::vector<std::pair<std::uint32_t, MutationSpec>>& planted,
                  std::uint64_t seed);

// Ground truth as JSON: {"size": N, "plants": [{pattern_id, offset, length,
// substitutions, insertions, deletions, mutated}, ...]}.
std::string ground_truth_json(const Corpus& corpus);

// Maps generated text onto small-alphabet symbol values: each byte is
// replaced by its index in kDatagenAlphabet (so values fall in
// [0, kDatagenAlphabet.size())). Byte-position metrics are invariant under
// this bijection, and it gives the squared-distance metric an alphabet whose
// distance scale matches the configured alphabet size. Throws
// std::invalid_argument on bytes outside the alphabet.
std::string to_alphabet_indices(std::string_view text);

}  // namespace fuzzymint
