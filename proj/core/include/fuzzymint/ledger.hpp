#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fuzzymint/match.hpp"
#include "fuzzymint/sha256.hpp"

namespace fuzzymint {

// One minted text NFT: the original bytes, their canonical tokenized form,
// and the content hash that provides the exact-duplicate check.
struct NftRecord {
  std::uint64_t nft_id = 0;
  std::string owner;
  std::string original_text;
  std::string tokenized_text;  // tokenize(original_text).canonical
  Sha256Digest content_hash{};  // sha256(original_text)
};

struct Block {
  std::uint64_t index = 0;
  std::int64_t timestamp = 0;  // seconds, caller-supplied for reproducibility
  Sha256Digest prev_hash{};
  std::vector<NftRecord> nfts;
  Sha256Digest hash{};
};

// Plagiarism gate policy. The scan window adapts to the longest pattern of
// the minted corpus (bounded by shingle_len); shingling splits long
// tokenized texts into overlapping patterns of shingle_len with stride
// shingle_len / 2 so the automaton stays bounded.
struct MintPolicy {
  ScanConfig scan{};  // defaults: Hamming, t_local = t_global = 0.75, p = 0.25
  std::size_t shingle_len = 512;
  unsigned threads = 1;  // chunk-parallel scanning inside the gate
};

struct MintRejection {
  std::string reason;  // "empty content" | "exact duplicate" | "similar content"
  std::optional<std::uint64_t> offending_nft_id;
  double score = 0.0;
};

struct MintResult {
  bool accepted = false;
  std::optional<NftRecord> record;      // set when accepted
  std::optional<MintRejection> rejection;  // set when rejected
};

struct VerifyResult {
  bool ok = true;
  std::uint64_t first_bad_index = 0;  // meaningful when !ok
};

// Append-only hash chain, one block per mint. Every block hash covers the
// canonical serialization of (index, timestamp, prev_hash, nfts); the genesis
// block links to 32 zero bytes.
class Ledger {
 public:
  explicit Ledger(MintPolicy policy = {});

  const MintPolicy& policy() const { return policy_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t nft_count() const { return nft_count_; }

  // Gated mint: tokenizes, rejects empty canonical text, rejects exact
  // content-hash duplicates, then scans the candidate against every minted
  // text and every minted text against the candidate (containment is
  // directional); any qualifying match rejects with the best-scoring
  // offender. Accepted mints append one block.
  MintResult mint(std::string_view owner, std::string_view text,
                  std::int64_t timestamp);

  // Recomputes every block hash and checks linkage + index consecutiveness;
  // reports the first failing block index.
  VerifyResult verify_chain() const;

  // Canonical serialization: fields in declaration order, integers as
  // 8-byte big-endian, byte-strings length-prefixed (u64 big-endian length).
  // The block hash is SHA-256 over this serialization (hash field excluded).
  static std::string canonical_serialization(const Block& block);
  static Sha256Digest block_hash(const Block& block);

  // JSON-lines persistence: one block per line, hashes as lowercase hex.
  std::string to_jsonl() const;
  static Ledger from_jsonl(std::string_view text, MintPolicy policy = {});
  void save(const std::string& path) const;
  static Ledger load(const std::string& path, MintPolicy policy = {});

  // Test/tooling hook: appends a pre-built block without any checks.
  void append_block_unchecked(Block block);

 private:
  MintPolicy policy_;
  std::vector<Block> blocks_;
  std::size_t nft_count_ = 0;
  std::unordered_map<std::string, std::uint64_t> hash_to_nft_;  // hex -> id
};

// Splits a tokenized text into scan patterns: the whole text when short,
// otherwise overlapping shingles of shingle_len with stride shingle_len / 2.
std::vector<std::string> shingle_text(std::string_view text,
                                      std::size_t shingle_len);

}  // namespace fuzzymint
