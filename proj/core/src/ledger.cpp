#include "fuzzymint/ledger.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "fuzzymint/matcher.hpp"
#include "fuzzymint/tokenize.hpp"
#include "json.hpp"

namespace fuzzymint {

namespace {

void put_u64_be(std::string& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<char>((v >> shift) & 0xff));
  }
}

void put_bytes_lp(std::string& out, std::string_view s) {
  put_u64_be(out, s.size());
  out.append(s.data(), s.size());
}

bool printable_text(std::string_view s) {
  for (unsigned char c : s) {
    if (c == '\t' || c == '\n' || c == '\r') continue;
    if (c < 0x20 || c > 0x7e) return false;
  }
  return true;
}

std::string bytes_to_hex(std::string_view s) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(s.size() * 2);
  for (unsigned char c : s) {
    out.push_back(kHex[c >> 4]);
    out.push_back(kHex[c & 0xf]);
  }
  return out;
}

std::string hex_to_bytes(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    throw std::runtime_error("corrupt ledger JSON: odd hex length");
  }
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::runtime_error("corrupt ledger JSON: bad hex digit");
  };
  std::string out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    out.push_back(static_cast<char>((nibble(hex[i]) << 4) | nibble(hex[i + 1])));
  }
  return out;
}

Sha256Digest parse_digest(const std::string& hex) {
  auto digest = digest_from_hex(hex);
  if (!digest) throw std::runtime_error("corrupt ledger JSON: bad digest");
  return *digest;
}

// Best qualifying match of `input` against an automaton built over
// `patterns`; reports the owning NFT through pattern_owner.
struct GateHit {
  std::uint64_t nft_id = 0;
  double score = 0.0;
  bool found = false;
};

void merge_hit(GateHit& best, std::uint64_t nft_id, double score) {
  if (!best.found || score > best.score) {
    best = GateHit{nft_id, score, true};
  }
}

}  // namespace

std::vector<std::string> shingle_text(std::string_view text,
                                      std::size_t shingle_len) {
  if (shingle_len == 0) throw std::invalid_argument("shingle length is zero");
  std::vector<std::string> out;
  if (text.empty()) return out;
  if (text.size() <= shingle_len) {
    out.emplace_back(text);
    return out;
  }
  const std::size_t stride = std::max<std::size_t>(1, shingle_len / 2);
  std::size_t off = 0;
  for (;;) {
    if (off + shingle_len >= text.size()) {
      out.emplace_back(text.substr(text.size() - shingle_len, shingle_len));
      break;
    }
    out.emplace_back(text.substr(off, shingle_len));
    off += stride;
  }
  return out;
}

Ledger::Ledger(MintPolicy policy) : policy_(std::move(policy)) {}

std::string Ledger::canonical_serialization(const Block& block) {
  std::string out;
  put_u64_be(out, block.index);
  put_u64_be(out, static_cast<std::uint64_t>(block.timestamp));
  out.append(reinterpret_cast<const char*>(block.prev_hash.data()),
             block.prev_hash.size());
  put_u64_be(out, block.nfts.size());
  for (const NftRecord& nft : block.nfts) {
    put_u64_be(out, nft.nft_id);
    put_bytes_lp(out, nft.owner);
    put_bytes_lp(out, nft.original_text);
    put_bytes_lp(out, nft.tokenized_text);
    out.append(reinterpret_cast<const char*>(nft.content_hash.data()),
               nft.content_hash.size());
  }
  return out;
}

Sha256Digest Ledger::block_hash(const Block& block) {
  return sha256(canonical_serialization(block));
}

MintResult Ledger::mint(std::string_view owner, std::string_view text,
                        std::int64_t timestamp) {
  MintResult result;
  const TokenizedText tok = tokenize(text);
  if (tok.canonical.empty()) {
    result.rejection = MintRejection{"empty content", std::nullopt, 0.0};
    return result;
  }
  const std::string content_hex = hash_text(text);
  if (auto it = hash_to_nft_.find(content_hex); it != hash_to_nft_.end()) {
    result.rejection = MintRejection{"exact duplicate", it->second, 1.0};
    return result;
  }

  // Plagiarism gate, both directions.
  GateHit best;
  if (nft_count_ > 0) {
    // Candidate scanned against the minted corpus.
    std::vector<std::string> patterns;
    std::vector<std::uint64_t> pattern_owner;
    std::unordered_set<std::string> seen;
    for (const Block& b : blocks_) {
      for (const NftRecord& nft : b.nfts) {
        for (std::string& sh : shingle_text(nft.tokenized_text,
                                            policy_.shingle_len)) {
          if (!seen.insert(sh).second) continue;
          patterns.push_back(std::move(sh));
          pattern_owner.push_back(nft.nft_id);
        }
      }
    }
    BuildOptions build_opts;
    build_opts.materialize_suffixes = false;
    {
      PatternSet ps(patterns);
      build_opts.window = static_cast<unsigned>(ps.max_len());
      const Automaton aut = Automaton::build(std::move(ps), build_opts);
      for (const MatchRecord& r :
           scan_parallel(aut, policy_.scan, tok.canonical, policy_.threads)) {
        merge_hit(best, pattern_owner[r.pattern_id], r.score);
      }
    }
    // Minted texts scanned against the candidate's patterns.
    std::vector<std::string> cand_patterns;
    std::unordered_set<std::string> cand_seen;
    for (std::string& sh : shingle_text(tok.canonical, policy_.shingle_len)) {
      if (!cand_seen.insert(sh).second) continue;
      cand_patterns.push_back(std::move(sh));
    }
    PatternSet cps(std::move(cand_patterns));
    BuildOptions cand_opts;
    cand_opts.materialize_suffixes = false;
    cand_opts.window = static_cast<unsigned>(cps.max_len());
    const Automaton cand_aut = Automaton::build(std::move(cps), cand_opts);
    for (const Block& b : blocks_) {
      for (const NftRecord& nft : b.nfts) {
        for (const MatchRecord& r :
             scan_parallel(cand_aut, policy_.scan, nft.tokenized_text,
                           policy_.threads)) {
          merge_hit(best, nft.nft_id, r.score);
        }
      }
    }
  }
  if (best.found) {
    result.rejection =
        MintRejection{"similar content", best.nft_id, best.score};
    return result;
  }

  NftRecord record;
  record.nft_id = nft_count_;
  record.owner.assign(owner);
  record.original_text.assign(text);
  record.tokenized_text = tok.canonical;
  record.content_hash = sha256(text);
  Block block;
  block.index = blocks_.size();
  block.timestamp = timestamp;
  block.prev_hash = blocks_.empty() ? kZeroDigest : blocks_.back().hash;
  block.nfts.push_back(record);
  block.hash = block_hash(block);
  blocks_.push_back(std::move(block));
  hash_to_nft_.emplace(content_hex, record.nft_id);
  ++nft_count_;
  result.accepted = true;
  result.record = std::move(record);
  return result;
}

VerifyResult Ledger::verify_chain() const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Block& b = blocks_[i];
    if (b.index != i) return {false, i};
    const Sha256Digest& expected_prev =
        i == 0 ? kZeroDigest : blocks_[i - 1].hash;
    if (b.prev_hash != expected_prev) return {false, i};
    if (block_hash(b) != b.hash) return {false, i};
  }
  return {true, 0};
}

std::string Ledger::to_jsonl() const {
  std::string out;
  for (const Block& b : blocks_) {
    nlohmann::json jb;
    jb["index"] = b.index;
    jb["timestamp"] = b.timestamp;
    jb["prev_hash"] = to_hex(b.prev_hash);
    nlohmann::json nfts = nlohmann::json::array();
    for (const NftRecord& nft : b.nfts) {
      nlohmann::json jn;
      jn["nft_id"] = nft.nft_id;
      jn["owner"] = nft.owner;
      if (printable_text(nft.original_text)) {
        jn["original_text"] = nft.original_text;
      } else {
        jn["original_text_hex"] = bytes_to_hex(nft.original_text);
      }
      jn["tokenized_text"] = nft.tokenized_text;
      jn["content_hash"] = to_hex(nft.content_hash);
      nfts.push_back(std::move(jn));
    }
    jb["nfts"] = std::move(nfts);
    jb["hash"] = to_hex(b.hash);
    out += jb.dump();
    out += '\n';
  }
  return out;
}

Ledger Ledger::from_jsonl(std::string_view text, MintPolicy policy) {
  Ledger ledger(std::move(policy));
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty()) {
      nlohmann::json jb;
      try {
        jb = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("corrupt ledger JSON: ") +
                                 e.what());
      }
      try {
        Block b;
        b.index = jb.at("index").get<std::uint64_t>();
        b.timestamp = jb.at("timestamp").get<std::int64_t>();
        b.prev_hash = parse_digest(jb.at("prev_hash").get<std::string>());
        for (const nlohmann::json& jn : jb.at("nfts")) {
          NftRecord nft;
          nft.nft_id = jn.at("nft_id").get<std::uint64_t>();
          nft.owner = jn.at("owner").get<std::string>();
          if (jn.contains("original_text_hex")) {
            nft.original_text =
                hex_to_bytes(jn.at("original_text_hex").get<std::string>());
          } else {
            nft.original_text = jn.at("original_text").get<std::string>();
          }
          nft.tokenized_text = jn.at("tokenized_text").get<std::string>();
          nft.content_hash =
              parse_digest(jn.at("content_hash").get<std::string>());
          b.nfts.push_back(std::move(nft));
        }
        b.hash = parse_digest(jb.at("hash").get<std::string>());
        ledger.append_block_unchecked(std::move(b));
      } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("corrupt ledger JSON: ") +
                                 e.what());
      }
    }
    if (nl == text.size()) break;
    pos = nl + 1;
  }
  return ledger;
}

void Ledger::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open ledger file for writing: " + path);
  out << to_jsonl();
  if (!out) throw std::runtime_error("failed to write ledger file: " + path);
}

Ledger Ledger::load(const std::string& path, MintPolicy policy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open ledger file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_jsonl(buf.str(), std::move(policy));
}

void Ledger::append_block_unchecked(Block block) {
  for (const NftRecord& nft : block.nfts) {
    hash_to_nft_.emplace(to_hex(nft.content_hash), nft.nft_id);
    ++nft_count_;
  }
  blocks_.push_back(std::move(block));
}

}  // namespace fuzzymint
