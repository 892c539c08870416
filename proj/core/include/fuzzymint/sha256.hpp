#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fuzzymint {

using Sha256Digest = std::array<unsigned char, 32>;

inline constexpr Sha256Digest kZeroDigest{};

Sha256Digest sha256(std::string_view bytes);

std::string to_hex(const Sha256Digest& digest);
std::optional<Sha256Digest> digest_from_hex(std::string_view hex);

// Lowercase hex SHA-256 of the exact bytes (no normalization).
std::string hash_text(std::string_view text);

}  // namespace fuzzymint
