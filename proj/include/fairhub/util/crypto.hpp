/**
 * @file crypto.hpp
 * @brief Hashing, randomness and credential helpers (libsodium backed)
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace fairhub::crypto {

/// Lower-case hex SHA-256 of @p data.
[[nodiscard]] std::string sha256_hex(std::span<const std::byte> data);
[[nodiscard]] std::string sha256_hex(std::string_view data);

[[nodiscard]] std::string random_bytes(std::size_t n);
[[nodiscard]] std::string to_hex(std::string_view bytes);

/// Uniformly random string over @p alphabet drawn from the system CSPRNG.
[[nodiscard]] std::string random_string(std::size_t length, std::string_view alphabet);

[[nodiscard]] bool constant_time_equal(std::string_view a, std::string_view b) noexcept;

/// Argon2id cost parameters. Defaults are libsodium's "interactive" limits.
struct PasswordPolicy {
    std::uint64_t ops_limit = 2;
    std::size_t mem_limit_bytes = 64u * 1024u * 1024u;

    /// Cheapest parameters libsodium accepts; for tests only.
    static PasswordPolicy minimal();
};

/// Encoded Argon2id hash string (includes salt and parameters).
[[nodiscard]] std::string hash_password(std::string_view password, const PasswordPolicy& policy);
[[nodiscard]] bool verify_password(std::string_view encoded, std::string_view password) noexcept;

/// Salted SHA-256 for short one-time codes. Returned as "salt_hex$digest_hex".
[[nodiscard]] std::string salted_digest(std::string_view secret);
[[nodiscard]] bool verify_salted_digest(std::string_view stored, std::string_view secret) noexcept;

[[nodiscard]] std::string base64_encode(std::string_view bytes);
/// Throws fairhub::Error(InvalidArgument) on malformed input.
[[nodiscard]] std::string base64_decode(std::string_view text);

} // namespace fairhub::crypto
