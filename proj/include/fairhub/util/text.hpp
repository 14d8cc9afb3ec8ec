/**
 * @file text.hpp
 * @brief Small string helpers used across modules
 */

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fairhub::text {

[[nodiscard]] std::string trim(std::string_view s);
[[nodiscard]] std::string to_lower(std::string_view s);
[[nodiscard]] bool icontains(std::string_view haystack, std::string_view needle);
[[nodiscard]] std::vector<std::string> split(std::string_view s, std::string_view sep);
[[nodiscard]] std::string join(const std::vector<std::string>& parts, std::string_view sep);
[[nodiscard]] bool all_digits(std::string_view s) noexcept;
[[nodiscard]] bool valid_utf8(std::string_view s) noexcept;

/// Absolute URL: scheme "://" non-empty authority, no whitespace or control characters.
[[nodiscard]] bool is_absolute_url(std::string_view url) noexcept;

/// Percent-encodes everything outside RFC 3986 unreserved characters.
[[nodiscard]] std::string url_encode(std::string_view s);
[[nodiscard]] std::string url_decode(std::string_view s);

[[nodiscard]] std::string html_escape(std::string_view s);

} // namespace fairhub::text
