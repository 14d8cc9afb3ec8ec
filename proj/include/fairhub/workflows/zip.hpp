/**
 * @file zip.hpp
 * @brief Reader for standard zip archives (stored and deflated entries)
 */

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fairhub::workflows {

struct ZipEntry {
    std::string name;
    std::string bytes;
};

struct ZipLimits {
    /// Summed uncompressed size of all entries.
    std::uint64_t max_total_bytes = 2ull << 30;
};

/// Reads every file entry of @p archive via the central directory and
/// verifies CRC-32. Directory entries are skipped. Throws NotAZip on any
/// structural problem or unsupported feature (encryption, zip64,
/// compression other than stored/deflate), PathViolation on absolute,
/// "..", or duplicate entry names, and ValidationError when the limit is
/// exceeded.
[[nodiscard]] std::vector<ZipEntry> read_zip(std::string_view archive, const ZipLimits& limits = {});

/// True when @p bytes start with a local file header or an empty-archive
/// end record.
[[nodiscard]] bool looks_like_zip(std::string_view bytes) noexcept;

} // namespace fairhub::workflows
