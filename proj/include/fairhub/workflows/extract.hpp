/**
 * @file extract.hpp
 * @brief Metadata extraction from uploaded TIFF and XML files
 */

#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace fairhub::workflows {

enum class ByteOrder { LittleEndian, BigEndian };

[[nodiscard]] std::string_view to_string(ByteOrder b) noexcept;

struct ExtractedImageMeta {
    std::uint32_t width_px = 0;
    std::uint32_t height_px = 0;
    std::uint32_t bits_per_sample = 1;
    ByteOrder byte_order = ByteOrder::LittleEndian;
    std::string source_file;
    std::map<std::string, std::string> extra;

    friend bool operator==(const ExtractedImageMeta&, const ExtractedImageMeta&) = default;
};

void to_json(nlohmann::json& j, const ExtractedImageMeta& m);

/// Baseline header and first IFD only; pixel data is never touched.
/// Throws NotTiff, TruncatedTiff or MissingDimensions.
[[nodiscard]] ExtractedImageMeta extract_tiff_metadata(std::string_view bytes);

/// Flattens XML into element paths ("a/b", "a/b[2]", "a/@attr"). Input
/// that is not well-formed XML but valid UTF-8 text yields {"raw": text};
/// anything else throws BinaryGarbage.
[[nodiscard]] std::map<std::string, std::string> extract_xml_metadata(std::string_view bytes);

[[nodiscard]] bool is_tiff_name(std::string_view name) noexcept;
[[nodiscard]] bool is_xml_name(std::string_view name) noexcept;

} // namespace fairhub::workflows
