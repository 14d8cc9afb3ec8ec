#include "fairhub/error.hpp"
#include "fairhub/util/text.hpp"
#include "fairhub/workflows/extract.hpp"

namespace fairhub::workflows {
namespace {

constexpr std::uint16_t kImageWidth = 256;
constexpr std::uint16_t kImageLength = 257;
constexpr std::uint16_t kBitsPerSample = 258;

// TIFF field types and their sizes
constexpr std::uint16_t kByte = 1;
constexpr std::uint16_t kShort = 3;
constexpr std::uint16_t kLong = 4;

struct Reader {
    std::string_view data;
    bool big = false;

    bool has(std::uint64_t at, std::uint64_t n) const { return at <= data.size() && n <= data.size() - at; }
    std::uint32_t byte(std::size_t at) const { return static_cast<unsigned char>(data[at]); }
    std::uint16_t u16(std::size_t at) const {
        return static_cast<std::uint16_t>(big ? byte(at) << 8 | byte(at + 1) : byte(at) | byte(at + 1) << 8);
    }
    std::uint32_t u32(std::size_t at) const {
        return big ? static_cast<std::uint32_t>(u16(at)) << 16 | u16(at + 2)
                   : u16(at) | static_cast<std::uint32_t>(u16(at + 2)) << 16;
    }
};

[[noreturn]] void truncated(const std::string& what) {
    throw Error(Errc::TruncatedTiff, "TIFF is truncated: " + what);
}

// First value of an IFD entry; values of up to 4 bytes sit in the entry itself.
std::uint32_t first_value(const Reader& r, std::size_t entry) {
    const std::uint16_t type = r.u16(entry + 2);
    const std::uint32_t count = r.u32(entry + 4);
    std::size_t width = 0;
    switch (type) {
        case kByte: width = 1; break;
        case kShort: width = 2; break;
        case kLong: width = 4; break;
        default: throw Error(Errc::NotTiff, "unsupported field type " + std::to_string(type) + " for a size tag");
    }
    if (count == 0) truncated("size tag without values");
    std::size_t at = entry + 8;
    if (static_cast<std::uint64_t>(count) * width > 4) {
        at = r.u32(entry + 8);
        if (!r.has(at, width)) truncated("tag value offset beyond the buffer");
    }
    switch (type) {
        case kByte: return r.byte(at);
        case kShort: return r.u16(at);
        default: return r.u32(at);
    }
}

} // namespace

std::string_view to_string(ByteOrder b) noexcept {
    return b == ByteOrder::LittleEndian ? "LittleEndian" : "BigEndian";
}

void to_json(nlohmann::json& j, const ExtractedImageMeta& m) {
    j = {{"width_px", m.width_px},
         {"height_px", m.height_px},
         {"bits_per_sample", m.bits_per_sample},
         {"byte_order", to_string(m.byte_order)},
         {"source_file", m.source_file},
         {"extra", m.extra}};
}

ExtractedImageMeta extract_tiff_metadata(std::string_view bytes) {
    if (bytes.size() < 8) throw Error(Errc::NotTiff, "too short for a TIFF header");
    Reader r{bytes};
    if (bytes.substr(0, 2) == "II") {
        r.big = false;
    } else if (bytes.substr(0, 2) == "MM") {
        r.big = true;
    } else {
        throw Error(Errc::NotTiff, "missing TIFF byte-order mark");
    }
    if (r.u16(2) != 42) throw Error(Errc::NotTiff, "bad TIFF magic number");
    const std::uint32_t ifd = r.u32(4);
    if (!r.has(ifd, 2)) truncated("first IFD beyond the buffer");
    const std::uint16_t n = r.u16(ifd);
    if (!r.has(static_cast<std::uint64_t>(ifd) + 2, static_cast<std::uint64_t>(n) * 12)) {
        truncated("IFD entries beyond the buffer");
    }

    ExtractedImageMeta meta;
    meta.byte_order = r.big ? ByteOrder::BigEndian : ByteOrder::LittleEndian;
    std::optional<std::uint32_t> width;
    std::optional<std::uint32_t> height;
    for (std::uint16_t i = 0; i < n; ++i) {
        const std::size_t entry = ifd + 2 + static_cast<std::size_t>(i) * 12;
        switch (r.u16(entry)) {
            case kImageWidth: width = first_value(r, entry); break;
            case kImageLength: height = first_value(r, entry); break;
            case kBitsPerSample: meta.bits_per_sample = first_value(r, entry); break;
            default: break;
        }
    }
    if (!width || !height || *width == 0 || *height == 0) {
        throw Error(Errc::MissingDimensions, "TIFF has no usable ImageWidth/ImageLength");
    }
    meta.width_px = *width;
    meta.height_px = *height;
    return meta;
}

namespace {

bool ends_with_ci(std::string_view name, std::string_view ext) {
    return name.size() >= ext.size() && text::to_lower(name.substr(name.size() - ext.size())) == ext;
}

} // namespace

bool is_tiff_name(std::string_view name) noexcept {
    return ends_with_ci(name, ".tif") || ends_with_ci(name, ".tiff");
}

bool is_xml_name(std::string_view name) noexcept {
    return ends_with_ci(name, ".xml");
}

} // namespace fairhub::workflows
