#include "fairhub/pkgstore/package.hpp"

#include "fairhub/util/text.hpp"

namespace fairhub::pkgstore {

std::string_view to_string(Tier tier) noexcept {
    return tier == Tier::Hot ? "Hot" : "Cold";
}

bool valid_file_name(std::string_view name) noexcept {
    if (name.empty() || name.size() > 1024 || name.front() == '/') {
        return false;
    }
    for (const char c : name) {
        const auto uc = static_cast<unsigned char>(c);
        if (uc < 0x20 || uc == 0x7f || c == '\\') {
            return false;
        }
    }
    // "C:" style drive prefixes
    if (name.size() >= 2 && name[1] == ':') {
        return false;
    }
    std::size_t start = 0;
    while (start <= name.size()) {
        const auto end = name.find('/', start);
        const auto segment = name.substr(start, end == std::string_view::npos ? name.npos : end - start);
        if (segment.empty() || segment == "." || segment == "..") {
            return false;
        }
        if (end == std::string_view::npos) {
            break;
        }
        start = end + 1;
    }
    return text::valid_utf8(name);
}

std::string guess_media_type(std::string_view name) {
    const auto dot = name.rfind('.');
    if (dot == std::string_view::npos) {
        return "application/octet-stream";
    }
    const std::string ext = text::to_lower(name.substr(dot + 1));
    static const std::map<std::string, std::string> types{
        {"tif", "image/tiff"},        {"tiff", "image/tiff"},      {"xml", "application/xml"},
        {"pdf", "application/pdf"},   {"txt", "text/plain"},       {"csv", "text/csv"},
        {"json", "application/json"}, {"png", "image/png"},        {"jpg", "image/jpeg"},
        {"jpeg", "image/jpeg"},       {"zip", "application/zip"},  {"dcm", "application/dicom"},
    };
    const auto it = types.find(ext);
    return it == types.end() ? "application/octet-stream" : it->second;
}

void to_json(nlohmann::json& j, const StoredFile& f) {
    j = nlohmann::json{{"name", f.name},
                       {"size_bytes", f.size_bytes},
                       {"checksum_sha256", f.checksum_sha256},
                       {"media_type_hint", f.media_type_hint},
                       {"file_metadata", f.file_metadata},
                       {"tier", std::string(to_string(f.tier))},
                       {"last_access_at", format_iso8601(f.last_access_at)}};
}

void to_json(nlohmann::json& j, const PackageSnapshot& p) {
    nlohmann::json files = nlohmann::json::array();
    for (const auto& [name, f] : p.files) {
        files.push_back(f);
    }
    j = nlohmann::json{{"package_id", p.package_id.str()},
                       {"owner", p.owner.str()},
                       {"acl", p.acl},
                       {"package_metadata", p.package_metadata},
                       {"files", files},
                       {"created_at", format_iso8601(p.created_at)},
                       {"modified_at", format_iso8601(p.modified_at)},
                       {"revision", p.revision}};
}

void to_json(nlohmann::json& j, const MigrationReport& r) {
    nlohmann::json moves = nlohmann::json::array();
    for (const auto& m : r.moves) {
        moves.push_back({{"package_id", m.package_id.str()}, {"name", m.name}, {"size_bytes", m.size_bytes}});
    }
    j = nlohmann::json{{"moves", moves},
                       {"residual_overflow", r.residual_overflow},
                       {"hot_bytes_before", r.hot_bytes_before},
                       {"hot_bytes_after", r.hot_bytes_after}};
}

} // namespace fairhub::pkgstore
