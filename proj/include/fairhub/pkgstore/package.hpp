/**
 * @file package.hpp
 * @brief Package, stored-file and mutation types of the package store
 */

#pragma once

#include "fairhub/core/access.hpp"
#include "fairhub/util/clock.hpp"
#include "fairhub/util/ids.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fairhub::pkgstore {

using Metadata = std::map<std::string, std::string>;

enum class Tier { Hot, Cold };

[[nodiscard]] std::string_view to_string(Tier tier) noexcept;

/// Relative, slash-separated, no empty / "." / ".." segments, no
/// backslashes or control characters.
[[nodiscard]] bool valid_file_name(std::string_view name) noexcept;

/// Media type guessed from the file extension.
[[nodiscard]] std::string guess_media_type(std::string_view name);

struct StoredFile {
    std::string name;
    std::uint64_t size_bytes = 0;
    std::string checksum_sha256;
    std::string media_type_hint;
    Metadata file_metadata;
    Tier tier = Tier::Hot;
    Timestamp last_access_at{};

    friend bool operator==(const StoredFile&, const StoredFile&) = default;
};

/// A package as seen by readers: everything except file bytes.
struct PackageSnapshot {
    PackageId package_id;
    UserId owner;
    core::AccessScope acl;
    Metadata package_metadata;
    std::map<std::string, StoredFile> files;
    Timestamp created_at{};
    Timestamp modified_at{};
    std::uint64_t revision = 0;
    /// Extra read grants beyond the ACL (e.g. an assigned evaluator).
    std::set<UserId> readers;

    friend bool operator==(const PackageSnapshot&, const PackageSnapshot&) = default;
};

void to_json(nlohmann::json& j, const StoredFile& f);
void to_json(nlohmann::json& j, const PackageSnapshot& p);

struct PutFile {
    std::string name;
    std::string bytes;
    Metadata file_metadata;
    /// Empty means "guess from the name".
    std::string media_type_hint;
};

struct DeleteFile {
    std::string name;
};

/// Replaces the package-level metadata map.
struct SetPackageMetadata {
    Metadata metadata;
};

/// Replaces one file's metadata map.
struct SetFileMetadata {
    std::string name;
    Metadata metadata;
};

using Mutation = std::variant<PutFile, DeleteFile, SetPackageMetadata, SetFileMetadata>;

struct TierPolicy {
    std::uint64_t hot_capacity_bytes = 0;
    std::uint64_t min_candidate_size_bytes = 0;
};

struct MigrationReport {
    struct Move {
        PackageId package_id;
        std::string name;
        std::uint64_t size_bytes = 0;

        friend bool operator==(const Move&, const Move&) = default;
    };
    std::vector<Move> moves;
    /// Hot bytes still exceed capacity because no eligible file was left.
    bool residual_overflow = false;
    std::uint64_t hot_bytes_before = 0;
    std::uint64_t hot_bytes_after = 0;
};

void to_json(nlohmann::json& j, const MigrationReport& r);

} // namespace fairhub::pkgstore
