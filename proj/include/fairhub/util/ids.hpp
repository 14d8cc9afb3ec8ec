/**
 * @file ids.hpp
 * @brief Strongly typed opaque identifiers
 */

#pragma once

#include <nlohmann/json.hpp>

#include <compare>
#include <functional>
#include <string>
#include <utility>

namespace fairhub {

/// Opaque string id tagged with the entity it names, so a GroupId cannot be
/// passed where a UserId is expected.
template <class Tag>
class Id {
public:
    Id() = default;
    explicit Id(std::string value) : value_(std::move(value)) {}

    [[nodiscard]] const std::string& str() const noexcept { return value_; }
    [[nodiscard]] bool empty() const noexcept { return value_.empty(); }

    friend auto operator<=>(const Id&, const Id&) = default;
    friend bool operator==(const Id&, const Id&) = default;

private:
    std::string value_;
};

using UserId = Id<struct UserIdTag>;
using GroupId = Id<struct GroupIdTag>;
using SubprojectId = Id<struct SubprojectIdTag>;
using PackageId = Id<struct PackageIdTag>;
using ArticleId = Id<struct ArticleIdTag>;
using AntibodyId = Id<struct AntibodyIdTag>;
using MouseLineId = Id<struct MouseLineIdTag>;
using MouseId = Id<struct MouseIdTag>;
using CellLineId = Id<struct CellLineIdTag>;
using NotebookId = Id<struct NotebookIdTag>;
using CaseId = Id<struct CaseIdTag>;

/// Random RFC 4122 version-4 UUID in canonical 8-4-4-4-12 form.
[[nodiscard]] std::string make_uuid();

template <class IdT>
[[nodiscard]] IdT make_id() {
    return IdT{make_uuid()};
}

} // namespace fairhub

template <class Tag>
struct std::hash<fairhub::Id<Tag>> {
    std::size_t operator()(const fairhub::Id<Tag>& id) const noexcept {
        return std::hash<std::string>{}(id.str());
    }
};

namespace nlohmann {
template <class Tag>
struct adl_serializer<fairhub::Id<Tag>> {
    static void to_json(json& j, const fairhub::Id<Tag>& id) { j = id.str(); }
    static void from_json(const json& j, fairhub::Id<Tag>& id) {
        id = fairhub::Id<Tag>{j.get<std::string>()};
    }
};
} // namespace nlohmann
