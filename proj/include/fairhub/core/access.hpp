/**
 * @file access.hpp
 * @brief Roles and the four-level visibility label carried by every record
 */

#pragma once

#include "fairhub/util/ids.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string_view>

namespace fairhub::core {

enum class Role { Member, PrincipalInvestigator, FacilityStaff, Admin };

[[nodiscard]] std::string_view to_string(Role role) noexcept;
[[nodiscard]] std::optional<Role> parse_role(std::string_view text) noexcept;

/// Audience, from widest to narrowest.
enum class Scope {
    Public,   ///< everyone, including anonymous visitors
    Project,  ///< any authenticated user of the instance
    Group,    ///< members of the owning group, plus the owner
    Private,  ///< the owner, plus the owning group's principal investigators
};

[[nodiscard]] std::string_view to_string(Scope scope) noexcept;
[[nodiscard]] std::optional<Scope> parse_scope(std::string_view text) noexcept;

struct AccessScope {
    Scope scope = Scope::Private;
    std::optional<UserId> owner;
    std::optional<GroupId> owning_group;

    /// Group needs owning_group, Private needs owner.
    [[nodiscard]] bool valid() const noexcept;
    /// Throws fairhub::Error(ValidationError) when !valid().
    void validate() const;

    static AccessScope make_public(std::optional<UserId> owner = std::nullopt,
                                   std::optional<GroupId> group = std::nullopt);
    static AccessScope make_project(std::optional<UserId> owner = std::nullopt,
                                    std::optional<GroupId> group = std::nullopt);
    static AccessScope make_group(GroupId group, std::optional<UserId> owner = std::nullopt);
    static AccessScope make_private(UserId owner, std::optional<GroupId> group = std::nullopt);

    friend bool operator==(const AccessScope&, const AccessScope&) = default;
};

void to_json(nlohmann::json& j, const AccessScope& a);
void from_json(const nlohmann::json& j, AccessScope& a);

} // namespace fairhub::core
