#include "fairhub/core/access.hpp"

#include "fairhub/error.hpp"

namespace fairhub::core {

std::string_view to_string(Role role) noexcept {
    switch (role) {
        case Role::Member: return "Member";
        case Role::PrincipalInvestigator: return "PrincipalInvestigator";
        case Role::FacilityStaff: return "FacilityStaff";
        case Role::Admin: return "Admin";
    }
    return "Member";
}

std::optional<Role> parse_role(std::string_view text) noexcept {
    if (text == "Member") return Role::Member;
    if (text == "PrincipalInvestigator" || text == "PI") return Role::PrincipalInvestigator;
    if (text == "FacilityStaff") return Role::FacilityStaff;
    if (text == "Admin") return Role::Admin;
    return std::nullopt;
}

std::string_view to_string(Scope scope) noexcept {
    switch (scope) {
        case Scope::Public: return "Public";
        case Scope::Project: return "Project";
        case Scope::Group: return "Group";
        case Scope::Private: return "Private";
    }
    return "Private";
}

std::optional<Scope> parse_scope(std::string_view text) noexcept {
    if (text == "Public") return Scope::Public;
    if (text == "Project") return Scope::Project;
    if (text == "Group") return Scope::Group;
    if (text == "Private") return Scope::Private;
    return std::nullopt;
}

bool AccessScope::valid() const noexcept {
    switch (scope) {
        case Scope::Group: return owning_group.has_value() && !owning_group->empty();
        case Scope::Private: return owner.has_value() && !owner->empty();
        default: return true;
    }
}

void AccessScope::validate() const {
    if (!valid()) {
        throw Error(Errc::ValidationError,
                    scope == Scope::Group ? "Group scope requires an owning group"
                                          : "Private scope requires an owner",
                    {{"fields", {"acl"}}});
    }
}

AccessScope AccessScope::make_public(std::optional<UserId> owner, std::optional<GroupId> group) {
    return {Scope::Public, std::move(owner), std::move(group)};
}

AccessScope AccessScope::make_project(std::optional<UserId> owner, std::optional<GroupId> group) {
    return {Scope::Project, std::move(owner), std::move(group)};
}

AccessScope AccessScope::make_group(GroupId group, std::optional<UserId> owner) {
    return {Scope::Group, std::move(owner), std::move(group)};
}

AccessScope AccessScope::make_private(UserId owner, std::optional<GroupId> group) {
    return {Scope::Private, std::move(owner), std::move(group)};
}

void to_json(nlohmann::json& j, const AccessScope& a) {
    j = nlohmann::json{{"scope", std::string(to_string(a.scope))}};
    j["owner"] = a.owner ? nlohmann::json(a.owner->str()) : nlohmann::json(nullptr);
    j["owning_group"] = a.owning_group ? nlohmann::json(a.owning_group->str()) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, AccessScope& a) {
    const auto scope = parse_scope(j.at("scope").get<std::string>());
    if (!scope) {
        throw Error(Errc::ValidationError, "unknown access scope", {{"fields", {"acl"}}});
    }
    a.scope = *scope;
    a.owner.reset();
    a.owning_group.reset();
    if (j.contains("owner") && !j["owner"].is_null()) {
        a.owner = UserId{j["owner"].get<std::string>()};
    }
    if (j.contains("owning_group") && !j["owning_group"].is_null()) {
        a.owning_group = GroupId{j["owning_group"].get<std::string>()};
    }
}

} // namespace fairhub::core
