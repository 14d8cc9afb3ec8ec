/**
 * @file directory.hpp
 * @brief Users, research groups, sub-projects, memberships and the access decision
 *
 * The Directory is the single authority every other module asks
 * "may this requester see that record?". Reads take a shared lock and may
 * run concurrently; each write is serialized under the exclusive lock.
 */

#pragma once

#include "fairhub/core/access.hpp"
#include "fairhub/util/clock.hpp"
#include "fairhub/util/crypto.hpp"
#include "fairhub/util/ids.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fairhub::core {

/// ISO 7064 mod 11-2 check character ('0'..'9' or 'X') over 15 base digits.
[[nodiscard]] char orcid_check_character(std::string_view base_digits);
/// "dddd-dddd-dddd-dddC" with a matching check character.
[[nodiscard]] bool is_valid_orcid(std::string_view orcid);

struct UserProfile {
    UserId user_id;
    std::string family_name;
    std::string given_name;
    std::string orcid;
    std::string credential_hash;
    bool active = true;
};

/// Public view of a profile; never carries the credential hash.
struct UserSummary {
    UserId user_id;
    std::string family_name;
    std::string given_name;
    std::string orcid;
    bool active = true;
};

struct ResearchGroup {
    GroupId group_id;
    std::string name;
    std::string description;
};

struct Subproject {
    SubprojectId subproject_id;
    std::string name;
    std::set<GroupId> participating_groups;
};

struct Membership {
    UserId user_id;
    GroupId group_id;
    Role role = Role::Member;

    friend bool operator==(const Membership&, const Membership&) = default;
};

void to_json(nlohmann::json& j, const UserSummary& u);

class Directory {
public:
    explicit Directory(crypto::PasswordPolicy policy = {}) : policy_(policy) {}

    UserSummary create_user(std::string family_name, std::string given_name, std::string orcid,
                            std::string_view password);
    void set_active(const UserId& user, bool active);

    ResearchGroup create_group(std::string name, std::string description = {});
    Subproject create_subproject(std::string name, std::set<GroupId> participating_groups);

    /// Upsert; the previous role for (user, group) is replaced.
    Membership set_membership(const UserId& user, const GroupId& group, Role role);

    /// Checks the password in constant time. Unknown user and wrong password
    /// are indistinguishable to the caller (both InvalidCredentials).
    UserSummary verify_credentials(std::string_view username_or_orcid,
                                   std::string_view password) const;

    [[nodiscard]] std::optional<UserSummary> find_user(const UserId& user) const;
    [[nodiscard]] std::optional<UserSummary> find_by_orcid(std::string_view orcid) const;
    [[nodiscard]] std::optional<ResearchGroup> find_group(const GroupId& group) const;
    [[nodiscard]] std::optional<ResearchGroup> find_group_by_name(std::string_view name) const;
    [[nodiscard]] std::optional<Subproject> find_subproject(const SubprojectId& id) const;
    [[nodiscard]] std::vector<UserSummary> users() const;
    [[nodiscard]] std::vector<ResearchGroup> groups() const;

    [[nodiscard]] std::optional<Role> role_in(const UserId& user, const GroupId& group) const;
    [[nodiscard]] std::vector<Membership> memberships_of(const UserId& user) const;
    /// True when @p user holds @p role in at least one group.
    [[nodiscard]] bool has_role_anywhere(const UserId& user, Role role) const;

    /// Known and active.
    [[nodiscard]] bool is_project_user(const UserId& user) const;

    /// Audience decision for @p acl. Total; never throws.
    [[nodiscard]] bool can_access(const std::optional<UserId>& requester,
                                  const AccessScope& acl) const;

    /// Write authority: the owner, or a principal investigator of the owning group.
    [[nodiscard]] bool can_modify(const std::optional<UserId>& requester,
                                  const AccessScope& acl) const;

    /// Ids of @p records for which can_access holds, in input order.
    [[nodiscard]] std::vector<std::string> list_visible(
        const std::optional<UserId>& requester,
        const std::vector<std::pair<std::string, AccessScope>>& records) const;

    [[nodiscard]] nlohmann::json to_json() const;
    void load_json(const nlohmann::json& j);

private:
    [[nodiscard]] bool can_access_locked(const std::optional<UserId>& requester,
                                         const AccessScope& acl) const;
    [[nodiscard]] std::optional<Role> role_locked(const UserId& user, const GroupId& group) const;

    crypto::PasswordPolicy policy_;
    mutable std::shared_mutex mutex_;
    std::map<UserId, UserProfile> users_;
    std::map<std::string, UserId> by_orcid_;
    std::map<GroupId, ResearchGroup> groups_;
    std::map<SubprojectId, Subproject> subprojects_;
    std::map<std::pair<UserId, GroupId>, Role> memberships_;
};

} // namespace fairhub::core
