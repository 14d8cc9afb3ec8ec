#include "fairhub/core/directory.hpp"

#include "fairhub/error.hpp"
#include "fairhub/util/text.hpp"

#include <mutex>

namespace fairhub::core {

char orcid_check_character(std::string_view base_digits) {
    int total = 0;
    for (const char c : base_digits) {
        total = (total + (c - '0')) * 2;
    }
    const int result = (12 - total % 11) % 11;
    return result == 10 ? 'X' : static_cast<char>('0' + result);
}

bool is_valid_orcid(std::string_view orcid) {
    if (orcid.size() != 19) {
        return false;
    }
    std::string digits;
    for (std::size_t i = 0; i < orcid.size(); ++i) {
        const char c = orcid[i];
        if (i == 4 || i == 9 || i == 14) {
            if (c != '-') return false;
            continue;
        }
        if (i == 18) {
            break;
        }
        if (c < '0' || c > '9') return false;
        digits.push_back(c);
    }
    return orcid_check_character(digits) == orcid[18];
}

void to_json(nlohmann::json& j, const UserSummary& u) {
    j = nlohmann::json{{"user_id", u.user_id.str()},
                       {"family_name", u.family_name},
                       {"given_name", u.given_name},
                       {"orcid", u.orcid},
                       {"active", u.active}};
}

namespace {

UserSummary summarize(const UserProfile& p) {
    return UserSummary{p.user_id, p.family_name, p.given_name, p.orcid, p.active};
}

// Verified against when the login name is unknown, so both failure paths
// spend the same hashing effort.
const std::string& dummy_hash() {
    static const std::string hash =
        crypto::hash_password("fairhub-dummy-password", crypto::PasswordPolicy::minimal());
    return hash;
}

} // namespace

UserSummary Directory::create_user(std::string family_name, std::string given_name,
                                   std::string orcid, std::string_view password) {
    family_name = text::trim(family_name);
    given_name = text::trim(given_name);
    std::vector<std::string> bad;
    if (family_name.empty()) bad.emplace_back("family_name");
    if (given_name.empty()) bad.emplace_back("given_name");
    if (password.empty()) bad.emplace_back("password");
    if (!bad.empty()) {
        throw Error(Errc::ValidationError, "required profile fields missing", {{"fields", bad}});
    }
    if (!is_valid_orcid(orcid)) {
        throw Error(Errc::InvalidOrcid, "ORCID iD is malformed or fails its check digit");
    }
    // hash outside the lock; it is deliberately slow
    std::string hash = crypto::hash_password(password, policy_);

    std::unique_lock lock(mutex_);
    if (by_orcid_.contains(orcid)) {
        throw Error(Errc::DuplicateOrcid, "a user with this ORCID iD already exists");
    }
    UserProfile profile{make_id<UserId>(), std::move(family_name), std::move(given_name), orcid,
                        std::move(hash), true};
    by_orcid_[orcid] = profile.user_id;
    const auto [it, inserted] = users_.emplace(profile.user_id, std::move(profile));
    return summarize(it->second);
}

void Directory::set_active(const UserId& user, bool active) {
    std::unique_lock lock(mutex_);
    const auto it = users_.find(user);
    if (it == users_.end()) {
        throw Error(Errc::UnknownUser, "unknown user " + user.str());
    }
    it->second.active = active;
}

ResearchGroup Directory::create_group(std::string name, std::string description) {
    name = text::trim(name);
    if (name.empty()) {
        throw Error(Errc::ValidationError, "group name is required", {{"fields", {"name"}}});
    }
    std::unique_lock lock(mutex_);
    for (const auto& [id, g] : groups_) {
        if (g.name == name) {
            throw Error(Errc::DuplicateName, "group name already in use: " + name);
        }
    }
    ResearchGroup group{make_id<GroupId>(), std::move(name), std::move(description)};
    groups_.emplace(group.group_id, group);
    return group;
}

Subproject Directory::create_subproject(std::string name, std::set<GroupId> participating_groups) {
    if (text::trim(name).empty()) {
        throw Error(Errc::ValidationError, "sub-project name is required", {{"fields", {"name"}}});
    }
    if (participating_groups.empty()) {
        throw Error(Errc::ValidationError, "a sub-project needs at least one participating group",
                    {{"fields", {"participating_groups"}}});
    }
    std::unique_lock lock(mutex_);
    for (const auto& g : participating_groups) {
        if (!groups_.contains(g)) {
            throw Error(Errc::UnknownGroup, "unknown group " + g.str());
        }
    }
    Subproject sp{make_id<SubprojectId>(), std::move(name), std::move(participating_groups)};
    subprojects_.emplace(sp.subproject_id, sp);
    return sp;
}

Membership Directory::set_membership(const UserId& user, const GroupId& group, Role role) {
    std::unique_lock lock(mutex_);
    if (!users_.contains(user)) {
        throw Error(Errc::UnknownUser, "unknown user " + user.str());
    }
    if (!groups_.contains(group)) {
        throw Error(Errc::UnknownGroup, "unknown group " + group.str());
    }
    memberships_[{user, group}] = role;
    return Membership{user, group, role};
}

UserSummary Directory::verify_credentials(std::string_view username_or_orcid,
                                          std::string_view password) const {
    std::optional<UserProfile> candidate;
    {
        std::shared_lock lock(mutex_);
        auto it = users_.find(UserId{std::string(username_or_orcid)});
        if (it == users_.end()) {
            const auto o = by_orcid_.find(std::string(username_or_orcid));
            if (o != by_orcid_.end()) {
                it = users_.find(o->second);
            }
        }
        if (it != users_.end()) {
            candidate = it->second;
        }
    }
    const bool ok = crypto::verify_password(candidate ? candidate->credential_hash : dummy_hash(),
                                            password);
    if (!candidate || !ok || !candidate->active) {
        throw Error(Errc::InvalidCredentials, "invalid credentials");
    }
    return summarize(*candidate);
}

std::optional<UserSummary> Directory::find_user(const UserId& user) const {
    std::shared_lock lock(mutex_);
    const auto it = users_.find(user);
    if (it == users_.end()) return std::nullopt;
    return summarize(it->second);
}

std::optional<UserSummary> Directory::find_by_orcid(std::string_view orcid) const {
    std::shared_lock lock(mutex_);
    const auto it = by_orcid_.find(std::string(orcid));
    if (it == by_orcid_.end()) return std::nullopt;
    return summarize(users_.at(it->second));
}

std::optional<ResearchGroup> Directory::find_group(const GroupId& group) const {
    std::shared_lock lock(mutex_);
    const auto it = groups_.find(group);
    if (it == groups_.end()) return std::nullopt;
    return it->second;
}

std::optional<ResearchGroup> Directory::find_group_by_name(std::string_view name) const {
    std::shared_lock lock(mutex_);
    for (const auto& [id, g] : groups_) {
        if (g.name == name) return g;
    }
    return std::nullopt;
}

std::optional<Subproject> Directory::find_subproject(const SubprojectId& id) const {
    std::shared_lock lock(mutex_);
    const auto it = subprojects_.find(id);
    if (it == subprojects_.end()) return std::nullopt;
    return it->second;
}

std::vector<UserSummary> Directory::users() const {
    std::shared_lock lock(mutex_);
    std::vector<UserSummary> out;
    for (const auto& [id, p] : users_) out.push_back(summarize(p));
    return out;
}

std::vector<ResearchGroup> Directory::groups() const {
    std::shared_lock lock(mutex_);
    std::vector<ResearchGroup> out;
    for (const auto& [id, g] : groups_) out.push_back(g);
    return out;
}

std::optional<Role> Directory::role_in(const UserId& user, const GroupId& group) const {
    std::shared_lock lock(mutex_);
    return role_locked(user, group);
}

std::optional<Role> Directory::role_locked(const UserId& user, const GroupId& group) const {
    const auto it = memberships_.find({user, group});
    if (it == memberships_.end()) return std::nullopt;
    return it->second;
}

std::vector<Membership> Directory::memberships_of(const UserId& user) const {
    std::shared_lock lock(mutex_);
    std::vector<Membership> out;
    for (const auto& [key, role] : memberships_) {
        if (key.first == user) out.push_back(Membership{key.first, key.second, role});
    }
    return out;
}

bool Directory::has_role_anywhere(const UserId& user, Role role) const {
    std::shared_lock lock(mutex_);
    for (const auto& [key, r] : memberships_) {
        if (key.first == user && r == role) return true;
    }
    return false;
}

bool Directory::is_project_user(const UserId& user) const {
    std::shared_lock lock(mutex_);
    const auto it = users_.find(user);
    return it != users_.end() && it->second.active;
}

bool Directory::can_access(const std::optional<UserId>& requester, const AccessScope& acl) const {
    std::shared_lock lock(mutex_);
    return can_access_locked(requester, acl);
}

bool Directory::can_access_locked(const std::optional<UserId>& requester,
                                  const AccessScope& acl) const {
    if (acl.scope == Scope::Public) {
        return true;
    }
    if (!requester) {
        return false;
    }
    const auto user = users_.find(*requester);
    if (user == users_.end() || !user->second.active) {
        return false;
    }
    const bool is_owner = acl.owner && *acl.owner == *requester;
    switch (acl.scope) {
        case Scope::Project:
            return true;
        case Scope::Group:
            return is_owner ||
                   (acl.owning_group && role_locked(*requester, *acl.owning_group).has_value());
        case Scope::Private:
            return is_owner || (acl.owning_group && role_locked(*requester, *acl.owning_group) ==
                                                         Role::PrincipalInvestigator);
        case Scope::Public:
            break;
    }
    return true;
}

bool Directory::can_modify(const std::optional<UserId>& requester, const AccessScope& acl) const {
    if (!requester) {
        return false;
    }
    std::shared_lock lock(mutex_);
    const auto user = users_.find(*requester);
    if (user == users_.end() || !user->second.active) {
        return false;
    }
    if (acl.owner && *acl.owner == *requester) {
        return true;
    }
    return acl.owning_group &&
           role_locked(*requester, *acl.owning_group) == Role::PrincipalInvestigator;
}

std::vector<std::string> Directory::list_visible(
    const std::optional<UserId>& requester,
    const std::vector<std::pair<std::string, AccessScope>>& records) const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, acl] : records) {
        if (can_access_locked(requester, acl)) {
            out.push_back(id);
        }
    }
    return out;
}

nlohmann::json Directory::to_json() const {
    std::shared_lock lock(mutex_);
    nlohmann::json users = nlohmann::json::array();
    for (const auto& [id, p] : users_) {
        users.push_back({{"user_id", p.user_id.str()},
                         {"family_name", p.family_name},
                         {"given_name", p.given_name},
                         {"orcid", p.orcid},
                         {"credential_hash", p.credential_hash},
                         {"active", p.active}});
    }
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& [id, g] : groups_) {
        groups.push_back({{"group_id", g.group_id.str()}, {"name", g.name}, {"description", g.description}});
    }
    nlohmann::json subprojects = nlohmann::json::array();
    for (const auto& [id, sp] : subprojects_) {
        nlohmann::json members = nlohmann::json::array();
        for (const auto& g : sp.participating_groups) members.push_back(g.str());
        subprojects.push_back(
            {{"subproject_id", sp.subproject_id.str()}, {"name", sp.name}, {"participating_groups", members}});
    }
    nlohmann::json memberships = nlohmann::json::array();
    for (const auto& [key, role] : memberships_) {
        memberships.push_back(
            {{"user_id", key.first.str()}, {"group_id", key.second.str()}, {"role", std::string(to_string(role))}});
    }
    return {{"users", users}, {"groups", groups}, {"subprojects", subprojects}, {"memberships", memberships}};
}

void Directory::load_json(const nlohmann::json& j) {
    std::unique_lock lock(mutex_);
    users_.clear();
    by_orcid_.clear();
    groups_.clear();
    subprojects_.clear();
    memberships_.clear();
    for (const auto& u : j.value("users", nlohmann::json::array())) {
        UserProfile p{UserId{u.at("user_id").get<std::string>()}, u.at("family_name").get<std::string>(),
                      u.at("given_name").get<std::string>(), u.at("orcid").get<std::string>(),
                      u.at("credential_hash").get<std::string>(), u.value("active", true)};
        by_orcid_[p.orcid] = p.user_id;
        users_.emplace(p.user_id, std::move(p));
    }
    for (const auto& g : j.value("groups", nlohmann::json::array())) {
        ResearchGroup group{GroupId{g.at("group_id").get<std::string>()}, g.at("name").get<std::string>(),
                            g.value("description", std::string{})};
        groups_.emplace(group.group_id, std::move(group));
    }
    for (const auto& s : j.value("subprojects", nlohmann::json::array())) {
        Subproject sp{SubprojectId{s.at("subproject_id").get<std::string>()}, s.at("name").get<std::string>(), {}};
        for (const auto& g : s.at("participating_groups")) sp.participating_groups.insert(GroupId{g.get<std::string>()});
        subprojects_.emplace(sp.subproject_id, std::move(sp));
    }
    for (const auto& m : j.value("memberships", nlohmann::json::array())) {
        const auto role = parse_role(m.at("role").get<std::string>());
        memberships_[{UserId{m.at("user_id").get<std::string>()}, GroupId{m.at("group_id").get<std::string>()}}] =
            role.value_or(Role::Member);
    }
}

} // namespace fairhub::core
