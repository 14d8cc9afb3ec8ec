/**
 * @file registry.hpp
 * @brief Paper lab notebooks bound to pre-registered PIDs via their TAN
 */

#pragma once

#include "fairhub/core/directory.hpp"
#include "fairhub/pidreg/registry.hpp"
#include "fairhub/pkgstore/store.hpp"

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace fairhub::notebooks {

struct DateRange {
    Date from;
    std::optional<Date> to;
    friend bool operator==(const DateRange&, const DateRange&) = default;
};

struct NotebookRecord {
    NotebookId notebook_id;
    pidreg::PersistentIdentifier pid;
    UserId owner_user_id;
    std::optional<GroupId> group_id;
    std::string title;
    std::string storage_location;
    std::optional<DateRange> date_range;
    std::optional<PackageId> scan_package;
    core::AccessScope acl;
    Timestamp created_at{};

    friend bool operator==(const NotebookRecord&, const NotebookRecord&) = default;
};

void to_json(nlohmann::json& j, const NotebookRecord& n);
void from_json(const nlohmann::json& j, NotebookRecord& n);

struct NotebookDraft {
    std::string title;
    std::string storage_location;
    std::optional<GroupId> group_id;
    std::optional<DateRange> date_range;
    /// Defaults to Project scope owned by the registering user.
    std::optional<core::AccessScope> acl;
};

struct NotebookFilter {
    std::optional<GroupId> group;
    std::optional<UserId> owner;
    /// Case-insensitive substring of title or storage location.
    std::string text;
};

class NotebookRegistry {
public:
    NotebookRegistry(const core::Directory& directory, const Clock& clock, pidreg::PidRegistry& pids,
                     pkgstore::PackageStore& store);

    /// The only way to create a notebook: the TAN is consumed first and the
    /// PID is then bound to the new record.
    NotebookRecord register_notebook(std::string_view prefix, std::string_view suffix, std::string_view tan,
                                     const UserId& owner, const NotebookDraft& draft);

    /// Scans inherit the notebook's ACL.
    pkgstore::StoredFile upload_scan(const NotebookId& id, const std::string& filename, std::string bytes,
                                     const std::optional<UserId>& requester);

    [[nodiscard]] NotebookRecord get(const NotebookId& id, const std::optional<UserId>& requester) const;
    [[nodiscard]] std::optional<NotebookRecord> find(const NotebookId& id) const;
    [[nodiscard]] std::optional<NotebookRecord> find_by_pid(std::string_view handle) const;
    [[nodiscard]] bool exists(const NotebookId& id) const;
    [[nodiscard]] std::vector<NotebookRecord> list_notebooks(const std::optional<UserId>& requester,
                                                             const NotebookFilter& filter = {}) const;

    [[nodiscard]] nlohmann::json to_json() const;
    void load_json(const nlohmann::json& j);

private:
    const core::Directory& directory_;
    const Clock& clock_;
    pidreg::PidRegistry& pids_;
    pkgstore::PackageStore& store_;
    mutable std::mutex mutex_;
    std::mutex upload_mutex_;
    std::map<NotebookId, NotebookRecord> notebooks_;
};

} // namespace fairhub::notebooks
