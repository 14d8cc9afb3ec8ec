#include "fairhub/notebooks/registry.hpp"

#include "fairhub/error.hpp"
#include "fairhub/util/text.hpp"

namespace fairhub::notebooks {

void to_json(nlohmann::json& j, const NotebookRecord& n) {
    j = {{"notebook_id", n.notebook_id},
         {"pid", n.pid},
         {"owner_user_id", n.owner_user_id},
         {"group_id", n.group_id ? nlohmann::json(*n.group_id) : nlohmann::json(nullptr)},
         {"title", n.title},
         {"storage_location", n.storage_location},
         {"date_range", nullptr},
         {"scan_package", n.scan_package ? nlohmann::json(*n.scan_package) : nlohmann::json(nullptr)},
         {"acl", n.acl},
         {"created_at", format_iso8601(n.created_at)}};
    if (n.date_range) {
        j["date_range"] = {{"from", format_date(n.date_range->from)},
                           {"to", n.date_range->to ? nlohmann::json(format_date(*n.date_range->to))
                                                   : nlohmann::json(nullptr)}};
    }
}

void from_json(const nlohmann::json& j, NotebookRecord& n) {
    n.notebook_id = NotebookId{j.at("notebook_id").get<std::string>()};
    n.pid = j.at("pid").get<pidreg::PersistentIdentifier>();
    n.owner_user_id = UserId{j.at("owner_user_id").get<std::string>()};
    n.group_id.reset();
    if (j.contains("group_id") && !j["group_id"].is_null()) n.group_id = GroupId{j["group_id"].get<std::string>()};
    n.title = j.value("title", std::string{});
    n.storage_location = j.value("storage_location", std::string{});
    n.date_range.reset();
    if (j.contains("date_range") && j["date_range"].is_object()) {
        const auto& d = j["date_range"];
        const auto from = parse_date(d.value("from", std::string{}));
        if (!from) throw Error(Errc::ValidationError, "bad notebook date range", {{"fields", {"date_range"}}});
        DateRange r{*from, std::nullopt};
        if (d.contains("to") && d["to"].is_string()) r.to = parse_date(d["to"].get<std::string>());
        n.date_range = r;
    }
    n.scan_package.reset();
    if (j.contains("scan_package") && !j["scan_package"].is_null()) {
        n.scan_package = PackageId{j["scan_package"].get<std::string>()};
    }
    n.acl = j.at("acl").get<core::AccessScope>();
    n.created_at = parse_iso8601(j.value("created_at", std::string{})).value_or(Timestamp{});
}

NotebookRegistry::NotebookRegistry(const core::Directory& directory, const Clock& clock, pidreg::PidRegistry& pids,
                                   pkgstore::PackageStore& store)
    : directory_(directory), clock_(clock), pids_(pids), store_(store) {}

NotebookRecord NotebookRegistry::register_notebook(std::string_view prefix, std::string_view suffix,
                                                   std::string_view tan, const UserId& owner,
                                                   const NotebookDraft& draft) {
    if (!directory_.is_project_user(owner)) {
        throw Error(Errc::AccessDenied, "only project users can register notebooks");
    }
    std::vector<std::string> bad;
    if (text::trim(draft.title).empty()) bad.emplace_back("title");
    if (draft.date_range && draft.date_range->to && *draft.date_range->to < draft.date_range->from) {
        bad.emplace_back("date_range");
    }
    if (draft.group_id && !directory_.find_group(*draft.group_id)) bad.emplace_back("group_id");
    auto acl = draft.acl.value_or(core::AccessScope::make_project(owner, draft.group_id));
    if (!acl.owner) acl.owner = owner;
    if (!acl.owning_group) acl.owning_group = draft.group_id;
    if (!acl.valid()) bad.emplace_back("acl");
    if (!bad.empty()) {
        throw Error(Errc::ValidationError, "invalid notebook fields: " + text::join(bad, ", "), {{"fields", bad}});
    }

    const auto pid = pids_.resolve_pid(prefix, suffix);
    if (pid.object_kind != pidreg::ObjectKind::Notebook) {
        throw Error(Errc::ValidationError, "PID " + pid.handle() + " was not issued for notebooks",
                    {{"fields", {"pid"}}});
    }
    if (pid.bound_object) {
        throw Error(Errc::PidAlreadyBound, "PID " + pid.handle() + " is already bound");
    }
    // concurrent registrations of one PID are decided here: only one consume succeeds
    pids_.consume_tan(prefix, suffix, tan, owner);

    NotebookRecord rec;
    rec.notebook_id = make_id<NotebookId>();
    rec.owner_user_id = owner;
    rec.group_id = draft.group_id;
    rec.title = draft.title;
    rec.storage_location = draft.storage_location;
    rec.date_range = draft.date_range;
    rec.acl = acl;
    rec.created_at = clock_.now();
    rec.pid = pids_.bind(prefix, suffix, rec.notebook_id.str());

    std::lock_guard lock(mutex_);
    notebooks_[rec.notebook_id] = rec;
    return rec;
}

pkgstore::StoredFile NotebookRegistry::upload_scan(const NotebookId& id, const std::string& filename,
                                                   std::string bytes, const std::optional<UserId>& requester) {
    std::lock_guard upload(upload_mutex_);
    NotebookRecord rec;
    {
        std::lock_guard lock(mutex_);
        const auto it = notebooks_.find(id);
        if (it == notebooks_.end()) throw Error(Errc::UnknownNotebook, "unknown notebook " + id.str());
        rec = it->second;
    }
    if (!requester || !directory_.can_modify(requester, rec.acl)) {
        throw Error(Errc::AccessDenied, "not allowed to upload scans to notebook " + id.str());
    }
    if (!pkgstore::valid_file_name(filename)) {
        throw Error(Errc::PathViolation, "invalid scan file name '" + filename + "'");
    }
    std::vector<pkgstore::Mutation> put{pkgstore::PutFile{filename, std::move(bytes), {}, {}}};
    pkgstore::PackageSnapshot snap;
    if (!rec.scan_package) {
        const auto pkg = store_.create_package(rec.owner_user_id, rec.acl, put);
        snap = store_.snapshot(pkg);
        std::lock_guard lock(mutex_);
        notebooks_.at(id).scan_package = pkg;
    } else {
        snap = store_.commit_as_system(*rec.scan_package, put);
    }
    return snap.files.at(filename);
}

NotebookRecord NotebookRegistry::get(const NotebookId& id, const std::optional<UserId>& requester) const {
    std::lock_guard lock(mutex_);
    const auto it = notebooks_.find(id);
    if (it == notebooks_.end()) throw Error(Errc::UnknownNotebook, "unknown notebook " + id.str());
    if (!directory_.can_access(requester, it->second.acl)) {
        throw Error(Errc::AccessDenied, "notebook " + id.str() + " is not visible to you");
    }
    return it->second;
}

std::optional<NotebookRecord> NotebookRegistry::find(const NotebookId& id) const {
    std::lock_guard lock(mutex_);
    const auto it = notebooks_.find(id);
    if (it == notebooks_.end()) return std::nullopt;
    return it->second;
}

std::optional<NotebookRecord> NotebookRegistry::find_by_pid(std::string_view handle) const {
    std::lock_guard lock(mutex_);
    for (const auto& [id, n] : notebooks_) {
        if (n.pid.handle() == handle) return n;
    }
    return std::nullopt;
}

bool NotebookRegistry::exists(const NotebookId& id) const {
    std::lock_guard lock(mutex_);
    return notebooks_.contains(id);
}

std::vector<NotebookRecord> NotebookRegistry::list_notebooks(const std::optional<UserId>& requester,
                                                             const NotebookFilter& filter) const {
    std::lock_guard lock(mutex_);
    std::vector<NotebookRecord> out;
    for (const auto& [id, n] : notebooks_) {
        if (!directory_.can_access(requester, n.acl)) continue;
        if (filter.group && n.group_id != filter.group) continue;
        if (filter.owner && n.owner_user_id != *filter.owner) continue;
        if (!filter.text.empty() && !text::icontains(n.title, filter.text) &&
            !text::icontains(n.storage_location, filter.text)) {
            continue;
        }
        out.push_back(n);
    }
    return out;
}

nlohmann::json NotebookRegistry::to_json() const {
    std::lock_guard lock(mutex_);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [id, n] : notebooks_) out.push_back(n);
    return {{"notebooks", out}};
}

void NotebookRegistry::load_json(const nlohmann::json& j) {
    std::lock_guard lock(mutex_);
    notebooks_.clear();
    for (const auto& n : j.value("notebooks", nlohmann::json::array())) {
        auto rec = n.get<NotebookRecord>();
        notebooks_[rec.notebook_id] = rec;
    }
}

} // namespace fairhub::notebooks
