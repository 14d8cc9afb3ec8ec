#include "fairhub/catalogues/cell_line.hpp"

#include "common.hpp"

#include "fairhub/util/csv.hpp"
#include "fairhub/util/text.hpp"

#include <cstdio>
#include <set>

namespace fairhub::catalogues {

using detail::nonempty;
using detail::opt;
using detail::opt_string;

std::string_view to_string(CellKind k) noexcept {
    return k == CellKind::PatientDerived ? "PatientDerived" : "GeneticallyModified";
}

std::optional<CellKind> parse_cell_kind(std::string_view s) noexcept {
    if (s == "PatientDerived") return CellKind::PatientDerived;
    if (s == "GeneticallyModified") return CellKind::GeneticallyModified;
    return std::nullopt;
}

void to_json(nlohmann::json& j, const CellLine& c) {
    j = {{"cell_id", c.cell_id},
         {"kind", to_string(c.kind)},
         {"standardized_name", opt(c.standardized_name)},
         {"culture", {{"medium", c.culture.medium}, {"passage_notes", c.culture.passage_notes}}},
         {"donor",
          {{"pseudonym", c.donor.pseudonym},
           {"sex", c.donor.sex ? nlohmann::json(to_string(*c.donor.sex)) : nlohmann::json(nullptr)},
           {"age_at_sampling", opt(c.donor.age_at_sampling)}}},
         {"diagnosis", c.diagnosis},
         {"ethics", {{"approval_reference", c.ethics.approval_reference}, {"consent_status", c.ethics.consent_status}}},
         {"verification",
          {{"karyotype_ok", opt(c.verification.karyotype_ok)},
           {"pluripotency_assay", opt(c.verification.pluripotency_assay)}}},
         {"parent_cell_id", opt(c.parent_cell_id)},
         {"acl", c.acl},
         {"pid", opt(c.pid)}};
}

void from_json(const nlohmann::json& j, CellLine& c) {
    c.cell_id = CellLineId{j.value("cell_id", std::string{})};
    const auto kind = parse_cell_kind(j.value("kind", std::string("PatientDerived")));
    if (!kind) throw Error(Errc::ValidationError, "unknown cell line kind", {{"fields", {"kind"}}});
    c.kind = *kind;
    c.standardized_name = opt_string(j, "standardized_name");
    const auto culture = j.value("culture", nlohmann::json::object());
    c.culture = {culture.value("medium", std::string{}), culture.value("passage_notes", std::string{})};
    const auto donor = j.value("donor", nlohmann::json::object());
    c.donor.pseudonym = donor.value("pseudonym", std::string{});
    if (const auto s = opt_string(donor, "sex")) c.donor.sex = parse_sex(*s);
    if (donor.contains("age_at_sampling") && !donor["age_at_sampling"].is_null()) {
        c.donor.age_at_sampling = donor["age_at_sampling"].get<int>();
    }
    c.diagnosis = j.value("diagnosis", std::string{});
    const auto ethics = j.value("ethics", nlohmann::json::object());
    c.ethics = {ethics.value("approval_reference", std::string{}), ethics.value("consent_status", std::string{})};
    const auto ver = j.value("verification", nlohmann::json::object());
    if (ver.contains("karyotype_ok") && !ver["karyotype_ok"].is_null()) {
        c.verification.karyotype_ok = ver["karyotype_ok"].get<bool>();
    }
    c.verification.pluripotency_assay = opt_string(ver, "pluripotency_assay");
    if (const auto p = opt_string(j, "parent_cell_id")) c.parent_cell_id = CellLineId{*p};
    if (j.contains("acl")) c.acl = j["acl"].get<core::AccessScope>();
    if (j.contains("pid") && !j["pid"].is_null()) c.pid = j["pid"].get<pidreg::PersistentIdentifier>();
}

std::string NamingClient::request_name(const std::string& institution, const std::optional<std::string>& parent) {
    if (!transport_) {
        throw Error(Errc::NamingServiceUnavailable, "no naming service configured");
    }
    nlohmann::json body{{"institution", institution}};
    if (parent) body["parent"] = *parent;
    http::Request req;
    req.method = "POST";
    req.target = "/api/namings";
    req.headers["Content-Type"] = "application/json";
    req.body = body.dump();
    http::Response resp;
    try {
        resp = transport_->send(req);
    } catch (const Error& e) {
        throw Error(Errc::NamingServiceUnavailable, std::string("naming service unreachable: ") + e.what());
    }
    if (resp.status != 200 && resp.status != 201) {
        throw Error(Errc::NamingServiceUnavailable, "naming service answered HTTP " + std::to_string(resp.status));
    }
    const auto j = nlohmann::json::parse(resp.body, nullptr, false);
    if (j.is_discarded() || !j.contains("name") || !j["name"].is_string()) {
        throw Error(Errc::NamingServiceUnavailable, "naming service returned no name");
    }
    return j["name"].get<std::string>();
}

http::Response NamingServiceMock::handle(const http::Request& request) {
    if (request.path() != "/api/namings") {
        return http::Response::json(404, {{"error", "not found"}});
    }
    if (request.method != "POST") {
        return http::Response::json(405, {{"error", "method not allowed"}});
    }
    const auto body = nlohmann::json::parse(request.body, nullptr, false);
    if (body.is_discarded() || !body.contains("institution") || !body["institution"].is_string()) {
        return http::Response::json(400, {{"error", "institution required"}});
    }
    const auto code = body["institution"].get<std::string>();
    const bool code_ok = code.size() >= 2 && code.size() <= 6 &&
                         std::all_of(code.begin(), code.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
    if (!code_ok) {
        return http::Response::json(400, {{"error", "institution code must be 2-6 uppercase letters"}});
    }
    std::lock_guard lock(mutex_);
    if (body.contains("parent") && body["parent"].is_string()) {
        const auto parent = body["parent"].get<std::string>();
        const int n = ++derivatives_per_parent_[parent];
        return http::Response::json(201, {{"name", parent + "-" + std::to_string(n)}});
    }
    const int n = ++lines_per_institution_[code];
    if (n > 999) {
        return http::Response::json(409, {{"error", "running numbers exhausted"}});
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03d", n);
    return http::Response::json(201, {{"name", code + "i" + buf + "-A"}});
}

http::Handler NamingServiceMock::handler() {
    return [this](const http::Request& r) { return handle(r); };
}

CellLineCatalogue::CellLineCatalogue(const core::Directory& directory, pidreg::PidRegistry* pids,
                                     std::shared_ptr<NamingClient> naming, std::string institution_code)
    : directory_(directory), pids_(pids), naming_(std::move(naming)), institution_(std::move(institution_code)) {}

std::vector<std::string> CellLineCatalogue::validate_locked(const CellLine& c,
                                                            const std::map<CellLineId, CellLine>* pending) const {
    std::vector<std::string> bad;
    if (text::trim(c.donor.pseudonym).empty()) bad.emplace_back("donor.pseudonym");
    if (c.kind == CellKind::GeneticallyModified) {
        const bool known = c.parent_cell_id && (lines_.contains(*c.parent_cell_id) ||
                                                (pending && pending->contains(*c.parent_cell_id)));
        if (!known || (c.parent_cell_id && *c.parent_cell_id == c.cell_id)) bad.emplace_back("parent_cell_id");
    } else if (c.parent_cell_id) {
        bad.emplace_back("parent_cell_id");
    }
    if (c.donor.age_at_sampling && *c.donor.age_at_sampling < 0) bad.emplace_back("donor.age_at_sampling");
    if (!c.acl.valid()) bad.emplace_back("acl");
    return bad;
}

namespace {

void throw_invalid(const std::vector<std::string>& bad) {
    throw Error(Errc::ValidationError, "invalid cell line fields: " + text::join(bad, ", "), {{"fields", bad}});
}

} // namespace

CellLine CellLineCatalogue::register_cell_line(CellLine data, bool request_standard_name, const UserId& requester) {
    if (!directory_.is_project_user(requester)) {
        throw Error(Errc::AccessDenied, "only project users can register cell lines");
    }
    if (!data.acl.owner && data.acl.scope != core::Scope::Group) data.acl.owner = requester;
    data.cell_id = make_id<CellLineId>();
    data.standardized_name.reset();
    {
        std::lock_guard lock(mutex_);
        if (const auto bad = validate_locked(data); !bad.empty()) throw_invalid(bad);
    }
    data.pid = detail::mint_if_configured(pids_, pidreg::ObjectKind::CellLine, data.cell_id.str());
    {
        std::lock_guard lock(mutex_);
        lines_[data.cell_id] = data;
    }
    if (!request_standard_name) return data;
    return assign_name(data.cell_id);
}

CellLine CellLineCatalogue::assign_name(const CellLineId& id) {
    std::optional<std::string> parent_name;
    {
        std::lock_guard lock(mutex_);
        const auto& c = lines_.at(id);
        if (c.standardized_name) return c;
        if (c.kind == CellKind::GeneticallyModified) {
            parent_name = lines_.at(*c.parent_cell_id).standardized_name;
            if (!parent_name) {
                throw Error(Errc::ValidationError, "the parent line has no standardized name yet",
                            {{"fields", {"parent_cell_id"}}, {"cell_id", id.str()}});
            }
        }
    }
    std::string name;
    try {
        if (!naming_) throw Error(Errc::NamingServiceUnavailable, "no naming service configured");
        name = naming_->request_name(institution_, parent_name);
    } catch (const Error& e) {
        throw Error(Errc::NamingServiceUnavailable, e.what(), {{"cell_id", id.str()}});
    }
    std::lock_guard lock(mutex_);
    auto& c = lines_.at(id);
    c.standardized_name = name;
    return c;
}

CellLine CellLineCatalogue::request_standard_name(const CellLineId& id, const std::optional<UserId>& requester) {
    {
        std::lock_guard lock(mutex_);
        const auto it = lines_.find(id);
        if (it == lines_.end()) throw Error(Errc::UnknownCellLine, "unknown cell line " + id.str());
        if (!directory_.can_modify(requester, it->second.acl)) {
            throw Error(Errc::AccessDenied, "not allowed to edit cell line " + id.str());
        }
    }
    return assign_name(id);
}

CellLine CellLineCatalogue::update_cell_line(const CellLine& data, const std::optional<UserId>& requester) {
    std::lock_guard lock(mutex_);
    const auto it = lines_.find(data.cell_id);
    if (it == lines_.end()) throw Error(Errc::UnknownCellLine, "unknown cell line " + data.cell_id.str());
    if (!directory_.can_modify(requester, it->second.acl)) {
        throw Error(Errc::AccessDenied, "not allowed to edit cell line " + data.cell_id.str());
    }
    if (const auto bad = validate_locked(data); !bad.empty()) throw_invalid(bad);
    CellLine next = data;
    next.pid = it->second.pid;
    next.standardized_name = it->second.standardized_name;
    it->second = next;
    return next;
}

CellLine CellLineCatalogue::get(const CellLineId& id, const std::optional<UserId>& requester) const {
    std::lock_guard lock(mutex_);
    const auto it = lines_.find(id);
    if (it == lines_.end()) throw Error(Errc::UnknownCellLine, "unknown cell line " + id.str());
    if (!directory_.can_access(requester, it->second.acl)) {
        throw Error(Errc::AccessDenied, "cell line " + id.str() + " is not visible to you");
    }
    return it->second;
}

std::optional<CellLine> CellLineCatalogue::find(const CellLineId& id) const {
    std::lock_guard lock(mutex_);
    const auto it = lines_.find(id);
    if (it == lines_.end()) return std::nullopt;
    return it->second;
}

bool CellLineCatalogue::exists(const CellLineId& id) const {
    std::lock_guard lock(mutex_);
    return lines_.contains(id);
}

std::vector<CellLine> CellLineCatalogue::list(const std::optional<UserId>& requester, const std::string& q) const {
    std::lock_guard lock(mutex_);
    std::vector<CellLine> out;
    for (const auto& [id, c] : lines_) {
        if (!directory_.can_access(requester, c.acl)) continue;
        if (!q.empty() && !text::icontains(c.standardized_name.value_or(""), q) && !text::icontains(c.diagnosis, q)) {
            continue;
        }
        out.push_back(c);
    }
    return out;
}

std::string CellLineCatalogue::export_csv(const std::optional<UserId>& requester) const {
    std::vector<csv::Row> rows{text::split(kCellLineCsvHeader, ",")};
    for (const auto& c : list(requester)) {
        rows.push_back({c.cell_id.str(), std::string(to_string(c.kind)), c.standardized_name.value_or(""),
                        c.diagnosis, c.donor.pseudonym, c.ethics.approval_reference,
                        c.parent_cell_id ? c.parent_cell_id->str() : ""});
    }
    return csv::format(rows);
}

std::vector<CellLine> CellLineCatalogue::import_csv(std::string_view payload, const UserId& requester) {
    if (!directory_.is_project_user(requester)) {
        throw Error(Errc::AccessDenied, "only project users can import cell lines");
    }
    const auto rows = csv::parse(payload);
    if (rows.empty() || text::join(rows.front(), ",") != kCellLineCsvHeader) {
        throw Error(Errc::HeaderMismatch, "expected header " + std::string(kCellLineCsvHeader));
    }
    std::lock_guard lock(mutex_);
    std::map<CellLineId, CellLine> pending;
    std::vector<std::pair<std::size_t, CellLineId>> order;
    nlohmann::json errors = nlohmann::json::array();
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::size_t line = r + 1;
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != 7) {
            errors.push_back({{"row", line}, {"fields", {"*"}}, {"message", "expected 7 fields"}});
            continue;
        }
        CellLine c;
        const auto existing = row[0].empty() ? lines_.end() : lines_.find(CellLineId{row[0]});
        if (existing != lines_.end()) {
            c = existing->second;
            if (!directory_.can_modify(requester, c.acl)) {
                errors.push_back({{"row", line}, {"fields", {"cell_id"}}, {"message", "not allowed to edit"}});
                continue;
            }
        } else {
            c.cell_id = row[0].empty() ? make_id<CellLineId>() : CellLineId{row[0]};
            c.acl = core::AccessScope::make_project(requester);
        }
        if (pending.contains(c.cell_id)) {
            errors.push_back({{"row", line}, {"fields", {"cell_id"}}, {"message", "duplicate id in file"}});
            continue;
        }
        const auto kind = parse_cell_kind(row[1]);
        if (!kind) {
            errors.push_back({{"row", line}, {"fields", {"kind"}}, {"message", "unknown kind"}});
            continue;
        }
        c.kind = *kind;
        c.standardized_name = nonempty(row[2]);
        c.diagnosis = row[3];
        c.donor.pseudonym = row[4];
        c.ethics.approval_reference = row[5];
        c.parent_cell_id = row[6].empty() ? std::nullopt : std::optional<CellLineId>(CellLineId{row[6]});
        pending[c.cell_id] = c;
        order.emplace_back(line, c.cell_id);
    }
    // parents may appear later in the same file, so validate after reading all rows
    for (const auto& [line, id] : order) {
        if (const auto bad = validate_locked(pending.at(id), &pending); !bad.empty()) {
            errors.push_back({{"row", line}, {"fields", bad}, {"message", "invalid fields"}});
        }
    }
    if (!errors.empty()) {
        std::sort(errors.begin(), errors.end(),
                  [](const nlohmann::json& a, const nlohmann::json& b) { return a["row"] < b["row"]; });
        std::string rows_text;
        for (const auto& e : errors) rows_text += (rows_text.empty() ? "" : ", ") + std::to_string(e["row"].get<int>());
        throw Error(Errc::RowValidationError, "invalid rows: " + rows_text, {{"rows", errors}});
    }
    std::vector<CellLine> out;
    for (const auto& [line, id] : order) {
        auto& c = pending.at(id);
        if (!lines_.contains(id) && !c.pid) {
            c.pid = detail::mint_if_configured(pids_, pidreg::ObjectKind::CellLine, id.str());
        }
        out.push_back(c);
    }
    for (const auto& c : out) lines_[c.cell_id] = c;
    return out;
}

nlohmann::json CellLineCatalogue::to_json() const {
    std::lock_guard lock(mutex_);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [id, c] : lines_) out.push_back(c);
    return {{"cell_lines", out}};
}

void CellLineCatalogue::load_json(const nlohmann::json& j) {
    std::lock_guard lock(mutex_);
    lines_.clear();
    for (const auto& c : j.value("cell_lines", nlohmann::json::array())) {
        auto line = c.get<CellLine>();
        lines_[line.cell_id] = line;
    }
}

} // namespace fairhub::catalogues
