#include "fairhub/catalogues/antibody.hpp"

#include "common.hpp"

#include "fairhub/util/csv.hpp"
#include "fairhub/util/text.hpp"

#include <set>

namespace fairhub::catalogues {

using detail::nonempty;
using detail::opt;
using detail::opt_string;

std::string_view to_string(AntibodyKind k) noexcept {
    return k == AntibodyKind::Primary ? "Primary" : "Secondary";
}

std::string_view to_string(Clonality c) noexcept {
    return c == Clonality::Monoclonal ? "Monoclonal" : "Polyclonal";
}

std::string_view to_string(Application a) noexcept {
    switch (a) {
        case Application::Immunofluorescence: return "Immunofluorescence";
        case Application::WesternBlot: return "WesternBlot";
        case Application::IHC: return "IHC";
        case Application::FACS: return "FACS";
        case Application::ELISA: return "ELISA";
        case Application::Other: return "Other";
    }
    return "?";
}

std::optional<AntibodyKind> parse_antibody_kind(std::string_view s) noexcept {
    if (s == "Primary") return AntibodyKind::Primary;
    if (s == "Secondary") return AntibodyKind::Secondary;
    return std::nullopt;
}

std::optional<Clonality> parse_clonality(std::string_view s) noexcept {
    if (s == "Monoclonal") return Clonality::Monoclonal;
    if (s == "Polyclonal") return Clonality::Polyclonal;
    return std::nullopt;
}

std::optional<Application> parse_application(std::string_view s) noexcept {
    for (const auto a : {Application::Immunofluorescence, Application::WesternBlot, Application::IHC,
                         Application::FACS, Application::ELISA, Application::Other}) {
        if (to_string(a) == s) return a;
    }
    return std::nullopt;
}

std::string antibody_registry_url(const std::string& rrid) {
    return "https://antibodyregistry.org/" + rrid;
}

void to_json(nlohmann::json& j, const Antibody& a) {
    j = {{"antibody_id", a.antibody_id},
         {"kind", to_string(a.kind)},
         {"designation", a.designation},
         {"target", a.target},
         {"host_species", a.host_species},
         {"clonality", to_string(a.clonality)},
         {"manufacturer", {{"name", a.manufacturer.name}, {"catalog_number", a.manufacturer.catalog_number}}},
         {"external_ids",
          {{"antibody_registry_id", opt(a.external_ids.antibody_registry_id)},
           {"antibodypedia_url", opt(a.external_ids.antibodypedia_url)}}},
         {"reactivity_species", opt(a.reactivity_species)},
         {"acl", a.acl},
         {"pid", opt(a.pid)}};
}

void from_json(const nlohmann::json& j, Antibody& a) {
    a.antibody_id = j.at("antibody_id").get<AntibodyId>();
    a.kind = parse_antibody_kind(j.at("kind").get<std::string>()).value_or(AntibodyKind::Primary);
    a.designation = j.at("designation").get<std::string>();
    a.target = j.value("target", std::string{});
    a.host_species = j.value("host_species", std::string{});
    a.clonality = parse_clonality(j.value("clonality", std::string{})).value_or(Clonality::Monoclonal);
    const auto m = j.value("manufacturer", nlohmann::json::object());
    a.manufacturer = {m.value("name", std::string{}), m.value("catalog_number", std::string{})};
    const auto ext = j.value("external_ids", nlohmann::json::object());
    a.external_ids = {opt_string(ext, "antibody_registry_id"), opt_string(ext, "antibodypedia_url")};
    a.reactivity_species = opt_string(j, "reactivity_species");
    a.acl = j.at("acl").get<core::AccessScope>();
    if (j.contains("pid") && !j["pid"].is_null()) a.pid = j["pid"].get<pidreg::PersistentIdentifier>();
}

void to_json(nlohmann::json& j, const ApplicationAssessment& a) {
    j = {{"antibody_id", a.antibody_id},
         {"application", to_string(a.application)},
         {"other_application", a.other_application},
         {"rating", a.rating},
         {"comment", a.comment},
         {"image_package", opt(a.image_package)},
         {"created_at", format_iso8601(a.created_at)}};
}

AntibodyCatalogue::AntibodyCatalogue(const core::Directory& directory, const Clock& clock,
                                     pidreg::PidRegistry* pids)
    : directory_(directory), clock_(clock), pids_(pids) {}

std::vector<std::string> AntibodyCatalogue::validate(const Antibody& a) const {
    std::vector<std::string> bad;
    if (text::trim(a.designation).empty()) bad.emplace_back("designation");
    if (text::trim(a.target).empty()) bad.emplace_back("target");
    if (text::trim(a.manufacturer.name).empty()) bad.emplace_back("manufacturer.name");
    if (a.kind == AntibodyKind::Secondary && text::trim(a.reactivity_species.value_or("")).empty()) {
        bad.emplace_back("reactivity_species");
    }
    if (a.external_ids.antibodypedia_url && !text::is_absolute_url(*a.external_ids.antibodypedia_url)) {
        bad.emplace_back("antibodypedia_url");
    }
    if (!a.acl.valid()) bad.emplace_back("acl");
    return bad;
}

namespace {

std::vector<std::string> rrid_warnings(const Antibody& a) {
    std::vector<std::string> warnings;
    if (const auto& id = a.external_ids.antibody_registry_id) {
        const bool ok = id->size() > 3 && id->rfind("AB_", 0) == 0 && text::all_digits(id->substr(3));
        if (!ok) warnings.push_back("antibody_registry_id \"" + *id + "\" does not look like AB_<digits>");
    }
    return warnings;
}

void throw_invalid(const std::vector<std::string>& bad) {
    throw Error(Errc::ValidationError, "invalid antibody fields: " + text::join(bad, ", "), {{"fields", bad}});
}

} // namespace

AntibodyRegistration AntibodyCatalogue::register_antibody(Antibody data, const UserId& requester) {
    if (!directory_.is_project_user(requester)) {
        throw Error(Errc::AccessDenied, "only project users can register antibodies");
    }
    if (!data.acl.owner && data.acl.scope != core::Scope::Group) data.acl.owner = requester;
    if (data.kind == AntibodyKind::Primary) data.reactivity_species.reset();
    if (const auto bad = validate(data); !bad.empty()) throw_invalid(bad);
    data.antibody_id = make_id<AntibodyId>();
    data.pid = detail::mint_if_configured(pids_, pidreg::ObjectKind::Antibody, data.antibody_id.str());
    std::lock_guard lock(mutex_);
    antibodies_[data.antibody_id] = data;
    return {data, rrid_warnings(data)};
}

Antibody AntibodyCatalogue::update_antibody(const Antibody& data, const std::optional<UserId>& requester) {
    if (const auto bad = validate(data); !bad.empty()) throw_invalid(bad);
    std::lock_guard lock(mutex_);
    const auto it = antibodies_.find(data.antibody_id);
    if (it == antibodies_.end()) {
        throw Error(Errc::UnknownAntibody, "unknown antibody " + data.antibody_id.str());
    }
    if (!directory_.can_modify(requester, it->second.acl)) {
        throw Error(Errc::AccessDenied, "not allowed to edit antibody " + data.antibody_id.str());
    }
    Antibody next = data;
    next.pid = it->second.pid;
    it->second = next;
    return next;
}

ApplicationAssessment AntibodyCatalogue::record_assessment(const AntibodyId& id, Application application,
                                                           int rating, std::string comment,
                                                           std::optional<PackageId> image_package,
                                                           std::string other_application) {
    if (rating < 1 || rating > 5) {
        throw Error(Errc::RatingOutOfRange, "rating must be between 1 and 5", {{"rating", rating}});
    }
    if (application == Application::Other && text::trim(other_application).empty()) {
        throw Error(Errc::ValidationError, "application Other needs a description",
                    {{"fields", {"other_application"}}});
    }
    if (application != Application::Other) other_application.clear();
    std::lock_guard lock(mutex_);
    if (!antibodies_.contains(id)) {
        throw Error(Errc::UnknownAntibody, "unknown antibody " + id.str());
    }
    ApplicationAssessment a{id, application, std::move(other_application), rating, std::move(comment),
                            std::move(image_package), clock_.now()};
    assessments_.push_back(a);
    return a;
}

std::vector<ApplicationAssessment> AntibodyCatalogue::assessments(const AntibodyId& id) const {
    std::lock_guard lock(mutex_);
    std::vector<ApplicationAssessment> out;
    for (const auto& a : assessments_) {
        if (a.antibody_id == id) out.push_back(a);
    }
    return out;
}

std::vector<RatingSummary> AntibodyCatalogue::rating_summary(const AntibodyId& id) const {
    std::map<std::pair<Application, std::string>, std::pair<std::size_t, long>> acc;
    for (const auto& a : assessments(id)) {
        auto& [n, sum] = acc[{a.application, a.other_application}];
        ++n;
        sum += a.rating;
    }
    std::vector<RatingSummary> out;
    for (const auto& [key, v] : acc) {
        out.push_back({key.first, key.second, v.first, static_cast<double>(v.second) / static_cast<double>(v.first)});
    }
    return out;
}

Antibody AntibodyCatalogue::get(const AntibodyId& id, const std::optional<UserId>& requester) const {
    std::lock_guard lock(mutex_);
    const auto it = antibodies_.find(id);
    if (it == antibodies_.end()) {
        throw Error(Errc::UnknownAntibody, "unknown antibody " + id.str());
    }
    if (!directory_.can_access(requester, it->second.acl)) {
        throw Error(Errc::AccessDenied, "antibody " + id.str() + " is not visible to you");
    }
    return it->second;
}

std::optional<Antibody> AntibodyCatalogue::find(const AntibodyId& id) const {
    std::lock_guard lock(mutex_);
    const auto it = antibodies_.find(id);
    if (it == antibodies_.end()) return std::nullopt;
    return it->second;
}

bool AntibodyCatalogue::exists(const AntibodyId& id) const {
    std::lock_guard lock(mutex_);
    return antibodies_.contains(id);
}

std::vector<Antibody> AntibodyCatalogue::list(const std::optional<UserId>& requester, const std::string& q) const {
    std::lock_guard lock(mutex_);
    std::vector<Antibody> out;
    for (const auto& [id, a] : antibodies_) {
        if (!directory_.can_access(requester, a.acl)) continue;
        if (!q.empty() && !text::icontains(a.designation, q) && !text::icontains(a.target, q) &&
            !text::icontains(a.manufacturer.name, q)) {
            continue;
        }
        out.push_back(a);
    }
    return out;
}

std::string AntibodyCatalogue::export_csv(const std::optional<UserId>& requester) const {
    std::vector<csv::Row> rows{text::split(kAntibodyCsvHeader, ",")};
    for (const auto& a : list(requester)) {
        rows.push_back({a.antibody_id.str(), std::string(to_string(a.kind)), a.designation, a.target, a.host_species,
                        std::string(to_string(a.clonality)), a.manufacturer.name, a.manufacturer.catalog_number,
                        a.external_ids.antibody_registry_id.value_or(""),
                        a.external_ids.antibodypedia_url.value_or("")});
    }
    return csv::format(rows);
}

std::vector<Antibody> AntibodyCatalogue::import_csv(std::string_view payload, const UserId& requester) {
    if (!directory_.is_project_user(requester)) {
        throw Error(Errc::AccessDenied, "only project users can import antibodies");
    }
    const auto rows = csv::parse(payload);
    if (rows.empty() || text::join(rows.front(), ",") != kAntibodyCsvHeader) {
        throw Error(Errc::HeaderMismatch, "expected header " + std::string(kAntibodyCsvHeader));
    }
    std::vector<Antibody> prepared;
    nlohmann::json errors = nlohmann::json::array();
    std::set<AntibodyId> seen;
    {
        std::lock_guard lock(mutex_);
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto& row = rows[r];
            const std::size_t line = r + 1;
            if (row.size() == 1 && row[0].empty()) continue;
            if (row.size() != 10) {
                errors.push_back({{"row", line}, {"fields", {"*"}}, {"message", "expected 10 fields"}});
                continue;
            }
            Antibody a;
            const auto existing = row[0].empty() ? antibodies_.end() : antibodies_.find(AntibodyId{row[0]});
            if (existing != antibodies_.end()) {
                a = existing->second;
                if (!directory_.can_modify(requester, a.acl)) {
                    errors.push_back({{"row", line}, {"fields", {"antibody_id"}}, {"message", "not allowed to edit"}});
                    continue;
                }
            } else {
                a.antibody_id = row[0].empty() ? make_id<AntibodyId>() : AntibodyId{row[0]};
                a.acl = core::AccessScope::make_project(requester);
            }
            if (!seen.insert(a.antibody_id).second) {
                errors.push_back({{"row", line}, {"fields", {"antibody_id"}}, {"message", "duplicate id in file"}});
                continue;
            }
            std::vector<std::string> bad;
            if (const auto k = parse_antibody_kind(row[1])) a.kind = *k; else bad.emplace_back("kind");
            a.designation = row[2];
            a.target = row[3];
            a.host_species = row[4];
            if (const auto c = parse_clonality(row[5])) a.clonality = *c; else bad.emplace_back("clonality");
            a.manufacturer = {row[6], row[7]};
            a.external_ids = {nonempty(row[8]), nonempty(row[9])};
            if (a.kind == AntibodyKind::Primary) a.reactivity_species.reset();
            for (auto& f : validate(a)) bad.push_back(std::move(f));
            if (!bad.empty()) {
                errors.push_back({{"row", line}, {"fields", bad}, {"message", "invalid fields"}});
                continue;
            }
            prepared.push_back(std::move(a));
        }
    }
    if (!errors.empty()) {
        std::string rows_text;
        for (const auto& e : errors) rows_text += (rows_text.empty() ? "" : ", ") + std::to_string(e["row"].get<int>());
        throw Error(Errc::RowValidationError, "invalid rows: " + rows_text, {{"rows", errors}});
    }
    for (auto& a : prepared) {
        if (!a.pid && !exists(a.antibody_id)) {
            a.pid = detail::mint_if_configured(pids_, pidreg::ObjectKind::Antibody, a.antibody_id.str());
        }
    }
    std::lock_guard lock(mutex_);
    for (const auto& a : prepared) antibodies_[a.antibody_id] = a;
    return prepared;
}

nlohmann::json AntibodyCatalogue::to_json() const {
    std::lock_guard lock(mutex_);
    nlohmann::json abs = nlohmann::json::array();
    for (const auto& [id, a] : antibodies_) abs.push_back(a);
    nlohmann::json ass = nlohmann::json::array();
    for (const auto& a : assessments_) ass.push_back(a);
    return {{"antibodies", abs}, {"assessments", ass}};
}

void AntibodyCatalogue::load_json(const nlohmann::json& j) {
    std::lock_guard lock(mutex_);
    antibodies_.clear();
    assessments_.clear();
    for (const auto& a : j.value("antibodies", nlohmann::json::array())) {
        auto ab = a.get<Antibody>();
        antibodies_[ab.antibody_id] = ab;
    }
    for (const auto& a : j.value("assessments", nlohmann::json::array())) {
        ApplicationAssessment x;
        x.antibody_id = a.at("antibody_id").get<AntibodyId>();
        x.application = parse_application(a.at("application").get<std::string>()).value_or(Application::Other);
        x.other_application = a.value("other_application", std::string{});
        x.rating = a.at("rating").get<int>();
        x.comment = a.value("comment", std::string{});
        if (a.contains("image_package") && !a["image_package"].is_null()) {
            x.image_package = a["image_package"].get<PackageId>();
        }
        x.created_at = parse_iso8601(a.at("created_at").get<std::string>()).value_or(Timestamp{});
        assessments_.push_back(std::move(x));
    }
}

} // namespace fairhub::catalogues
