#include "fairhub/workflows/cases.hpp"

#include "fairhub/error.hpp"
#include "fairhub/util/csv.hpp"
#include "fairhub/util/text.hpp"

#include <array>
#include <set>

namespace fairhub::workflows {
namespace {

constexpr std::array<std::string_view, 2> kKindNames{"ALMN", "Echo"};
constexpr std::array<std::string_view, 14> kStateNames{
    "Requested",   "InConsultation", "LabelsIssued", "AwaitingData", "DataStored",
    "Closed",      "UnderReview",    "InfoRequested", "Accepted",    "Rejected",
    "InProgress",  "Finished",       "UnderEvaluation", "Evaluated"};
constexpr std::array<std::string_view, 15> kActionNames{
    "BeginConsultation", "IssueLabels", "SubmitSamples", "StoreData", "Close",
    "Feedback",          "StartReview", "Accept",        "RequestInfo", "ProvideInfo",
    "Reject",            "Start",       "Finish",        "AssignEvaluator", "CompleteEvaluation"};

template <class E, std::size_t N>
std::optional<E> parse_enum(const std::array<std::string_view, N>& names, std::string_view s) {
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == s) return static_cast<E>(i);
    }
    return std::nullopt;
}

using S = CaseState;
using A = Action;
constexpr Actor kStaff = Actor::Staff;
constexpr Actor kRequester = Actor::Requester;

const std::vector<Edge> kAlmnEdges{
    {S::Requested, A::BeginConsultation, S::InConsultation, {kStaff}},
    {S::InConsultation, A::IssueLabels, S::LabelsIssued, {kStaff}, true},
    {S::LabelsIssued, A::SubmitSamples, S::AwaitingData, {kRequester}},
    {S::AwaitingData, A::StoreData, S::DataStored, {kStaff, kRequester}, true},
    {S::DataStored, A::Close, S::Closed, {kStaff}},
    {S::Closed, A::Feedback, S::Closed, {kRequester}},
};

const std::vector<Edge> kEchoEdges{
    {S::Requested, A::StartReview, S::UnderReview, {kStaff}},
    {S::UnderReview, A::Accept, S::Accepted, {kStaff}},
    {S::UnderReview, A::RequestInfo, S::InfoRequested, {kStaff}},
    {S::InfoRequested, A::ProvideInfo, S::UnderReview, {kRequester}},
    {S::UnderReview, A::Reject, S::Rejected, {kStaff}},
    {S::Accepted, A::Start, S::InProgress, {kStaff}},
    {S::InProgress, A::Finish, S::Finished, {kStaff}},
    {S::Finished, A::AssignEvaluator, S::UnderEvaluation, {kStaff}, true},
    {S::UnderEvaluation, A::CompleteEvaluation, S::Evaluated, {Actor::Evaluator}},
};

nlohmann::json payload_to_json(const CasePayload& p) {
    if (const auto* a = std::get_if<AlmnPayload>(&p)) {
        nlohmann::json stainings = nlohmann::json::array();
        for (const auto& s : a->stainings) {
            stainings.push_back({{"antibody_id", s.antibody_id}, {"dilution", s.dilution}, {"abbreviation", s.abbreviation}});
        }
        nlohmann::json samples = nlohmann::json::array();
        for (const auto& s : a->samples) {
            samples.push_back({{"sample_id", s.sample_id}, {"species", s.species}, {"description", s.description}});
        }
        nlohmann::json labels = nlohmann::json::array();
        for (const auto& l : a->labels) labels.push_back(l);
        return {{"research_question", a->research_question},
                {"planned_procedures", a->planned_procedures},
                {"stainings", stainings},
                {"samples", samples},
                {"labels", labels}};
    }
    const auto& e = std::get<EchoPayload>(p);
    nlohmann::json timeline = nlohmann::json::array();
    for (const auto& t : e.timeline) timeline.push_back({{"day_offset", t.day_offset}, {"measurement", t.measurement}});
    nlohmann::json mice = nlohmann::json::array();
    for (const auto& m : e.mice) mice.push_back(m.str());
    return {{"mice", mice},
            {"surgery_type", e.surgery_type},
            {"timeline", timeline},
            {"evaluator", e.evaluator ? nlohmann::json(*e.evaluator) : nlohmann::json(nullptr)},
            {"feedback", e.feedback ? nlohmann::json(*e.feedback) : nlohmann::json(nullptr)}};
}

CasePayload payload_from_json(CaseKind kind, const nlohmann::json& j) {
    if (kind == CaseKind::ALMN) {
        AlmnPayload a;
        a.research_question = j.value("research_question", std::string{});
        a.planned_procedures = j.value("planned_procedures", std::string{});
        for (const auto& s : j.value("stainings", nlohmann::json::array())) {
            a.stainings.push_back({AntibodyId{s.value("antibody_id", std::string{})}, s.value("dilution", std::string{}),
                                   s.value("abbreviation", std::string{})});
        }
        for (const auto& s : j.value("samples", nlohmann::json::array())) {
            a.samples.push_back({s.value("sample_id", std::string{}), s.value("species", std::string{}),
                                 s.value("description", std::string{})});
        }
        for (const auto& l : j.value("labels", nlohmann::json::array())) {
            a.labels.push_back({l.at("sample_id").get<std::string>(), l.at("species").get<std::string>(),
                                l.at("staining_abbreviation").get<std::string>(),
                                l.at("pid").get<pidreg::PersistentIdentifier>()});
        }
        return a;
    }
    EchoPayload e;
    for (const auto& m : j.value("mice", nlohmann::json::array())) e.mice.emplace_back(m.get<std::string>());
    e.surgery_type = j.value("surgery_type", std::string{});
    for (const auto& t : j.value("timeline", nlohmann::json::array())) {
        e.timeline.push_back({t.value("day_offset", 0), t.value("measurement", std::string{})});
    }
    if (j.contains("evaluator") && j["evaluator"].is_string()) e.evaluator = UserId{j["evaluator"].get<std::string>()};
    if (j.contains("feedback") && j["feedback"].is_string()) e.feedback = j["feedback"].get<std::string>();
    return e;
}

} // namespace

std::string_view to_string(CaseKind k) noexcept { return kKindNames[static_cast<std::size_t>(k)]; }
std::string_view to_string(CaseState s) noexcept { return kStateNames[static_cast<std::size_t>(s)]; }
std::string_view to_string(Action a) noexcept { return kActionNames[static_cast<std::size_t>(a)]; }

std::optional<CaseKind> parse_case_kind(std::string_view s) noexcept { return parse_enum<CaseKind>(kKindNames, s); }
std::optional<CaseState> parse_case_state(std::string_view s) noexcept {
    return parse_enum<CaseState>(kStateNames, s);
}
std::optional<Action> parse_action(std::string_view s) noexcept { return parse_enum<Action>(kActionNames, s); }

const std::vector<Edge>& edges(CaseKind kind) {
    return kind == CaseKind::ALMN ? kAlmnEdges : kEchoEdges;
}

void to_json(nlohmann::json& j, const LabelRecord& l) {
    j = {{"sample_id", l.sample_id},
         {"species", l.species},
         {"staining_abbreviation", l.staining_abbreviation},
         {"pid", l.pid}};
}

void to_json(nlohmann::json& j, const WorkflowCase& c) {
    nlohmann::json trail = nlohmann::json::array();
    for (const auto& e : c.audit_trail) {
        trail.push_back({{"timestamp", format_iso8601(e.timestamp)},
                         {"timestamp_us", to_micros(e.timestamp)},
                         {"actor", e.actor},
                         {"from_state", e.from_state ? nlohmann::json(to_string(*e.from_state)) : nlohmann::json(nullptr)},
                         {"to_state", to_string(e.to_state)},
                         {"action", e.action ? nlohmann::json(to_string(*e.action)) : nlohmann::json(nullptr)},
                         {"note", e.note}});
    }
    nlohmann::json packages = nlohmann::json::array();
    for (const auto& p : c.dataset_packages) packages.push_back(p.str());
    j = {{"case_id", c.case_id},
         {"kind", to_string(c.kind)},
         {"requester", c.requester},
         {"group_id", c.group_id ? nlohmann::json(*c.group_id) : nlohmann::json(nullptr)},
         {"state", to_string(c.state)},
         {"audit_trail", trail},
         {"payload", payload_to_json(c.payload)},
         {"dataset_packages", packages},
         {"dataset_pids", c.dataset_pids},
         {"acl", c.acl}};
}

void from_json(const nlohmann::json& j, WorkflowCase& c) {
    const auto kind = parse_case_kind(j.at("kind").get<std::string>());
    const auto state = parse_case_state(j.at("state").get<std::string>());
    if (!kind || !state) throw Error(Errc::ValidationError, "unknown case kind or state");
    c.case_id = CaseId{j.at("case_id").get<std::string>()};
    c.kind = *kind;
    c.state = *state;
    c.requester = UserId{j.at("requester").get<std::string>()};
    c.group_id.reset();
    if (j.contains("group_id") && j["group_id"].is_string()) c.group_id = GroupId{j["group_id"].get<std::string>()};
    c.audit_trail.clear();
    for (const auto& e : j.value("audit_trail", nlohmann::json::array())) {
        AuditEntry a;
        a.timestamp = from_micros(e.at("timestamp_us").get<std::int64_t>());
        a.actor = UserId{e.at("actor").get<std::string>()};
        if (e["from_state"].is_string()) a.from_state = parse_case_state(e["from_state"].get<std::string>());
        a.to_state = parse_case_state(e.at("to_state").get<std::string>()).value_or(CaseState::Requested);
        if (e["action"].is_string()) a.action = parse_action(e["action"].get<std::string>());
        a.note = e.value("note", std::string{});
        c.audit_trail.push_back(a);
    }
    c.payload = payload_from_json(c.kind, j.at("payload"));
    c.dataset_packages.clear();
    for (const auto& p : j.value("dataset_packages", nlohmann::json::array())) {
        c.dataset_packages.emplace_back(p.get<std::string>());
    }
    c.dataset_pids = j.value("dataset_pids", std::vector<pidreg::PersistentIdentifier>{});
    c.acl = j.at("acl").get<core::AccessScope>();
}

CaseRegistry::CaseRegistry(const core::Directory& directory, const Clock& clock, pidreg::PidRegistry& pids,
                           pkgstore::PackageStore& store, const catalogues::AntibodyCatalogue* antibodies,
                           const catalogues::MouseLineCatalogue* mice, ZipLimits zip_limits)
    : directory_(directory),
      clock_(clock),
      pids_(pids),
      store_(store),
      antibodies_(antibodies),
      mice_(mice),
      zip_limits_(zip_limits) {}

std::shared_ptr<std::mutex> CaseRegistry::case_lock(const CaseId& id) const {
    std::lock_guard lock(mutex_);
    if (!cases_.contains(id)) throw Error(Errc::UnknownCase, "unknown case " + id.str());
    auto& m = case_locks_[id];
    if (!m) m = std::make_shared<std::mutex>();
    return m;
}

WorkflowCase CaseRegistry::load(const CaseId& id) const {
    std::lock_guard lock(mutex_);
    const auto it = cases_.find(id);
    if (it == cases_.end()) throw Error(Errc::UnknownCase, "unknown case " + id.str());
    return it->second;
}

void CaseRegistry::save(const WorkflowCase& c) {
    std::lock_guard lock(mutex_);
    cases_[c.case_id] = c;
}

bool CaseRegistry::is_staff(const UserId& user) const {
    return directory_.is_project_user(user) && (directory_.has_role_anywhere(user, core::Role::FacilityStaff) ||
                                                directory_.has_role_anywhere(user, core::Role::Admin));
}

bool CaseRegistry::may_act(const WorkflowCase& c, const UserId& user, const std::vector<Actor>& actors) const {
    if (!directory_.is_project_user(user)) return false;
    for (const auto a : actors) {
        switch (a) {
            case Actor::Staff:
                if (is_staff(user)) return true;
                break;
            case Actor::Requester:
                if (user == c.requester) return true;
                break;
            case Actor::Evaluator: {
                const auto* e = std::get_if<EchoPayload>(&c.payload);
                if (e && e->evaluator == user) return true;
                break;
            }
        }
    }
    return false;
}

bool CaseRegistry::visible(const WorkflowCase& c, const std::optional<UserId>& user) const {
    if (directory_.can_access(user, c.acl)) return true;
    if (!user || !directory_.is_project_user(*user)) return false;
    if (*user == c.requester || is_staff(*user)) return true;
    const auto* e = std::get_if<EchoPayload>(&c.payload);
    return e && e->evaluator == *user;
}

const Edge& CaseRegistry::edge_for(const WorkflowCase& c, Action action) const {
    for (const auto& e : edges(c.kind)) {
        if (e.from == c.state && e.action == action) return e;
    }
    throw Error(Errc::IllegalTransition,
                std::string(to_string(action)) + " is not allowed from state " + std::string(to_string(c.state)),
                {{"state", to_string(c.state)}, {"action", to_string(action)}});
}

void CaseRegistry::advance(WorkflowCase& c, const UserId& actor, const Edge& e, std::string note) {
    c.audit_trail.push_back({clock_.now(), actor, c.state, e.to, e.action, std::move(note)});
    c.state = e.to;
}

WorkflowCase CaseRegistry::create_case(CaseKind kind, const UserId& requester, CasePayload draft,
                                       std::optional<GroupId> group) {
    if (!directory_.is_project_user(requester)) {
        throw Error(Errc::AccessDenied, "only project users can open service requests");
    }
    const bool kind_matches = (kind == CaseKind::ALMN) == std::holds_alternative<AlmnPayload>(draft);
    if (!kind_matches) throw Error(Errc::ValidationError, "payload does not match the case kind", {{"fields", {"payload"}}});
    std::vector<std::string> bad;
    if (auto* a = std::get_if<AlmnPayload>(&draft)) {
        if (text::trim(a->research_question).empty()) bad.emplace_back("research_question");
        a->labels.clear();
    } else {
        auto& e = std::get<EchoPayload>(draft);
        if (e.mice.empty()) bad.emplace_back("mice");
        if (mice_) {
            for (const auto& m : e.mice) {
                if (!mice_->find_mouse(m)) {
                    bad.emplace_back("mice");
                    break;
                }
            }
        }
        if (text::trim(e.surgery_type).empty()) bad.emplace_back("surgery_type");
        e.evaluator.reset();
        e.feedback.reset();
    }
    if (group && !directory_.find_group(*group)) bad.emplace_back("group_id");
    if (!bad.empty()) {
        throw Error(Errc::ValidationError, "invalid case fields: " + text::join(bad, ", "), {{"fields", bad}});
    }
    WorkflowCase c;
    c.case_id = make_id<CaseId>();
    c.kind = kind;
    c.requester = requester;
    c.group_id = group;
    c.payload = std::move(draft);
    c.acl = group ? core::AccessScope::make_group(*group, requester) : core::AccessScope::make_private(requester);
    c.audit_trail.push_back({clock_.now(), requester, std::nullopt, CaseState::Requested, std::nullopt, {}});
    save(c);
    return c;
}

WorkflowCase CaseRegistry::transition_case(const CaseId& id, const UserId& actor, Action action, std::string note) {
    const auto guard = case_lock(id);
    std::lock_guard lock(*guard);
    auto c = load(id);
    const auto& e = edge_for(c, action);
    if (!may_act(c, actor, e.actors)) {
        throw Error(Errc::Unauthorized, "your role does not permit " + std::string(to_string(action)));
    }
    if (e.operation_bound) {
        throw Error(Errc::IllegalState, std::string(to_string(action)) + " happens through its own operation");
    }
    if (action == Action::CompleteEvaluation && !note.empty()) std::get<EchoPayload>(c.payload).feedback = note;
    advance(c, actor, e, std::move(note));
    save(c);
    return c;
}

std::vector<LabelRecord> CaseRegistry::record_consultation(const CaseId& id, const UserId& actor,
                                                           std::vector<Staining> stainings,
                                                           std::vector<Sample> samples) {
    const auto guard = case_lock(id);
    std::lock_guard lock(*guard);
    auto c = load(id);
    if (c.kind != CaseKind::ALMN || c.state != CaseState::InConsultation) {
        throw Error(Errc::IllegalState, "labels are issued during an ALMN consultation only",
                    {{"state", to_string(c.state)}});
    }
    const auto& e = edge_for(c, Action::IssueLabels);
    if (!may_act(c, actor, e.actors)) throw Error(Errc::Unauthorized, "only facility staff issue labels");
    std::vector<std::string> bad;
    if (stainings.empty()) bad.emplace_back("stainings");
    if (samples.empty()) bad.emplace_back("samples");
    std::set<std::string> ids;
    for (const auto& s : samples) {
        if (text::trim(s.sample_id).empty() || !ids.insert(s.sample_id).second) {
            bad.emplace_back("samples.sample_id");
            break;
        }
    }
    for (const auto& s : stainings) {
        if (text::trim(s.abbreviation).empty()) {
            bad.emplace_back("stainings.abbreviation");
            break;
        }
    }
    if (!bad.empty()) {
        throw Error(Errc::ValidationError, "invalid consultation fields: " + text::join(bad, ", "), {{"fields", bad}});
    }
    if (antibodies_) {
        for (const auto& s : stainings) {
            if (!antibodies_->exists(s.antibody_id)) {
                throw Error(Errc::UnknownAntibody, "unknown antibody " + s.antibody_id.str(),
                            {{"antibody_id", s.antibody_id.str()}});
            }
        }
    }
    std::vector<LabelRecord> labels;
    const auto url = case_landing_url(id);
    for (const auto& sample : samples) {
        for (const auto& staining : stainings) {
            labels.push_back({sample.sample_id, sample.species, staining.abbreviation,
                              pids_.mint_bound(pidreg::ObjectKind::LabelSet, id.str(), url)});
        }
    }
    auto& p = std::get<AlmnPayload>(c.payload);
    p.stainings = std::move(stainings);
    p.samples = std::move(samples);
    p.labels = labels;
    advance(c, actor, e, {});
    save(c);
    return labels;
}

IngestResult CaseRegistry::ingest_dataset_zip(const CaseId& id, const UserId& actor, std::string_view zip_bytes) {
    const auto guard = case_lock(id);
    std::lock_guard lock(*guard);
    auto c = load(id);
    const bool ready = (c.kind == CaseKind::ALMN && c.state == CaseState::AwaitingData) ||
                       (c.kind == CaseKind::Echo && c.state == CaseState::InProgress);
    if (!ready) {
        throw Error(Errc::IllegalState, "case is not awaiting data", {{"state", to_string(c.state)}});
    }
    if (!may_act(c, actor, {Actor::Staff, Actor::Requester})) {
        throw Error(Errc::Unauthorized, "only the requester or facility staff upload data");
    }
    if (!looks_like_zip(zip_bytes)) throw Error(Errc::NotAZip, "upload is not a zip archive");
    const auto entries = read_zip(zip_bytes, zip_limits_);

    IngestResult result;
    std::vector<pkgstore::Mutation> puts;
    for (const auto& entry : entries) {
        pkgstore::Metadata meta;
        if (is_tiff_name(entry.name)) {
            try {
                auto m = extract_tiff_metadata(entry.bytes);
                m.source_file = entry.name;
                meta["width_px"] = std::to_string(m.width_px);
                meta["height_px"] = std::to_string(m.height_px);
                meta["bits_per_sample"] = std::to_string(m.bits_per_sample);
                meta["byte_order"] = std::string(to_string(m.byte_order));
                result.images.push_back(std::move(m));
            } catch (const Error& e) {
                meta["extraction_error"] = std::string(to_string(e.code()));
            }
        } else if (is_xml_name(entry.name)) {
            try {
                meta = extract_xml_metadata(entry.bytes);
            } catch (const Error& e) {
                meta["extraction_error"] = std::string(to_string(e.code()));
            }
        }
        puts.push_back(pkgstore::PutFile{entry.name, entry.bytes, std::move(meta), {}});
    }
    puts.push_back(pkgstore::SetPackageMetadata{{{"case_id", id.str()},
                                                 {"case_kind", std::string(to_string(c.kind))},
                                                 {"title", std::string(to_string(c.kind)) + " dataset"}}});
    result.package_id = store_.create_package(c.requester, c.acl, puts);
    try {
        result.pid = pids_.mint_bound(pidreg::ObjectKind::Dataset, result.package_id.str());
    } catch (const Error& e) {
        if (e.code() != Errc::PrefixNotConfigured) throw;
    }

    c.dataset_packages.push_back(result.package_id);
    if (result.pid) c.dataset_pids.push_back(*result.pid);
    if (c.kind == CaseKind::ALMN) {
        advance(c, actor, edge_for(c, Action::StoreData), "package " + result.package_id.str());
    }
    save(c);
    return result;
}

WorkflowCase CaseRegistry::assign_evaluator(const CaseId& id, const UserId& evaluator, const UserId& actor) {
    const auto guard = case_lock(id);
    std::lock_guard lock(*guard);
    auto c = load(id);
    if (c.kind != CaseKind::Echo || c.state != CaseState::Finished) {
        throw Error(Errc::IllegalState, "an evaluator is assigned once the experiment is finished",
                    {{"state", to_string(c.state)}});
    }
    const auto& e = edge_for(c, Action::AssignEvaluator);
    if (!may_act(c, actor, e.actors)) throw Error(Errc::Unauthorized, "only facility staff assign evaluators");
    if (!directory_.is_project_user(evaluator)) {
        throw Error(Errc::ValidationError, "evaluator must be an active project user", {{"fields", {"evaluator"}}});
    }
    std::get<EchoPayload>(c.payload).evaluator = evaluator;
    for (const auto& p : c.dataset_packages) store_.grant_read(p, evaluator);
    advance(c, actor, e, {});
    save(c);
    return c;
}

std::string CaseRegistry::labels_csv(const CaseId& id, const std::optional<UserId>& requester) const {
    const auto c = get(id, requester);
    std::vector<csv::Row> rows{text::split(kLabelCsvHeader, ",")};
    if (const auto* a = std::get_if<AlmnPayload>(&c.payload)) {
        for (const auto& l : a->labels) rows.push_back({l.sample_id, l.species, l.staining_abbreviation, l.pid.handle()});
    }
    return csv::format(rows);
}

WorkflowCase CaseRegistry::get(const CaseId& id, const std::optional<UserId>& requester) const {
    auto c = load(id);
    if (!visible(c, requester)) throw Error(Errc::AccessDenied, "case " + id.str() + " is not visible to you");
    return c;
}

std::optional<WorkflowCase> CaseRegistry::find(const CaseId& id) const {
    std::lock_guard lock(mutex_);
    const auto it = cases_.find(id);
    if (it == cases_.end()) return std::nullopt;
    return it->second;
}

std::vector<WorkflowCase> CaseRegistry::list(const std::optional<UserId>& requester) const {
    std::vector<WorkflowCase> all;
    {
        std::lock_guard lock(mutex_);
        for (const auto& [id, c] : cases_) all.push_back(c);
    }
    std::vector<WorkflowCase> out;
    for (auto& c : all) {
        if (visible(c, requester)) out.push_back(std::move(c));
    }
    return out;
}

std::string CaseRegistry::case_landing_url(const CaseId& id) const {
    return pids_.landing_base_url() + "/landing/cases/" + id.str();
}

nlohmann::json CaseRegistry::to_json() const {
    std::lock_guard lock(mutex_);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [id, c] : cases_) out.push_back(c);
    return {{"cases", out}};
}

void CaseRegistry::load_json(const nlohmann::json& j) {
    std::lock_guard lock(mutex_);
    cases_.clear();
    case_locks_.clear();
    for (const auto& c : j.value("cases", nlohmann::json::array())) {
        auto wc = c.get<WorkflowCase>();
        cases_[wc.case_id] = wc;
    }
}

} // namespace fairhub::workflows
