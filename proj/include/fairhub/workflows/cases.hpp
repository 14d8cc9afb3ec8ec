/**
 * @file cases.hpp
 * @brief Microscopy (ALMN) and echocardiography service requests
 */

#pragma once

#include "fairhub/catalogues/antibody.hpp"
#include "fairhub/catalogues/mouse.hpp"
#include "fairhub/core/directory.hpp"
#include "fairhub/pidreg/registry.hpp"
#include "fairhub/pkgstore/store.hpp"
#include "fairhub/workflows/extract.hpp"
#include "fairhub/workflows/zip.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fairhub::workflows {

enum class CaseKind { ALMN, Echo };

enum class CaseState {
    Requested,
    // ALMN
    InConsultation,
    LabelsIssued,
    AwaitingData,
    DataStored,
    Closed,
    // Echo
    UnderReview,
    InfoRequested,
    Accepted,
    Rejected,
    InProgress,
    Finished,
    UnderEvaluation,
    Evaluated,
};

enum class Action {
    // ALMN
    BeginConsultation,
    IssueLabels,
    SubmitSamples,
    StoreData,
    Close,
    Feedback,
    // Echo
    StartReview,
    Accept,
    RequestInfo,
    ProvideInfo,
    Reject,
    Start,
    Finish,
    AssignEvaluator,
    CompleteEvaluation,
};

enum class Actor { Staff, Requester, Evaluator };

[[nodiscard]] std::string_view to_string(CaseKind k) noexcept;
[[nodiscard]] std::string_view to_string(CaseState s) noexcept;
[[nodiscard]] std::string_view to_string(Action a) noexcept;
[[nodiscard]] std::optional<CaseKind> parse_case_kind(std::string_view s) noexcept;
[[nodiscard]] std::optional<CaseState> parse_case_state(std::string_view s) noexcept;
[[nodiscard]] std::optional<Action> parse_action(std::string_view s) noexcept;

struct Edge {
    CaseState from;
    Action action;
    CaseState to;
    /// Who may take the edge.
    std::vector<Actor> actors;
    /// Reachable only through its dedicated operation (consultation,
    /// ingestion, evaluator assignment).
    bool operation_bound = false;
};

[[nodiscard]] const std::vector<Edge>& edges(CaseKind kind);

struct AuditEntry {
    Timestamp timestamp{};
    UserId actor;
    std::optional<CaseState> from_state;
    CaseState to_state = CaseState::Requested;
    std::optional<Action> action;
    std::string note;

    friend bool operator==(const AuditEntry&, const AuditEntry&) = default;
};

struct Staining {
    AntibodyId antibody_id;
    std::string dilution;
    std::string abbreviation;
    friend bool operator==(const Staining&, const Staining&) = default;
};

struct Sample {
    std::string sample_id;
    std::string species;
    std::string description;
    friend bool operator==(const Sample&, const Sample&) = default;
};

struct LabelRecord {
    std::string sample_id;
    std::string species;
    std::string staining_abbreviation;
    pidreg::PersistentIdentifier pid;
    friend bool operator==(const LabelRecord&, const LabelRecord&) = default;
};

struct AlmnPayload {
    std::string research_question;
    std::string planned_procedures;
    std::vector<Staining> stainings;
    std::vector<Sample> samples;
    std::vector<LabelRecord> labels;
    friend bool operator==(const AlmnPayload&, const AlmnPayload&) = default;
};

struct TimelinePoint {
    int day_offset = 0;
    std::string measurement;
    friend bool operator==(const TimelinePoint&, const TimelinePoint&) = default;
};

struct EchoPayload {
    std::vector<MouseId> mice;
    std::string surgery_type;
    std::vector<TimelinePoint> timeline;
    std::optional<UserId> evaluator;
    std::optional<std::string> feedback;
    friend bool operator==(const EchoPayload&, const EchoPayload&) = default;
};

using CasePayload = std::variant<AlmnPayload, EchoPayload>;

struct WorkflowCase {
    CaseId case_id;
    CaseKind kind = CaseKind::ALMN;
    UserId requester;
    std::optional<GroupId> group_id;
    CaseState state = CaseState::Requested;
    std::vector<AuditEntry> audit_trail;
    CasePayload payload;
    std::vector<PackageId> dataset_packages;
    /// One Dataset PID per ingested package, same order.
    std::vector<pidreg::PersistentIdentifier> dataset_pids;
    core::AccessScope acl;

    friend bool operator==(const WorkflowCase&, const WorkflowCase&) = default;
};

void to_json(nlohmann::json& j, const WorkflowCase& c);
void from_json(const nlohmann::json& j, WorkflowCase& c);
void to_json(nlohmann::json& j, const LabelRecord& l);

struct IngestResult {
    PackageId package_id;
    std::optional<pidreg::PersistentIdentifier> pid;
    std::vector<ExtractedImageMeta> images;
};

inline constexpr std::string_view kLabelCsvHeader = "sample_id,species,staining_abbreviation,pid";

class CaseRegistry {
public:
    /// @p antibodies and @p mice resolve payload references when given.
    CaseRegistry(const core::Directory& directory, const Clock& clock, pidreg::PidRegistry& pids,
                 pkgstore::PackageStore& store, const catalogues::AntibodyCatalogue* antibodies = nullptr,
                 const catalogues::MouseLineCatalogue* mice = nullptr, ZipLimits zip_limits = {});

    WorkflowCase create_case(CaseKind kind, const UserId& requester, CasePayload draft,
                             std::optional<GroupId> group = std::nullopt);

    /// The edge check comes first (IllegalTransition), then the role check
    /// (Unauthorized). Operation-bound edges answer IllegalState here.
    WorkflowCase transition_case(const CaseId& id, const UserId& actor, Action action, std::string note = {});

    std::vector<LabelRecord> record_consultation(const CaseId& id, const UserId& actor,
                                                 std::vector<Staining> stainings, std::vector<Sample> samples);

    IngestResult ingest_dataset_zip(const CaseId& id, const UserId& actor, std::string_view zip_bytes);

    WorkflowCase assign_evaluator(const CaseId& id, const UserId& evaluator, const UserId& actor);

    [[nodiscard]] std::string labels_csv(const CaseId& id, const std::optional<UserId>& requester) const;

    /// Requester, facility staff, the evaluator, or anyone the ACL admits.
    [[nodiscard]] WorkflowCase get(const CaseId& id, const std::optional<UserId>& requester) const;
    [[nodiscard]] std::optional<WorkflowCase> find(const CaseId& id) const;
    [[nodiscard]] std::vector<WorkflowCase> list(const std::optional<UserId>& requester) const;

    /// Public page every label PID resolves to.
    [[nodiscard]] std::string case_landing_url(const CaseId& id) const;

    [[nodiscard]] nlohmann::json to_json() const;
    void load_json(const nlohmann::json& j);

private:
    std::shared_ptr<std::mutex> case_lock(const CaseId& id) const;
    WorkflowCase load(const CaseId& id) const;
    void save(const WorkflowCase& c);
    bool is_staff(const UserId& user) const;
    bool may_act(const WorkflowCase& c, const UserId& user, const std::vector<Actor>& actors) const;
    bool visible(const WorkflowCase& c, const std::optional<UserId>& user) const;
    const Edge& edge_for(const WorkflowCase& c, Action action) const;
    void advance(WorkflowCase& c, const UserId& actor, const Edge& e, std::string note);

    const core::Directory& directory_;
    const Clock& clock_;
    pidreg::PidRegistry& pids_;
    pkgstore::PackageStore& store_;
    const catalogues::AntibodyCatalogue* antibodies_;
    const catalogues::MouseLineCatalogue* mice_;
    ZipLimits zip_limits_;

    mutable std::mutex mutex_;
    std::map<CaseId, WorkflowCase> cases_;
    mutable std::map<CaseId, std::shared_ptr<std::mutex>> case_locks_;
};

} // namespace fairhub::workflows
