/**
 * @file antibody.hpp
 * @brief Antibody catalogue with anonymous application assessments
 */

#pragma once

#include "fairhub/core/directory.hpp"
#include "fairhub/pidreg/registry.hpp"
#include "fairhub/util/clock.hpp"

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace fairhub::catalogues {

enum class AntibodyKind { Primary, Secondary };
enum class Clonality { Monoclonal, Polyclonal };
enum class Application { Immunofluorescence, WesternBlot, IHC, FACS, ELISA, Other };

[[nodiscard]] std::string_view to_string(AntibodyKind k) noexcept;
[[nodiscard]] std::string_view to_string(Clonality c) noexcept;
[[nodiscard]] std::string_view to_string(Application a) noexcept;
[[nodiscard]] std::optional<AntibodyKind> parse_antibody_kind(std::string_view s) noexcept;
[[nodiscard]] std::optional<Clonality> parse_clonality(std::string_view s) noexcept;
[[nodiscard]] std::optional<Application> parse_application(std::string_view s) noexcept;

struct Manufacturer {
    std::string name;
    std::string catalog_number;
    friend bool operator==(const Manufacturer&, const Manufacturer&) = default;
};

struct AntibodyExternalIds {
    /// Antibody Registry id, "AB_" followed by digits.
    std::optional<std::string> antibody_registry_id;
    std::optional<std::string> antibodypedia_url;
    friend bool operator==(const AntibodyExternalIds&, const AntibodyExternalIds&) = default;
};

struct Antibody {
    AntibodyId antibody_id;
    AntibodyKind kind = AntibodyKind::Primary;
    std::string designation;
    std::string target;
    std::string host_species;
    Clonality clonality = Clonality::Monoclonal;
    Manufacturer manufacturer;
    AntibodyExternalIds external_ids;
    /// Secondary antibodies only.
    std::optional<std::string> reactivity_species;
    core::AccessScope acl = core::AccessScope::make_project();
    std::optional<pidreg::PersistentIdentifier> pid;

    friend bool operator==(const Antibody&, const Antibody&) = default;
};

void to_json(nlohmann::json& j, const Antibody& a);
void from_json(const nlohmann::json& j, Antibody& a);

/// Link target for an Antibody Registry id.
[[nodiscard]] std::string antibody_registry_url(const std::string& rrid);

/// Deliberately carries no user identity.
struct ApplicationAssessment {
    AntibodyId antibody_id;
    Application application = Application::WesternBlot;
    /// Free text when application is Other.
    std::string other_application;
    int rating = 0;
    std::string comment;
    std::optional<PackageId> image_package;
    Timestamp created_at{};
};

void to_json(nlohmann::json& j, const ApplicationAssessment& a);

struct RatingSummary {
    Application application = Application::WesternBlot;
    std::string other_application;
    std::size_t count = 0;
    double mean = 0.0;
};

struct AntibodyRegistration {
    Antibody antibody;
    std::vector<std::string> warnings;
};

inline constexpr std::string_view kAntibodyCsvHeader =
    "antibody_id,kind,designation,target,host_species,clonality,manufacturer_name,catalog_number,"
    "antibody_registry_id,antibodypedia_url";

class AntibodyCatalogue {
public:
    /// @p pids may be null; antibodies are then stored without a PID.
    AntibodyCatalogue(const core::Directory& directory, const Clock& clock, pidreg::PidRegistry* pids);

    AntibodyRegistration register_antibody(Antibody data, const UserId& requester);
    Antibody update_antibody(const Antibody& data, const std::optional<UserId>& requester);

    ApplicationAssessment record_assessment(const AntibodyId& id, Application application, int rating,
                                            std::string comment, std::optional<PackageId> image_package = {},
                                            std::string other_application = {});
    [[nodiscard]] std::vector<ApplicationAssessment> assessments(const AntibodyId& id) const;
    [[nodiscard]] std::vector<RatingSummary> rating_summary(const AntibodyId& id) const;

    [[nodiscard]] Antibody get(const AntibodyId& id, const std::optional<UserId>& requester) const;
    [[nodiscard]] std::optional<Antibody> find(const AntibodyId& id) const;
    [[nodiscard]] bool exists(const AntibodyId& id) const;
    [[nodiscard]] std::vector<Antibody> list(const std::optional<UserId>& requester,
                                             const std::string& text = {}) const;

    /// Visible records in id order.
    [[nodiscard]] std::string export_csv(const std::optional<UserId>& requester) const;
    /// All rows are validated before any is stored.
    std::vector<Antibody> import_csv(std::string_view payload, const UserId& requester);

    [[nodiscard]] nlohmann::json to_json() const;
    void load_json(const nlohmann::json& j);

private:
    std::vector<std::string> validate(const Antibody& a) const;

    const core::Directory& directory_;
    const Clock& clock_;
    pidreg::PidRegistry* pids_;
    mutable std::mutex mutex_;
    std::map<AntibodyId, Antibody> antibodies_;
    std::vector<ApplicationAssessment> assessments_;
};

} // namespace fairhub::catalogues
