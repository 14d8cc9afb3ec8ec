/**
 * @file cell_line.hpp
 * @brief iPSC cell-model catalogue and the cell-line naming service client
 */

#pragma once

#include "fairhub/catalogues/mouse.hpp"
#include "fairhub/core/directory.hpp"
#include "fairhub/pidreg/registry.hpp"
#include "fairhub/util/http.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace fairhub::catalogues {

enum class CellKind { PatientDerived, GeneticallyModified };

[[nodiscard]] std::string_view to_string(CellKind k) noexcept;
[[nodiscard]] std::optional<CellKind> parse_cell_kind(std::string_view s) noexcept;

struct Culture {
    std::string medium;
    std::string passage_notes;
    friend bool operator==(const Culture&, const Culture&) = default;
};

/// Identified by pseudonym only.
struct Donor {
    std::string pseudonym;
    std::optional<Sex> sex;
    std::optional<int> age_at_sampling;
    friend bool operator==(const Donor&, const Donor&) = default;
};

struct Ethics {
    std::string approval_reference;
    std::string consent_status;
    friend bool operator==(const Ethics&, const Ethics&) = default;
};

struct Verification {
    std::optional<bool> karyotype_ok;
    std::optional<std::string> pluripotency_assay;
    friend bool operator==(const Verification&, const Verification&) = default;
};

struct CellLine {
    CellLineId cell_id;
    CellKind kind = CellKind::PatientDerived;
    std::optional<std::string> standardized_name;
    Culture culture;
    Donor donor;
    std::string diagnosis;
    Ethics ethics;
    Verification verification;
    /// GeneticallyModified only.
    std::optional<CellLineId> parent_cell_id;
    core::AccessScope acl = core::AccessScope::make_project();
    std::optional<pidreg::PersistentIdentifier> pid;

    friend bool operator==(const CellLine&, const CellLine&) = default;
};

void to_json(nlohmann::json& j, const CellLine& c);
void from_json(const nlohmann::json& j, CellLine& c);

/// POST /api/namings {"institution": code[, "parent": name]} -> {"name": ...}
class NamingClient {
public:
    explicit NamingClient(std::shared_ptr<http::Transport> transport) : transport_(std::move(transport)) {}
    /// Throws NamingServiceUnavailable on any transport or protocol failure.
    std::string request_name(const std::string& institution, const std::optional<std::string>& parent);

private:
    std::shared_ptr<http::Transport> transport_;
};

/// In-process naming service: "{code}i{NNN}-A" for new lines, and
/// "{parent}-{n}" for the n-th modified derivative of a parent.
class NamingServiceMock {
public:
    http::Response handle(const http::Request& request);
    [[nodiscard]] http::Handler handler();

private:
    std::mutex mutex_;
    std::map<std::string, int> lines_per_institution_;
    std::map<std::string, int> derivatives_per_parent_;
};

inline constexpr std::string_view kCellLineCsvHeader =
    "cell_id,kind,standardized_name,diagnosis,donor_pseudonym,ethics_approval_reference,parent_cell_id";

class CellLineCatalogue {
public:
    /// @p naming may be null: requests for a standard name then fail with
    /// NamingServiceUnavailable.
    CellLineCatalogue(const core::Directory& directory, pidreg::PidRegistry* pids,
                      std::shared_ptr<NamingClient> naming, std::string institution_code);

    /// When the naming service fails the record is still stored and
    /// NamingServiceUnavailable is thrown with the new cell_id in its details.
    CellLine register_cell_line(CellLine data, bool request_standard_name, const UserId& requester);
    /// Retries the naming request for a stored line without a name.
    CellLine request_standard_name(const CellLineId& id, const std::optional<UserId>& requester);
    CellLine update_cell_line(const CellLine& data, const std::optional<UserId>& requester);

    [[nodiscard]] CellLine get(const CellLineId& id, const std::optional<UserId>& requester) const;
    [[nodiscard]] std::optional<CellLine> find(const CellLineId& id) const;
    [[nodiscard]] bool exists(const CellLineId& id) const;
    [[nodiscard]] std::vector<CellLine> list(const std::optional<UserId>& requester,
                                             const std::string& text = {}) const;

    [[nodiscard]] std::string export_csv(const std::optional<UserId>& requester) const;
    std::vector<CellLine> import_csv(std::string_view payload, const UserId& requester);

    [[nodiscard]] nlohmann::json to_json() const;
    void load_json(const nlohmann::json& j);

private:
    std::vector<std::string> validate_locked(const CellLine& c,
                                             const std::map<CellLineId, CellLine>* pending = nullptr) const;
    CellLine assign_name(const CellLineId& id);

    const core::Directory& directory_;
    pidreg::PidRegistry* pids_;
    std::shared_ptr<NamingClient> naming_;
    std::string institution_;
    mutable std::mutex mutex_;
    std::map<CellLineId, CellLine> lines_;
};

} // namespace fairhub::catalogues
