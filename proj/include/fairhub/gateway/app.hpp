/**
 * @file app.hpp
 * @brief Composition root: owns every module, persists their state, and
 * answers the cross-module questions (mentions, landing pages)
 */

#pragma once

#include "fairhub/catalogues/antibody.hpp"
#include "fairhub/catalogues/cell_line.hpp"
#include "fairhub/catalogues/mouse.hpp"
#include "fairhub/core/directory.hpp"
#include "fairhub/gateway/config.hpp"
#include "fairhub/gateway/jsonld.hpp"
#include "fairhub/gateway/landing.hpp"
#include "fairhub/gateway/sessions.hpp"
#include "fairhub/notebooks/registry.hpp"
#include "fairhub/pidreg/handle_protocol.hpp"
#include "fairhub/pidreg/registry.hpp"
#include "fairhub/pkgstore/store.hpp"
#include "fairhub/pubreg/registry.hpp"
#include "fairhub/workflows/cases.hpp"

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace fairhub::gateway {

inline constexpr const char* kEuropePmcBase = "https://www.ebi.ac.uk/europepmc";
inline constexpr const char* kDataCiteBase = "https://api.datacite.org";
/// Prefix of the embedded PID endpoint created on first start.
inline constexpr const char* kDefaultPrefix = "21.11124";

struct AppOptions {
    /// No directory keeps everything in memory.
    std::optional<std::filesystem::path> data_dir;
    std::string base_url = "http://127.0.0.1:8080";
    /// Defaults to the system clock.
    const Clock* clock = nullptr;
    std::shared_ptr<http::Transport> europepmc;
    std::shared_ptr<http::Transport> datacite;
    /// Defaults to the in-process naming service.
    std::shared_ptr<http::Transport> naming;
    /// Defaults to the embedded mock for "embedded" endpoints and the
    /// network otherwise.
    pidreg::TransportFactory pid_transports;
    std::string institution_code = "FHUB";
    crypto::PasswordPolicy password_policy{};
    bool sync_on_commit = true;
    std::chrono::seconds session_ttl = std::chrono::hours(12);
};

/// Options for a server started from the environment, including fixture
/// mode transports for the bibliographic services.
[[nodiscard]] AppOptions options_from_config(const Config& config);

class App {
public:
    explicit App(AppOptions options);
    App(const App&) = delete;
    App& operator=(const App&) = delete;

    /// Writes state.json (atomically) when a data directory is configured.
    void save_state();
    [[nodiscard]] nlohmann::json state_json() const;

    [[nodiscard]] std::vector<Mention> mentions_for(const ArticleId& article) const;
    /// JSON-LD body or HTML page, depending on @p accept.
    [[nodiscard]] http::Response article_representation(const ArticleId& id, std::string_view accept,
                                                        const std::optional<UserId>& requester) const;
    [[nodiscard]] std::string article_jsonld_text(const ArticleId& id, const std::optional<UserId>& requester) const;

    /// Throws UnknownPid when the PID or its object is not in this instance.
    [[nodiscard]] LandingPageView landing_view(std::string_view prefix, std::string_view suffix) const;
    [[nodiscard]] LandingPageView case_landing_view(const CaseId& id) const;

    [[nodiscard]] const std::string& base_url() const noexcept { return options_.base_url; }
    [[nodiscard]] const Clock& clock() const noexcept { return *clock_; }

private:
    AppOptions options_;
    SystemClock system_clock_;
    const Clock* clock_;
    std::mutex save_mutex_;

public:
    core::Directory directory;
    pidreg::HandleServiceMock pid_mock;
    pidreg::PidRegistry pids;
    pkgstore::PackageStore store;
    pubreg::PublicationRegistry publications;
    catalogues::AntibodyCatalogue antibodies;
    catalogues::MouseLineCatalogue mice;
    catalogues::NamingServiceMock naming_mock;
    catalogues::CellLineCatalogue cell_lines;
    notebooks::NotebookRegistry notebooks;
    workflows::CaseRegistry cases;
    SessionStore sessions;

private:
    [[nodiscard]] std::string group_name(const std::optional<GroupId>& g) const;
    [[nodiscard]] std::optional<std::string> public_record(const core::AccessScope& acl, const std::string& path) const;
    void load_state();
};

} // namespace fairhub::gateway
