/**
 * @file registry.hpp
 * @brief Published-data registry: bibliographic import, asset links,
 * search, export and statistics
 */

#pragma once

#include "fairhub/core/directory.hpp"
#include "fairhub/pubreg/article.hpp"
#include "fairhub/util/clock.hpp"
#include "fairhub/util/http.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fairhub::pubreg {

/// Maps one EuropePMC search response (lite result type) to an article.
/// Throws NotFound for an empty result list and MappingError when the
/// title is missing.
[[nodiscard]] ScholarlyArticle map_europepmc(const nlohmann::json& response);
/// Maps a DataCite JSON:API "dois" document.
[[nodiscard]] ScholarlyArticle map_datacite(const nlohmann::json& document);

/// "Family Initials" entries of an EuropePMC authorString.
[[nodiscard]] std::vector<Author> parse_author_string(std::string_view text);

[[nodiscard]] std::string europepmc_target(const std::string& pmid);
[[nodiscard]] std::string datacite_target(const std::string& doi);

struct SearchQuery {
    std::string text;
    std::optional<int> year_from;
    std::optional<int> year_to;
    std::optional<GroupId> group;
    std::optional<std::string> publication_type;
    std::optional<bool> open_access;
};

struct YearCount {
    int year = 0;
    std::size_t count = 0;
    friend bool operator==(const YearCount&, const YearCount&) = default;
};

struct Stats {
    std::vector<YearCount> per_year;
    std::size_t open = 0;
    std::size_t closed = 0;
    double ratio = 0.0;
};

void to_json(nlohmann::json& j, const Stats& s);

/// Whether an asset of the given kind exists; installed by the composition
/// root so the registry does not depend on the catalogue modules.
using AssetResolver = std::function<bool(AssetKind, const std::string&)>;

class PublicationRegistry {
public:
    PublicationRegistry(const core::Directory& directory, const Clock& clock,
                        std::shared_ptr<http::Transport> europepmc, std::shared_ptr<http::Transport> datacite);

    void set_asset_resolver(AssetResolver resolver);

    /// Fetch, map and upsert. A known pmid/doi updates the existing record.
    ScholarlyArticle import_by_pmid(const std::string& pmid, const UserId& importer);
    ScholarlyArticle import_by_doi(const std::string& doi, const UserId& importer);

    /// Manual entry; goes through the same validation as imports.
    ScholarlyArticle add_article(ScholarlyArticle draft, const UserId& requester);
    /// Replaces every field except the id. Needs write permission.
    ScholarlyArticle update_article(const ScholarlyArticle& article, const std::optional<UserId>& requester);
    /// Upserts records parsed from a JSON or CSV export, matching by id,
    /// then doi, then pmid. All records are validated before any is stored.
    std::vector<ScholarlyArticle> import_records(const std::vector<ScholarlyArticle>& records,
                                                 const UserId& requester);

    [[nodiscard]] ScholarlyArticle get(const ArticleId& id, const std::optional<UserId>& requester) const;
    [[nodiscard]] std::optional<ScholarlyArticle> find(const ArticleId& id) const;
    [[nodiscard]] std::optional<ScholarlyArticle> find_by_doi(const std::string& doi) const;
    [[nodiscard]] std::optional<ScholarlyArticle> find_by_pmid(const std::string& pmid) const;
    [[nodiscard]] std::vector<ScholarlyArticle> all() const;

    AssetLink link_asset(const ArticleId& article, AssetKind kind, const std::string& asset_id,
                         const std::optional<UserId>& requester);
    [[nodiscard]] std::vector<AssetLink> links_of(const ArticleId& article) const;
    [[nodiscard]] std::vector<AssetLink> links_to(AssetKind kind, const std::string& asset_id) const;

    /// Visible matches ordered by year (newest first), then title.
    [[nodiscard]] std::vector<ScholarlyArticle> search(const std::optional<UserId>& requester,
                                                       const SearchQuery& query) const;
    [[nodiscard]] std::string export_articles(const std::vector<ArticleId>& ids, ExportFormat format,
                                              const std::optional<UserId>& requester) const;
    [[nodiscard]] Stats compute_stats(const std::optional<UserId>& requester) const;

    [[nodiscard]] nlohmann::json to_json() const;
    void load_json(const nlohmann::json& j);

private:
    nlohmann::json fetch(http::Transport& transport, const std::string& target, const std::string& what) const;
    ScholarlyArticle upsert_imported(ScholarlyArticle fetched, const UserId& importer);
    void validate(const ScholarlyArticle& a) const;
    void require_project_user(const UserId& user) const;
    std::optional<ArticleId> match_locked(const ScholarlyArticle& a) const;
    void store_locked(const ScholarlyArticle& a);

    const core::Directory& directory_;
    const Clock& clock_;
    std::shared_ptr<http::Transport> europepmc_;
    std::shared_ptr<http::Transport> datacite_;
    AssetResolver resolver_;

    mutable std::mutex mutex_;
    std::map<ArticleId, ScholarlyArticle> articles_;
    std::map<std::string, ArticleId> by_doi_;
    std::map<std::string, ArticleId> by_pmid_;
    std::set<AssetLink> links_;
};

} // namespace fairhub::pubreg
