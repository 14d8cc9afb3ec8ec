/**
 * @file article.hpp
 * @brief Bibliographic record, asset links and the export formats
 */

#pragma once

#include "fairhub/core/access.hpp"
#include "fairhub/util/ids.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace fairhub::pubreg {

struct Author {
    std::string family;
    std::string given;
    std::optional<std::string> orcid;

    friend bool operator==(const Author&, const Author&) = default;
};

struct ExternalResource {
    std::string label;
    std::string url;

    friend bool operator==(const ExternalResource&, const ExternalResource&) = default;
};

struct ScholarlyArticle {
    ArticleId article_id;
    std::string title;
    std::vector<Author> authors;
    int year = 0;
    std::string journal;
    std::optional<std::string> doi;
    std::optional<std::string> pmid;
    /// A term of the NCBI publication-type vocabulary.
    std::string publication_type = "Journal Article";
    bool open_access = false;
    std::optional<std::string> volume;
    std::optional<std::string> pages;
    std::optional<std::string> url;
    std::set<GroupId> groups;
    std::set<SubprojectId> subprojects;
    std::vector<ExternalResource> external_resources;
    core::AccessScope acl = core::AccessScope::make_project();

    friend bool operator==(const ScholarlyArticle&, const ScholarlyArticle&) = default;
};

/// Fixed key order, so serializing a parsed record reproduces its bytes.
[[nodiscard]] nlohmann::ordered_json article_to_json(const ScholarlyArticle& a);
[[nodiscard]] ScholarlyArticle article_from_json(const nlohmann::json& j);

enum class AssetKind { Notebook, Antibody, MouseLine, CellLine, MicroscopyCase, EchoCase, DataPackage };

[[nodiscard]] std::string_view to_string(AssetKind kind) noexcept;
[[nodiscard]] std::optional<AssetKind> parse_asset_kind(std::string_view text) noexcept;

struct AssetLink {
    ArticleId article_id;
    AssetKind asset_kind = AssetKind::DataPackage;
    std::string asset_id;

    friend auto operator<=>(const AssetLink&, const AssetLink&) = default;
};

void to_json(nlohmann::json& j, const AssetLink& l);

/// Terms accepted as publication_type.
[[nodiscard]] const std::vector<std::string>& publication_types();
/// Canonical spelling of @p term when it is in the vocabulary.
[[nodiscard]] std::optional<std::string> canonical_publication_type(std::string_view term);

/// "10.<registrant>/<suffix>"
[[nodiscard]] bool valid_doi(std::string_view doi) noexcept;

enum class ExportFormat { Ris, Json, Csv };

[[nodiscard]] std::optional<ExportFormat> parse_export_format(std::string_view text) noexcept;

inline constexpr std::string_view kCsvHeader =
    "article_id,title,authors,year,journal,doi,pmid,publication_type,open_access";

[[nodiscard]] std::string to_ris(const std::vector<ScholarlyArticle>& articles);
[[nodiscard]] std::string to_json_export(const std::vector<ScholarlyArticle>& articles);
[[nodiscard]] std::string to_csv(const std::vector<ScholarlyArticle>& articles);

/// Inverse of the JSON export.
[[nodiscard]] std::vector<ScholarlyArticle> parse_json_export(std::string_view text);
/// Inverse of the CSV export for the columns the CSV carries. Authors are
/// split on "; " and each on the first ", ".
[[nodiscard]] std::vector<ScholarlyArticle> parse_csv_export(std::string_view text);

} // namespace fairhub::pubreg
