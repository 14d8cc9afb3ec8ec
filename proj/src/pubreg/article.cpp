#include "fairhub/pubreg/article.hpp"

#include "fairhub/error.hpp"
#include "fairhub/util/csv.hpp"
#include "fairhub/util/text.hpp"

#include <charconv>

namespace fairhub::pubreg {

namespace {

template <class T>
nlohmann::ordered_json opt(const std::optional<T>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::optional<std::string> opt_string(const nlohmann::json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<std::string>();
}

std::string author_text(const Author& a) {
    return a.given.empty() ? a.family : a.family + ", " + a.given;
}

Author parse_author_text(std::string_view text) {
    Author a;
    const auto comma = text.find(", ");
    if (comma == std::string_view::npos) {
        a.family = std::string(text);
    } else {
        a.family = std::string(text.substr(0, comma));
        a.given = std::string(text.substr(comma + 2));
    }
    return a;
}

} // namespace

nlohmann::ordered_json article_to_json(const ScholarlyArticle& a) {
    nlohmann::ordered_json authors = nlohmann::ordered_json::array();
    for (const auto& au : a.authors) {
        authors.push_back({{"family", au.family}, {"given", au.given}, {"orcid", opt(au.orcid)}});
    }
    nlohmann::ordered_json groups = nlohmann::ordered_json::array();
    for (const auto& g : a.groups) groups.push_back(g.str());
    nlohmann::ordered_json subprojects = nlohmann::ordered_json::array();
    for (const auto& s : a.subprojects) subprojects.push_back(s.str());
    nlohmann::ordered_json resources = nlohmann::ordered_json::array();
    for (const auto& r : a.external_resources) resources.push_back({{"label", r.label}, {"url", r.url}});
    nlohmann::ordered_json acl;
    acl["scope"] = std::string(core::to_string(a.acl.scope));
    acl["owner"] = a.acl.owner ? nlohmann::ordered_json(a.acl.owner->str()) : nlohmann::ordered_json(nullptr);
    acl["owning_group"] =
        a.acl.owning_group ? nlohmann::ordered_json(a.acl.owning_group->str()) : nlohmann::ordered_json(nullptr);

    nlohmann::ordered_json j;
    j["article_id"] = a.article_id.str();
    j["title"] = a.title;
    j["authors"] = std::move(authors);
    j["year"] = a.year;
    j["journal"] = a.journal;
    j["doi"] = opt(a.doi);
    j["pmid"] = opt(a.pmid);
    j["publication_type"] = a.publication_type;
    j["open_access"] = a.open_access;
    j["volume"] = opt(a.volume);
    j["pages"] = opt(a.pages);
    j["url"] = opt(a.url);
    j["groups"] = std::move(groups);
    j["subprojects"] = std::move(subprojects);
    j["external_resources"] = std::move(resources);
    j["acl"] = std::move(acl);
    return j;
}

ScholarlyArticle article_from_json(const nlohmann::json& j) {
    ScholarlyArticle a;
    a.article_id = ArticleId{j.value("article_id", std::string{})};
    a.title = j.at("title").get<std::string>();
    for (const auto& au : j.value("authors", nlohmann::json::array())) {
        a.authors.push_back({au.at("family").get<std::string>(), au.value("given", std::string{}),
                             opt_string(au, "orcid")});
    }
    a.year = j.at("year").get<int>();
    a.journal = j.value("journal", std::string{});
    a.doi = opt_string(j, "doi");
    a.pmid = opt_string(j, "pmid");
    a.publication_type = j.value("publication_type", std::string("Journal Article"));
    a.open_access = j.value("open_access", false);
    a.volume = opt_string(j, "volume");
    a.pages = opt_string(j, "pages");
    a.url = opt_string(j, "url");
    for (const auto& g : j.value("groups", nlohmann::json::array())) a.groups.insert(GroupId{g.get<std::string>()});
    for (const auto& s : j.value("subprojects", nlohmann::json::array())) {
        a.subprojects.insert(SubprojectId{s.get<std::string>()});
    }
    for (const auto& r : j.value("external_resources", nlohmann::json::array())) {
        a.external_resources.push_back({r.at("label").get<std::string>(), r.at("url").get<std::string>()});
    }
    if (j.contains("acl")) a.acl = j["acl"].get<core::AccessScope>();
    return a;
}

std::string_view to_string(AssetKind kind) noexcept {
    switch (kind) {
        case AssetKind::Notebook: return "Notebook";
        case AssetKind::Antibody: return "Antibody";
        case AssetKind::MouseLine: return "MouseLine";
        case AssetKind::CellLine: return "CellLine";
        case AssetKind::MicroscopyCase: return "MicroscopyCase";
        case AssetKind::EchoCase: return "EchoCase";
        case AssetKind::DataPackage: return "DataPackage";
    }
    return "?";
}

std::optional<AssetKind> parse_asset_kind(std::string_view text) noexcept {
    for (const auto k : {AssetKind::Notebook, AssetKind::Antibody, AssetKind::MouseLine, AssetKind::CellLine,
                         AssetKind::MicroscopyCase, AssetKind::EchoCase, AssetKind::DataPackage}) {
        if (to_string(k) == text) return k;
    }
    return std::nullopt;
}

void to_json(nlohmann::json& j, const AssetLink& l) {
    j = {{"article_id", l.article_id.str()}, {"asset_kind", to_string(l.asset_kind)}, {"asset_id", l.asset_id}};
}

const std::vector<std::string>& publication_types() {
    static const std::vector<std::string> terms{
        "Journal Article", "Review", "Systematic Review", "Meta-Analysis", "Case Reports", "Clinical Trial",
        "Randomized Controlled Trial", "Comparative Study", "Evaluation Study", "Validation Study",
        "Letter", "Editorial", "Comment", "News", "Preprint", "Published Erratum", "Retraction of Publication",
        "Congress", "Dataset", "Guideline", "Practice Guideline", "Technical Report", "Multicenter Study",
        "Observational Study", "Research Support, Non-U.S. Gov't", "Research Support, N.I.H., Extramural"};
    return terms;
}

std::optional<std::string> canonical_publication_type(std::string_view term) {
    const std::string t = text::trim(term);
    for (const auto& known : publication_types()) {
        if (text::to_lower(known) == text::to_lower(t)) return known;
    }
    return std::nullopt;
}

bool valid_doi(std::string_view doi) noexcept {
    if (doi.size() < 6 || doi.substr(0, 3) != "10.") return false;
    const auto slash = doi.find('/');
    if (slash == std::string_view::npos || slash == 3 || slash + 1 >= doi.size()) return false;
    for (std::size_t i = 3; i < slash; ++i) {
        if (!(doi[i] >= '0' && doi[i] <= '9') && doi[i] != '.') return false;
    }
    for (std::size_t i = slash + 1; i < doi.size(); ++i) {
        const auto c = static_cast<unsigned char>(doi[i]);
        if (c <= 0x20 || c == 0x7f) return false;
    }
    return true;
}

std::optional<ExportFormat> parse_export_format(std::string_view text) noexcept {
    std::string t;
    for (const char c : text) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (t == "ris") return ExportFormat::Ris;
    if (t == "json") return ExportFormat::Json;
    if (t == "csv") return ExportFormat::Csv;
    return std::nullopt;
}

std::string to_ris(const std::vector<ScholarlyArticle>& articles) {
    std::string out;
    // a value is a single line; runs of line breaks and tabs become one space
    auto line = [&out](std::string_view tag, std::string_view value) {
        out.append(tag).append("  - ");
        bool gap = false;
        for (const char c : value) {
            if (c == '\n' || c == '\r' || c == '\t') {
                gap = true;
                continue;
            }
            if (gap) out.push_back(' ');
            gap = false;
            out.push_back(c);
        }
        out.push_back('\n');
    };
    for (std::size_t i = 0; i < articles.size(); ++i) {
        const auto& a = articles[i];
        if (i > 0) out.push_back('\n');
        line("TY", a.publication_type == "Journal Article" ? "JOUR" : "GEN");
        line("TI", a.title);
        for (const auto& au : a.authors) line("AU", author_text(au));
        line("PY", std::to_string(a.year));
        if (!a.journal.empty()) line("JO", a.journal);
        if (a.volume) line("VL", *a.volume);
        if (a.pages) line("SP", *a.pages);
        if (a.doi) line("DO", *a.doi);
        if (a.url) line("UR", *a.url);
        out.append("ER  - \n");
    }
    return out;
}

std::string to_json_export(const std::vector<ScholarlyArticle>& articles) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& a : articles) arr.push_back(article_to_json(a));
    return arr.dump(2) + "\n";
}

std::string to_csv(const std::vector<ScholarlyArticle>& articles) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back(text::split(kCsvHeader, ","));
    for (const auto& a : articles) {
        std::vector<std::string> names;
        for (const auto& au : a.authors) names.push_back(author_text(au));
        rows.push_back({a.article_id.str(), a.title, text::join(names, "; "), std::to_string(a.year), a.journal,
                        a.doi.value_or(""), a.pmid.value_or(""), a.publication_type,
                        a.open_access ? "true" : "false"});
    }
    return csv::format(rows);
}

std::vector<ScholarlyArticle> parse_json_export(std::string_view text) {
    const auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_array()) {
        throw Error(Errc::ValidationError, "article export must be a JSON array");
    }
    std::vector<ScholarlyArticle> out;
    for (const auto& item : j) {
        try {
            out.push_back(article_from_json(item));
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::ValidationError, std::string("bad article record: ") + e.what(),
                        {{"index", out.size()}});
        }
    }
    return out;
}

std::vector<ScholarlyArticle> parse_csv_export(std::string_view text) {
    const auto rows = csv::parse(text);
    if (rows.empty() || text::join(rows.front(), ",") != kCsvHeader) {
        throw Error(Errc::HeaderMismatch, "expected header " + std::string(kCsvHeader));
    }
    std::vector<ScholarlyArticle> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != 9) {
            throw Error(Errc::RowValidationError, "row has " + std::to_string(row.size()) + " fields",
                        {{"row", r + 1}});
        }
        ScholarlyArticle a;
        a.article_id = ArticleId{row[0]};
        a.title = row[1];
        if (!row[2].empty()) {
            std::size_t pos = 0;
            for (;;) {
                const auto next = row[2].find("; ", pos);
                a.authors.push_back(parse_author_text(std::string_view(row[2]).substr(
                    pos, next == std::string::npos ? std::string::npos : next - pos)));
                if (next == std::string::npos) break;
                pos = next + 2;
            }
        }
        const auto& y = row[3];
        if (std::from_chars(y.data(), y.data() + y.size(), a.year).ec != std::errc{} || y.empty()) {
            throw Error(Errc::RowValidationError, "year is not a number", {{"row", r + 1}});
        }
        a.journal = row[4];
        if (!row[5].empty()) a.doi = row[5];
        if (!row[6].empty()) a.pmid = row[6];
        a.publication_type = row[7];
        if (row[8] != "true" && row[8] != "false") {
            throw Error(Errc::RowValidationError, "open_access must be true or false", {{"row", r + 1}});
        }
        a.open_access = row[8] == "true";
        out.push_back(std::move(a));
    }
    return out;
}

} // namespace fairhub::pubreg
