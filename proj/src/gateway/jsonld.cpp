#include "fairhub/gateway/jsonld.hpp"

#include "fairhub/util/text.hpp"

namespace fairhub::gateway {
namespace {

using ojson = nlohmann::ordered_json;

ojson property(std::string_view id, const std::string& value) {
    return {{"@type", "PropertyValue"}, {"propertyID", id}, {"value", value}};
}

std::string_view schema_type(pubreg::AssetKind kind) {
    using K = pubreg::AssetKind;
    switch (kind) {
        case K::Notebook: return "CreativeWork";
        case K::Antibody:
        case K::MouseLine:
        case K::CellLine: return "Product";
        default: return "Dataset";
    }
}

std::string display_name(const pubreg::Author& a) {
    return a.given.empty() ? a.family : a.given + " " + a.family;
}

} // namespace

ojson article_jsonld(const pubreg::ScholarlyArticle& a, const std::vector<Mention>& mentions,
                     const std::string& base_url) {
    const std::string page = base_url + "/articles/" + a.article_id.str();
    ojson doc;
    doc["@context"] = "https://schema.org";
    doc["@type"] = "ScholarlyArticle";
    doc["@id"] = page;
    doc["url"] = page;
    doc["headline"] = a.title;
    doc["name"] = a.title;
    ojson authors = ojson::array();
    for (const auto& au : a.authors) {
        ojson p{{"@type", "Person"}, {"name", display_name(au)}, {"familyName", au.family}};
        if (!au.given.empty()) p["givenName"] = au.given;
        if (au.orcid) {
            p["identifier"] = property("ORCID", *au.orcid);
            p["sameAs"] = "https://orcid.org/" + *au.orcid;
        }
        authors.push_back(std::move(p));
    }
    doc["author"] = std::move(authors);
    doc["datePublished"] = std::to_string(a.year);
    ojson ids = ojson::array();
    if (a.doi) ids.push_back(property("DOI", *a.doi));
    if (a.pmid) ids.push_back(property("PMID", *a.pmid));
    doc["identifier"] = std::move(ids);
    if (a.doi) doc["sameAs"] = "https://doi.org/" + *a.doi;
    if (!a.journal.empty()) doc["isPartOf"] = {{"@type", "Periodical"}, {"name", a.journal}};
    if (a.pages) doc["pagination"] = *a.pages;
    doc["genre"] = a.publication_type;
    doc["isAccessibleForFree"] = a.open_access;
    ojson m = ojson::array();
    for (const auto& x : mentions) {
        ojson item{{"@type", schema_type(x.kind)}, {"additionalType", pubreg::to_string(x.kind)}, {"name", x.name}};
        if (x.pid) {
            item["identifier"] = property("Handle", x.pid->handle());
            item["url"] = "https://hdl.handle.net/" + x.pid->handle();
        }
        m.push_back(std::move(item));
    }
    doc["mentions"] = std::move(m);
    return doc;
}

std::string serialize_jsonld(const ojson& doc) {
    const std::string raw = doc.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    std::string out;
    out.reserve(raw.size());
    for (const char c : raw) {
        switch (c) {
            case '<': out += "\\u003c"; break;
            case '>': out += "\\u003e"; break;
            case '&': out += "\\u0026"; break;
            default: out += c;
        }
    }
    return out;
}

std::string article_html(const pubreg::ScholarlyArticle& a, const std::vector<Mention>& mentions,
                         const std::string& jsonld_text) {
    using text::html_escape;
    std::string h;
    h += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
    h += "<title>" + html_escape(a.title) + "</title>\n";
    h += "<script type=\"application/ld+json\">" + jsonld_text + "</script>\n";
    h += "</head>\n<body>\n<article>\n<h1>" + html_escape(a.title) + "</h1>\n";
    std::vector<std::string> names;
    for (const auto& au : a.authors) names.push_back(html_escape(display_name(au)));
    h += "<p class=\"authors\">" + text::join(names, ", ") + "</p>\n";
    h += "<p class=\"source\">" + html_escape(a.journal) + " (" + std::to_string(a.year) + ")</p>\n";
    if (a.doi) {
        h += "<p class=\"doi\">DOI: <a href=\"https://doi.org/" + html_escape(*a.doi) + "\">" + html_escape(*a.doi) +
             "</a></p>\n";
    }
    if (a.pmid) h += "<p class=\"pmid\">PMID: " + html_escape(*a.pmid) + "</p>\n";
    if (!mentions.empty()) {
        h += "<h2>Linked resources</h2>\n<ul class=\"mentions\">\n";
        for (const auto& m : mentions) {
            h += "<li>" + std::string(pubreg::to_string(m.kind)) + ": " + html_escape(m.name);
            if (m.pid) h += " (hdl:" + html_escape(m.pid->handle()) + ")";
            h += "</li>\n";
        }
        h += "</ul>\n";
    }
    h += "</article>\n</body>\n</html>\n";
    return h;
}

bool wants_json(std::string_view accept) {
    for (const auto& part : text::split(accept, ",")) {
        const auto pieces = text::split(part, ";");
        const auto type = text::to_lower(text::trim(pieces.front()));
        if (type != "application/json" && type != "application/ld+json") continue;
        bool zero = false;
        for (std::size_t i = 1; i < pieces.size(); ++i) {
            const auto param = text::trim(pieces[i]);
            if (param.rfind("q=", 0) == 0) {
                const auto q = param.substr(2);
                zero = q.find_first_not_of("0.") == std::string::npos;
            }
        }
        if (!zero) return true;
    }
    return false;
}

} // namespace fairhub::gateway
