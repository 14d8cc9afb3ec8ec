#include "fairhub/pubreg/registry.hpp"

#include "fairhub/error.hpp"
#include "fairhub/util/text.hpp"

#include <algorithm>
#include <charconv>

namespace fairhub::pubreg {

namespace {

std::string doi_key(const std::string& doi) { return text::to_lower(doi); }

int year_of(const nlohmann::json& v) {
    if (v.is_number_integer()) return v.get<int>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        int y = 0;
        if (std::from_chars(s.data(), s.data() + s.size(), y).ec == std::errc{}) return y;
    }
    throw Error(Errc::MappingError, "publication year missing or not a number");
}

std::optional<std::string> nonempty_string(const nlohmann::json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return std::nullopt;
    auto s = text::trim(it->get<std::string>());
    if (s.empty()) return std::nullopt;
    return s;
}

bool is_support_term(const std::string& term) { return term.rfind("Research Support", 0) == 0; }

std::string map_pub_types(std::string_view field) {
    std::optional<std::string> journal_article;
    for (const auto& part : text::split(field, ";")) {
        const auto canon = canonical_publication_type(part);
        if (!canon) continue;
        if (*canon == "Journal Article") {
            journal_article = canon;
        } else if (!is_support_term(*canon)) {
            return *canon;
        }
    }
    return journal_article.value_or("Journal Article");
}

} // namespace

std::vector<Author> parse_author_string(std::string_view text) {
    std::string s = text::trim(text);
    if (!s.empty() && s.back() == '.') s.pop_back();
    std::vector<Author> out;
    for (const auto& raw : text::split(s, ",")) {
        const std::string entry = text::trim(raw);
        if (entry.empty()) continue;
        const auto space = entry.rfind(' ');
        if (space == std::string::npos) {
            out.push_back({entry, "", std::nullopt});
        } else {
            out.push_back({entry.substr(0, space), entry.substr(space + 1), std::nullopt});
        }
    }
    return out;
}

std::string europepmc_target(const std::string& pmid) {
    return "/webservices/rest/search?query=EXT_ID:" + pmid + "%20AND%20SRC:MED&format=json";
}

std::string datacite_target(const std::string& doi) { return "/dois/" + doi; }

ScholarlyArticle map_europepmc(const nlohmann::json& response) {
    const auto results = response.contains("resultList") ? response["resultList"].value("result", nlohmann::json::array())
                                                         : nlohmann::json::array();
    if (results.empty()) {
        throw Error(Errc::NotFound, "EuropePMC returned no record");
    }
    const auto& r = results.front();
    ScholarlyArticle a;
    const auto title = nonempty_string(r, "title");
    if (!title) {
        throw Error(Errc::MappingError, "EuropePMC record has no title", {{"field", "title"}});
    }
    a.title = *title;
    a.authors = parse_author_string(r.value("authorString", std::string{}));
    a.year = year_of(r.value("pubYear", nlohmann::json{}));
    a.journal = r.value("journalTitle", std::string{});
    a.doi = nonempty_string(r, "doi");
    a.pmid = nonempty_string(r, "pmid");
    a.publication_type = map_pub_types(r.value("pubType", std::string{}));
    a.open_access = r.value("isOpenAccess", std::string("N")) == "Y";
    a.volume = nonempty_string(r, "journalVolume");
    a.pages = nonempty_string(r, "pageInfo");
    if (a.pmid) a.url = "https://europepmc.org/article/MED/" + *a.pmid;
    return a;
}

ScholarlyArticle map_datacite(const nlohmann::json& document) {
    if (!document.contains("data") || !document["data"].contains("attributes")) {
        throw Error(Errc::MappingError, "DataCite document has no data.attributes");
    }
    const auto& at = document["data"]["attributes"];
    ScholarlyArticle a;
    for (const auto& t : at.value("titles", nlohmann::json::array())) {
        if (t.contains("titleType")) continue;
        if (const auto s = nonempty_string(t, "title")) {
            a.title = *s;
            break;
        }
    }
    if (a.title.empty()) {
        throw Error(Errc::MappingError, "DataCite record has no title", {{"field", "title"}});
    }
    for (const auto& c : at.value("creators", nlohmann::json::array())) {
        Author au;
        const auto family = nonempty_string(c, "familyName");
        if (family) {
            au.family = *family;
            au.given = nonempty_string(c, "givenName").value_or("");
        } else {
            const std::string name = c.value("name", std::string{});
            const auto comma = name.find(", ");
            if (c.value("nameType", std::string{}) != "Organizational" && comma != std::string::npos) {
                au.family = name.substr(0, comma);
                au.given = name.substr(comma + 2);
            } else {
                au.family = name;
            }
        }
        for (const auto& id : c.value("nameIdentifiers", nlohmann::json::array())) {
            if (id.value("nameIdentifierScheme", std::string{}) != "ORCID") continue;
            std::string v = id.value("nameIdentifier", std::string{});
            if (const auto slash = v.rfind('/'); slash != std::string::npos) v = v.substr(slash + 1);
            if (core::is_valid_orcid(v)) au.orcid = v;
        }
        a.authors.push_back(std::move(au));
    }
    a.year = year_of(at.value("publicationYear", nlohmann::json{}));
    const auto publisher = at.value("publisher", nlohmann::json{});
    a.journal = publisher.is_object() ? publisher.value("name", std::string{})
                                      : (publisher.is_string() ? publisher.get<std::string>() : std::string{});
    a.doi = nonempty_string(at, "doi");
    if (!a.doi && document["data"].contains("id")) a.doi = document["data"]["id"].get<std::string>();
    const auto types = at.value("types", nlohmann::json::object());
    const std::string general = types.value("resourceTypeGeneral", std::string{});
    if (general == "JournalArticle" || general == "Text") {
        a.publication_type = "Journal Article";
    } else if (general == "Preprint") {
        a.publication_type = "Preprint";
    } else {
        a.publication_type = "Dataset";
    }
    for (const auto& r : at.value("rightsList", nlohmann::json::array())) {
        const std::string uri = r.value("rightsUri", std::string{});
        if (uri == "info:eu-repo/semantics/openAccess" || uri.find("creativecommons.org") != std::string::npos) {
            a.open_access = true;
        }
    }
    a.url = nonempty_string(at, "url");
    return a;
}

void to_json(nlohmann::json& j, const Stats& s) {
    nlohmann::json years = nlohmann::json::array();
    for (const auto& y : s.per_year) years.push_back({{"year", y.year}, {"count", y.count}});
    j = {{"per_year", years}, {"open_access", {{"open", s.open}, {"closed", s.closed}, {"ratio", s.ratio}}}};
}

PublicationRegistry::PublicationRegistry(const core::Directory& directory, const Clock& clock,
                                         std::shared_ptr<http::Transport> europepmc,
                                         std::shared_ptr<http::Transport> datacite)
    : directory_(directory), clock_(clock), europepmc_(std::move(europepmc)), datacite_(std::move(datacite)) {}

void PublicationRegistry::set_asset_resolver(AssetResolver resolver) {
    std::lock_guard lock(mutex_);
    resolver_ = std::move(resolver);
}

nlohmann::json PublicationRegistry::fetch(http::Transport& transport, const std::string& target,
                                          const std::string& what) const {
    http::Request req;
    req.method = "GET";
    req.target = target;
    req.headers["Accept"] = "application/json";
    http::Response resp;
    try {
        resp = transport.send(req);
    } catch (const Error& e) {
        throw Error(Errc::UpstreamUnavailable, what + " unavailable: " + e.what());
    }
    if (resp.status == 404) {
        throw Error(Errc::NotFound, what + " has no such record");
    }
    if (resp.status != 200) {
        throw Error(Errc::UpstreamUnavailable, what + " answered HTTP " + std::to_string(resp.status));
    }
    auto j = nlohmann::json::parse(resp.body, nullptr, false);
    if (j.is_discarded()) {
        throw Error(Errc::MappingError, what + " returned a body that is not JSON");
    }
    return j;
}

void PublicationRegistry::require_project_user(const UserId& user) const {
    if (!directory_.is_project_user(user)) {
        throw Error(Errc::AccessDenied, "only project users can register articles");
    }
}

ScholarlyArticle PublicationRegistry::import_by_pmid(const std::string& pmid, const UserId& importer) {
    if (pmid.empty() || !text::all_digits(pmid)) {
        throw Error(Errc::InvalidArgument, "pmid must consist of digits", {{"fields", {"pmid"}}});
    }
    require_project_user(importer);
    if (!europepmc_) throw Error(Errc::UpstreamUnavailable, "no EuropePMC endpoint configured");
    auto fetched = map_europepmc(fetch(*europepmc_, europepmc_target(pmid), "EuropePMC"));
    if (!fetched.pmid) fetched.pmid = pmid;
    return upsert_imported(std::move(fetched), importer);
}

ScholarlyArticle PublicationRegistry::import_by_doi(const std::string& doi, const UserId& importer) {
    if (!valid_doi(doi)) {
        throw Error(Errc::InvalidArgument, "doi must look like 10.<registrant>/<suffix>", {{"fields", {"doi"}}});
    }
    require_project_user(importer);
    if (!datacite_) throw Error(Errc::UpstreamUnavailable, "no DataCite endpoint configured");
    auto fetched = map_datacite(fetch(*datacite_, datacite_target(doi), "DataCite"));
    if (!fetched.doi) fetched.doi = doi;
    return upsert_imported(std::move(fetched), importer);
}

ScholarlyArticle PublicationRegistry::upsert_imported(ScholarlyArticle fetched, const UserId& importer) {
    validate(fetched);
    std::lock_guard lock(mutex_);
    if (const auto existing = match_locked(fetched)) {
        const auto& old = articles_.at(*existing);
        // bibliographic fields come from upstream; local curation stays
        fetched.article_id = old.article_id;
        fetched.groups = old.groups;
        fetched.subprojects = old.subprojects;
        fetched.external_resources = old.external_resources;
        fetched.acl = old.acl;
        if (!fetched.doi) fetched.doi = old.doi;
        if (!fetched.pmid) fetched.pmid = old.pmid;
    } else {
        fetched.article_id = make_id<ArticleId>();
        fetched.acl = core::AccessScope::make_project(importer);
    }
    store_locked(fetched);
    return fetched;
}

void PublicationRegistry::validate(const ScholarlyArticle& a) const {
    std::vector<std::string> bad;
    if (text::trim(a.title).empty()) bad.emplace_back("title");
    const int current = static_cast<int>(to_date(clock_.now()).year());
    if (a.year < 1800 || a.year > current + 1) bad.emplace_back("year");
    if (a.doi && !valid_doi(*a.doi)) bad.emplace_back("doi");
    if (a.pmid && (a.pmid->empty() || !text::all_digits(*a.pmid))) bad.emplace_back("pmid");
    if (!canonical_publication_type(a.publication_type) ||
        *canonical_publication_type(a.publication_type) != a.publication_type) {
        bad.emplace_back("publication_type");
    }
    for (const auto& au : a.authors) {
        if (text::trim(au.family).empty() || (au.orcid && !core::is_valid_orcid(*au.orcid))) {
            bad.emplace_back("authors");
            break;
        }
    }
    for (const auto& r : a.external_resources) {
        if (!text::is_absolute_url(r.url)) {
            bad.emplace_back("external_resources");
            break;
        }
    }
    if (!a.acl.valid()) bad.emplace_back("acl");
    if (!bad.empty()) {
        throw Error(Errc::ValidationError, "invalid article fields: " + text::join(bad, ", "), {{"fields", bad}});
    }
}

std::optional<ArticleId> PublicationRegistry::match_locked(const ScholarlyArticle& a) const {
    if (!a.article_id.empty() && articles_.contains(a.article_id)) return a.article_id;
    if (a.doi) {
        if (const auto it = by_doi_.find(doi_key(*a.doi)); it != by_doi_.end()) return it->second;
    }
    if (a.pmid) {
        if (const auto it = by_pmid_.find(*a.pmid); it != by_pmid_.end()) return it->second;
    }
    return std::nullopt;
}

void PublicationRegistry::store_locked(const ScholarlyArticle& a) {
    if (const auto it = articles_.find(a.article_id); it != articles_.end()) {
        if (it->second.doi) by_doi_.erase(doi_key(*it->second.doi));
        if (it->second.pmid) by_pmid_.erase(*it->second.pmid);
    }
    articles_[a.article_id] = a;
    if (a.doi) by_doi_[doi_key(*a.doi)] = a.article_id;
    if (a.pmid) by_pmid_[*a.pmid] = a.article_id;
}

ScholarlyArticle PublicationRegistry::add_article(ScholarlyArticle draft, const UserId& requester) {
    require_project_user(requester);
    if (!draft.acl.owner) draft.acl.owner = requester;
    validate(draft);
    std::lock_guard lock(mutex_);
    if (draft.doi && by_doi_.contains(doi_key(*draft.doi))) {
        throw Error(Errc::DuplicateDoi, "an article with doi " + *draft.doi + " exists");
    }
    if (draft.pmid && by_pmid_.contains(*draft.pmid)) {
        throw Error(Errc::DuplicateDoi, "an article with pmid " + *draft.pmid + " exists");
    }
    draft.article_id = make_id<ArticleId>();
    store_locked(draft);
    return draft;
}

ScholarlyArticle PublicationRegistry::update_article(const ScholarlyArticle& article,
                                                     const std::optional<UserId>& requester) {
    validate(article);
    std::lock_guard lock(mutex_);
    const auto it = articles_.find(article.article_id);
    if (it == articles_.end()) {
        throw Error(Errc::UnknownArticle, "unknown article " + article.article_id.str());
    }
    if (!directory_.can_modify(requester, it->second.acl)) {
        throw Error(Errc::AccessDenied, "not allowed to edit article " + article.article_id.str());
    }
    if (article.doi) {
        const auto d = by_doi_.find(doi_key(*article.doi));
        if (d != by_doi_.end() && d->second != article.article_id) {
            throw Error(Errc::DuplicateDoi, "an article with doi " + *article.doi + " exists");
        }
    }
    store_locked(article);
    return article;
}

std::vector<ScholarlyArticle> PublicationRegistry::import_records(const std::vector<ScholarlyArticle>& records,
                                                                  const UserId& requester) {
    require_project_user(requester);
    std::vector<ScholarlyArticle> prepared;
    prepared.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto r = records[i];
        if (!r.acl.owner && r.acl.scope != core::Scope::Group) r.acl.owner = requester;
        try {
            validate(r);
        } catch (Error& e) {
            throw Error(Errc::RowValidationError, "record " + std::to_string(i + 1) + ": " + e.what(),
                        {{"row", i + 1}, {"fields", e.details().is_object() ? e.details().value("fields", nlohmann::json::array())
                                                               : nlohmann::json::array()}});
        }
        prepared.push_back(std::move(r));
    }
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < prepared.size(); ++i) {
        if (const auto existing = match_locked(prepared[i]);
            existing && !directory_.can_modify(requester, articles_.at(*existing).acl)) {
            throw Error(Errc::AccessDenied, "record " + std::to_string(i + 1) + " updates an article you cannot edit",
                        {{"row", i + 1}});
        }
    }
    std::vector<ScholarlyArticle> stored;
    for (auto& r : prepared) {
        if (const auto existing = match_locked(r)) {
            r.article_id = *existing;
        } else if (r.article_id.empty()) {
            r.article_id = make_id<ArticleId>();
        }
        store_locked(r);
        stored.push_back(r);
    }
    return stored;
}

ScholarlyArticle PublicationRegistry::get(const ArticleId& id, const std::optional<UserId>& requester) const {
    std::lock_guard lock(mutex_);
    const auto it = articles_.find(id);
    if (it == articles_.end()) {
        throw Error(Errc::UnknownArticle, "unknown article " + id.str());
    }
    if (!directory_.can_access(requester, it->second.acl)) {
        throw Error(Errc::AccessDenied, "article " + id.str() + " is not visible to you");
    }
    return it->second;
}

std::optional<ScholarlyArticle> PublicationRegistry::find(const ArticleId& id) const {
    std::lock_guard lock(mutex_);
    const auto it = articles_.find(id);
    if (it == articles_.end()) return std::nullopt;
    return it->second;
}

std::optional<ScholarlyArticle> PublicationRegistry::find_by_doi(const std::string& doi) const {
    std::lock_guard lock(mutex_);
    const auto it = by_doi_.find(doi_key(doi));
    if (it == by_doi_.end()) return std::nullopt;
    return articles_.at(it->second);
}

std::optional<ScholarlyArticle> PublicationRegistry::find_by_pmid(const std::string& pmid) const {
    std::lock_guard lock(mutex_);
    const auto it = by_pmid_.find(pmid);
    if (it == by_pmid_.end()) return std::nullopt;
    return articles_.at(it->second);
}

std::vector<ScholarlyArticle> PublicationRegistry::all() const {
    std::lock_guard lock(mutex_);
    std::vector<ScholarlyArticle> out;
    for (const auto& [id, a] : articles_) out.push_back(a);
    return out;
}

AssetLink PublicationRegistry::link_asset(const ArticleId& article, AssetKind kind, const std::string& asset_id,
                                          const std::optional<UserId>& requester) {
    std::unique_lock lock(mutex_);
    const auto it = articles_.find(article);
    if (it == articles_.end()) {
        throw Error(Errc::UnknownArticle, "unknown article " + article.str());
    }
    if (!directory_.can_modify(requester, it->second.acl)) {
        throw Error(Errc::AccessDenied, "not allowed to edit article " + article.str());
    }
    const auto resolver = resolver_;
    lock.unlock();
    if (!resolver || !resolver(kind, asset_id)) {
        throw Error(Errc::UnknownAsset, "no " + std::string(to_string(kind)) + " with id " + asset_id);
    }
    lock.lock();
    AssetLink link{article, kind, asset_id};
    if (!articles_.contains(article)) {
        throw Error(Errc::UnknownArticle, "unknown article " + article.str());
    }
    if (!links_.insert(link).second) {
        throw Error(Errc::DuplicateLink, "article is already linked to this asset");
    }
    return link;
}

std::vector<AssetLink> PublicationRegistry::links_of(const ArticleId& article) const {
    std::lock_guard lock(mutex_);
    std::vector<AssetLink> out;
    for (const auto& l : links_) {
        if (l.article_id == article) out.push_back(l);
    }
    return out;
}

std::vector<AssetLink> PublicationRegistry::links_to(AssetKind kind, const std::string& asset_id) const {
    std::lock_guard lock(mutex_);
    std::vector<AssetLink> out;
    for (const auto& l : links_) {
        if (l.asset_kind == kind && l.asset_id == asset_id) out.push_back(l);
    }
    return out;
}

std::vector<ScholarlyArticle> PublicationRegistry::search(const std::optional<UserId>& requester,
                                                          const SearchQuery& q) const {
    std::vector<ScholarlyArticle> out;
    {
        std::lock_guard lock(mutex_);
        for (const auto& [id, a] : articles_) {
            if (!directory_.can_access(requester, a.acl)) continue;
            if (q.year_from && a.year < *q.year_from) continue;
            if (q.year_to && a.year > *q.year_to) continue;
            if (q.group && !a.groups.contains(*q.group)) continue;
            if (q.publication_type && a.publication_type != *q.publication_type) continue;
            if (q.open_access && a.open_access != *q.open_access) continue;
            if (!q.text.empty()) {
                bool hit = text::icontains(a.title, q.text) || text::icontains(a.journal, q.text);
                for (const auto& au : a.authors) {
                    hit = hit || text::icontains(au.family, q.text) || text::icontains(au.given, q.text);
                }
                if (!hit) continue;
            }
            out.push_back(a);
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const ScholarlyArticle& x, const ScholarlyArticle& y) {
        if (x.year != y.year) return x.year > y.year;
        return x.title < y.title;
    });
    return out;
}

std::string PublicationRegistry::export_articles(const std::vector<ArticleId>& ids, ExportFormat format,
                                                 const std::optional<UserId>& requester) const {
    std::vector<ScholarlyArticle> chosen;
    for (const auto& id : ids) chosen.push_back(get(id, requester));
    switch (format) {
        case ExportFormat::Ris: return to_ris(chosen);
        case ExportFormat::Json: return to_json_export(chosen);
        case ExportFormat::Csv: return to_csv(chosen);
    }
    return {};
}

Stats PublicationRegistry::compute_stats(const std::optional<UserId>& requester) const {
    Stats s;
    std::map<int, std::size_t> years;
    {
        std::lock_guard lock(mutex_);
        for (const auto& [id, a] : articles_) {
            if (!directory_.can_access(requester, a.acl)) continue;
            ++years[a.year];
            (a.open_access ? s.open : s.closed) += 1;
        }
    }
    for (const auto& [y, n] : years) s.per_year.push_back({y, n});
    const auto total = s.open + s.closed;
    s.ratio = total == 0 ? 0.0 : static_cast<double>(s.open) / static_cast<double>(total);
    return s;
}

nlohmann::json PublicationRegistry::to_json() const {
    std::lock_guard lock(mutex_);
    nlohmann::json articles = nlohmann::json::array();
    for (const auto& [id, a] : articles_) articles.push_back(nlohmann::json::parse(article_to_json(a).dump()));
    nlohmann::json links = nlohmann::json::array();
    for (const auto& l : links_) links.push_back(l);
    return {{"articles", articles}, {"links", links}};
}

void PublicationRegistry::load_json(const nlohmann::json& j) {
    std::lock_guard lock(mutex_);
    articles_.clear();
    by_doi_.clear();
    by_pmid_.clear();
    links_.clear();
    for (const auto& a : j.value("articles", nlohmann::json::array())) store_locked(article_from_json(a));
    for (const auto& l : j.value("links", nlohmann::json::array())) {
        links_.insert({ArticleId{l.at("article_id").get<std::string>()},
                       parse_asset_kind(l.at("asset_kind").get<std::string>()).value_or(AssetKind::DataPackage),
                       l.at("asset_id").get<std::string>()});
    }
}

} // namespace fairhub::pubreg
