#include "fairhub/gateway/api.hpp"

#include "fairhub/util/crypto.hpp"
#include "fairhub/util/text.hpp"

#include <charconv>

namespace fairhub::gateway {
namespace {

using nlohmann::json;
using Segments = std::vector<std::string>;

Segments segments_of(const std::string& path) {
    Segments out;
    for (auto& s : text::split(path, "/")) {
        if (!s.empty()) out.push_back(text::url_decode(s));
    }
    return out;
}

bool match(const Segments& s, std::initializer_list<const char*> pattern) {
    if (s.size() != pattern.size()) return false;
    std::size_t i = 0;
    for (const char* p : pattern) {
        if (std::string_view(p) != "*" && s[i] != p) return false;
        ++i;
    }
    return true;
}

json body_json(const http::Request& r) {
    if (r.body.empty()) return json::object();
    auto j = json::parse(r.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(Errc::ValidationError, "request body must be a JSON object");
    return j;
}

std::string required_string(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string() || j[key].get<std::string>().empty()) {
        throw Error(Errc::ValidationError, std::string("missing field ") + key, {{"fields", {key}}});
    }
    return j[key].get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<std::string>();
}

std::optional<int> query_int(const http::Query& q, const char* key) {
    const auto it = q.find(key);
    if (it == q.end() || it->second.empty()) return std::nullopt;
    int v = 0;
    const auto* end = it->second.data() + it->second.size();
    const auto [p, ec] = std::from_chars(it->second.data(), end, v);
    if (ec != std::errc{} || p != end) throw Error(Errc::ValidationError, std::string("bad query parameter ") + key);
    return v;
}

std::string query_or(const http::Query& q, const char* key, std::string fallback = {}) {
    const auto it = q.find(key);
    return it == q.end() ? fallback : it->second;
}

Date required_date(const json& j, const char* key) {
    const auto d = parse_date(required_string(j, key));
    if (!d) throw Error(Errc::ValidationError, std::string("bad date in ") + key, {{"fields", {key}}});
    return *d;
}

template <class T>
json array_of(const std::vector<T>& items) {
    json a = json::array();
    for (const auto& i : items) a.push_back(i);
    return a;
}

json articles_json(const std::vector<pubreg::ScholarlyArticle>& items) {
    json a = json::array();
    for (const auto& i : items) a.push_back(json(pubreg::article_to_json(i)));
    return a;
}

// New records are owned by their creator and default to project-wide access.
void default_acl(json& j, const UserId& user) {
    if (!j.contains("acl")) j["acl"] = core::AccessScope::make_project(user);
    if (!j["acl"].contains("owner") || j["acl"]["owner"].is_null()) j["acl"]["owner"] = user.str();
}

pkgstore::Metadata metadata_of(const json& j, const char* key) {
    pkgstore::Metadata m;
    if (!j.contains(key)) return m;
    for (const auto& [k, v] : j[key].items()) m[k] = v.get<std::string>();
    return m;
}

std::vector<pkgstore::Mutation> mutations_of(const json& body) {
    std::vector<pkgstore::Mutation> out;
    for (const auto& m : body.value("mutations", json::array())) {
        const auto op = required_string(m, "op");
        if (op == "put") {
            std::string bytes = m.contains("content_base64")
                                    ? crypto::base64_decode(m["content_base64"].get<std::string>())
                                    : m.value("content", std::string{});
            out.push_back(pkgstore::PutFile{required_string(m, "name"), std::move(bytes), metadata_of(m, "metadata"),
                                            m.value("media_type_hint", std::string{})});
        } else if (op == "delete") {
            out.push_back(pkgstore::DeleteFile{required_string(m, "name")});
        } else if (op == "set_package_metadata") {
            out.push_back(pkgstore::SetPackageMetadata{metadata_of(m, "metadata")});
        } else if (op == "set_file_metadata") {
            out.push_back(pkgstore::SetFileMetadata{required_string(m, "name"), metadata_of(m, "metadata")});
        } else {
            throw Error(Errc::ValidationError, "unknown mutation op " + op, {{"fields", {"op"}}});
        }
    }
    return out;
}

workflows::CasePayload payload_of(workflows::CaseKind kind, const json& p) {
    if (kind == workflows::CaseKind::ALMN) {
        workflows::AlmnPayload a;
        a.research_question = p.value("research_question", std::string{});
        a.planned_procedures = p.value("planned_procedures", std::string{});
        return a;
    }
    workflows::EchoPayload e;
    for (const auto& m : p.value("mice", json::array())) e.mice.push_back(MouseId{m.get<std::string>()});
    e.surgery_type = p.value("surgery_type", std::string{});
    for (const auto& t : p.value("timeline", json::array())) {
        e.timeline.push_back({t.at("day_offset").get<int>(), t.value("measurement", std::string{})});
    }
    return e;
}

http::Response created(const json& body) { return http::Response::json(201, body); }
http::Response ok(const json& body) { return http::Response::json(200, body); }

http::Response csv(std::string body) { return http::Response::text(200, std::move(body), "text/csv; charset=utf-8"); }

http::Response html(int status, std::string body) {
    return http::Response::text(status, std::move(body), "text/html; charset=utf-8");
}

} // namespace

http::Response error_response(const Error& e) {
    json body = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
    if (!e.details().is_null()) body["details"] = e.details();
    return http::Response::json(http_status(e.code()), body);
}

http::Handler Api::handler() {
    return [this](const http::Request& r) { return handle(r); };
}

http::Response Api::handle(const http::Request& request) {
    try {
        auto response = route(request);
        if (request.method != "GET" && request.method != "HEAD" && response.status < 400) app_.save_state();
        return response;
    } catch (const Error& e) {
        return error_response(e);
    } catch (const nlohmann::json::exception&) {
        return error_response(Error(Errc::ValidationError, "malformed JSON field"));
    } catch (const std::exception&) {
        return error_response(Error(Errc::Internal, "internal error"));
    }
}

http::Response Api::route(const http::Request& r) {
    const auto s = segments_of(r.path());
    const auto q = r.query();
    const bool get = r.method == "GET" || r.method == "HEAD";
    const bool post = r.method == "POST";
    const bool put = r.method == "PUT";

    // Public pages.
    if (get && match(s, {"landing", "cases", "*"})) {
        try {
            return html(200, render_landing_html(app_.case_landing_view(CaseId{s[2]})));
        } catch (const Error& e) {
            if (http_status(e.code()) != 404) throw;
            return html(404, render_not_found_html("No service request is registered under this identifier."));
        }
    }
    if (get && match(s, {"landing", "*", "*"})) {
        try {
            return html(200, render_landing_html(app_.landing_view(s[1], s[2])));
        } catch (const Error& e) {
            if (http_status(e.code()) != 404) throw;
            return html(404, render_not_found_html("No object is registered under " + s[1] + "/" + s[2] + "."));
        }
    }

    // Bearer token. A presented token must be valid on every route.
    std::optional<UserId> user;
    const auto auth = r.header("Authorization");
    if (!auth.empty()) {
        constexpr std::string_view scheme = "Bearer ";
        if (auth.size() <= scheme.size() || auth.compare(0, scheme.size(), scheme) != 0) {
            throw Error(Errc::Unauthenticated, "expected a Bearer token");
        }
        user = app_.sessions.validate(text::trim(auth.substr(scheme.size())));
        if (!user) throw Error(Errc::Unauthenticated, "session expired or unknown");
    }
    auto require_user = [&]() -> const UserId& {
        if (!user) throw Error(Errc::Unauthenticated, "authentication required");
        return *user;
    };

    if (get && match(s, {"articles", "*"})) {
        return app_.article_representation(ArticleId{s[1]}, r.header("Accept"), user);
    }

    if (s.size() < 3 || s[0] != "api" || s[1] != "v1") throw Error(Errc::NotFound, "no route for " + r.path());
    const Segments a(s.begin() + 2, s.end());

    // auth
    if (post && match(a, {"auth", "login"})) {
        const auto b = body_json(r);
        const auto who = app_.directory.verify_credentials(required_string(b, "username"), b.value("password", ""));
        const auto t = app_.sessions.issue(who.user_id);
        return ok({{"token", t.token}, {"user_id", who.user_id}, {"expires_at", format_iso8601(t.expires_at)}});
    }
    if (post && match(a, {"auth", "logout"})) {
        require_user();
        app_.sessions.revoke(text::trim(auth.substr(7)));
        return ok({{"status", "logged_out"}});
    }

    // articles
    if (get && match(a, {"articles"})) {
        pubreg::SearchQuery sq;
        sq.text = query_or(q, "text");
        sq.year_from = query_int(q, "year_from");
        sq.year_to = query_int(q, "year_to");
        if (const auto g = query_or(q, "group"); !g.empty()) sq.group = GroupId{g};
        if (const auto t = query_or(q, "publication_type"); !t.empty()) sq.publication_type = t;
        if (const auto oa = query_or(q, "open_access"); !oa.empty()) sq.open_access = oa == "true";
        return ok(articles_json(app_.publications.search(user, sq)));
    }
    if (post && match(a, {"articles"})) {
        const auto& u = require_user();
        return created(pubreg::article_to_json(app_.publications.add_article(pubreg::article_from_json(body_json(r)), u)));
    }
    if (post && match(a, {"articles", "import"})) {
        const auto& u = require_user();
        const auto b = body_json(r);
        if (const auto pmid = optional_string(b, "pmid")) {
            return ok(pubreg::article_to_json(app_.publications.import_by_pmid(*pmid, u)));
        }
        if (const auto doi = optional_string(b, "doi")) {
            return ok(pubreg::article_to_json(app_.publications.import_by_doi(*doi, u)));
        }
        throw Error(Errc::ValidationError, "pmid or doi required", {{"fields", {"pmid", "doi"}}});
    }
    if (post && match(a, {"articles", "records"})) {
        const auto& u = require_user();
        const auto format = query_or(q, "format", "json");
        const auto records = format == "csv" ? pubreg::parse_csv_export(r.body) : pubreg::parse_json_export(r.body);
        return ok(articles_json(app_.publications.import_records(records, u)));
    }
    if (get && match(a, {"articles", "export"})) {
        const auto format = pubreg::parse_export_format(query_or(q, "format", "ris"));
        if (!format) throw Error(Errc::ValidationError, "format must be ris, json or csv", {{"fields", {"format"}}});
        std::vector<ArticleId> ids;
        if (const auto list = query_or(q, "ids"); !list.empty()) {
            for (const auto& id : text::split(list, ",")) ids.push_back(ArticleId{id});
        } else {
            for (const auto& art : app_.publications.search(user, {})) ids.push_back(art.article_id);
        }
        const char* types[] = {"application/x-research-info-systems", "application/json", "text/csv; charset=utf-8"};
        return http::Response::text(200, app_.publications.export_articles(ids, *format, user),
                                    types[static_cast<int>(*format)]);
    }
    if (get && match(a, {"articles", "*"})) {
        auto j = json(pubreg::article_to_json(app_.publications.get(ArticleId{a[1]}, user)));
        j["links"] = array_of(app_.publications.links_of(ArticleId{a[1]}));
        return ok(j);
    }
    if (put && match(a, {"articles", "*"})) {
        require_user();
        auto article = pubreg::article_from_json(body_json(r));
        article.article_id = ArticleId{a[1]};
        return ok(pubreg::article_to_json(app_.publications.update_article(article, user)));
    }
    if (post && match(a, {"articles", "*", "links"})) {
        require_user();
        const auto b = body_json(r);
        const auto kind = pubreg::parse_asset_kind(required_string(b, "asset_kind"));
        if (!kind) throw Error(Errc::ValidationError, "unknown asset_kind", {{"fields", {"asset_kind"}}});
        return created(app_.publications.link_asset(ArticleId{a[1]}, *kind, required_string(b, "asset_id"), user));
    }
    if (get && match(a, {"stats", "publications"})) {
        return ok(app_.publications.compute_stats(user));
    }

    // antibodies
    if (get && match(a, {"antibodies"})) return ok(array_of(app_.antibodies.list(user, query_or(q, "text"))));
    if (post && match(a, {"antibodies"})) {
        const auto& u = require_user();
        auto b = body_json(r);
        if (!b.contains("antibody_id")) b["antibody_id"] = "";
        default_acl(b, u);
        const auto reg = app_.antibodies.register_antibody(b.get<catalogues::Antibody>(), u);
        return created({{"antibody", reg.antibody}, {"warnings", reg.warnings}});
    }
    if (get && match(a, {"antibodies", "export"})) return csv(app_.antibodies.export_csv(user));
    if (post && match(a, {"antibodies", "import"})) {
        return ok(array_of(app_.antibodies.import_csv(r.body, require_user())));
    }
    if (get && match(a, {"antibodies", "*"})) {
        json j = app_.antibodies.get(AntibodyId{a[1]}, user);
        return ok(j);
    }
    if (put && match(a, {"antibodies", "*"})) {
        require_user();
        auto b = body_json(r);
        b["antibody_id"] = a[1];
        return ok(app_.antibodies.update_antibody(b.get<catalogues::Antibody>(), user));
    }
    if (get && match(a, {"antibodies", "*", "assessments"})) {
        const AntibodyId id{a[1]};
        (void)app_.antibodies.get(id, user);
        json summary = json::array();
        for (const auto& rs : app_.antibodies.rating_summary(id)) {
            summary.push_back({{"application", std::string(catalogues::to_string(rs.application))},
                               {"other_application", rs.other_application},
                               {"count", rs.count},
                               {"mean", rs.mean}});
        }
        return ok({{"assessments", array_of(app_.antibodies.assessments(id))}, {"summary", summary}});
    }
    if (post && match(a, {"antibodies", "*", "assessments"})) {
        require_user();
        const auto b = body_json(r);
        const auto application = catalogues::parse_application(required_string(b, "application"));
        if (!application) throw Error(Errc::ValidationError, "unknown application", {{"fields", {"application"}}});
        if (!b.contains("rating") || !b["rating"].is_number_integer()) {
            throw Error(Errc::ValidationError, "rating must be an integer", {{"fields", {"rating"}}});
        }
        std::optional<PackageId> image;
        if (const auto p = optional_string(b, "image_package")) image = PackageId{*p};
        return created(app_.antibodies.record_assessment(AntibodyId{a[1]}, *application, b["rating"].get<int>(),
                                                         b.value("comment", std::string{}), image,
                                                         b.value("other_application", std::string{})));
    }

    // mouse lines
    if (get && match(a, {"mouse-lines"})) return ok(array_of(app_.mice.list(user, query_or(q, "text"))));
    if (post && match(a, {"mouse-lines"})) {
        const auto& u = require_user();
        auto b = body_json(r);
        default_acl(b, u);
        return created(app_.mice.register_mouse_line(b.get<catalogues::MouseLine>(), u));
    }
    if (get && match(a, {"mouse-lines", "*"})) {
        json j = app_.mice.get(MouseLineId{a[1]}, user);
        return ok(j);
    }
    if (put && match(a, {"mouse-lines", "*"})) {
        require_user();
        auto b = body_json(r);
        b["line_id"] = a[1];
        return ok(app_.mice.update_mouse_line(b.get<catalogues::MouseLine>(), user));
    }
    if (get && match(a, {"mouse-lines", "*", "mice"})) {
        (void)app_.mice.get(MouseLineId{a[1]}, user);
        return ok(array_of(app_.mice.mice(MouseLineId{a[1]})));
    }
    if (post && match(a, {"mouse-lines", "*", "mice"})) {
        require_user();
        const auto b = body_json(r);
        const auto sex = catalogues::parse_sex(required_string(b, "sex"));
        if (!sex) throw Error(Errc::ValidationError, "sex must be F or M", {{"fields", {"sex"}}});
        return created(app_.mice.add_mouse(MouseLineId{a[1]}, required_string(b, "name"), *sex,
                                           required_date(b, "birth_date"), user));
    }

    // cell lines
    if (get && match(a, {"cell-lines"})) return ok(array_of(app_.cell_lines.list(user, query_or(q, "text"))));
    if (post && match(a, {"cell-lines"})) {
        const auto& u = require_user();
        auto b = body_json(r);
        default_acl(b, u);
        const bool want_name = b.value("request_standard_name", false);
        return created(app_.cell_lines.register_cell_line(b.get<catalogues::CellLine>(), want_name, u));
    }
    if (get && match(a, {"cell-lines", "export"})) return csv(app_.cell_lines.export_csv(user));
    if (post && match(a, {"cell-lines", "import"})) {
        return ok(array_of(app_.cell_lines.import_csv(r.body, require_user())));
    }
    if (get && match(a, {"cell-lines", "*"})) {
        json j = app_.cell_lines.get(CellLineId{a[1]}, user);
        return ok(j);
    }
    if (put && match(a, {"cell-lines", "*"})) {
        require_user();
        auto b = body_json(r);
        b["cell_id"] = a[1];
        return ok(app_.cell_lines.update_cell_line(b.get<catalogues::CellLine>(), user));
    }
    if (post && match(a, {"cell-lines", "*", "standard-name"})) {
        require_user();
        return ok(app_.cell_lines.request_standard_name(CellLineId{a[1]}, user));
    }

    // notebooks
    if (get && match(a, {"notebooks"})) {
        notebooks::NotebookFilter f;
        if (const auto g = query_or(q, "group"); !g.empty()) f.group = GroupId{g};
        if (const auto o = query_or(q, "owner"); !o.empty()) f.owner = UserId{o};
        f.text = query_or(q, "text");
        return ok(array_of(app_.notebooks.list_notebooks(user, f)));
    }
    if (post && match(a, {"notebooks"})) {
        const auto& u = require_user();
        auto b = body_json(r);
        if (b.contains("acl")) default_acl(b, u);
        notebooks::NotebookDraft d;
        d.title = b.value("title", std::string{});
        d.storage_location = b.value("storage_location", std::string{});
        if (const auto g = optional_string(b, "group_id")) d.group_id = GroupId{*g};
        if (b.contains("date_from")) {
            notebooks::DateRange range{required_date(b, "date_from"), std::nullopt};
            if (b.contains("date_to")) range.to = required_date(b, "date_to");
            d.date_range = range;
        }
        if (b.contains("acl")) d.acl = b["acl"].get<core::AccessScope>();
        return created(app_.notebooks.register_notebook(required_string(b, "prefix"), required_string(b, "suffix"),
                                                        required_string(b, "tan"), u, d));
    }
    if (get && match(a, {"notebooks", "*"})) {
        json j = app_.notebooks.get(NotebookId{a[1]}, user);
        return ok(j);
    }
    if (post && match(a, {"notebooks", "*", "scans"})) {
        require_user();
        const auto name = query_or(q, "name");
        if (name.empty()) throw Error(Errc::ValidationError, "name query parameter required", {{"fields", {"name"}}});
        return created(app_.notebooks.upload_scan(NotebookId{a[1]}, name, r.body, user));
    }

    // workflow cases
    if (get && match(a, {"cases"})) return ok(array_of(app_.cases.list(require_user())));
    if (post && match(a, {"cases"})) {
        const auto& u = require_user();
        const auto b = body_json(r);
        const auto kind = workflows::parse_case_kind(required_string(b, "kind"));
        if (!kind) throw Error(Errc::ValidationError, "kind must be ALMN or Echo", {{"fields", {"kind"}}});
        std::optional<GroupId> group;
        if (const auto g = optional_string(b, "group_id")) group = GroupId{*g};
        return created(app_.cases.create_case(*kind, u, payload_of(*kind, b.value("payload", json::object())), group));
    }
    if (get && match(a, {"cases", "*"})) {
        json j = app_.cases.get(CaseId{a[1]}, require_user());
        return ok(j);
    }
    if (post && match(a, {"cases", "*", "transitions"})) {
        const auto& u = require_user();
        const auto b = body_json(r);
        const auto action = workflows::parse_action(required_string(b, "action"));
        if (!action) throw Error(Errc::ValidationError, "unknown action", {{"fields", {"action"}}});
        return ok(app_.cases.transition_case(CaseId{a[1]}, u, *action, b.value("note", std::string{})));
    }
    if (post && match(a, {"cases", "*", "consultation"})) {
        const auto& u = require_user();
        const auto b = body_json(r);
        std::vector<workflows::Staining> stainings;
        for (const auto& st : b.value("stainings", json::array())) {
            stainings.push_back({AntibodyId{required_string(st, "antibody_id")}, st.value("dilution", std::string{}),
                                 st.value("abbreviation", std::string{})});
        }
        std::vector<workflows::Sample> samples;
        for (const auto& sa : b.value("samples", json::array())) {
            samples.push_back({required_string(sa, "sample_id"), sa.value("species", std::string{}),
                               sa.value("description", std::string{})});
        }
        return created(array_of(app_.cases.record_consultation(CaseId{a[1]}, u, stainings, samples)));
    }
    if (post && match(a, {"cases", "*", "datasets"})) {
        const auto& u = require_user();
        const auto res = app_.cases.ingest_dataset_zip(CaseId{a[1]}, u, r.body);
        json images = json::array();
        for (const auto& m : res.images) {
            images.push_back({{"source_file", m.source_file},
                              {"width_px", m.width_px},
                              {"height_px", m.height_px},
                              {"bits_per_sample", m.bits_per_sample},
                              {"byte_order", m.byte_order}});
        }
        json body = {{"package_id", res.package_id}, {"images", images}, {"pid", nullptr}};
        if (res.pid) body["pid"] = *res.pid;
        return created(body);
    }
    if (post && match(a, {"cases", "*", "evaluator"})) {
        const auto& u = require_user();
        const auto b = body_json(r);
        return ok(app_.cases.assign_evaluator(CaseId{a[1]}, UserId{required_string(b, "user_id")}, u));
    }
    if (get && match(a, {"cases", "*", "labels"})) return csv(app_.cases.labels_csv(CaseId{a[1]}, require_user()));

    // packages
    if (post && match(a, {"packages"})) {
        const auto& u = require_user();
        auto b = body_json(r);
        if (!b.contains("acl")) b["acl"] = core::AccessScope::make_private(u);
        default_acl(b, u);
        const auto acl = b["acl"].get<core::AccessScope>();
        std::vector<pkgstore::Mutation> initial = mutations_of(b);
        if (b.contains("metadata")) initial.push_back(pkgstore::SetPackageMetadata{metadata_of(b, "metadata")});
        const auto id = app_.store.create_package(u, acl, initial);
        return created(app_.store.list_package(id, u));
    }
    if (get && match(a, {"packages", "*"})) return ok(app_.store.list_package(PackageId{a[1]}, user));
    if (post && match(a, {"packages", "*", "transactions"})) {
        require_user();
        const auto b = body_json(r);
        std::optional<std::uint64_t> base;
        if (b.contains("base_revision") && !b["base_revision"].is_null()) base = b["base_revision"].get<std::uint64_t>();
        return ok(app_.store.run_transaction(PackageId{a[1]}, mutations_of(b), user, base));
    }
    if (get && match(a, {"packages", "*", "files", "*"})) {
        auto file = app_.store.get_file(PackageId{a[1]}, a[3], user);
        auto type = file.file.media_type_hint.empty() ? std::string("application/octet-stream") : file.file.media_type_hint;
        auto res = http::Response::text(200, std::move(file.bytes), type);
        res.headers["X-Checksum-SHA256"] = file.file.checksum_sha256;
        return res;
    }

    // PID records are public, like their landing pages.
    if (get && match(a, {"pids", "*", "*"})) return ok(app_.pids.resolve_pid(a[1], a[2]));

    throw Error(Errc::NotFound, "no route for " + r.method + " " + r.path());
}

} // namespace fairhub::gateway
