#include "fairhub/gateway/app.hpp"

#include "fairhub/error.hpp"

#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

namespace fairhub::gateway {
namespace {

// Forwards to the network and keeps every exchange as a fixture file.
class FixtureRecorder final : public http::Transport {
public:
    FixtureRecorder(std::shared_ptr<http::Transport> inner, std::filesystem::path dir)
        : inner_(std::move(inner)), dir_(std::move(dir)) {}

    http::Response send(const http::Request& request) override {
        auto response = inner_->send(request);
        std::lock_guard lock(mutex_);
        http::save_fixture(dir_, {request, response});
        return response;
    }

private:
    std::shared_ptr<http::Transport> inner_;
    std::filesystem::path dir_;
    std::mutex mutex_;
};

std::shared_ptr<http::Transport> upstream(const Config& c, const std::string& service, const std::string& base) {
    const auto dir = c.fixture_dir() / service;
    switch (c.fixture_mode) {
        case FixtureMode::Replay:
            return std::make_shared<http::ReplayTransport>(std::filesystem::exists(dir) ? http::load_fixtures(dir)
                                                                                        : std::vector<http::Exchange>{});
        case FixtureMode::Record:
            std::filesystem::create_directories(dir);
            return std::make_shared<FixtureRecorder>(std::make_shared<http::NetworkTransport>(base), dir);
        case FixtureMode::Off: break;
    }
    return std::make_shared<http::NetworkTransport>(base);
}

const Clock& pick_clock(const AppOptions& o, const SystemClock& fallback) {
    return o.clock ? *o.clock : fallback;
}

pkgstore::StoreOptions store_options(const AppOptions& o) {
    pkgstore::StoreOptions s;
    if (o.data_dir) s.root = *o.data_dir / "store";
    s.sync_on_commit = o.sync_on_commit;
    return s;
}

std::shared_ptr<http::Transport> or_unreachable(std::shared_ptr<http::Transport> t, const char* what) {
    if (t) return t;
    return std::make_shared<http::LoopbackTransport>([what](const http::Request&) -> http::Response {
        throw Error(Errc::ServiceUnreachable, std::string("no transport configured for ") + what);
    });
}

} // namespace

AppOptions options_from_config(const Config& c) {
    AppOptions o;
    o.data_dir = c.data_dir;
    o.base_url = c.pid_base_url;
    o.europepmc = upstream(c, "europepmc", kEuropePmcBase);
    o.datacite = upstream(c, "datacite", kDataCiteBase);
    return o;
}

App::App(AppOptions options)
    : options_(std::move(options)),
      clock_(&pick_clock(options_, system_clock_)),
      directory(options_.password_policy),
      pids(*clock_, options_.base_url,
           options_.pid_transports
               ? options_.pid_transports
               : pidreg::TransportFactory([this](const pidreg::Endpoint& e) -> std::shared_ptr<http::Transport> {
                     if (e.base_url == "embedded") return std::make_shared<http::LoopbackTransport>(pid_mock.handler());
                     return std::make_shared<http::NetworkTransport>(
                         e.base_url, e.credentials.empty() ? std::nullopt : std::optional<std::string>(e.credentials));
                 })),
      store(directory, *clock_, store_options(options_)),
      publications(directory, *clock_, or_unreachable(options_.europepmc, "EuropePMC"),
                   or_unreachable(options_.datacite, "DataCite")),
      antibodies(directory, *clock_, &pids),
      mice(directory, *clock_, &pids),
      cell_lines(directory, &pids,
                 std::make_shared<catalogues::NamingClient>(
                     options_.naming ? options_.naming : std::make_shared<http::LoopbackTransport>(naming_mock.handler())),
                 options_.institution_code),
      notebooks(directory, *clock_, pids, store),
      cases(directory, *clock_, pids, store, &antibodies, &mice),
      sessions(*clock_, options_.session_ttl) {
    load_state();
    if (pids.endpoints().empty()) pids.add_endpoint({"embedded", "embedded", kDefaultPrefix, ""});
    publications.set_asset_resolver([this](pubreg::AssetKind kind, const std::string& id) {
        using K = pubreg::AssetKind;
        switch (kind) {
            case K::Notebook: return notebooks.exists(NotebookId{id});
            case K::Antibody: return antibodies.exists(AntibodyId{id});
            case K::MouseLine: return mice.exists(MouseLineId{id});
            case K::CellLine: return cell_lines.exists(CellLineId{id});
            case K::MicroscopyCase: {
                const auto c = cases.find(CaseId{id});
                return c && c->kind == workflows::CaseKind::ALMN;
            }
            case K::EchoCase: {
                const auto c = cases.find(CaseId{id});
                return c && c->kind == workflows::CaseKind::Echo;
            }
            case K::DataPackage: return store.exists(PackageId{id});
        }
        return false;
    });
}

nlohmann::json App::state_json() const {
    return {{"directory", directory.to_json()},
            {"pids", pids.to_json()},
            {"pid_mock", pid_mock.to_json()},
            {"publications", publications.to_json()},
            {"antibodies", antibodies.to_json()},
            {"mice", mice.to_json()},
            {"cell_lines", cell_lines.to_json()},
            {"notebooks", notebooks.to_json()},
            {"cases", cases.to_json()}};
}

void App::load_state() {
    if (!options_.data_dir) return;
    const auto path = *options_.data_dir / "state.json";
    if (!std::filesystem::exists(path)) return;
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    const auto j = nlohmann::json::parse(buf.str(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(Errc::Internal, "state.json is not valid JSON");
    if (j.contains("directory")) directory.load_json(j["directory"]);
    if (j.contains("pids")) pids.load_json(j["pids"]);
    if (j.contains("pid_mock")) pid_mock.load_json(j["pid_mock"]);
    if (j.contains("publications")) publications.load_json(j["publications"]);
    if (j.contains("antibodies")) antibodies.load_json(j["antibodies"]);
    if (j.contains("mice")) mice.load_json(j["mice"]);
    if (j.contains("cell_lines")) cell_lines.load_json(j["cell_lines"]);
    if (j.contains("notebooks")) notebooks.load_json(j["notebooks"]);
    if (j.contains("cases")) cases.load_json(j["cases"]);
}

void App::save_state() {
    if (!options_.data_dir) return;
    std::lock_guard lock(save_mutex_);
    std::filesystem::create_directories(*options_.data_dir);
    const auto path = *options_.data_dir / "state.json";
    const auto tmp = *options_.data_dir / "state.json.tmp";
    const std::string body = state_json().dump(1);
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0600);
    if (fd < 0) throw Error(Errc::Internal, "cannot write " + tmp.string());
    std::size_t off = 0;
    while (off < body.size()) {
        const auto n = ::write(fd, body.data() + off, body.size() - off);
        if (n <= 0) {
            ::close(fd);
            throw Error(Errc::Internal, "short write to " + tmp.string());
        }
        off += static_cast<std::size_t>(n);
    }
    if (options_.sync_on_commit) ::fsync(fd);
    ::close(fd);
    std::filesystem::rename(tmp, path);
}

std::string App::group_name(const std::optional<GroupId>& g) const {
    if (!g) return {};
    const auto group = directory.find_group(*g);
    return group ? group->name : std::string{};
}

std::optional<std::string> App::public_record(const core::AccessScope& acl, const std::string& path) const {
    if (acl.scope != core::Scope::Public) return std::nullopt;
    return options_.base_url + path;
}

std::vector<Mention> App::mentions_for(const ArticleId& article) const {
    using K = pubreg::AssetKind;
    std::vector<Mention> out;
    for (const auto& link : publications.links_of(article)) {
        Mention m{link.asset_kind, link.asset_id, {}, std::nullopt};
        switch (link.asset_kind) {
            case K::Notebook:
                if (const auto n = notebooks.find(NotebookId{link.asset_id})) {
                    m.name = n->title;
                    m.pid = n->pid;
                }
                break;
            case K::Antibody:
                if (const auto a = antibodies.find(AntibodyId{link.asset_id})) {
                    m.name = a->designation;
                    m.pid = a->pid;
                }
                break;
            case K::MouseLine:
                if (const auto l = mice.find(MouseLineId{link.asset_id})) {
                    m.name = l->generated_name;
                    m.pid = l->pid;
                }
                break;
            case K::CellLine:
                if (const auto c = cell_lines.find(CellLineId{link.asset_id})) {
                    m.name = c->standardized_name.value_or("Cell line");
                    m.pid = c->pid;
                }
                break;
            case K::MicroscopyCase:
            case K::EchoCase:
                if (const auto c = cases.find(CaseId{link.asset_id})) {
                    m.name = std::string(workflows::to_string(c->kind)) + " service request";
                    if (!c->dataset_pids.empty()) m.pid = c->dataset_pids.front();
                }
                break;
            case K::DataPackage:
                if (store.exists(PackageId{link.asset_id})) {
                    const auto snap = store.snapshot(PackageId{link.asset_id});
                    const auto t = snap.package_metadata.find("title");
                    m.name = t == snap.package_metadata.end() ? "Data package" : t->second;
                    m.pid = pids.find_bound(link.asset_id);
                }
                break;
        }
        out.push_back(std::move(m));
    }
    return out;
}

std::string App::article_jsonld_text(const ArticleId& id, const std::optional<UserId>& requester) const {
    const auto article = publications.get(id, requester);
    return serialize_jsonld(article_jsonld(article, mentions_for(id), options_.base_url));
}

http::Response App::article_representation(const ArticleId& id, std::string_view accept,
                                           const std::optional<UserId>& requester) const {
    const auto article = publications.get(id, requester);
    const auto mentions = mentions_for(id);
    const auto body = serialize_jsonld(article_jsonld(article, mentions, options_.base_url));
    http::Response r;
    r.headers["Vary"] = "Accept";
    if (wants_json(accept)) {
        r.headers["Content-Type"] = "application/ld+json";
        r.body = body;
    } else {
        r.headers["Content-Type"] = "text/html; charset=utf-8";
        r.body = article_html(article, mentions, body);
    }
    return r;
}

LandingPageView App::landing_view(std::string_view prefix, std::string_view suffix) const {
    using pidreg::ObjectKind;
    const auto pid = pids.resolve_pid(prefix, suffix);
    const std::string handle = pid.handle();
    if (!pid.bound_object) throw Error(Errc::UnknownPid, "PID " + handle + " is not bound to an object yet");
    const std::string& id = *pid.bound_object;
    LandingPageView v;
    v.pid = handle;
    v.object_kind = std::string(pidreg::to_string(pid.object_kind));
    v.created_at = pid.created_at;
    auto missing = [&] { return Error(Errc::UnknownPid, "PID " + handle + " points to no object here"); };
    switch (pid.object_kind) {
        case ObjectKind::Antibody: {
            const auto a = antibodies.find(AntibodyId{id});
            if (!a) throw missing();
            v.title_or_designation = a->designation;
            v.owning_group_name = group_name(a->acl.owning_group);
            v.full_record_url = public_record(a->acl, "/api/v1/antibodies/" + id);
            if (a->acl.scope == core::Scope::Public && a->external_ids.antibody_registry_id) {
                v.external_links.emplace_back("Antibody Registry " + *a->external_ids.antibody_registry_id,
                                              catalogues::antibody_registry_url(*a->external_ids.antibody_registry_id));
            }
            break;
        }
        case ObjectKind::MouseLine: {
            const auto l = mice.find(MouseLineId{id});
            if (!l) throw missing();
            v.title_or_designation = l->generated_name;
            v.owning_group_name = group_name(l->acl.owning_group);
            v.full_record_url = public_record(l->acl, "/api/v1/mouse-lines/" + id);
            break;
        }
        case ObjectKind::CellLine: {
            const auto c = cell_lines.find(CellLineId{id});
            if (!c) throw missing();
            v.title_or_designation = c->standardized_name.value_or("Cell line");
            v.owning_group_name = group_name(c->acl.owning_group);
            v.full_record_url = public_record(c->acl, "/api/v1/cell-lines/" + id);
            break;
        }
        case ObjectKind::Notebook: {
            const auto n = notebooks.find(NotebookId{id});
            if (!n) throw missing();
            v.title_or_designation = n->title;
            v.owning_group_name = group_name(n->group_id ? n->group_id : n->acl.owning_group);
            v.full_record_url = public_record(n->acl, "/api/v1/notebooks/" + id);
            break;
        }
        case ObjectKind::Dataset: {
            if (!store.exists(PackageId{id})) throw missing();
            const auto snap = store.snapshot(PackageId{id});
            const auto t = snap.package_metadata.find("title");
            v.title_or_designation = t == snap.package_metadata.end() ? "Data package" : t->second;
            v.owning_group_name = group_name(snap.acl.owning_group);
            v.full_record_url = public_record(snap.acl, "/api/v1/packages/" + id);
            break;
        }
        case ObjectKind::LabelSet: {
            const auto c = cases.find(CaseId{id});
            if (!c) throw missing();
            v.title_or_designation = std::string(workflows::to_string(c->kind)) + " sample label";
            v.owning_group_name = group_name(c->group_id);
            break;
        }
        case ObjectKind::Article: {
            const auto a = publications.find(ArticleId{id});
            if (!a) throw missing();
            v.title_or_designation = a->title;
            v.owning_group_name = a->groups.empty() ? std::string{} : group_name(*a->groups.begin());
            v.full_record_url = public_record(a->acl, "/articles/" + id);
            break;
        }
    }
    return v;
}

LandingPageView App::case_landing_view(const CaseId& id) const {
    const auto c = cases.find(id);
    if (!c) throw Error(Errc::UnknownCase, "unknown case " + id.str());
    LandingPageView v;
    v.object_kind = std::string(workflows::to_string(c->kind)) + " service request";
    v.title_or_designation = v.object_kind;
    v.owning_group_name = group_name(c->group_id);
    v.created_at = c->audit_trail.front().timestamp;
    return v;
}

} // namespace fairhub::gateway
