// Acceptance suite: one line per criterion, nonzero exit if any fails.
// Each criterion runs in a forked child so a crash is reported, not fatal.

#include "access_world.hpp"
#include "gateway_world.hpp"
#include "nomenclature_oracle.hpp"
#include "pid_world.hpp"
#include "pub_world.hpp"
#include "store_model.hpp"
#include "tiff_builder.hpp"
#include "workflow_oracle.hpp"
#include "zip_writer.hpp"

#include "fairhub/catalogues/antibody.hpp"
#include "fairhub/catalogues/cell_line.hpp"
#include "fairhub/catalogues/mouse.hpp"
#include "fairhub/error.hpp"
#include "fairhub/util/crypto.hpp"
#include "fairhub/util/text.hpp"
#include "fairhub/workflows/cases.hpp"
#include "fairhub/workflows/extract.hpp"
#include "fairhub/workflows/zip.hpp"

#include <nlohmann/json.hpp>

#include <sys/mman.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <csignal>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

using namespace fairhub;
using namespace fairhub::testkit;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

/// Accumulates failures; the first few are kept for the report.
struct Tally {
    std::size_t checks = 0;
    std::size_t failures = 0;
    std::vector<std::string> first;

    void expect(bool ok, const std::string& what) {
        ++checks;
        if (ok) return;
        ++failures;
        if (first.size() < 3) first.push_back(what);
    }
    [[nodiscard]] Outcome outcome(const std::string& summary) const {
        if (failures == 0) return {true, summary};
        std::string d = std::to_string(failures) + " of " + std::to_string(checks) + " checks failed";
        for (const auto& f : first) d += "; " + f;
        return {false, d};
    }
};

template <class F>
std::optional<Errc> errc_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

std::string errc_name(const std::optional<Errc>& e) { return e ? std::string(to_string(*e)) : "no error"; }

Outcome run_isolated(const std::function<Outcome()>& body) {
    int fds[2];
    if (pipe(fds) != 0) return {false, "pipe failed"};
    std::cout.flush();
    const pid_t pid = fork();
    if (pid < 0) return {false, "fork failed"};
    if (pid == 0) {
        close(fds[0]);
        Outcome o;
        try {
            o = body();
        } catch (const std::exception& e) {
            o = {false, std::string("uncaught exception: ") + e.what()};
        }
        const std::string msg = o.detail;
        std::size_t off = 0;
        while (off < msg.size()) {
            const auto n = write(fds[1], msg.data() + off, msg.size() - off);
            if (n <= 0) break;
            off += static_cast<std::size_t>(n);
        }
        close(fds[1]);
        _exit(o.pass ? 0 : 1);
    }
    close(fds[1]);
    std::string detail;
    char buf[4096];
    ssize_t n;
    while ((n = read(fds[0], buf, sizeof buf)) > 0) detail.append(buf, static_cast<std::size_t>(n));
    close(fds[0]);
    int status = 0;
    waitpid(pid, &status, 0);
    if (WIFSIGNALED(status)) return {false, "crashed with signal " + std::to_string(WTERMSIG(status)) + " " + detail};
    return {WIFEXITED(status) && WEXITSTATUS(status) == 0, detail};
}

// ---------------------------------------------------------------- access

Outcome access_truth_table() {
    AccessWorld w;
    int ok = 0;
    int total = 0;
    std::string wrong;
    for (const auto scope : kScopes) {
        for (const auto who : kRequesterClasses) {
            ++total;
            const bool got = w.dir.can_access(w.requester(who), w.acl(scope));
            if (got == expected_access(scope, who)) {
                ++ok;
            } else if (wrong.empty()) {
                wrong = std::string(core::to_string(scope)) + "/" + name_of(who);
            }
        }
    }
    std::string d = std::to_string(ok) + "/" + std::to_string(total) + " cases match";
    if (!wrong.empty()) d += ", first mismatch " + wrong;
    return {ok == 24 && total == 24, d};
}

// ---------------------------------------------------------------- pids

Outcome pid_lifecycle() {
    Tally t;
    PidWorld w;
    std::set<std::string> suffixes;
    std::vector<pidreg::PersistentIdentifier> minted;
    const pidreg::ObjectKind kinds[] = {pidreg::ObjectKind::Dataset, pidreg::ObjectKind::Antibody,
                                        pidreg::ObjectKind::MouseLine, pidreg::ObjectKind::CellLine,
                                        pidreg::ObjectKind::Notebook};
    for (int i = 0; i < 1000; ++i) {
        const auto target = std::string(kLandingBase) + "/objects/" + std::to_string(i) + "?v=" + std::to_string(i * 7);
        minted.push_back(w.registry.mint_pid(kPrefix, target, kinds[i % 5]));
        suffixes.insert(minted.back().suffix);
    }
    t.expect(suffixes.size() == 1000, "suffix collisions: " + std::to_string(1000 - suffixes.size()));
    std::size_t resolved = 0;
    for (std::size_t i = 0; i < minted.size(); ++i) {
        const auto& p = minted[i];
        const auto target = std::string(kLandingBase) + "/objects/" + std::to_string(i) + "?v=" + std::to_string(i * 7);
        const bool ok = p.target_url == target && w.registry.resolve_pid(p.prefix, p.suffix).target_url == target &&
                        w.mock.lookup(p.handle()) == target;
        resolved += ok;
        t.expect(ok, "pid " + p.handle() + " does not resolve to its target");
    }

    // Wire protocol: a live session recorded, then replayed from fixture form.
    pidreg::HandleServiceMock mock;
    auto recorder = std::make_shared<http::RecordingTransport>(std::make_shared<http::LoopbackTransport>(mock.handler()));
    pidreg::HandleClient live(recorder);
    std::vector<std::function<std::string(pidreg::HandleClient&)>> script;
    for (int i = 0; i < 60; ++i) {
        const auto s = "wire" + std::to_string(i);
        const auto url = "https://hub.example.org/landing/21.T/" + s + "?a=1&b=\"q\"";
        script.push_back([=](pidreg::HandleClient& c) { return c.put("21.T", s, url) ? "created" : "updated"; });
        if (i % 3 == 0) {
            script.push_back([=](pidreg::HandleClient& c) { return c.put("21.T", s, url + "&moved") ? "created" : "updated"; });
        }
        script.push_back([=](pidreg::HandleClient& c) { return c.get("21.T", s).value_or("<none>"); });
        if (i % 5 == 0) {
            script.push_back([=](pidreg::HandleClient& c) { return c.get("21.T", s + "-absent").value_or("<none>"); });
        }
    }
    std::vector<std::string> live_results;
    for (const auto& step : script) live_results.push_back(step(live));
    const auto exchanges = recorder->exchanges();
    for (const auto& e : exchanges) {
        if (e.request.method == "PUT") {
            const auto url = pidreg::parse_handle_record_body(e.request.body);
            t.expect(url.has_value(), "client PUT body not parseable by the protocol");
            if (url) t.expect(e.request.body == pidreg::handle_record_body(*url), "client PUT body not canonical");
            t.expect(e.response.body == e.request.body, "mock PUT response differs from request body");
        } else if (e.response.status == 200) {
            const auto url = pidreg::parse_handle_record_body(e.response.body);
            t.expect(url && e.response.body == pidreg::handle_record_body(*url), "mock GET body not canonical");
        }
    }
    std::vector<http::Exchange> reloaded;
    for (const auto& e : exchanges) reloaded.push_back(json::parse(json(e).dump()).get<http::Exchange>());
    auto replay = std::make_shared<http::ReplayTransport>(reloaded);
    for (std::size_t i = 0; i < reloaded.size(); ++i) {
        const auto r = replay->send(exchanges[i].request);
        t.expect(r.status == exchanges[i].response.status && r.body == exchanges[i].response.body,
                 "replayed response " + std::to_string(i) + " differs");
    }
    pidreg::HandleClient offline(replay);
    std::vector<std::string> offline_results;
    for (const auto& step : script) offline_results.push_back(step(offline));
    t.expect(offline_results == live_results, "offline client saw different results than live");

    // TAN batch under 8-way contention.
    const auto batch = w.registry.mint_tan_batch(kPrefix, 100, pidreg::ObjectKind::Notebook);
    std::atomic<int> successes{0};
    std::atomic<int> wrong_errors{0};
    std::vector<std::thread> threads;
    for (int th = 0; th < 8; ++th) {
        threads.emplace_back([&, th] {
            std::vector<std::size_t> order(batch.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::shuffle(order.begin(), order.end(), std::mt19937_64(static_cast<std::uint64_t>(th)));
            for (const auto i : order) {
                try {
                    w.registry.consume_tan(kPrefix, batch[i].pid.suffix, batch[i].tan, UserId{"u" + std::to_string(th)});
                    ++successes;
                } catch (const Error& e) {
                    if (e.code() != Errc::TanAlreadyConsumed) ++wrong_errors;
                }
            }
        });
    }
    for (auto& th : threads) th.join();
    t.expect(successes == 100, "TAN successes " + std::to_string(successes.load()));
    t.expect(wrong_errors == 0, "unexpected TAN error codes " + std::to_string(wrong_errors.load()));
    for (const auto& issue : batch) {
        const auto rec = w.registry.tan_record(kPrefix, issue.pid.suffix);
        t.expect(rec && rec->consumed && rec->consumed_by.has_value(), "TAN not marked consumed");
    }

    return t.outcome("1000 minted, " + std::to_string(suffixes.size()) + " distinct suffixes, " +
                     std::to_string(resolved) + " resolved; " + std::to_string(exchanges.size()) +
                     " wire exchanges replayed byte-exact; TAN successes " + std::to_string(successes.load()) + "/100");
}

// ---------------------------------------------------------------- storage

struct Injected : std::runtime_error {
    Injected() : std::runtime_error("injected fault") {}
};

// A child commits with fsync and reports each acknowledgement; the parent
// kills it mid-stream and checks the reopened store.
std::string kill_mid_stream_check(const core::Directory& dir, const UserId& owner, Tally& t) {
    TempDir tmp;
    ManualClock clock;
    PackageId id;
    {
        pkgstore::PackageStore store(dir, clock, {tmp.path / "store", true, std::nullopt, {}});
        id = store.create_package(owner, core::AccessScope::make_private(owner));
    }
    int fds[2];
    if (pipe(fds) != 0) return "pipe failed";
    const pid_t child = fork();
    if (child == 0) {
        close(fds[0]);
        pkgstore::PackageStore store(dir, clock, {tmp.path / "store", true, std::nullopt, {}});
        MutationGen gen(4242);
        for (;;) {
            const auto batch = gen.batch();
            char tag = 'r';
            try {
                store.run_transaction(id, batch, owner);
                tag = 'a';
            } catch (const Error&) {
            }
            if (write(fds[1], &tag, 1) != 1) _exit(3);
        }
    }
    close(fds[1]);
    std::string reports;
    char c;
    std::size_t acked = 0;
    while (acked < 250 && read(fds[0], &c, 1) == 1) {
        reports.push_back(c);
        acked += c == 'a';
    }
    kill(child, SIGKILL);
    int status = 0;
    waitpid(child, &status, 0);
    close(fds[0]);

    MutationGen gen(4242);
    ModelPackage model;
    for (const char r : reports) {
        const bool ok = model.apply(gen.batch());
        t.expect(ok == (r == 'a'), "model and store disagree on a batch before the crash");
    }
    pkgstore::PackageStore reopened(dir, clock, {tmp.path / "store", false, std::nullopt, {}});
    const auto rev = reopened.snapshot(id).revision;
    t.expect(rev >= model.revision, "acknowledged commit lost: revision " + std::to_string(rev) + " < " +
                                        std::to_string(model.revision));
    t.expect(rev <= model.revision + 1, "more than one unacknowledged commit survived");
    while (model.revision < rev) model.apply(gen.batch());
    std::string why;
    t.expect(matches_model(reopened, id, model, &why), "state after kill: " + why);
    for (const auto& [name, f] : model.files) {
        t.expect(reopened.get_file(id, name, owner).bytes == f.bytes, "bytes after kill: " + name);
    }
    return std::to_string(model.revision) + " acknowledged commits survived SIGKILL";
}

Outcome storage_acid() {
    Tally t;
    AccessWorld world;
    ManualClock clock;
    TempDir tmp;
    std::optional<std::size_t> fail_at;
    pkgstore::StoreOptions opts;
    opts.root = tmp.path / "store";
    opts.sync_on_commit = false;
    opts.before_mutation = [&](std::size_t i) {
        if (fail_at && *fail_at == i) throw Injected();
    };
    auto store = std::make_unique<pkgstore::PackageStore>(world.dir, clock, opts);

    constexpr std::size_t kPackages = 16;
    std::vector<PackageId> ids;
    std::vector<ModelPackage> models(kPackages);
    for (std::size_t p = 0; p < kPackages; ++p) {
        ids.push_back(store->create_package(world.owner, world.acl(core::Scope::Group)));
    }
    MutationGen gen(20240601);
    std::mt19937_64 rng(99);
    std::size_t committed = 0, injected = 0, rejected = 0, violations = 0, checksum_errors = 0;
    std::set<std::pair<std::size_t, std::size_t>> fault_points;  // (batch length, index)

    auto verify_bytes = [&](pkgstore::PackageStore& s) {
        for (std::size_t p = 0; p < kPackages; ++p) {
            const auto snap = s.snapshot(ids[p]);
            for (const auto& [name, f] : models[p].files) {
                const auto read = s.get_file(ids[p], name, world.owner);
                const bool ok = read.bytes == f.bytes && crypto::sha256_hex(read.bytes) == snap.files.at(name).checksum_sha256;
                checksum_errors += !ok;
                t.expect(ok, "checksum or bytes of " + name);
            }
        }
    };

    for (std::size_t n = 0; n < 10000; ++n) {
        const std::size_t p = rng() % kPackages;
        const auto batch = gen.batch();
        // cycle the fault over every index including the commit point
        if (n % 2 == 0) {
            fail_at = (n / 2) % (batch.size() + 1);
            fault_points.insert({batch.size(), *fail_at});
        } else {
            fail_at.reset();
        }
        clock.advance(std::chrono::seconds(1));
        const auto before = store->snapshot(ids[p]);
        bool model_ok = false;
        {
            ModelPackage probe = models[p];
            model_ok = probe.apply(batch);
        }
        try {
            store->run_transaction(ids[p], batch, world.owner);
            ++committed;
            const bool ok = models[p].apply(batch);
            if (!ok) ++violations;
            t.expect(ok, "store committed a batch the model rejects");
            t.expect(!fail_at, "commit despite an injected fault");
        } catch (const Injected&) {
            ++injected;
            const bool same = store->snapshot(ids[p]) == before;
            violations += !same;
            t.expect(same, "aborted transaction changed the package");
        } catch (const Error& e) {
            ++rejected;
            const bool same = store->snapshot(ids[p]) == before;
            violations += !same;
            t.expect(same, "rejected transaction changed the package");
            t.expect(!model_ok, std::string("store rejected a valid batch: ") + std::string(to_string(e.code())));
        }
        std::string why;
        if (!matches_model(*store, ids[p], models[p], &why)) {
            ++violations;
            t.expect(false, "model mismatch after tx " + std::to_string(n) + ": " + why);
        }
        if (n % 2500 == 2499) verify_bytes(*store);
    }
    std::size_t covered_max = 0;
    for (std::size_t len = 1; len <= 5; ++len) {
        for (std::size_t i = 0; i <= len; ++i) {
            const bool hit = fault_points.contains({len, i});
            t.expect(hit, "fault index " + std::to_string(i) + " of " + std::to_string(len) + " never injected");
            covered_max += hit;
        }
    }

    // Crash image: copy the live directory, add a torn tail, reopen the copy.
    const auto image = tmp.path / "crash-image";
    std::filesystem::copy(tmp.path / "store", image, std::filesystem::copy_options::recursive);
    {
        std::ofstream log(image / "journal.log", std::ios::app | std::ios::binary);
        log << R"({"op":"commit","package":")" << ids[0].str() << R"(","revision":)" << models[0].revision + 1
            << R"(,"changes":[{"op":"put","na)";
    }
    pkgstore::StoreOptions copy_opts;
    copy_opts.root = image;
    copy_opts.sync_on_commit = false;
    pkgstore::PackageStore recovered(world.dir, clock, copy_opts);
    for (std::size_t p = 0; p < kPackages; ++p) {
        std::string why;
        t.expect(matches_model(recovered, ids[p], models[p], &why), "crash image lost commits: " + why);
    }
    verify_bytes(recovered);
    store.reset();
    const auto killed = kill_mid_stream_check(world.dir, world.owner, t);

    return t.outcome("10000 transactions: " + std::to_string(committed) + " committed, " + std::to_string(injected) +
                     " fault-aborted, " + std::to_string(rejected) + " rejected; " + std::to_string(covered_max) +
                     " fault positions covered; atomicity violations " + std::to_string(violations) +
                     ", checksum mismatches " + std::to_string(checksum_errors) + "; crash image intact; " + killed);
}

// ---------------------------------------------------------------- tiers

Outcome tier_migration() {
    Tally t;
    std::size_t files_total = 0;
    std::size_t moves_total = 0;
    std::size_t residual_runs = 0;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        AccessWorld world;
        ManualClock clock;
        TempDir tmp;
        pkgstore::StoreOptions opts;
        opts.root = tmp.path / "store";
        opts.sync_on_commit = false;
        pkgstore::PackageStore store(world.dir, clock, opts);
        std::mt19937_64 rng(seed);
        auto pick = [&](std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng); };

        std::vector<PackageId> pkgs;
        for (int p = 0; p < 8; ++p) pkgs.push_back(store.create_package(world.owner, world.acl(core::Scope::Group)));
        std::map<std::string, std::pair<PackageId, std::string>> where;
        std::map<std::string, SimFile> sim;
        std::uint64_t tick = 0;
        auto put = [&](std::size_t i) {
            const auto& pkg = pkgs[pick(pkgs.size())];
            const std::string name = "d" + std::to_string(pick(4)) + "/f" + std::to_string(i);
            std::string bytes(pick(400), '\0');
            for (auto& c : bytes) c = static_cast<char>(pick(256));
            clock.advance(std::chrono::seconds(pick(3)));
            store.run_transaction(pkg, {pkgstore::PutFile{name, bytes, {}, ""}}, world.owner);
            const std::string key = pkg.str() + "/" + name;
            where[key] = {pkg, name};
            sim[key] = {key, bytes.size(), ++tick};
        };
        auto touch = [&](std::size_t count) {
            for (std::size_t i = 0; i < count; ++i) {
                auto it = std::next(where.begin(), static_cast<long>(pick(where.size())));
                clock.advance(std::chrono::seconds(pick(3)));
                store.get_file(it->second.first, it->second.second, world.owner);
                sim[it->first].last_access = ++tick;
            }
        };
        auto migrate_and_compare = [&](const std::string& round) {
            std::vector<SimFile> hot;
            std::uint64_t hot_total = 0;
            for (const auto& [key, loc] : where) {
                if (store.snapshot(loc.first).files.at(loc.second).tier == pkgstore::Tier::Hot) {
                    hot.push_back(sim[key]);
                    hot_total += sim[key].size;
                }
            }
            const auto capacity = pick(hot_total + 1);
            const auto min_size = pick(160);
            bool residual = false;
            const auto expected = simulate_demotions(hot, capacity, min_size, &residual);
            const auto report = store.migrate_tiers({capacity, min_size});
            std::vector<std::string> got;
            for (const auto& m : report.moves) got.push_back(m.package_id.str() + "/" + m.name);
            t.expect(got == expected, "seed " + std::to_string(seed) + " " + round + ": demotion order differs (" +
                                          std::to_string(got.size()) + " vs " + std::to_string(expected.size()) + ")");
            t.expect(report.residual_overflow == residual, "seed " + std::to_string(seed) + " " + round + ": residual");
            std::uint64_t moved = 0;
            for (const auto& m : report.moves) moved += m.size_bytes;
            t.expect(report.hot_bytes_before == hot_total && report.hot_bytes_after == hot_total - moved,
                     "hot byte accounting");
            moves_total += got.size();
            residual_runs += residual;
        };

        for (std::size_t i = 0; i < 600; ++i) put(i);
        touch(1500);
        migrate_and_compare("first pass");
        for (std::size_t i = 600; i < 700; ++i) put(i);  // rewrites and new files land hot
        touch(800);
        migrate_and_compare("second pass");
        files_total += where.size();
    }
    return t.outcome(std::to_string(files_total) + " files over 6 seeds, 12 passes, " + std::to_string(moves_total) +
                     " demotions and " + std::to_string(residual_runs) +
                     " residual-overflow passes identical to the simulator");
}

// ---------------------------------------------------------------- bibliography

struct ExpectedRecord {
    std::optional<Errc> error;
    std::string title;
    int year = 0;
    std::string journal;
    std::optional<std::string> doi, pmid, volume, pages, url;
    std::optional<bool> open_access;
    std::vector<pubreg::Author> authors;
};

std::string str_or_empty(const json& j, const char* key) {
    return j.contains(key) && j[key].is_string() ? j[key].get<std::string>() : std::string{};
}

ExpectedRecord expect_europepmc(const http::Response& res) {
    ExpectedRecord e;
    const auto body = json::parse(res.body);
    if (body.value("hitCount", 0) == 0) {
        e.error = Errc::NotFound;
        return e;
    }
    const auto r = body["resultList"]["result"][0];
    if (str_or_empty(r, "title").empty() || str_or_empty(r, "pubYear").empty()) {
        e.error = Errc::MappingError;
        return e;
    }
    e.title = r["title"];
    e.year = std::stoi(r["pubYear"].get<std::string>());
    e.journal = str_or_empty(r, "journalTitle");
    e.pmid = r["pmid"].get<std::string>();
    if (!str_or_empty(r, "doi").empty()) e.doi = r["doi"].get<std::string>();
    if (!str_or_empty(r, "journalVolume").empty()) e.volume = r["journalVolume"].get<std::string>();
    if (!str_or_empty(r, "pageInfo").empty()) e.pages = r["pageInfo"].get<std::string>();
    e.url = "https://europepmc.org/article/MED/" + *e.pmid;
    e.open_access = str_or_empty(r, "isOpenAccess") == "Y";
    std::string authors = str_or_empty(r, "authorString");
    if (!authors.empty() && authors.back() == '.') authors.pop_back();
    std::size_t start = 0;
    while (start < authors.size()) {
        auto end = authors.find(", ", start);
        if (end == std::string::npos) end = authors.size();
        const auto one = authors.substr(start, end - start);
        const auto sp = one.rfind(' ');
        e.authors.push_back({one.substr(0, sp), one.substr(sp + 1), std::nullopt});
        start = end + 2;
    }
    return e;
}

ExpectedRecord expect_datacite(const http::Response& res) {
    ExpectedRecord e;
    if (res.status == 404) {
        e.error = Errc::NotFound;
        return e;
    }
    const auto a = json::parse(res.body)["data"]["attributes"];
    for (const auto& t : a["titles"]) {
        if (!t.contains("titleType")) {
            e.title = t["title"];
            break;
        }
    }
    const auto& y = a["publicationYear"];
    e.year = y.is_number() ? y.get<int>() : std::stoi(y.get<std::string>());
    e.journal = a["publisher"].is_string() ? a["publisher"].get<std::string>() : a["publisher"]["name"].get<std::string>();
    e.doi = a["doi"].get<std::string>();
    e.url = a["url"].get<std::string>();
    for (const auto& c : a["creators"]) {
        pubreg::Author au;
        const std::string name = c["name"];
        if (c.contains("familyName")) {
            au.family = c["familyName"];
            au.given = c.value("givenName", "");
        } else if (c.value("nameType", "") == "Personal" && name.find(", ") != std::string::npos) {
            au.family = name.substr(0, name.find(", "));
            au.given = name.substr(name.find(", ") + 2);
        } else {
            au.family = name;
        }
        for (const auto& id : c.value("nameIdentifiers", json::array())) {
            if (id.value("nameIdentifierScheme", "") == "ORCID") {
                std::string v = id["nameIdentifier"];
                const auto slash = v.rfind('/');
                au.orcid = slash == std::string::npos ? v : v.substr(slash + 1);
            }
        }
        e.authors.push_back(au);
    }
    return e;
}

void compare_record(Tally& t, const std::string& src, const pubreg::ScholarlyArticle& a, const ExpectedRecord& e) {
    t.expect(a.title == e.title, src + " title");
    t.expect(a.year == e.year, src + " year");
    t.expect(a.journal == e.journal, src + " journal");
    t.expect(a.doi == e.doi, src + " doi");
    if (e.pmid) t.expect(a.pmid == e.pmid, src + " pmid");
    if (e.volume) t.expect(a.volume == e.volume, src + " volume");
    if (e.pages) t.expect(a.pages == e.pages, src + " pages");
    t.expect(a.url == e.url, src + " url");
    if (e.open_access) t.expect(a.open_access == *e.open_access, src + " open access");
    t.expect(a.authors == e.authors, src + " authors");
}

Outcome bibliographic_import() {
    Tally t;
    PubWorld w;
    const std::regex pmid_re("EXT_ID:([0-9]+)");
    const std::regex doi_re("^/dois/(.+)$");
    std::vector<std::function<pubreg::ScholarlyArticle()>> imports;
    std::size_t records = 0, errors = 0;
    for (const auto& ex : http::load_fixtures(fixture_dir() / "upstream" / "europepmc")) {
        std::smatch m;
        if (!std::regex_search(ex.request.target, m, pmid_re)) continue;
        const std::string pmid = m[1];
        const auto expected = expect_europepmc(ex.response);
        pubreg::ScholarlyArticle got;
        const auto err = errc_of([&] { got = w.reg.import_by_pmid(pmid, w.member); });
        t.expect(err == expected.error, "pmid " + pmid + ": expected " + errc_name(expected.error) + ", got " + errc_name(err));
        if (expected.error) {
            ++errors;
            continue;
        }
        ++records;
        compare_record(t, "pmid " + pmid, got, expected);
        imports.push_back([&w, pmid] { return w.reg.import_by_pmid(pmid, w.owner); });
    }
    for (const auto& ex : http::load_fixtures(fixture_dir() / "upstream" / "datacite")) {
        std::smatch m;
        if (!std::regex_search(ex.request.target, m, doi_re)) continue;
        const std::string doi = m[1];
        const auto expected = expect_datacite(ex.response);
        pubreg::ScholarlyArticle got;
        const auto err = errc_of([&] { got = w.reg.import_by_doi(doi, w.member); });
        t.expect(err == expected.error, "doi " + doi + ": expected " + errc_name(expected.error) + ", got " + errc_name(err));
        if (expected.error) {
            ++errors;
            continue;
        }
        ++records;
        compare_record(t, "doi " + doi, got, expected);
        imports.push_back([&w, doi] { return w.reg.import_by_doi(doi, w.owner); });
    }
    t.expect(records == 6 && errors == 3, "fixture corpus size changed");
    const auto count = w.reg.all().size();
    const auto before = w.reg.all();
    for (int round = 0; round < 2; ++round) {
        for (const auto& again : imports) (void)again();
    }
    t.expect(w.reg.all().size() == count, "re-import changed the record count");
    t.expect(w.reg.all() == before, "re-import changed stored records");
    return t.outcome(std::to_string(records) + " fixture records match field by field, " + std::to_string(errors) +
                     " fixtures give the expected error; re-import twice keeps " + std::to_string(count) + " records");
}

// ---------------------------------------------------------------- round trips

struct CatalogueWorld : AccessWorld, PidWorld {
    catalogues::AntibodyCatalogue antibodies{dir, PidWorld::clock, &registry};
    catalogues::MouseLineCatalogue mice{dir, PidWorld::clock, &registry};
    catalogues::NamingServiceMock naming_mock;
    catalogues::CellLineCatalogue cells{dir, &registry,
                                        std::make_shared<catalogues::NamingClient>(
                                            std::make_shared<http::LoopbackTransport>(naming_mock.handler())),
                                        "UMG"};
};

const char* const kHostile[] = {"anti-PLN", "clone \"7\"", "a, b", "two\r\nlines", "Ünïcode α", "x;y", "tab\there",
                                "<b>&amp;</b>", "O'Neil", "=SUM(A1)", "plain"};

std::string hostile(std::mt19937_64& rng, std::size_t words = 3) {
    std::string s;
    const auto n = 1 + rng() % words;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + std::string(kHostile[rng() % std::size(kHostile)]);
    return s;
}

catalogues::Antibody random_antibody(std::mt19937_64& rng, bool allow_secondary) {
    catalogues::Antibody a;
    a.kind = allow_secondary && rng() % 4 == 0 ? catalogues::AntibodyKind::Secondary : catalogues::AntibodyKind::Primary;
    a.designation = hostile(rng);
    a.target = hostile(rng, 1);
    a.host_species = rng() % 2 ? "rabbit" : "mouse, BALB/c";
    a.clonality = rng() % 2 ? catalogues::Clonality::Monoclonal : catalogues::Clonality::Polyclonal;
    a.manufacturer = {hostile(rng, 2), "CAT-" + std::to_string(rng() % 100000)};
    if (rng() % 2) a.external_ids.antibody_registry_id = "AB_" + std::to_string(rng() % 9000000 + 1000);
    if (rng() % 3 == 0) a.external_ids.antibodypedia_url = "https://www.antibodypedia.com/gene/" + std::to_string(rng() % 999);
    if (a.kind == catalogues::AntibodyKind::Secondary) a.reactivity_species = "rabbit";
    return a;
}

Outcome format_round_trips() {
    Tally t;
    std::mt19937_64 rng(2024);
    auto identical = [&](const std::string& a, const std::string& b, const std::string& what) {
        t.expect(a == b, what + " not byte-identical");
    };

    // Antibodies: fresh import of primaries, re-import of a mixed set, JSON state.
    CatalogueWorld ab;
    for (int i = 0; i < 120; ++i) ab.antibodies.register_antibody(random_antibody(rng, false), ab.member);
    const auto ab_csv = ab.antibodies.export_csv(ab.member);
    CatalogueWorld ab_fresh;
    ab_fresh.antibodies.import_csv(ab_csv, ab_fresh.member);
    identical(ab_fresh.antibodies.export_csv(ab_fresh.member), ab_csv, "antibody CSV (fresh)");
    CatalogueWorld mixed;
    for (int i = 0; i < 120; ++i) mixed.antibodies.register_antibody(random_antibody(rng, true), mixed.member);
    const auto mixed_csv = mixed.antibodies.export_csv(mixed.member);
    mixed.antibodies.import_csv(mixed_csv, mixed.member);
    identical(mixed.antibodies.export_csv(mixed.member), mixed_csv, "antibody CSV (re-import)");
    {
        const auto state = mixed.antibodies.to_json().dump();
        CatalogueWorld copy;
        copy.antibodies.load_json(json::parse(state));
        identical(copy.antibodies.to_json().dump(), state, "antibody JSON");
    }

    // Cell lines, with derivatives pointing at earlier parents.
    CatalogueWorld cl;
    std::vector<CellLineId> parents;
    for (int i = 0; i < 130; ++i) {
        catalogues::CellLine c;
        c.donor.pseudonym = "P-" + std::to_string(rng() % 1000);
        c.diagnosis = hostile(rng);
        c.ethics.approval_reference = "EK " + std::to_string(rng() % 50) + "/" + std::to_string(rng() % 12);
        c.culture.medium = hostile(rng, 1);
        bool want_name = rng() % 2 == 0;
        if (!parents.empty() && rng() % 4 == 0) {
            c.kind = catalogues::CellKind::GeneticallyModified;
            c.parent_cell_id = parents[rng() % parents.size()];
            // a derivative's name extends its parent's
            want_name = want_name && cl.cells.find(*c.parent_cell_id)->standardized_name.has_value();
        }
        const auto made = cl.cells.register_cell_line(c, want_name, cl.member);
        if (made.kind == catalogues::CellKind::PatientDerived) parents.push_back(made.cell_id);
    }
    const auto cl_csv = cl.cells.export_csv(cl.member);
    CatalogueWorld cl_fresh;
    const auto cl_err = errc_of([&] { cl_fresh.cells.import_csv(cl_csv, cl_fresh.member); });
    t.expect(!cl_err, "cell line CSV import failed: " + errc_name(cl_err));
    identical(cl_fresh.cells.export_csv(cl_fresh.member), cl_csv, "cell line CSV");
    {
        const auto state = cl.cells.to_json().dump();
        CatalogueWorld copy;
        copy.cells.load_json(json::parse(state));
        identical(copy.cells.to_json().dump(), state, "cell line JSON");
    }

    // Mouse lines have no spreadsheet format; JSON state only.
    CatalogueWorld ml;
    const char* genes[] = {"Pln", "Ttn", "Myh6", "Actc1", "Lmna"};
    const char* labs[] = {"Goe", "Jae", "Mrc", "Ox"};
    for (int i = 0; i < 110; ++i) {
        catalogues::MouseLine l;
        l.background_strain = rng() % 2 ? "C57BL/6J" : "FVB/N";
        l.originating_lab = hostile(rng, 1);
        l.provenance = hostile(rng);
        if (rng() % 2) l.mpd_id = "MPD:" + std::to_string(rng() % 999);
        const auto n = rng() % 3;
        for (std::size_t k = 0; k < n; ++k) {
            catalogues::MutationSpec m{genes[rng() % 5], std::nullopt, catalogues::MutationKind::TargetedMutation,
                                       labs[rng() % 4], 0, std::nullopt};
            if (rng() % 3 == 0) {
                m.kind = catalogues::MutationKind::Transgene;
                m.construct = "CAG-GFP";
            }
            l.mutations.push_back(m);
        }
        const auto line = ml.mice.register_mouse_line(l, ml.member);
        if (rng() % 3 == 0) {
            ml.mice.add_mouse(line.line_id, hostile(rng, 1), catalogues::Sex::M, Date{std::chrono::year{2021} / 3 / 4},
                              ml.member);
        }
    }
    {
        const auto state = ml.mice.to_json().dump();
        CatalogueWorld copy;
        copy.mice.load_json(json::parse(state));
        identical(copy.mice.to_json().dump(), state, "mouse line JSON");
    }

    // Articles through the registry: JSON and CSV, then RIS grammar.
    PubWorld src;
    std::vector<pubreg::ScholarlyArticle> corpus;
    for (std::size_t i = 0; i < 150; ++i) corpus.push_back(random_article(rng, i));
    src.reg.import_records(corpus, src.member);
    for (const char* pmid : {"31000001", "31000002", "31000003", "31000006"}) src.reg.import_by_pmid(pmid, src.member);
    src.reg.import_by_doi("10.25625/NC9TF6", src.member);
    std::vector<ArticleId> ids;
    for (const auto& a : src.reg.all()) ids.push_back(a.article_id);
    const auto art_json = src.reg.export_articles(ids, pubreg::ExportFormat::Json, src.member);
    {
        PubWorld dst;
        dst.reg.import_records(pubreg::parse_json_export(art_json), dst.member);
        identical(dst.reg.export_articles(ids, pubreg::ExportFormat::Json, dst.member), art_json, "article JSON");
    }
    const auto art_csv = src.reg.export_articles(ids, pubreg::ExportFormat::Csv, src.member);
    {
        PubWorld dst;
        dst.reg.import_records(pubreg::parse_csv_export(art_csv), dst.member);
        identical(dst.reg.export_articles(ids, pubreg::ExportFormat::Csv, dst.member), art_csv, "article CSV");
    }
    {
        const auto state = src.reg.to_json().dump();
        PubWorld copy;
        copy.reg.load_json(json::parse(state));
        identical(copy.reg.to_json().dump(), state, "publication registry JSON");
    }

    const auto ris = src.reg.export_articles(ids, pubreg::ExportFormat::Ris, src.member);
    const std::regex line_re("^[A-Z][A-Z0-9]  - (.*)$");
    std::size_t ris_records = 0;
    std::vector<std::string> current;
    auto close_record = [&] {
        if (current.empty()) return;
        ++ris_records;
        t.expect(current.front().rfind("TY  - ", 0) == 0, "RIS record does not start with TY");
        t.expect(current.back() == "ER  - ", "RIS record does not end with ER");
        std::size_t ty = 0, er = 0;
        for (const auto& l : current) {
            ty += l.rfind("TY  - ", 0) == 0;
            er += l.rfind("ER  - ", 0) == 0;
        }
        t.expect(ty == 1 && er == 1, "RIS record with repeated TY or ER");
        current.clear();
    };
    for (const auto& line : text::split(ris, "\n")) {
        if (line.empty()) {
            close_record();
            continue;
        }
        t.expect(std::regex_match(line, line_re), "RIS line outside the grammar: " + line.substr(0, 40));
        current.push_back(line);
        if (line == "ER  - ") close_record();
    }
    close_record();
    t.expect(ris_records == ids.size(), "RIS record count " + std::to_string(ris_records));

    return t.outcome("antibodies 120+120, cell lines 130, mouse lines 110 (JSON), articles " +
                     std::to_string(ids.size()) + " byte-identical after export, import, export; " +
                     std::to_string(ris_records) + " RIS records parse");
}

// ---------------------------------------------------------------- nomenclature

catalogues::MutationSpec mut(catalogues::MutationKind kind, std::string gene, std::string lab, int serial,
                             std::optional<std::string> construct = std::nullopt) {
    return {std::move(gene), std::nullopt, kind, std::move(lab), serial, std::move(construct)};
}

Outcome mouse_nomenclature() {
    using catalogues::MutationKind;
    Tally t;
    const auto tm = MutationKind::TargetedMutation;
    const auto tg = MutationKind::Transgene;
    const auto ki = MutationKind::KnockIn;
    struct Case {
        std::string strain;
        std::vector<catalogues::MutationSpec> ms;
        std::string expected;
    };
    const std::vector<Case> pure{
        {"C57BL/6J", {}, "C57BL/6J"},
        {"C57BL/6J", {mut(tm, "Pln", "Goe", 1)}, "C57BL/6J-Pln<tm1Goe>"},
        {"C57BL/6J", {mut(tg, "GFP", "Goe", 1, "CAG-GFP")}, "C57BL/6J-Tg(CAG-GFP)1Goe"},
        {"C57BL/6N", {mut(ki, "Actc1", "Mrc", 3)}, "C57BL/6N-Actc1<tm3Mrc>"},
        {"FVB/N", {mut(tm, "Ttn", "Goe", 2), mut(tg, "Cre", "Jae", 1, "Myh6-cre")}, "FVB/N-Ttn<tm2Goe> Tg(Myh6-cre)1Jae"},
        {"B6", {mut(tg, "Ryr2", "Ox", 4, "tetO-Ryr2"), mut(tm, "Lmna", "Goe", 1), mut(tm, "Pln", "Jae", 12)},
         "B6-Tg(tetO-Ryr2)4Ox Lmna<tm1Goe> Pln<tm12Jae>"},
    };
    std::size_t matched = 0;
    for (const auto& c : pure) {
        const auto got = catalogues::generate_mouse_line_name(c.strain, c.ms);
        matched += got == c.expected;
        t.expect(got == c.expected, "got " + got + " for " + c.expected);
    }
    // Serial continuation through the catalogue.
    CatalogueWorld w;
    auto reg = [&](std::vector<catalogues::MutationSpec> ms) {
        catalogues::MouseLine l;
        l.background_strain = "C57BL/6J";
        l.mutations = std::move(ms);
        return w.mice.register_mouse_line(l, w.member).generated_name;
    };
    const std::vector<std::pair<std::vector<catalogues::MutationSpec>, std::string>> serial{
        {{mut(tm, "Pln", "Goe", 0)}, "C57BL/6J-Pln<tm1Goe>"},
        {{mut(tm, "Pln", "Goe", 0)}, "C57BL/6J-Pln<tm2Goe>"},
        {{mut(tm, "Pln", "Jae", 0)}, "C57BL/6J-Pln<tm1Jae>"},
        {{mut(tm, "Pln", "Goe", 0), mut(ki, "Pln", "Goe", 0)}, "C57BL/6J-Pln<tm3Goe> Pln<tm4Goe>"},
    };
    for (const auto& [ms, expected] : serial) {
        const auto got = reg(ms);
        matched += got == expected;
        t.expect(got == expected, "got " + got + " for " + expected);
    }

    std::mt19937_64 rng(77);
    const char* strains[] = {"C57BL/6J", "C57BL/6N", "FVB/N", "129S6/SvEvTac", "B6;129"};
    const char* genes[] = {"Pln", "Ttn", "Myh6", "Actc1", "Lmna", "Ryr2"};
    const char* labs[] = {"Goe", "Jae", "Mrc", "Ox", "Jl"};
    const char* constructs[] = {"CAG-GFP", "Myh6-cre", "tetO-Ryr2", "Tnnt2-rtTA"};
    std::size_t random_ok = 0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<catalogues::MutationSpec> ms;
        const auto n = rng() % 5;
        for (std::size_t k = 0; k < n; ++k) {
            const int s = 1 + static_cast<int>(rng() % 40);
            switch (rng() % 3) {
                case 0: ms.push_back(mut(tm, genes[rng() % 6], labs[rng() % 5], s)); break;
                case 1: ms.push_back(mut(tg, genes[rng() % 6], labs[rng() % 5], s, constructs[rng() % 4])); break;
                default: ms.push_back(mut(ki, genes[rng() % 6], labs[rng() % 5], s));
            }
        }
        const std::string strain = strains[rng() % 5];
        const auto a = catalogues::generate_mouse_line_name(strain, ms);
        const auto b = catalogues::generate_mouse_line_name(strain, ms);
        const bool ok = a == b && a == oracle_line_name(strain, ms);
        random_ok += ok;
        t.expect(ok, "random input " + std::to_string(i) + ": " + a);
    }
    return t.outcome(std::to_string(matched) + "/10 hand-derived names exact; " + std::to_string(random_ok) +
                     "/1000 random inputs deterministic and equal to the reference grammar");
}

// ---------------------------------------------------------------- workflows

struct CaseWorld : AccessWorld, PidWorld {
    UserId staff;
    UserId evaluator;
    pkgstore::PackageStore store{dir, PidWorld::clock};
    catalogues::AntibodyCatalogue antibodies{dir, PidWorld::clock, &registry};
    catalogues::MouseLineCatalogue mice{dir, PidWorld::clock, &registry};
    workflows::CaseRegistry cases{dir, PidWorld::clock, registry, store, &antibodies, &mice};
    AntibodyId ab;
    MouseId mouse;

    CaseWorld() {
        staff = dir.create_user("Staff", "Stella", make_orcid(201), "pw").user_id;
        dir.set_membership(staff, other_group, core::Role::FacilityStaff);
        evaluator = dir.create_user("Eval", "Eve", make_orcid(202), "pw").user_id;
        catalogues::Antibody a;
        a.designation = "anti-Actinin";
        a.target = "ACTN2";
        a.host_species = "mouse";
        a.manufacturer = {"Acme", "1"};
        ab = antibodies.register_antibody(a, member).antibody.antibody_id;
        catalogues::MouseLine l;
        l.background_strain = "C57BL/6J";
        const auto line = mice.register_mouse_line(l, member);
        mouse = mice.add_mouse(line.line_id, "M1", catalogues::Sex::F, Date{std::chrono::year{2020} / 1 / 1}, member)
                    .mouse_id;
    }

    workflows::WorkflowCase almn() {
        return cases.create_case(workflows::CaseKind::ALMN, member,
                                 workflows::AlmnPayload{"Do gap junctions remodel?", "IF", {}, {}, {}});
    }
    workflows::WorkflowCase echo() {
        return cases.create_case(workflows::CaseKind::Echo, member,
                                 workflows::EchoPayload{{mouse}, "TAC", {{0, "baseline"}}, {}, {}});
    }
};

Outcome workflow_state_machines() {
    using workflows::Action;
    Tally t;
    CaseWorld w;
    std::mt19937_64 rng(5150);
    const auto tiny = make_zip({{"f.txt", "x", false}});
    std::vector<std::pair<CaseId, std::string>> made;
    std::size_t replayed = 0, steps = 0;
    for (int run = 0; run < 10000; ++run) {
        const bool almn = rng() % 2;
        const std::string kind = almn ? "ALMN" : "Echo";
        const auto id = (almn ? w.almn() : w.echo()).case_id;
        made.emplace_back(id, kind);
        std::string state = "Requested";
        const auto length = rng() % 13;
        for (std::size_t step = 0; step < length; ++step) {
            std::vector<const OracleEdge*> options;
            for (const auto& e : oracle_edges(kind)) {
                if (state == e.from) options.push_back(&e);
            }
            if (options.empty()) break;
            const auto& e = *options[rng() % options.size()];
            const auto action = *workflows::parse_action(e.action);
            const std::string who = e.who;
            const UserId actor = who == "requester" ? w.member : who == "evaluator" ? w.evaluator : w.staff;
            const auto err = errc_of([&] {
                if (action == Action::IssueLabels) {
                    w.cases.record_consultation(id, actor, {{w.ab, "1:10", "A"}}, {{"S", "m", ""}});
                } else if (action == Action::StoreData) {
                    w.cases.ingest_dataset_zip(id, actor, tiny);
                } else if (action == Action::AssignEvaluator) {
                    w.cases.assign_evaluator(id, w.evaluator, actor);
                } else {
                    w.cases.transition_case(id, actor, action);
                }
            });
            t.expect(!err, kind + " " + e.action + " from " + state + " failed: " + errc_name(err));
            if (err) break;
            ++steps;
            state = *oracle_step(kind, state, e.action);
        }
        const auto c = *w.cases.find(id);
        std::string replay = "Requested";
        bool ok = std::string(workflows::to_string(c.state)) == state && c.audit_trail.size() >= 1;
        for (std::size_t i = 1; ok && i < c.audit_trail.size(); ++i) {
            const auto& a = c.audit_trail[i];
            if (!a.action || !a.from_state || std::string(workflows::to_string(*a.from_state)) != replay) {
                ok = false;
                break;
            }
            const auto next = oracle_step(kind, replay, std::string(workflows::to_string(*a.action)));
            if (!next || std::string(workflows::to_string(a.to_state)) != *next) {
                ok = false;
                break;
            }
            replay = *next;
        }
        ok = ok && replay == state;
        replayed += ok;
        t.expect(ok, "audit replay of a " + kind + " case ends in " + replay + ", case is in " + state);
    }

    std::vector<std::string> all_actions;
    for (const char* k : {"ALMN", "Echo"}) {
        for (const auto& a : oracle_actions(k)) {
            if (std::find(all_actions.begin(), all_actions.end(), a) == all_actions.end()) all_actions.push_back(a);
        }
    }
    const UserId actors[] = {w.staff, w.member, w.evaluator, w.pi};
    std::size_t rejected = 0;
    int illegal = 0;
    while (illegal < 1000) {
        const auto& [id, kind] = made[rng() % made.size()];
        const auto before = *w.cases.find(id);
        const auto& action = all_actions[rng() % all_actions.size()];
        if (oracle_step(kind, std::string(workflows::to_string(before.state)), action)) continue;
        ++illegal;
        const auto err = errc_of([&] { w.cases.transition_case(id, actors[rng() % 4], *workflows::parse_action(action)); });
        const bool ok = err == Errc::IllegalTransition && *w.cases.find(id) == before;
        rejected += ok;
        t.expect(ok, kind + " " + action + " in " + std::string(workflows::to_string(before.state)) + ": " + errc_name(err));
    }
    return t.outcome("10000 random legal sequences (" + std::to_string(steps) + " actions), " + std::to_string(replayed) +
                     " audit replays reproduce the final state; " + std::to_string(rejected) +
                     "/1000 illegal actions rejected with IllegalTransition and no change");
}

// ---------------------------------------------------------------- parsers

/// Places a buffer flush against an inaccessible page, at its end or start.
class GuardedArena {
public:
    explicit GuardedArena(std::size_t capacity) {
        page_ = static_cast<std::size_t>(sysconf(_SC_PAGESIZE));
        data_pages_ = (capacity + page_ - 1) / page_;
        size_ = (data_pages_ + 2) * page_;
        base_ = static_cast<char*>(mmap(nullptr, size_, PROT_READ | PROT_WRITE, MAP_PRIVATE | MAP_ANONYMOUS, -1, 0));
        if (base_ == MAP_FAILED) throw std::runtime_error("mmap failed");
        mprotect(base_, page_, PROT_NONE);
        mprotect(base_ + (data_pages_ + 1) * page_, page_, PROT_NONE);
    }
    ~GuardedArena() { munmap(base_, size_); }
    GuardedArena(const GuardedArena&) = delete;
    GuardedArena& operator=(const GuardedArena&) = delete;

    std::string_view place(std::string_view bytes, bool at_end) {
        if (bytes.size() > data_pages_ * page_) throw std::runtime_error("buffer larger than arena");
        char* start = at_end ? base_ + (data_pages_ + 1) * page_ - bytes.size() : base_ + page_;
        std::memcpy(start, bytes.data(), bytes.size());
        return {start, bytes.size()};
    }

private:
    char* base_ = nullptr;
    std::size_t page_ = 0;
    std::size_t data_pages_ = 0;
    std::size_t size_ = 0;
};

TiffSpec random_tiff_spec(std::mt19937_64& rng) {
    TiffSpec s;
    s.big_endian = rng() % 2;
    s.long_dimensions = rng() % 2;
    const std::uint32_t cap = s.long_dimensions ? 200000 : 65535;
    s.width = 1 + static_cast<std::uint32_t>(rng() % cap);
    s.height = 1 + static_cast<std::uint32_t>(rng() % cap);
    if (rng() % 4) s.bits = static_cast<std::uint16_t>(std::vector<int>{1, 8, 12, 16, 32}[rng() % 5]);
    s.samples = static_cast<std::uint16_t>(1 + rng() % 4);
    s.filler_tags = static_cast<int>(rng() % 4);
    return s;
}

std::string mutate(std::string bytes, std::mt19937_64& rng) {
    if (bytes.empty()) return bytes;
    switch (rng() % 4) {
        case 0:
            return bytes.substr(0, rng() % bytes.size());
        case 1: {
            const auto k = 1 + rng() % 8;
            for (std::size_t i = 0; i < k; ++i) bytes[rng() % bytes.size()] = static_cast<char>(rng());
            return bytes;
        }
        case 2: {
            // a plausible large offset or count dropped at a random spot
            const std::uint32_t v = rng() % 2 ? 0xFFFFFFF0u : static_cast<std::uint32_t>(rng());
            const auto at = rng() % bytes.size();
            for (std::size_t i = 0; i < 4 && at + i < bytes.size(); ++i) bytes[at + i] = static_cast<char>(v >> (8 * i));
            return bytes;
        }
        default: {
            std::string noise(rng() % 64, '\0');
            for (auto& c : noise) c = static_cast<char>(rng());
            return bytes.substr(0, rng() % bytes.size()) + noise;
        }
    }
}

Outcome parsers() {
    Tally t;
    std::mt19937_64 rng(31337);
    std::size_t matched = 0;
    for (int i = 0; i < 50; ++i) {
        const auto s = random_tiff_spec(rng);
        const auto m = workflows::extract_tiff_metadata(build_tiff(s, &rng));
        const bool ok = m.width_px == s.width && m.height_px == s.height && m.bits_per_sample == s.bits.value_or(1) &&
                        m.byte_order == (s.big_endian ? workflows::ByteOrder::BigEndian : workflows::ByteOrder::LittleEndian);
        matched += ok;
        t.expect(ok, "generated TIFF " + std::to_string(i));
    }

    // Fuzzing. Reads past either end of a buffer hit a PROT_NONE page.
    GuardedArena arena(1 << 20);
    std::size_t fuzzed = 0, errors = 0, other_exceptions = 0;
    auto fuzz_one = [&](const std::string& bytes, int which) {
        const auto view = arena.place(bytes, fuzzed % 2 == 0);
        ++fuzzed;
        try {
            if (which == 0) (void)workflows::extract_tiff_metadata(view);
            else if (which == 1) (void)workflows::extract_xml_metadata(view);
            else (void)workflows::read_zip(view);
        } catch (const Error&) {
            ++errors;
        } catch (const std::exception& e) {
            ++other_exceptions;
            t.expect(false, std::string("non-domain exception: ") + e.what());
        }
    };
    std::vector<std::string> tiff_seeds, xml_seeds, zip_seeds;
    for (int i = 0; i < 20; ++i) tiff_seeds.push_back(build_tiff(random_tiff_spec(rng), &rng));
    xml_seeds = {"<?xml version='1.0'?><m><c n='1'><v>x &amp; y</v></c><c n='2'/></m>",
                 "<scan><objective mag='40'>Plan-Apo</objective><px unit=\"um\">0.1</px></scan>",
                 "<a><![CDATA[raw <data>]]><!-- c --><b x='&#65;'/></a>", "Objective: 40x\nNA: 1.3\n"};
    for (int i = 0; i < 10; ++i) {
        zip_seeds.push_back(make_zip({{"a/b" + std::to_string(i) + ".tif", tiff_seeds[i], rng() % 2 == 0},
                                      {"meta.xml", xml_seeds[i % 4], true},
                                      {"notes.txt", std::string(rng() % 300, 'n'), false}},
                                     i % 3 ? "" : "comment"));
    }
    for (int i = 0; i < 10000; ++i) {
        const int which = i % 3;
        std::string bytes;
        if (i % 10 == 9) {
            bytes.resize(rng() % 512);
            for (auto& c : bytes) c = static_cast<char>(rng());
            if (which == 0 && bytes.size() >= 4) bytes.replace(0, 4, rng() % 2 ? std::string("II*\0", 4) : std::string("MM\0*", 4));
            if (which == 2 && bytes.size() >= 4) bytes.replace(0, 4, "PK\x03\x04");
        } else {
            const auto& seeds = which == 0 ? tiff_seeds : which == 1 ? xml_seeds : zip_seeds;
            bytes = mutate(seeds[rng() % seeds.size()], rng);
        }
        fuzz_one(bytes, which);
    }
    // every truncation of one file per format
    for (const auto* seed : {&tiff_seeds[0], &xml_seeds[0], &zip_seeds[0]}) {
        const int which = seed == &tiff_seeds[0] ? 0 : seed == &xml_seeds[0] ? 1 : 2;
        for (std::size_t cut = 0; cut < seed->size(); ++cut) fuzz_one(seed->substr(0, cut), which);
    }

    // Zip ingestion keeps nested paths and rejects traversal atomically.
    CaseWorld w;
    const auto id = w.echo().case_id;
    for (auto a : {workflows::Action::StartReview, workflows::Action::Accept, workflows::Action::Start}) {
        w.cases.transition_case(id, w.staff, a);
    }
    const char* segments[] = {"raw", "2024-01-08", "Ünïcode dir", "scan 01.tif", "a b", "deep", "x.y.z", "_", "séries"};
    std::size_t preserved = 0, traversal_rejected = 0;
    for (int z = 0; z < 30; ++z) {
        std::vector<ZipInput> entries;
        std::set<std::string> names;
        const auto count = 1 + rng() % 8;
        while (entries.size() < count) {
            std::string name;
            const auto depth = 1 + rng() % 4;
            for (std::size_t d = 0; d < depth; ++d) name += (d ? "/" : "") + std::string(segments[rng() % 9]);
            name += "." + std::to_string(entries.size());
            if (!names.insert(name).second) continue;
            std::string bytes(rng() % 200, '\0');
            for (auto& c : bytes) c = static_cast<char>(rng());
            entries.push_back({name, bytes, rng() % 2 == 0});
        }
        const auto r = w.cases.ingest_dataset_zip(id, w.staff, make_zip(entries));
        const auto snap = w.store.snapshot(r.package_id);
        bool ok = snap.files.size() == entries.size();
        for (const auto& e : entries) {
            const auto it = snap.files.find(e.name);
            ok = ok && it != snap.files.end() && it->second.checksum_sha256 == crypto::sha256_hex(e.bytes);
        }
        preserved += ok;
        t.expect(ok, "zip " + std::to_string(z) + " entry paths or bytes changed");
    }
    const char* evil[] = {"../evil", "/etc/passwd", "a/../../b", "dir/../../../up", "../../x.tif"};
    for (int z = 0; z < 30; ++z) {
        std::vector<ZipInput> entries;
        const auto good = rng() % 5;
        for (std::size_t g = 0; g < good; ++g) entries.push_back({"ok/" + std::to_string(g), "fine", true});
        entries.insert(entries.begin() + static_cast<long>(rng() % (entries.size() + 1)),
                       ZipInput{evil[rng() % 5], "payload", rng() % 2 == 0});
        const auto packages = w.store.package_ids().size();
        const auto pids = w.registry.size();
        const auto before = *w.cases.find(id);
        const auto err = errc_of([&] { w.cases.ingest_dataset_zip(id, w.staff, make_zip(entries)); });
        const bool ok = err == Errc::PathViolation && w.store.package_ids().size() == packages &&
                        w.registry.size() == pids && *w.cases.find(id) == before;
        traversal_rejected += ok;
        t.expect(ok, "traversal zip " + std::to_string(z) + ": " + errc_name(err));
    }
    return t.outcome(std::to_string(matched) + "/50 generated TIFFs match; " + std::to_string(fuzzed) +
                     " fuzzed buffers in guard pages, " + std::to_string(errors) + " rejected with domain errors, " +
                     std::to_string(other_exceptions) + " other exceptions, no crash; " + std::to_string(preserved) +
                     "/30 zips keep every path; " + std::to_string(traversal_rejected) +
                     "/30 traversal zips rejected with nothing stored");
}

// ---------------------------------------------------------------- negotiation

std::string embedded_jsonld(const std::string& page) {
    const std::string open = "<script type=\"application/ld+json\">";
    const auto a = page.find(open);
    if (a == std::string::npos) return {};
    const auto b = page.find("</script>", a);
    if (b == std::string::npos) return {};
    return page.substr(a + open.size(), b - a - open.size());
}

json antibody_body(const std::string& designation, const json& acl) {
    return {{"kind", "Primary"},
            {"designation", designation},
            {"target", "PLN"},
            {"host_species", "rabbit"},
            {"clonality", "Monoclonal"},
            {"manufacturer", {{"name", "Acme Bio"}, {"catalog_number", "AB-1"}}},
            {"acl", acl}};
}

Outcome content_negotiation() {
    Tally t;
    GatewayWorld w;
    const auto owner = w.login(w.owner);
    const auto outsider = w.login(w.outsider);
    const auto staff = w.login(w.staff);
    auto post = [&](const std::string& target, const json& body, const std::string& token) {
        const auto r = w.call("POST", target, body.dump(), token);
        if (r.status != 200 && r.status != 201) throw std::runtime_error(target + " -> " + std::to_string(r.status) + " " + r.body);
        return json::parse(r.body);
    };
    const json priv = {{"scope", "Private"}};
    const json group = {{"scope", "Group"}, {"owning_group", w.group.str()}};

    // Assets to mention.
    std::vector<std::pair<std::string, std::string>> assets;  // kind, id
    std::vector<std::string> restricted_landings;
    auto landing_of = [](const json& pid) {
        return "/landing/" + pid["prefix"].get<std::string>() + "/" + pid["suffix"].get<std::string>();
    };
    for (int i = 0; i < 3; ++i) {
        const auto a = post("/api/v1/antibodies", antibody_body("anti-<X" + std::to_string(i) + ">", i ? group : priv), owner);
        assets.emplace_back("Antibody", a["antibody"]["antibody_id"]);
        if (i == 0) restricted_landings.push_back(landing_of(a["antibody"]["pid"]));
    }
    const auto line = post("/api/v1/mouse-lines",
                           {{"background_strain", "C57BL/6J"},
                            {"mutations", {{{"gene_symbol", "Pln"}, {"mutation_kind", "TargetedMutation"}, {"lab_code", "Goe"}}}},
                            {"provenance", "bred in house & \"secret\" room 4"},
                            {"acl", priv}},
                           owner);
    assets.emplace_back("MouseLine", line["line_id"]);
    restricted_landings.push_back(landing_of(line["pid"]));
    const auto cell = post("/api/v1/cell-lines",
                           {{"donor", {{"pseudonym", "P-<17>"}}}, {"diagnosis", "DCM"}, {"acl", group},
                            {"request_standard_name", true}},
                           owner);
    assets.emplace_back("CellLine", cell["cell_id"]);
    restricted_landings.push_back(landing_of(cell["pid"]));
    const auto issue = w.app->pids.mint_tan_batch(gateway::kDefaultPrefix, 1, pidreg::ObjectKind::Notebook).front();
    const auto nb = post("/api/v1/notebooks",
                         {{"prefix", issue.pid.prefix}, {"suffix", issue.pid.suffix}, {"tan", issue.tan},
                          {"title", "Lab book <7> & co"}, {"storage_location", "Cabinet 7"}, {"group_id", w.group.str()},
                          {"acl", priv}},
                         owner);
    assets.emplace_back("Notebook", nb["notebook_id"]);
    restricted_landings.push_back("/landing/" + issue.pid.handle());

    const auto almn = post("/api/v1/cases",
                           {{"kind", "ALMN"}, {"group_id", w.group.str()},
                            {"payload", {{"research_question", "Spacing?"}, {"planned_procedures", "IF"}}}},
                           owner);
    const std::string case_id = almn["case_id"];
    post("/api/v1/cases/" + case_id + "/transitions", {{"action", "BeginConsultation"}}, staff);
    post("/api/v1/cases/" + case_id + "/consultation",
         {{"stainings", {{{"antibody_id", assets[1].second}, {"dilution", "1:200"}, {"abbreviation", "ACT"}}}},
          {"samples", {{{"sample_id", "S1"}, {"species", "mouse"}}}}},
         staff);
    post("/api/v1/cases/" + case_id + "/transitions", {{"action", "SubmitSamples"}}, owner);
    const auto zip = make_zip({{"raw/mouse-17.tif", build_tiff({4, 4, 8}), true}, {"notes.txt", "n", false}});
    const auto stored = w.call("POST", "/api/v1/cases/" + case_id + "/datasets", zip, owner);
    if (stored.status != 201) throw std::runtime_error("dataset ingest " + stored.body);
    const auto ds = json::parse(stored.body);
    assets.emplace_back("DataPackage", ds["package_id"]);
    restricted_landings.push_back(landing_of(ds["pid"]));
    restricted_landings.push_back("/landing/cases/" + case_id);

    // Twenty articles: fixtures plus hand-made records with awkward text.
    std::vector<std::string> articles;
    for (const char* pmid : {"31000001", "31000002", "31000003", "31000006"}) {
        articles.push_back(post("/api/v1/articles/import", {{"pmid", pmid}}, owner)["article_id"]);
    }
    for (const char* doi : {"10.25625/NC9TF6", "10.5555/fh.0002"}) {
        articles.push_back(post("/api/v1/articles/import", {{"doi", doi}}, owner)["article_id"]);
    }
    const char* titles[] = {"</script><script>alert(1)</script>", "Fish & chips <b>bold</b>", "Quote \" and \\ slash",
                            "Ünïcode α-actinin ✓", "Line\nbreak and\ttab", "<!-- comment --> ]]>", "Emoji 🫀 heart",
                            "Separator   here", "Plain title", "Amp &amp; entity", "Apostrophe 'single'",
                            "Greater > less <", "Mixed </SCRIPT > case", "Trailing space "};
    std::mt19937_64 rng(8);
    for (int i = 0; i < 14; ++i) {
        json body = {{"title", titles[i]},
                     {"year", 2000 + i},
                     {"journal", i % 2 ? "J <Cardio>" : "Stem & Cell"},
                     {"authors", {{{"family", "Ruiz-García"}, {"given", "M"}}, {{"family", "O'Neil"}, {"given", "\"Q\""}}}},
                     {"acl", i % 3 == 0 ? json{{"scope", "Public"}} : group}};
        if (i % 2) body["doi"] = "10.5555/neg." + std::to_string(i);
        articles.push_back(post("/api/v1/articles", body, owner)["article_id"]);
    }
    for (std::size_t i = 0; i < articles.size(); ++i) {
        const auto n = rng() % 4;
        for (std::size_t k = 0; k < n; ++k) {
            const auto& [kind, id] = assets[rng() % assets.size()];
            const auto r = w.call("POST", "/api/v1/articles/" + articles[i] + "/links",
                                  json{{"asset_kind", kind}, {"asset_id", id}}.dump(), owner);
            t.expect(r.status == 201 || r.status == 409, "link " + kind + ": " + std::to_string(r.status) + " " + r.body);
        }
    }

    std::size_t identical = 0;
    for (const auto& id : articles) {
        const auto bare = w.call("GET", "/articles/" + id, "", owner, "application/json");
        const auto page = w.call("GET", "/articles/" + id, "", owner, "text/html");
        const bool ok = bare.status == 200 && page.status == 200 && !bare.body.empty() &&
                        embedded_jsonld(page.body) == bare.body;
        identical += ok;
        t.expect(ok, "article " + id + ": embedded object differs from the bare body");
        const auto anon = w.call("GET", "/articles/" + id, "", "", "application/json");
        if (anon.status == 200) {
            const auto anon_page = w.call("GET", "/articles/" + id);
            t.expect(embedded_jsonld(anon_page.body) == anon.body, "anonymous view of " + id + " differs");
        }
    }
    t.expect(articles.size() == 20, "article count");

    std::size_t same_landing = 0;
    for (const auto& path : restricted_landings) {
        const auto anon = w.call("GET", path);
        const auto own = w.call("GET", path, "", owner);
        const auto other = w.call("GET", path, "", outsider);
        const bool ok = anon.status == 200 && own.body == anon.body && other.body == anon.body &&
                        own.header("Content-Type") == anon.header("Content-Type");
        same_landing += ok;
        t.expect(ok, "landing page " + path + " depends on the requester");
    }
    return t.outcome(std::to_string(identical) + "/" + std::to_string(articles.size()) +
                     " articles: bare JSON-LD equals the embedded object; " + std::to_string(same_landing) + "/" +
                     std::to_string(restricted_landings.size()) +
                     " restricted landing pages identical for anonymous, owner and outsider");
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
        {"access-control truth table", access_truth_table},
        {"PID lifecycle", pid_lifecycle},
        {"storage ACID", storage_acid},
        {"tier migration", tier_migration},
        {"bibliographic import", bibliographic_import},
        {"format round-trips", format_round_trips},
        {"mouse nomenclature", mouse_nomenclature},
        {"workflow state machines", workflow_state_machines},
        {"parsers", parsers},
        {"content negotiation", content_negotiation},
    };
    int passed = 0;
    for (const auto& [name, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto o = run_isolated(fn);
        const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ostringstream line;
        line.precision(1);
        line << std::fixed << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << " (" << secs << "s)";
        std::cout << line.str() << std::endl;
        passed += o.pass;
    }
    std::cout << passed << "/" << criteria.size() << " acceptance criteria passed" << std::endl;
    return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
