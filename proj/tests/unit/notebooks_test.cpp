#include "access_world.hpp"
#include "pid_world.hpp"

#include "fairhub/error.hpp"
#include "fairhub/notebooks/registry.hpp"
#include "fairhub/util/text.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <set>
#include <thread>

using namespace fairhub;
using namespace fairhub::notebooks;
using namespace fairhub::testkit;

namespace {

template <class F>
Errc code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::Internal;
}

struct NotebookWorld : AccessWorld, PidWorld {
    pkgstore::PackageStore store{dir, PidWorld::clock};
    NotebookRegistry notebooks{dir, PidWorld::clock, registry, store};

    pidreg::TanIssue issue() { return registry.mint_tan_batch(kPrefix, 1, pidreg::ObjectKind::Notebook).front(); }

    NotebookRecord register_one(const UserId& who, NotebookDraft draft = {"Lab book 7", "Lab 2, shelf B3"}) {
        const auto t = issue();
        return notebooks.register_notebook(t.pid.prefix, t.pid.suffix, t.tan, who, draft);
    }
};

} // namespace

TEST(Notebooks, RegisterBindsPid) {
    NotebookWorld w;
    const auto t = w.issue();
    const auto rec = w.notebooks.register_notebook(t.pid.prefix, t.pid.suffix, t.tan, w.member,
                                                   {"Lab book 7", "Lab 2, shelf B3"});
    EXPECT_EQ(rec.storage_location, "Lab 2, shelf B3");
    EXPECT_EQ(w.notebooks.get(rec.notebook_id, w.member).storage_location, "Lab 2, shelf B3");
    const auto resolved = w.registry.resolve_pid(t.pid.prefix, t.pid.suffix);
    EXPECT_EQ(resolved.target_url, std::string(kLandingBase) + "/landing/" + t.pid.prefix + "/" + t.pid.suffix);
    EXPECT_EQ(resolved.bound_object, rec.notebook_id.str());
    EXPECT_TRUE(w.registry.tan_record(t.pid.prefix, t.pid.suffix)->consumed);
    EXPECT_EQ(w.notebooks.find_by_pid(t.pid.handle())->notebook_id, rec.notebook_id);
}

TEST(Notebooks, RegistrationErrors) {
    NotebookWorld w;
    const auto t = w.issue();
    const NotebookDraft d{"Book", "Shelf"};
    EXPECT_EQ(code_of([&] { w.notebooks.register_notebook(t.pid.prefix, t.pid.suffix, "WRONG", w.member, d); }),
              Errc::TanMismatch);
    EXPECT_FALSE(w.registry.tan_record(t.pid.prefix, t.pid.suffix)->consumed);
    w.notebooks.register_notebook(t.pid.prefix, t.pid.suffix, t.tan, w.member, d);
    EXPECT_EQ(code_of([&] { w.notebooks.register_notebook(t.pid.prefix, t.pid.suffix, t.tan, w.member, d); }),
              Errc::PidAlreadyBound);
    EXPECT_EQ(w.notebooks.list_notebooks(w.member).size(), 1u);

    const auto t2 = w.issue();
    EXPECT_EQ(code_of([&] { w.notebooks.register_notebook(t2.pid.prefix, t2.pid.suffix, t2.tan, w.member, {"", "x"}); }),
              Errc::ValidationError);
    EXPECT_EQ(code_of([&] { w.notebooks.register_notebook(t2.pid.prefix, t2.pid.suffix, t2.tan, w.stranger, d); }),
              Errc::AccessDenied);
    // a failed registration leaves the TAN usable
    EXPECT_FALSE(w.registry.tan_record(t2.pid.prefix, t2.pid.suffix)->consumed);

    const auto plain = w.registry.mint_pid(kPrefix, "https://x.example/a", pidreg::ObjectKind::Notebook);
    EXPECT_EQ(code_of([&] { w.notebooks.register_notebook(plain.prefix, plain.suffix, "x", w.member, d); }),
              Errc::UnknownPid);
    const auto other = w.registry.mint_tan_batch(kPrefix, 1, pidreg::ObjectKind::Dataset).front();
    EXPECT_EQ(code_of([&] { w.notebooks.register_notebook(other.pid.prefix, other.pid.suffix, other.tan, w.member, d); }),
              Errc::ValidationError);
}

TEST(Notebooks, ConcurrentRegistrationHasOneWinner) {
    NotebookWorld w;
    for (int round = 0; round < 20; ++round) {
        const auto t = w.issue();
        std::atomic<int> wins{0};
        std::atomic<int> losses{0};
        std::vector<std::thread> threads;
        for (int i = 0; i < 8; ++i) {
            threads.emplace_back([&] {
                try {
                    w.notebooks.register_notebook(t.pid.prefix, t.pid.suffix, t.tan, w.member, {"Race", "Bench"});
                    ++wins;
                } catch (const Error& e) {
                    if (e.code() == Errc::TanAlreadyConsumed || e.code() == Errc::PidAlreadyBound) ++losses;
                }
            });
        }
        for (auto& th : threads) th.join();
        EXPECT_EQ(wins.load(), 1);
        EXPECT_EQ(losses.load(), 7);
    }
    // bijection between bound PIDs and notebooks
    std::set<std::string> handles;
    for (const auto& n : w.notebooks.list_notebooks(w.member)) {
        EXPECT_TRUE(handles.insert(n.pid.handle()).second);
        EXPECT_EQ(w.registry.find(n.pid.handle())->bound_object, n.notebook_id.str());
    }
    EXPECT_EQ(handles.size(), 20u);
}

TEST(Notebooks, ScanUpload) {
    NotebookWorld w;
    const auto rec = w.register_one(w.member);
    EXPECT_EQ(code_of([&] { w.notebooks.upload_scan(rec.notebook_id, "scan.pdf", "x", std::nullopt); }),
              Errc::AccessDenied);
    EXPECT_EQ(code_of([&] { w.notebooks.upload_scan(rec.notebook_id, "scan.pdf", "x", w.other_member); }),
              Errc::AccessDenied);
    EXPECT_EQ(code_of([&] { w.notebooks.upload_scan(rec.notebook_id, "../scan.pdf", "x", w.member); }),
              Errc::PathViolation);
    EXPECT_FALSE(w.notebooks.find(rec.notebook_id)->scan_package.has_value());

    // FIPS 180-2 "abc" vector
    const auto f = w.notebooks.upload_scan(rec.notebook_id, "scan.pdf", "abc", w.member);
    EXPECT_EQ(f.checksum_sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(f.media_type_hint, "application/pdf");
    w.notebooks.upload_scan(rec.notebook_id, "pages/2.pdf", "page two", w.member);
    const auto pkg = *w.notebooks.find(rec.notebook_id)->scan_package;
    const auto snap = w.store.snapshot(pkg);
    EXPECT_EQ(snap.revision, 2u);
    EXPECT_EQ(snap.files.size(), 2u);
    EXPECT_EQ(snap.acl, rec.acl);
    EXPECT_EQ(w.store.get_file(pkg, "scan.pdf", w.member).bytes, "abc");
}

TEST(Notebooks, ListingMatchesLinearScan) {
    NotebookWorld w;
    const auto priv = w.register_one(w.owner, {"Private book", "Desk", std::nullopt, std::nullopt,
                                               core::AccessScope::make_private(w.owner)});
    EXPECT_EQ(w.notebooks.list_notebooks(w.owner).size(), 1u);
    EXPECT_TRUE(w.notebooks.list_notebooks(w.stranger).empty());
    EXPECT_TRUE(w.notebooks.list_notebooks(w.member).empty());
    EXPECT_EQ(code_of([&] { (void)w.notebooks.get(priv.notebook_id, w.member); }), Errc::AccessDenied);

    std::mt19937_64 rng(9);
    const std::vector<UserId> owners{w.member, w.owner, w.pi, w.other_member, w.project_user};
    const char* words[] = {"Cardio", "Shelf", "Freezer", "Box", "Room"};
    for (int i = 0; i < 120; ++i) {
        NotebookDraft d;
        d.title = std::string(words[rng() % 5]) + " book " + std::to_string(i);
        d.storage_location = std::string(words[rng() % 5]) + " " + std::to_string(rng() % 10);
        const auto& who = owners[rng() % owners.size()];
        switch (rng() % 4) {
            case 0: d.acl = core::AccessScope::make_private(who); break;
            case 1: d.acl = core::AccessScope::make_group(w.group, who); d.group_id = w.group; break;
            case 2: d.acl = core::AccessScope::make_public(who); break;
            default: break;
        }
        w.register_one(who, d);
    }
    const auto all = w.notebooks.to_json()["notebooks"];
    const std::vector<std::optional<UserId>> requesters{std::nullopt, w.member, w.owner, w.pi, w.other_member,
                                                        w.project_user, w.stranger};
    for (const auto& req : requesters) {
        for (const std::string q : {"", "shelf", "BOX", "book 1"}) {
            for (const auto& grp : std::vector<std::optional<GroupId>>{std::nullopt, w.group}) {
                NotebookFilter f;
                f.text = q;
                f.group = grp;
                std::set<std::string> expected;
                for (const auto& j : all) {
                    const auto n = j.get<NotebookRecord>();
                    if (!w.dir.can_access(req, n.acl)) continue;
                    if (grp && n.group_id != grp) continue;
                    auto lower = [](std::string s) {
                        for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                        return s;
                    };
                    if (!q.empty() && lower(n.title).find(lower(q)) == std::string::npos &&
                        lower(n.storage_location).find(lower(q)) == std::string::npos) {
                        continue;
                    }
                    expected.insert(n.notebook_id.str());
                }
                std::set<std::string> got;
                for (const auto& n : w.notebooks.list_notebooks(req, f)) got.insert(n.notebook_id.str());
                EXPECT_EQ(got, expected);
            }
        }
    }
}

TEST(Notebooks, PersistenceRoundTrip) {
    NotebookWorld w;
    NotebookDraft d{"Dated", "Shelf", w.group,
                    DateRange{std::chrono::year{2019} / 3 / 1, std::chrono::year{2020} / 2 / 29}, std::nullopt};
    const auto rec = w.register_one(w.member, d);
    w.notebooks.upload_scan(rec.notebook_id, "s.pdf", "x", w.member);
    NotebookRegistry copy{w.dir, w.PidWorld::clock, w.registry, w.store};
    copy.load_json(w.notebooks.to_json());
    EXPECT_EQ(copy.to_json(), w.notebooks.to_json());
    EXPECT_EQ(*copy.find(rec.notebook_id), *w.notebooks.find(rec.notebook_id));
}
