#include "access_world.hpp"
#include "store_model.hpp"

#include "fairhub/error.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <thread>

using namespace fairhub;
using namespace fairhub::pkgstore;
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

struct StoreFixture : ::testing::Test {
    AccessWorld world;
    ManualClock clock;
    TempDir tmp;

    std::unique_ptr<PackageStore> open(StoreOptions opts = {}) {
        opts.root = tmp.path / "store";
        opts.sync_on_commit = false;
        return std::make_unique<PackageStore>(world.dir, clock, std::move(opts));
    }
};

} // namespace

TEST_F(StoreFixture, CreateGivesEmptyDistinctPackages) {
    auto store = open();
    const auto a = store->create_package(world.owner, world.acl(core::Scope::Group));
    const auto b = store->create_package(world.owner, world.acl(core::Scope::Group));
    EXPECT_NE(a, b);
    const auto snap = store->list_package(a, world.owner);
    EXPECT_TRUE(snap.files.empty());
    EXPECT_EQ(snap.revision, 0u);
    EXPECT_EQ(a.str().size(), 36u);
}

TEST_F(StoreFixture, PrivateWithoutOwnerIsRejected) {
    auto store = open();
    EXPECT_EQ(code_of([&] { store->create_package(world.owner, core::AccessScope{core::Scope::Private, {}, {}}); }),
              Errc::ValidationError);
}

TEST_F(StoreFixture, EmptyFileChecksum) {
    auto store = open();
    const auto id = store->create_package(world.owner, world.acl(core::Scope::Group));
    const auto snap = store->run_transaction(id, {PutFile{"a.txt", "", {}, ""}}, world.owner);
    const auto& f = snap.files.at("a.txt");
    EXPECT_EQ(f.checksum_sha256, "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(f.size_bytes, 0u);
    EXPECT_EQ(f.media_type_hint, "text/plain");
    EXPECT_EQ(snap.revision, 1u);
}

TEST_F(StoreFixture, FailedTransactionLeavesPackageUntouched) {
    auto store = open();
    const auto id = store->create_package(world.owner, world.acl(core::Scope::Group),
                                          {PutFile{"keep.txt", "kept", {{"k", "v"}}, ""}});
    const auto before = store->snapshot(id);
    EXPECT_EQ(code_of([&] {
                  store->run_transaction(id, {PutFile{"x", "new", {}, ""}, DeleteFile{"missing"}}, world.owner);
              }),
              Errc::UnknownFile);
    EXPECT_EQ(store->snapshot(id), before);
    EXPECT_EQ(code_of([&] { store->get_file(id, "x", world.owner); }), Errc::UnknownFile);
    EXPECT_EQ(code_of([&] { store->run_transaction(id, {PutFile{"../x", "", {}, ""}}, world.owner); }),
              Errc::PathViolation);
    EXPECT_EQ(store->snapshot(id), before);
}

TEST_F(StoreFixture, PutGetRoundTripAndAccess) {
    auto store = open();
    std::string payload(1000, '\0');
    for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(i * 7);
    const auto id = store->create_package(world.owner, world.acl(core::Scope::Private));
    store->run_transaction(id, {PutFile{"raw/img.tif", payload, {}, ""}}, world.owner);
    const auto read = store->get_file(id, "raw/img.tif", world.owner);
    EXPECT_EQ(read.bytes, payload);
    EXPECT_EQ(read.file.checksum_sha256, crypto::sha256_hex(payload));
    EXPECT_EQ(store->get_file(id, "raw/img.tif", world.pi).bytes, payload);
    EXPECT_EQ(code_of([&] { store->get_file(id, "raw/img.tif", std::nullopt); }), Errc::AccessDenied);
    EXPECT_EQ(code_of([&] { store->get_file(id, "raw/img.tif", world.member); }), Errc::AccessDenied);
    EXPECT_EQ(code_of([&] { store->list_package(id, world.project_user); }), Errc::AccessDenied);
    store->grant_read(id, world.member);
    EXPECT_EQ(store->get_file(id, "raw/img.tif", world.member).bytes, payload);
}

TEST_F(StoreFixture, WriteRequiresOwnerOrPi) {
    auto store = open();
    const auto id = store->create_package(world.owner, world.acl(core::Scope::Group));
    EXPECT_EQ(code_of([&] { store->run_transaction(id, {SetPackageMetadata{{}}}, world.member); }),
              Errc::AccessDenied);
    EXPECT_EQ(code_of([&] { store->run_transaction(id, {SetPackageMetadata{{}}}, std::nullopt); }),
              Errc::AccessDenied);
    EXPECT_EQ(store->run_transaction(id, {SetPackageMetadata{{{"a", "b"}}}}, world.pi).revision, 1u);
    EXPECT_EQ(store->run_transaction(id, {SetPackageMetadata{{}}}, world.owner).revision, 2u);
}

TEST_F(StoreFixture, ListingCarriesNoBytesAndCountsRevisions) {
    auto store = open();
    const auto id = store->create_package(world.owner, world.acl(core::Scope::Public));
    for (int i = 0; i < 3; ++i) {
        store->run_transaction(id, {PutFile{"f" + std::to_string(i), "secret-bytes", {}, ""}}, world.owner);
    }
    const auto snap = store->list_package(id, std::nullopt);
    EXPECT_EQ(snap.files.size(), 3u);
    EXPECT_EQ(snap.revision, 3u);
    nlohmann::json j = snap;
    EXPECT_EQ(j.dump().find("secret-bytes"), std::string::npos);
}

TEST_F(StoreFixture, StaleBaseRevisionConflicts) {
    auto store = open();
    const auto id = store->create_package(world.owner, world.acl(core::Scope::Group));
    store->run_transaction(id, {SetPackageMetadata{{{"v", "1"}}}}, world.owner, 0);
    EXPECT_EQ(code_of([&] { store->run_transaction(id, {SetPackageMetadata{{{"v", "2"}}}}, world.owner, 0); }),
              Errc::ConcurrentConflict);
    EXPECT_EQ(store->snapshot(id).package_metadata.at("v"), "1");
}

TEST_F(StoreFixture, ConcurrentWritersOnOnePackageSerialize) {
    auto store = open();
    const auto id = store->create_package(world.owner, world.acl(core::Scope::Group));
    std::atomic<int> committed{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&, t] {
            for (int i = 0; i < 25; ++i) {
                for (;;) {
                    const auto rev = store->snapshot(id).revision;
                    try {
                        store->run_transaction(id, {PutFile{"t" + std::to_string(t) + "/" + std::to_string(i), "x", {}, ""}},
                                               world.owner, rev);
                        ++committed;
                        break;
                    } catch (const Error& e) {
                        ASSERT_EQ(e.code(), Errc::ConcurrentConflict);
                    }
                }
            }
        });
    }
    for (auto& th : threads) th.join();
    EXPECT_EQ(committed.load(), 100);
    EXPECT_EQ(store->snapshot(id).revision, 100u);
    EXPECT_EQ(store->snapshot(id).files.size(), 100u);
}

TEST_F(StoreFixture, FaultInjectionAtEveryIndex) {
    std::optional<std::size_t> fail_at;
    StoreOptions opts;
    opts.before_mutation = [&](std::size_t i) {
        if (fail_at && *fail_at == i) throw std::runtime_error("injected");
    };
    auto store = open(opts);
    MutationGen gen(7);
    const auto id = store->create_package(world.owner, world.acl(core::Scope::Group));
    ModelPackage model;
    for (int round = 0; round < 200; ++round) {
        const auto batch = gen.batch();
        fail_at = gen.pick(batch.size() + 2);  // may be past the end: no fault
        const auto before = store->snapshot(id);
        ModelPackage trial = model;
        const bool model_ok = trial.apply(batch);
        bool store_ok = true;
        try {
            store->run_transaction(id, batch, world.owner);
        } catch (...) {
            store_ok = false;
        }
        if (store_ok) {
            model = trial;
        } else {
            EXPECT_EQ(store->snapshot(id), before) << "round " << round;
        }
        if (!model_ok) EXPECT_FALSE(store_ok);
        std::string why;
        ASSERT_TRUE(matches_model(*store, id, model, &why)) << why << " round " << round;
    }
}

TEST_F(StoreFixture, RandomSequencesMatchModelAndSurviveRestart) {
    MutationGen gen(42);
    PackageId id;
    ModelPackage model;
    {
        auto store = open();
        id = store->create_package(world.owner, world.acl(core::Scope::Group));
        for (int i = 0; i < 300; ++i) {
            const auto batch = gen.batch();
            const bool ok = model.apply(batch);
            try {
                store->run_transaction(id, batch, world.owner);
                EXPECT_TRUE(ok);
            } catch (const Error&) {
                EXPECT_FALSE(ok);
            }
        }
        ASSERT_TRUE(matches_model(*store, id, model));
    }
    auto reopened = open();
    std::string why;
    ASSERT_TRUE(matches_model(*reopened, id, model, &why)) << why;
    for (const auto& [name, mf] : model.files) {
        EXPECT_EQ(reopened->get_file(id, name, world.owner).bytes, mf.bytes);
    }
}

TEST_F(StoreFixture, TornJournalTailIsDropped) {
    PackageId id;
    {
        auto store = open();
        id = store->create_package(world.owner, world.acl(core::Scope::Group));
        store->run_transaction(id, {PutFile{"a", "committed", {}, ""}}, world.owner);
    }
    {
        std::ofstream log(tmp.path / "store" / "journal.log", std::ios::app | std::ios::binary);
        log << R"({"op":"commit","package":")" << id.str() << R"(","revision":2,"changes":[{"del)";
    }
    auto store = open();
    EXPECT_EQ(store->snapshot(id).revision, 1u);
    EXPECT_EQ(store->get_file(id, "a", world.owner).bytes, "committed");
    store->run_transaction(id, {PutFile{"b", "after", {}, ""}}, world.owner);
    auto again = open();
    EXPECT_EQ(again->snapshot(id).revision, 2u);
}

TEST_F(StoreFixture, OrphanBlobsAreCollected) {
    std::size_t blobs = 0;
    {
        StoreOptions opts;
        opts.before_mutation = [](std::size_t i) {
            if (i == 1) throw std::runtime_error("crash");
        };
        auto store = open(opts);
        const auto id = store->create_package(world.owner, world.acl(core::Scope::Group));
        EXPECT_THROW(store->run_transaction(id, {PutFile{"a", "orphan", {}, ""}}, world.owner), std::runtime_error);
    }
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(tmp.path / "store" / "blobs" / "hot")) {
        ++blobs;
    }
    EXPECT_EQ(blobs, 0u);
}

TEST_F(StoreFixture, CorruptionIsReported) {
    auto store = open();
    const auto id = store->create_package(world.owner, world.acl(core::Scope::Group));
    store->run_transaction(id, {PutFile{"a", "original", {}, ""}}, world.owner);
    std::ofstream(tmp.path / "store" / "blobs" / "hot" / crypto::sha256_hex(std::string("original")),
                  std::ios::binary | std::ios::trunc)
        << "tampered";
    EXPECT_EQ(code_of([&] { store->get_file(id, "a", world.owner); }), Errc::ChecksumMismatch);
}

TEST_F(StoreFixture, CapacityLimit) {
    StoreOptions opts;
    opts.capacity_bytes = 10;
    auto store = open(opts);
    const auto id = store->create_package(world.owner, world.acl(core::Scope::Group));
    store->run_transaction(id, {PutFile{"a", "12345678", {}, ""}}, world.owner);
    EXPECT_EQ(code_of([&] { store->run_transaction(id, {PutFile{"b", "123", {}, ""}}, world.owner); }),
              Errc::StorageFull);
    // replacing a file frees its old size
    store->run_transaction(id, {PutFile{"a", "1234567890", {}, ""}}, world.owner);
    EXPECT_EQ(store->stored_bytes(), 10u);
}

TEST_F(StoreFixture, TierExampleDemotesOldestFirst) {
    auto store = open();
    const auto id = store->create_package(world.owner, world.acl(core::Scope::Group));
    store->run_transaction(id, {PutFile{"s10", std::string(10, 'a'), {}, ""}, PutFile{"s20", std::string(20, 'b'), {}, ""},
                                PutFile{"s30", std::string(30, 'c'), {}, ""}},
                           world.owner);
    for (const char* n : {"s10", "s20", "s30"}) {
        clock.advance(std::chrono::seconds(1));
        store->get_file(id, n, world.owner);
    }
    const auto report = store->migrate_tiers({35, 1});
    ASSERT_EQ(report.moves.size(), 2u);
    EXPECT_EQ(report.moves[0].name, "s10");
    EXPECT_EQ(report.moves[1].name, "s20");
    EXPECT_FALSE(report.residual_overflow);
    EXPECT_EQ(store->hot_bytes(), 30u);

    std::vector<SimFile> sim{{"s10", 10, 1}, {"s20", 20, 2}, {"s30", 30, 3}};
    EXPECT_EQ(simulate_demotions(sim, 35, 1), (std::vector<std::string>{"s10", "s20"}));
}

TEST_F(StoreFixture, TierPolicyEdges) {
    auto store = open();
    const auto id = store->create_package(world.owner, world.acl(core::Scope::Group));
    store->run_transaction(id, {PutFile{"a", std::string(5, 'a'), {}, ""}, PutFile{"b", std::string(6, 'b'), {}, ""}},
                           world.owner);
    EXPECT_TRUE(store->migrate_tiers({100, 0}).moves.empty());
    const auto r = store->migrate_tiers({1, 50});
    EXPECT_TRUE(r.moves.empty());
    EXPECT_TRUE(r.residual_overflow);
}

TEST_F(StoreFixture, ColdReadKeepsTierAndBytes) {
    auto store = open();
    const auto id = store->create_package(world.owner, world.acl(core::Scope::Group));
    store->run_transaction(id, {PutFile{"big", std::string(100, 'z'), {{"m", "1"}}, ""}}, world.owner);
    const auto before = store->snapshot(id).files.at("big");
    store->migrate_tiers({0, 0});
    auto read = store->get_file(id, "big", world.owner);
    EXPECT_EQ(read.file.tier, Tier::Cold);
    EXPECT_EQ(read.bytes, std::string(100, 'z'));
    const auto after = store->snapshot(id).files.at("big");
    EXPECT_EQ(after.tier, Tier::Cold);
    EXPECT_EQ(after.checksum_sha256, before.checksum_sha256);
    EXPECT_EQ(after.file_metadata, before.file_metadata);
    // tier survives restart, rewrite promotes
    store.reset();
    store = open();
    EXPECT_EQ(store->snapshot(id).files.at("big").tier, Tier::Cold);
    store->run_transaction(id, {PutFile{"big", std::string(100, 'z'), {}, ""}}, world.owner);
    EXPECT_EQ(store->snapshot(id).files.at("big").tier, Tier::Hot);
    EXPECT_EQ(store->get_file(id, "big", world.owner).bytes, std::string(100, 'z'));
}

TEST_F(StoreFixture, MigrationMatchesSimulator) {
    auto store = open();
    std::mt19937_64 rng(3);
    std::vector<PackageId> pkgs;
    for (int p = 0; p < 5; ++p) pkgs.push_back(store->create_package(world.owner, world.acl(core::Scope::Group)));
    std::map<std::string, std::pair<PackageId, std::string>> keys;
    std::map<std::string, SimFile> sim;
    std::uint64_t tick = 0;
    for (int i = 0; i < 120; ++i) {
        const auto& pkg = pkgs[i % pkgs.size()];
        const std::string name = "f" + std::to_string(i);
        const auto size = std::uniform_int_distribution<std::uint64_t>(0, 200)(rng);
        store->run_transaction(pkg, {PutFile{name, std::string(size, 'q'), {}, ""}}, world.owner);
        const std::string key = pkg.str() + "/" + name;
        keys[key] = {pkg, name};
        sim[key] = {key, size, ++tick};
    }
    for (int i = 0; i < 300; ++i) {
        auto it = std::next(keys.begin(), static_cast<long>(rng() % keys.size()));
        store->get_file(it->second.first, it->second.second, world.owner);
        sim[it->first].last_access = ++tick;
    }
    std::vector<SimFile> files;
    for (const auto& [k, f] : sim) files.push_back(f);
    bool residual = false;
    const auto expected = simulate_demotions(files, 5000, 50, &residual);
    const auto report = store->migrate_tiers({5000, 50});
    std::vector<std::string> got;
    for (const auto& m : report.moves) got.push_back(m.package_id.str() + "/" + m.name);
    EXPECT_EQ(got, expected);
    EXPECT_EQ(report.residual_overflow, residual);
}
