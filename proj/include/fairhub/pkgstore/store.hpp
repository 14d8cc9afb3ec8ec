/**
 * @file store.hpp
 * @brief Transactional package store with hot/cold tiering
 *
 * Layout under the root directory:
 *   blobs/hot/<sha256>, blobs/cold/<sha256>   content-addressed file bodies
 *   journal.log                               append-only JSON lines
 *
 * A transaction writes any new blobs first and then appends one journal
 * record; the append is the commit point. Opening a store replays the
 * journal, drops a torn trailing record and removes unreferenced blobs.
 *
 * Package state is copy-on-write: readers take the current immutable
 * snapshot and never wait for a transaction in progress. Commits on one
 * package are ordered by an optimistic revision check.
 */

#pragma once

#include "fairhub/core/directory.hpp"
#include "fairhub/pkgstore/package.hpp"
#include "fairhub/util/clock.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace fairhub::pkgstore {

struct StoreOptions {
    /// No root keeps everything in memory (no journal, nothing survives).
    std::optional<std::filesystem::path> root;
    /// fsync blobs and the journal before a commit is acknowledged.
    bool sync_on_commit = true;
    /// Upper bound on the summed size of all stored files.
    std::optional<std::uint64_t> capacity_bytes;
    /// Fault-injection hook, called with the mutation index before each
    /// mutation is applied and with mutations.size() right before the
    /// commit record is written. Throwing aborts the transaction.
    std::function<void(std::size_t)> before_mutation;
};

struct FileRead {
    std::string bytes;
    StoredFile file;
};

class PackageStore {
public:
    PackageStore(const core::Directory& directory, const Clock& clock, StoreOptions options = {});
    ~PackageStore();
    PackageStore(const PackageStore&) = delete;
    PackageStore& operator=(const PackageStore&) = delete;

    /// New package at revision 0, or revision 1 when @p initial is non-empty
    /// (applied atomically with the creation).
    PackageId create_package(const UserId& owner, const core::AccessScope& acl,
                             const std::vector<Mutation>& initial = {});

    /// Applies @p mutations in order, all or nothing. The requester must be
    /// the owner or a principal investigator of the owning group.
    PackageSnapshot run_transaction(const PackageId& id, const std::vector<Mutation>& mutations,
                                    const std::optional<UserId>& requester,
                                    std::optional<std::uint64_t> base_revision = std::nullopt);

    /// Same as run_transaction without the authorization check; for modules
    /// that manage packages on a user's behalf.
    PackageSnapshot commit_as_system(const PackageId& id, const std::vector<Mutation>& mutations,
                                     std::optional<std::uint64_t> base_revision = std::nullopt);

    FileRead get_file(const PackageId& id, const std::string& name,
                      const std::optional<UserId>& requester);
    [[nodiscard]] PackageSnapshot list_package(const PackageId& id,
                                               const std::optional<UserId>& requester) const;
    /// Snapshot without an access check.
    [[nodiscard]] PackageSnapshot snapshot(const PackageId& id) const;

    MigrationReport migrate_tiers(const TierPolicy& policy);

    void grant_read(const PackageId& id, const UserId& user);

    [[nodiscard]] bool exists(const PackageId& id) const;
    [[nodiscard]] std::vector<PackageId> package_ids() const;
    [[nodiscard]] std::uint64_t hot_bytes() const;
    [[nodiscard]] std::uint64_t stored_bytes() const;

private:
    struct FileEntry;
    struct PackageState;
    struct FileRuntime {
        Tier tier = Tier::Hot;
        Timestamp last_access_at{};
        std::uint64_t access_seq = 0;
    };
    class BlobStore;
    class Journal;

    using StatePtr = std::shared_ptr<const PackageState>;

    PackageSnapshot commit(const PackageId& id, const std::vector<Mutation>& mutations,
                           const std::optional<UserId>& requester, bool check_write,
                           std::optional<std::uint64_t> base_revision, StatePtr fresh = nullptr);
    StatePtr state_of(const PackageId& id) const;
    PackageSnapshot to_snapshot(const PackageState& state) const;
    void replay();
    void apply_journal_record(const nlohmann::json& record);
    void adjust_ref(Tier tier, const std::string& sha, int delta);

    const core::Directory& directory_;
    const Clock& clock_;
    StoreOptions options_;
    std::unique_ptr<BlobStore> blobs_;
    std::unique_ptr<Journal> journal_;

    mutable std::shared_mutex mutex_;
    std::map<PackageId, StatePtr> packages_;
    std::map<std::pair<PackageId, std::string>, FileRuntime> runtime_;
    std::map<std::pair<Tier, std::string>, int> refcounts_;
    /// Hot blobs written by transactions still in flight.
    std::map<std::string, int> pins_;
    std::uint64_t stored_bytes_ = 0;
    std::uint64_t access_counter_ = 0;
};

} // namespace fairhub::pkgstore
