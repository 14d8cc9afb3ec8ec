#include "fairhub/pkgstore/store.hpp"

#include "fairhub/error.hpp"
#include "fairhub/util/crypto.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace fairhub::pkgstore {

namespace fs = std::filesystem;

struct PackageStore::FileEntry {
    std::string sha;
    std::uint64_t size = 0;
    std::string media_type;
    Metadata metadata;
};

struct PackageStore::PackageState {
    PackageId id;
    UserId owner;
    core::AccessScope acl;
    Metadata package_metadata;
    std::map<std::string, FileEntry> files;
    Timestamp created_at{};
    Timestamp modified_at{};
    std::uint64_t revision = 0;
    std::set<UserId> readers;
};

namespace {

void write_all(int fd, std::string_view data, const fs::path& path) {
    while (!data.empty()) {
        const ssize_t n = ::write(fd, data.data(), data.size());
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(Errc::Internal, "write failed for " + path.string() + ": " + std::strerror(errno));
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
}

void sync_directory(const fs::path& dir) {
    const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
    if (fd >= 0) {
        ::fsync(fd);
        ::close(fd);
    }
}

std::string tier_dir(Tier tier) { return tier == Tier::Hot ? "hot" : "cold"; }

} // namespace

// Content-addressed bodies, one namespace per tier.
class PackageStore::BlobStore {
public:
    BlobStore(std::optional<fs::path> root, bool sync) : root_(std::move(root)), sync_(sync) {
        if (root_) {
            fs::create_directories(*root_ / "hot");
            fs::create_directories(*root_ / "cold");
        }
    }

    void put(Tier tier, const std::string& sha, std::string_view bytes) {
        if (!root_) {
            std::lock_guard lock(mutex_);
            memory_[{tier, sha}] = std::string(bytes);
            return;
        }
        const fs::path final_path = path_of(tier, sha);
        if (fs::exists(final_path)) return;
        const fs::path tmp = final_path.string() + ".tmp" + crypto::to_hex(crypto::random_bytes(4));
        const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        if (fd < 0) {
            throw Error(Errc::Internal, "cannot create blob " + tmp.string() + ": " + std::strerror(errno));
        }
        try {
            write_all(fd, bytes, tmp);
            if (sync_) ::fsync(fd);
        } catch (...) {
            ::close(fd);
            fs::remove(tmp);
            throw;
        }
        ::close(fd);
        fs::rename(tmp, final_path);
        if (sync_) sync_directory(final_path.parent_path());
    }

    [[nodiscard]] std::optional<std::string> get(Tier tier, const std::string& sha) const {
        if (!root_) {
            std::lock_guard lock(mutex_);
            const auto it = memory_.find({tier, sha});
            if (it == memory_.end()) return std::nullopt;
            return it->second;
        }
        std::ifstream in(path_of(tier, sha), std::ios::binary);
        if (!in) return std::nullopt;
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }

    void remove(Tier tier, const std::string& sha) {
        if (!root_) {
            std::lock_guard lock(mutex_);
            memory_.erase({tier, sha});
            return;
        }
        std::error_code ec;
        fs::remove(path_of(tier, sha), ec);
    }

    [[nodiscard]] std::vector<std::pair<Tier, std::string>> list() const {
        std::vector<std::pair<Tier, std::string>> out;
        if (!root_) {
            std::lock_guard lock(mutex_);
            for (const auto& [key, bytes] : memory_) out.push_back(key);
            return out;
        }
        for (const Tier tier : {Tier::Hot, Tier::Cold}) {
            for (const auto& entry : fs::directory_iterator(*root_ / tier_dir(tier))) {
                const std::string name = entry.path().filename().string();
                if (name.find(".tmp") != std::string::npos) {
                    std::error_code ec;
                    fs::remove(entry.path(), ec);
                    continue;
                }
                out.emplace_back(tier, name);
            }
        }
        return out;
    }

    [[nodiscard]] fs::path path_of(Tier tier, const std::string& sha) const {
        return *root_ / tier_dir(tier) / sha;
    }

private:
    std::optional<fs::path> root_;
    bool sync_;
    mutable std::mutex mutex_;
    std::map<std::pair<Tier, std::string>, std::string> memory_;
};

// Append-only JSON-lines log; one record per committed change.
class PackageStore::Journal {
public:
    Journal(fs::path file, bool sync) : file_(std::move(file)), sync_(sync) {}

    ~Journal() {
        if (fd_ >= 0) ::close(fd_);
    }

    /// Complete records in order. A trailing record without its newline
    /// was never acknowledged and is cut off.
    std::vector<nlohmann::json> read_all() {
        std::vector<nlohmann::json> records;
        std::string data;
        {
            std::ifstream in(file_, std::ios::binary);
            if (in) data.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        }
        std::size_t pos = 0;
        while (pos < data.size()) {
            const auto nl = data.find('\n', pos);
            if (nl == std::string::npos) {
                fs::resize_file(file_, pos);
                break;
            }
            auto record = nlohmann::json::parse(data.begin() + static_cast<std::ptrdiff_t>(pos),
                                                data.begin() + static_cast<std::ptrdiff_t>(nl), nullptr, false);
            if (record.is_discarded()) {
                throw Error(Errc::Internal, "corrupt journal record at byte " + std::to_string(pos));
            }
            records.push_back(std::move(record));
            pos = nl + 1;
        }
        return records;
    }

    void append(const nlohmann::json& record) {
        if (fd_ < 0) {
            fd_ = ::open(file_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
            if (fd_ < 0) {
                throw Error(Errc::Internal, "cannot open journal " + file_.string() + ": " + std::strerror(errno));
            }
        }
        std::string line = record.dump();
        line.push_back('\n');
        write_all(fd_, line, file_);
        if (sync_ && ::fsync(fd_) != 0) {
            throw Error(Errc::Internal, "fsync failed on journal");
        }
    }

private:
    fs::path file_;
    bool sync_;
    int fd_ = -1;
};

namespace {

nlohmann::json encode_changes(const std::vector<Mutation>& mutations, const std::vector<std::string>& shas) {
    nlohmann::json changes = nlohmann::json::array();
    for (std::size_t i = 0; i < mutations.size(); ++i) {
        std::visit(
            [&](const auto& m) {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, PutFile>) {
                    changes.push_back({{"put", m.name},
                                       {"sha", shas[i]},
                                       {"size", m.bytes.size()},
                                       {"media_type", m.media_type_hint.empty() ? guess_media_type(m.name) : m.media_type_hint},
                                       {"meta", m.file_metadata}});
                } else if constexpr (std::is_same_v<T, DeleteFile>) {
                    changes.push_back({{"delete", m.name}});
                } else if constexpr (std::is_same_v<T, SetPackageMetadata>) {
                    changes.push_back({{"package_meta", m.metadata}});
                } else {
                    changes.push_back({{"file_meta", m.name}, {"meta", m.metadata}});
                }
            },
            mutations[i]);
    }
    return changes;
}

} // namespace

PackageStore::PackageStore(const core::Directory& directory, const Clock& clock, StoreOptions options)
    : directory_(directory), clock_(clock), options_(std::move(options)) {
    if (options_.root) {
        fs::create_directories(*options_.root);
        blobs_ = std::make_unique<BlobStore>(*options_.root / "blobs", options_.sync_on_commit);
        journal_ = std::make_unique<Journal>(*options_.root / "journal.log", options_.sync_on_commit);
        replay();
    } else {
        blobs_ = std::make_unique<BlobStore>(std::nullopt, false);
    }
}

PackageStore::~PackageStore() = default;

void PackageStore::replay() {
    for (const auto& record : journal_->read_all()) {
        apply_journal_record(record);
    }
    // rebuild reference counts from the replayed state
    refcounts_.clear();
    for (const auto& [id, state] : packages_) {
        for (const auto& [name, entry] : state->files) {
            const auto rt = runtime_.find({id, name});
            const Tier tier = rt == runtime_.end() ? Tier::Hot : rt->second.tier;
            ++refcounts_[{tier, entry.sha}];
        }
    }
    for (const auto& [tier, sha] : blobs_->list()) {
        if (!refcounts_.contains({tier, sha})) {
            blobs_->remove(tier, sha);
        }
    }
}

void PackageStore::apply_journal_record(const nlohmann::json& record) {
    const std::string op = record.at("op").get<std::string>();
    const PackageId id{record.at("package").get<std::string>()};
    if (op == "tier") {
        runtime_[{id, record.at("name").get<std::string>()}].tier =
            record.at("tier").get<std::string>() == "Cold" ? Tier::Cold : Tier::Hot;
        return;
    }
    std::shared_ptr<PackageState> next;
    if (op == "create") {
        next = std::make_shared<PackageState>();
        next->id = id;
        next->owner = UserId{record.at("owner").get<std::string>()};
        next->acl = record.at("acl").get<core::AccessScope>();
        next->created_at = from_micros(record.at("at").get<std::int64_t>());
    } else {
        next = std::make_shared<PackageState>(*packages_.at(id));
    }
    if (op == "grant") {
        next->readers.insert(UserId{record.at("user").get<std::string>()});
        packages_[id] = next;
        return;
    }
    const Timestamp at = from_micros(record.at("at").get<std::int64_t>());
    for (const auto& change : record.value("changes", nlohmann::json::array())) {
        if (change.contains("put")) {
            const std::string name = change["put"].get<std::string>();
            next->files[name] = FileEntry{change.at("sha").get<std::string>(), change.at("size").get<std::uint64_t>(),
                                          change.value("media_type", std::string{}),
                                          change.at("meta").get<Metadata>()};
            runtime_[{id, name}] = FileRuntime{Tier::Hot, at, ++access_counter_};
        } else if (change.contains("delete")) {
            const std::string name = change["delete"].get<std::string>();
            next->files.erase(name);
            runtime_.erase({id, name});
        } else if (change.contains("package_meta")) {
            next->package_metadata = change["package_meta"].get<Metadata>();
        } else if (change.contains("file_meta")) {
            next->files.at(change["file_meta"].get<std::string>()).metadata = change.at("meta").get<Metadata>();
        }
    }
    next->revision = record.value("revision", next->revision);
    next->modified_at = at;
    packages_[id] = next;
}

PackageId PackageStore::create_package(const UserId& owner, const core::AccessScope& acl,
                                       const std::vector<Mutation>& initial) {
    acl.validate();
    if (owner.empty()) {
        throw Error(Errc::ValidationError, "a package needs an owner", {{"fields", {"owner"}}});
    }
    auto state = std::make_shared<PackageState>();
    state->id = make_id<PackageId>();
    state->owner = owner;
    state->acl = acl;
    state->created_at = state->modified_at = clock_.now();
    if (initial.empty()) {
        std::unique_lock lock(mutex_);
        if (journal_) {
            journal_->append({{"op", "create"},
                              {"package", state->id.str()},
                              {"owner", owner.str()},
                              {"acl", acl},
                              {"at", to_micros(state->created_at)},
                              {"revision", 0}});
        }
        packages_[state->id] = state;
        return state->id;
    }
    commit(state->id, initial, std::nullopt, false, std::nullopt, state);
    return state->id;
}

PackageStore::StatePtr PackageStore::state_of(const PackageId& id) const {
    std::shared_lock lock(mutex_);
    const auto it = packages_.find(id);
    if (it == packages_.end()) {
        throw Error(Errc::UnknownPackage, "unknown package " + id.str());
    }
    return it->second;
}

PackageSnapshot PackageStore::run_transaction(const PackageId& id, const std::vector<Mutation>& mutations,
                                              const std::optional<UserId>& requester,
                                              std::optional<std::uint64_t> base_revision) {
    return commit(id, mutations, requester, true, base_revision);
}

PackageSnapshot PackageStore::commit_as_system(const PackageId& id, const std::vector<Mutation>& mutations,
                                               std::optional<std::uint64_t> base_revision) {
    return commit(id, mutations, std::nullopt, false, base_revision);
}

PackageSnapshot PackageStore::commit(const PackageId& id, const std::vector<Mutation>& mutations,
                                     const std::optional<UserId>& requester, bool check_write,
                                     std::optional<std::uint64_t> base_revision, StatePtr fresh) {
    const StatePtr base = fresh ? fresh : state_of(id);
    if (check_write) {
        const bool owner = requester && *requester == base->owner && directory_.is_project_user(*requester);
        if (!owner && !directory_.can_modify(requester, base->acl)) {
            throw Error(Errc::AccessDenied,
                        "not allowed to modify package " + id.str());
        }
    }
    if (base_revision && *base_revision != base->revision) {
        throw Error(Errc::ConcurrentConflict, "package " + id.str() + " is at revision " +
                                                  std::to_string(base->revision) + ", not " +
                                                  std::to_string(*base_revision));
    }

    auto next = std::make_shared<PackageState>(*base);
    std::vector<std::string> shas(mutations.size());
    std::vector<std::string> pinned;

    auto unpin_and_collect = [&] {
        std::unique_lock lock(mutex_);
        for (const auto& sha : pinned) {
            if (--pins_[sha] == 0) pins_.erase(sha);
            if (!refcounts_.contains({Tier::Hot, sha}) && !pins_.contains(sha)) {
                blobs_->remove(Tier::Hot, sha);
            }
        }
    };

    try {
        for (std::size_t i = 0; i < mutations.size(); ++i) {
            if (options_.before_mutation) options_.before_mutation(i);
            std::visit(
                [&](const auto& m) {
                    using T = std::decay_t<decltype(m)>;
                    if constexpr (std::is_same_v<T, PutFile>) {
                        if (!valid_file_name(m.name)) {
                            throw Error(Errc::PathViolation, "invalid file name: " + m.name,
                                        {{"mutation_index", i}});
                        }
                        shas[i] = crypto::sha256_hex(m.bytes);
                        {
                            std::unique_lock lock(mutex_);
                            ++pins_[shas[i]];
                        }
                        pinned.push_back(shas[i]);
                        blobs_->put(Tier::Hot, shas[i], m.bytes);
                        next->files[m.name] = FileEntry{shas[i], m.bytes.size(),
                                                        m.media_type_hint.empty() ? guess_media_type(m.name)
                                                                                  : m.media_type_hint,
                                                        m.file_metadata};
                    } else if constexpr (std::is_same_v<T, DeleteFile>) {
                        if (next->files.erase(m.name) == 0) {
                            throw Error(Errc::UnknownFile, "no file " + m.name + " in package",
                                        {{"mutation_index", i}});
                        }
                    } else if constexpr (std::is_same_v<T, SetPackageMetadata>) {
                        next->package_metadata = m.metadata;
                    } else {
                        const auto it = next->files.find(m.name);
                        if (it == next->files.end()) {
                            throw Error(Errc::UnknownFile, "no file " + m.name + " in package",
                                        {{"mutation_index", i}});
                        }
                        it->second.metadata = m.metadata;
                    }
                },
                mutations[i]);
        }
        if (options_.capacity_bytes) {
            std::uint64_t before = 0;
            std::uint64_t after = 0;
            for (const auto& [n, f] : base->files) before += f.size;
            for (const auto& [n, f] : next->files) after += f.size;
            if (stored_bytes() - before + after > *options_.capacity_bytes) {
                throw Error(Errc::StorageFull, "transaction exceeds store capacity");
            }
        }
        if (options_.before_mutation) options_.before_mutation(mutations.size());

        const Timestamp now = clock_.now();
        next->revision = base->revision + 1;
        next->modified_at = now;
        if (fresh) next->created_at = now;
        {
            std::unique_lock lock(mutex_);
            auto it = packages_.find(id);
            if (fresh) {
                it = packages_.emplace(id, nullptr).first;
            } else if (it == packages_.end() || it->second != base) {
                throw Error(Errc::ConcurrentConflict, "package " + id.str() + " changed concurrently");
            }
            if (journal_) {
                nlohmann::json record{{"op", fresh ? "create" : "commit"},
                                      {"package", id.str()},
                                      {"revision", next->revision},
                                      {"at", to_micros(now)},
                                      {"changes", encode_changes(mutations, shas)}};
                if (fresh) {
                    record["owner"] = next->owner.str();
                    record["acl"] = next->acl;
                }
                try {
                    journal_->append(record);
                } catch (...) {
                    if (fresh) packages_.erase(it);
                    throw;
                }
            }
            // reference bookkeeping: drop the old entries, add the new ones
            std::vector<std::pair<Tier, std::string>> released;
            for (const auto& [name, entry] : base->files) {
                const auto rt = runtime_.find({id, name});
                const Tier tier = rt == runtime_.end() ? Tier::Hot : rt->second.tier;
                const auto next_it = next->files.find(name);
                const bool unchanged = next_it != next->files.end() && next_it->second.sha == entry.sha &&
                                       !std::any_of(mutations.begin(), mutations.end(), [&](const Mutation& m) {
                                           const auto* put = std::get_if<PutFile>(&m);
                                           return put && put->name == name;
                                       });
                if (unchanged) continue;
                adjust_ref(tier, entry.sha, -1);
                released.emplace_back(tier, entry.sha);
                runtime_.erase({id, name});
                stored_bytes_ -= entry.size;
            }
            for (const auto& [name, entry] : next->files) {
                if (runtime_.contains({id, name})) continue;
                adjust_ref(Tier::Hot, entry.sha, +1);
                runtime_[{id, name}] = FileRuntime{Tier::Hot, now, ++access_counter_};
                stored_bytes_ += entry.size;
            }
            it->second = next;
            for (const auto& [tier, sha] : released) {
                if (!refcounts_.contains({tier, sha}) && !(tier == Tier::Hot && pins_.contains(sha))) {
                    blobs_->remove(tier, sha);
                }
            }
        }
    } catch (...) {
        unpin_and_collect();
        throw;
    }
    unpin_and_collect();
    return to_snapshot(*next);
}

void PackageStore::adjust_ref(Tier tier, const std::string& sha, int delta) {
    auto& count = refcounts_[{tier, sha}];
    count += delta;
    if (count <= 0) refcounts_.erase({tier, sha});
}

PackageSnapshot PackageStore::to_snapshot(const PackageState& state) const {
    PackageSnapshot snap;
    snap.package_id = state.id;
    snap.owner = state.owner;
    snap.acl = state.acl;
    snap.package_metadata = state.package_metadata;
    snap.created_at = state.created_at;
    snap.modified_at = state.modified_at;
    snap.revision = state.revision;
    snap.readers = state.readers;
    std::shared_lock lock(mutex_);
    for (const auto& [name, entry] : state.files) {
        StoredFile f;
        f.name = name;
        f.size_bytes = entry.size;
        f.checksum_sha256 = entry.sha;
        f.media_type_hint = entry.media_type;
        f.file_metadata = entry.metadata;
        if (const auto rt = runtime_.find({state.id, name}); rt != runtime_.end()) {
            f.tier = rt->second.tier;
            f.last_access_at = rt->second.last_access_at;
        }
        snap.files.emplace(name, std::move(f));
    }
    return snap;
}

FileRead PackageStore::get_file(const PackageId& id, const std::string& name,
                                const std::optional<UserId>& requester) {
    FileRead out;
    // The blob is read without holding the lock. A concurrent migration or
    // rewrite may move it in between; the lookup is then retried.
    for (int attempt = 0;; ++attempt) {
        Tier tier = Tier::Hot;
        {
            std::shared_lock lock(mutex_);
            const auto pit = packages_.find(id);
            if (pit == packages_.end()) {
                throw Error(Errc::UnknownPackage, "unknown package " + id.str());
            }
            const auto& state = *pit->second;
            const bool granted = requester && (state.readers.contains(*requester) ||
                                               (*requester == state.owner && directory_.is_project_user(*requester)));
            if (!granted && !directory_.can_access(requester, state.acl)) {
                throw Error(Errc::AccessDenied, "not allowed to read package " + id.str());
            }
            const auto fit = state.files.find(name);
            if (fit == state.files.end()) {
                throw Error(Errc::UnknownFile, "no file " + name + " in package " + id.str());
            }
            const auto& entry = fit->second;
            tier = runtime_.at({id, name}).tier;
            out.file.name = name;
            out.file.size_bytes = entry.size;
            out.file.checksum_sha256 = entry.sha;
            out.file.media_type_hint = entry.media_type;
            out.file.file_metadata = entry.metadata;
            out.file.tier = tier;
        }
        auto bytes = blobs_->get(tier, out.file.checksum_sha256);
        if (bytes && crypto::sha256_hex(*bytes) == out.file.checksum_sha256) {
            out.bytes = std::move(*bytes);
            break;
        }
        bool moved = false;
        {
            std::shared_lock lock(mutex_);
            const auto pit = packages_.find(id);
            const auto rt = runtime_.find({id, name});
            moved = pit == packages_.end() || rt == runtime_.end() || rt->second.tier != tier ||
                    !pit->second->files.contains(name) ||
                    pit->second->files.at(name).sha != out.file.checksum_sha256;
        }
        if (!moved || attempt >= 3) {
            throw Error(Errc::ChecksumMismatch, "stored bytes of " + name + " do not match their checksum",
                        {{"package_id", id.str()}, {"name", name}});
        }
    }
    std::unique_lock lock(mutex_);
    if (const auto rt = runtime_.find({id, name}); rt != runtime_.end()) {
        rt->second.last_access_at = clock_.now();
        rt->second.access_seq = ++access_counter_;
        out.file.last_access_at = rt->second.last_access_at;
    }
    return out;
}

PackageSnapshot PackageStore::list_package(const PackageId& id, const std::optional<UserId>& requester) const {
    const StatePtr state = state_of(id);
    const bool granted = requester && (state->readers.contains(*requester) ||
                                       (*requester == state->owner && directory_.is_project_user(*requester)));
    if (!granted && !directory_.can_access(requester, state->acl)) {
        throw Error(Errc::AccessDenied,
                    "not allowed to read package " + id.str());
    }
    return to_snapshot(*state);
}

PackageSnapshot PackageStore::snapshot(const PackageId& id) const {
    return to_snapshot(*state_of(id));
}

MigrationReport PackageStore::migrate_tiers(const TierPolicy& policy) {
    std::unique_lock lock(mutex_);
    struct Candidate {
        std::uint64_t seq;
        PackageId id;
        std::string name;
        std::uint64_t size;
        std::string sha;
    };
    std::vector<Candidate> candidates;
    MigrationReport report;
    for (const auto& [id, state] : packages_) {
        for (const auto& [name, entry] : state->files) {
            const auto& rt = runtime_.at({id, name});
            if (rt.tier != Tier::Hot) continue;
            report.hot_bytes_before += entry.size;
            if (entry.size >= policy.min_candidate_size_bytes) {
                candidates.push_back({rt.access_seq, id, name, entry.size, entry.sha});
            }
        }
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.seq < b.seq; });

    std::uint64_t hot = report.hot_bytes_before;
    for (const auto& c : candidates) {
        if (hot <= policy.hot_capacity_bytes) break;
        const auto bytes = blobs_->get(Tier::Hot, c.sha);
        if (!bytes || crypto::sha256_hex(*bytes) != c.sha) {
            throw Error(Errc::ChecksumMismatch, "hot copy of " + c.name + " is corrupt; not migrating");
        }
        blobs_->put(Tier::Cold, c.sha, *bytes);
        const auto cold = blobs_->get(Tier::Cold, c.sha);
        if (!cold || crypto::sha256_hex(*cold) != c.sha) {
            throw Error(Errc::ChecksumMismatch, "cold copy of " + c.name + " failed verification");
        }
        if (journal_) {
            journal_->append({{"op", "tier"}, {"package", c.id.str()}, {"name", c.name}, {"tier", "Cold"}});
        }
        runtime_.at({c.id, c.name}).tier = Tier::Cold;
        adjust_ref(Tier::Hot, c.sha, -1);
        adjust_ref(Tier::Cold, c.sha, +1);
        if (!refcounts_.contains({Tier::Hot, c.sha}) && !pins_.contains(c.sha)) {
            blobs_->remove(Tier::Hot, c.sha);
        }
        hot -= c.size;
        report.moves.push_back({c.id, c.name, c.size});
    }
    report.hot_bytes_after = hot;
    report.residual_overflow = hot > policy.hot_capacity_bytes;
    return report;
}

void PackageStore::grant_read(const PackageId& id, const UserId& user) {
    std::unique_lock lock(mutex_);
    const auto it = packages_.find(id);
    if (it == packages_.end()) {
        throw Error(Errc::UnknownPackage, "unknown package " + id.str());
    }
    if (it->second->readers.contains(user)) return;
    if (journal_) {
        journal_->append({{"op", "grant"}, {"package", id.str()}, {"user", user.str()}});
    }
    auto next = std::make_shared<PackageState>(*it->second);
    next->readers.insert(user);
    it->second = next;
}

bool PackageStore::exists(const PackageId& id) const {
    std::shared_lock lock(mutex_);
    return packages_.contains(id);
}

std::vector<PackageId> PackageStore::package_ids() const {
    std::shared_lock lock(mutex_);
    std::vector<PackageId> out;
    for (const auto& [id, state] : packages_) out.push_back(id);
    return out;
}

std::uint64_t PackageStore::hot_bytes() const {
    std::shared_lock lock(mutex_);
    std::uint64_t total = 0;
    for (const auto& [id, state] : packages_) {
        for (const auto& [name, entry] : state->files) {
            if (runtime_.at({id, name}).tier == Tier::Hot) total += entry.size;
        }
    }
    return total;
}

std::uint64_t PackageStore::stored_bytes() const {
    std::shared_lock lock(mutex_);
    return stored_bytes_;
}

} // namespace fairhub::pkgstore
