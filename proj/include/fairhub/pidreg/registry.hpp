/**
 * @file registry.hpp
 * @brief Persistent-identifier registry with TAN-coupled label pools
 *
 * Every mint, update, batch and TAN consumption runs under one registry
 * lock, which makes them linearizable and keeps a batch's suffix
 * allocation contiguous with respect to other batches.
 */

#pragma once

#include "fairhub/pidreg/handle_protocol.hpp"
#include "fairhub/util/clock.hpp"
#include "fairhub/util/http.hpp"
#include "fairhub/util/ids.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairhub::pidreg {

enum class ObjectKind { Article, Antibody, MouseLine, CellLine, Notebook, Dataset, LabelSet };

[[nodiscard]] std::string_view to_string(ObjectKind kind) noexcept;
[[nodiscard]] std::optional<ObjectKind> parse_object_kind(std::string_view text) noexcept;

struct PersistentIdentifier {
    std::string prefix;
    std::string suffix;
    std::string target_url;
    Timestamp created_at{};
    ObjectKind object_kind = ObjectKind::Dataset;
    /// Id of the object this PID stands for, once bound.
    std::optional<std::string> bound_object;

    /// "prefix/suffix"
    [[nodiscard]] std::string handle() const { return prefix + "/" + suffix; }

    friend bool operator==(const PersistentIdentifier&, const PersistentIdentifier&) = default;
};

void to_json(nlohmann::json& j, const PersistentIdentifier& p);
void from_json(const nlohmann::json& j, PersistentIdentifier& p);

/// Stored TAN state; the plaintext is never kept.
struct TanRecord {
    std::string handle;
    std::string tan_hash;
    bool consumed = false;
    std::optional<UserId> consumed_by;
    std::optional<Timestamp> consumed_at;
};

/// A freshly minted PID together with its TAN. The only place a TAN
/// plaintext ever appears.
struct TanIssue {
    PersistentIdentifier pid;
    std::string tan;
};

struct Endpoint {
    std::string name;
    /// "embedded" selects the in-process mock service.
    std::string base_url;
    std::string prefix;
    std::string credentials;
};

using TransportFactory = std::function<std::shared_ptr<http::Transport>(const Endpoint&)>;

/// Printable label manifest: header "pid,tan", one row per issue.
[[nodiscard]] std::string tan_manifest_csv(const std::vector<TanIssue>& issues);

class PidRegistry {
public:
    PidRegistry(const Clock& clock, std::string landing_base_url, TransportFactory transports);

    void add_endpoint(Endpoint endpoint);
    [[nodiscard]] std::vector<Endpoint> endpoints() const;
    /// Route PIDs of @p kind to the endpoint named (or based at) @p endpoint.
    void assign(ObjectKind kind, std::string_view endpoint);
    [[nodiscard]] std::map<ObjectKind, std::string> assignments() const;
    /// Prefix of the endpoint assigned to @p kind (or the sole endpoint).
    [[nodiscard]] std::string prefix_for(ObjectKind kind) const;

    PersistentIdentifier mint_pid(std::string_view prefix, std::string_view target_url,
                                  ObjectKind kind);
    /// Mints on the endpoint assigned to @p kind, targeting the PID's own
    /// landing page, and binds it to @p object_id.
    PersistentIdentifier mint_bound(ObjectKind kind, std::string_view object_id);
    /// Same, but resolving to @p target_url instead of the landing page.
    PersistentIdentifier mint_bound(ObjectKind kind, std::string_view object_id, std::string_view target_url);

    [[nodiscard]] PersistentIdentifier resolve_pid(std::string_view prefix, std::string_view suffix) const;
    [[nodiscard]] std::optional<PersistentIdentifier> find(std::string_view handle) const;
    /// First PID bound to @p object_id.
    [[nodiscard]] std::optional<PersistentIdentifier> find_bound(std::string_view object_id) const;
    PersistentIdentifier update_target(std::string_view prefix, std::string_view suffix,
                                       std::string_view new_url);
    /// Records the bound object and points the PID at its landing page.
    PersistentIdentifier bind(std::string_view prefix, std::string_view suffix,
                              std::string_view object_id);

    std::vector<TanIssue> mint_tan_batch(std::string_view prefix, std::size_t count, ObjectKind kind);
    void consume_tan(std::string_view prefix, std::string_view suffix, std::string_view tan,
                     const UserId& user);
    [[nodiscard]] std::optional<TanRecord> tan_record(std::string_view prefix,
                                                      std::string_view suffix) const;

    [[nodiscard]] std::string landing_url(std::string_view prefix, std::string_view suffix) const;
    [[nodiscard]] const std::string& landing_base_url() const noexcept { return landing_base_; }
    [[nodiscard]] std::size_t size() const;

    [[nodiscard]] nlohmann::json to_json() const;
    void load_json(const nlohmann::json& j);

private:
    enum class TargetMode { Given, Pending, Landing };

    const Endpoint& endpoint_for_prefix_locked(std::string_view prefix, ObjectKind kind) const;
    HandleClient client_locked(const Endpoint& endpoint);
    std::string fresh_suffix_locked(const std::string& prefix, HandleClient& client);
    PersistentIdentifier mint_locked(const std::string& prefix, std::string_view target_url,
                                     ObjectKind kind, TargetMode mode);
    PersistentIdentifier& record_locked(std::string_view prefix, std::string_view suffix);
    void push_target_locked(PersistentIdentifier& pid, std::string_view url);

    const Clock& clock_;
    std::string landing_base_;
    TransportFactory transports_;

    mutable std::mutex mutex_;
    std::vector<Endpoint> endpoints_;
    std::map<ObjectKind, std::string> assignments_;
    std::map<std::string, std::shared_ptr<http::Transport>> transport_cache_;
    std::map<std::string, PersistentIdentifier> records_;  // by handle
    std::map<std::string, TanRecord> tans_;                // by handle
};

} // namespace fairhub::pidreg
