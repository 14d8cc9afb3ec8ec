/**
 * @file sessions.hpp
 * @brief Bearer session tokens; only their digests are kept
 */

#pragma once

#include "fairhub/util/clock.hpp"
#include "fairhub/util/ids.hpp"

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <string>

namespace fairhub::gateway {

struct SessionToken {
    /// 256 random bits, hex encoded. Returned once, never stored.
    std::string token;
    UserId user_id;
    Timestamp issued_at{};
    Timestamp expires_at{};
};

class SessionStore {
public:
    explicit SessionStore(const Clock& clock, std::chrono::seconds ttl = std::chrono::hours(12))
        : clock_(clock), ttl_(ttl) {}

    SessionToken issue(const UserId& user);
    /// The user behind a live token; expired tokens are dropped.
    [[nodiscard]] std::optional<UserId> validate(const std::string& token);
    void revoke(const std::string& token);
    [[nodiscard]] std::size_t size() const;

private:
    struct Entry {
        UserId user;
        Timestamp expires_at;
    };

    const Clock& clock_;
    std::chrono::seconds ttl_;
    mutable std::mutex mutex_;
    std::map<std::string, Entry> by_digest_;
};

} // namespace fairhub::gateway
