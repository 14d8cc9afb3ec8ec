#include "fairhub/gateway/sessions.hpp"

#include "fairhub/util/crypto.hpp"

namespace fairhub::gateway {

SessionToken SessionStore::issue(const UserId& user) {
    SessionToken t;
    t.token = crypto::to_hex(crypto::random_bytes(32));
    t.user_id = user;
    t.issued_at = clock_.now();
    t.expires_at = t.issued_at + std::chrono::duration_cast<std::chrono::microseconds>(ttl_);
    std::lock_guard lock(mutex_);
    by_digest_[crypto::sha256_hex(t.token)] = {user, t.expires_at};
    return t;
}

std::optional<UserId> SessionStore::validate(const std::string& token) {
    if (token.empty()) return std::nullopt;
    const auto digest = crypto::sha256_hex(token);
    std::lock_guard lock(mutex_);
    const auto it = by_digest_.find(digest);
    if (it == by_digest_.end()) return std::nullopt;
    if (clock_.now() >= it->second.expires_at) {
        by_digest_.erase(it);
        return std::nullopt;
    }
    return it->second.user;
}

void SessionStore::revoke(const std::string& token) {
    std::lock_guard lock(mutex_);
    by_digest_.erase(crypto::sha256_hex(token));
}

std::size_t SessionStore::size() const {
    std::lock_guard lock(mutex_);
    return by_digest_.size();
}

} // namespace fairhub::gateway
