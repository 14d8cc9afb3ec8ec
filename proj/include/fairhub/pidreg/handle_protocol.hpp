/**
 * @file handle_protocol.hpp
 * @brief Wire protocol of the Handle-compatible PID service, with client and mock
 *
 *   PUT /handles/{prefix}/{suffix}  {"values":[{"type":"URL","data":"<target>"}]}
 *       -> 201 created, 200 updated (same body shape echoed back)
 *   GET /handles/{prefix}/{suffix}  -> 200 with the same body shape, 404 if unknown
 *
 * Client and mock share handle_record_body(), so both sides produce
 * identical bytes for identical records.
 */

#pragma once

#include "fairhub/util/http.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace fairhub::pidreg {

/// Canonical body: {"values":[{"type":"URL","data":"<target>"}]}
[[nodiscard]] std::string handle_record_body(std::string_view target_url);
/// The URL value of a body, or nullopt if the shape is wrong.
[[nodiscard]] std::optional<std::string> parse_handle_record_body(std::string_view body);

[[nodiscard]] std::string handle_path(std::string_view prefix, std::string_view suffix);

/// Suffix alphabet [A-Za-z0-9._-], non-empty.
[[nodiscard]] bool valid_suffix(std::string_view suffix) noexcept;
[[nodiscard]] bool valid_prefix(std::string_view prefix) noexcept;

class HandleClient {
public:
    explicit HandleClient(std::shared_ptr<http::Transport> transport)
        : transport_(std::move(transport)) {}

    /// Returns true when the handle was created, false when it was updated.
    bool put(std::string_view prefix, std::string_view suffix, std::string_view target_url);
    [[nodiscard]] std::optional<std::string> get(std::string_view prefix, std::string_view suffix);

private:
    std::shared_ptr<http::Transport> transport_;
};

/// In-process Handle service implementing the wire protocol above.
class HandleServiceMock {
public:
    [[nodiscard]] http::Response handle(const http::Request& request);
    [[nodiscard]] http::Handler handler();

    [[nodiscard]] std::optional<std::string> lookup(const std::string& handle) const;
    [[nodiscard]] std::size_t size() const;

    [[nodiscard]] nlohmann::json to_json() const;
    void load_json(const nlohmann::json& j);

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::string> records_;
};

} // namespace fairhub::pidreg
