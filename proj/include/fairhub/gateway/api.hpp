/**
 * @file api.hpp
 * @brief HTTP routing for /api/v1, article pages and landing pages
 */

#pragma once

#include "fairhub/error.hpp"
#include "fairhub/gateway/app.hpp"
#include "fairhub/util/http.hpp"

namespace fairhub::gateway {

/// Error body for @p e: {"error": code, "message": text[, "details"]}.
[[nodiscard]] http::Response error_response(const Error& e);

class Api {
public:
    explicit Api(App& app) : app_(app) {}

    /// Never throws; every failure becomes a JSON error body.
    http::Response handle(const http::Request& request);
    [[nodiscard]] http::Handler handler();

private:
    http::Response route(const http::Request& request);
    App& app_;
};

} // namespace fairhub::gateway
