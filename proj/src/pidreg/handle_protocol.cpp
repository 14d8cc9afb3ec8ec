#include "fairhub/pidreg/handle_protocol.hpp"

#include "fairhub/error.hpp"

#include <cctype>

namespace fairhub::pidreg {

std::string handle_record_body(std::string_view target_url) {
    nlohmann::ordered_json value;
    value["type"] = "URL";
    value["data"] = std::string(target_url);
    nlohmann::ordered_json body;
    body["values"] = nlohmann::ordered_json::array({value});
    return body.dump();
}

std::optional<std::string> parse_handle_record_body(std::string_view body) {
    const auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("values") || !j["values"].is_array()) {
        return std::nullopt;
    }
    for (const auto& v : j["values"]) {
        if (v.is_object() && v.value("type", "") == "URL" && v.contains("data") && v["data"].is_string()) {
            return v["data"].get<std::string>();
        }
    }
    return std::nullopt;
}

std::string handle_path(std::string_view prefix, std::string_view suffix) {
    std::string path = "/handles/";
    path.append(prefix);
    path.push_back('/');
    path.append(suffix);
    return path;
}

bool valid_suffix(std::string_view suffix) noexcept {
    if (suffix.empty()) return false;
    for (const char c : suffix) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '_' && c != '-') return false;
    }
    return true;
}

bool valid_prefix(std::string_view prefix) noexcept {
    if (prefix.empty()) return false;
    for (const char c : prefix) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.') return false;
    }
    return true;
}

bool HandleClient::put(std::string_view prefix, std::string_view suffix, std::string_view target_url) {
    http::Request req;
    req.method = "PUT";
    req.target = handle_path(prefix, suffix);
    req.headers["Content-Type"] = "application/json";
    req.body = handle_record_body(target_url);
    const auto resp = transport_->send(req);
    if (resp.status == 201) return true;
    if (resp.status == 200) return false;
    throw Error(Errc::ServiceUnreachable,
                "PID service rejected PUT " + req.target + " with status " + std::to_string(resp.status));
}

std::optional<std::string> HandleClient::get(std::string_view prefix, std::string_view suffix) {
    http::Request req;
    req.method = "GET";
    req.target = handle_path(prefix, suffix);
    const auto resp = transport_->send(req);
    if (resp.status == 404) return std::nullopt;
    if (resp.status != 200) {
        throw Error(Errc::ServiceUnreachable,
                    "PID service answered GET " + req.target + " with status " + std::to_string(resp.status));
    }
    auto url = parse_handle_record_body(resp.body);
    if (!url) {
        throw Error(Errc::ServiceUnreachable, "PID service sent a malformed handle record");
    }
    return url;
}

http::Response HandleServiceMock::handle(const http::Request& request) {
    static constexpr std::string_view root = "/handles/";
    const std::string path = request.path();
    if (path.rfind(root, 0) != 0) {
        return http::Response::json(404, {{"error", "not found"}});
    }
    const std::string rest = path.substr(root.size());
    const auto slash = rest.find('/');
    if (slash == std::string::npos) {
        return http::Response::json(404, {{"error", "not found"}});
    }
    const std::string prefix = rest.substr(0, slash);
    const std::string suffix = rest.substr(slash + 1);
    if (!valid_prefix(prefix) || !valid_suffix(suffix)) {
        return http::Response::json(400, {{"error", "malformed handle"}});
    }
    const std::string key = prefix + "/" + suffix;

    if (request.method == "GET") {
        std::lock_guard lock(mutex_);
        const auto it = records_.find(key);
        if (it == records_.end()) {
            return http::Response::json(404, {{"error", "handle not found"}});
        }
        return http::Response::text(200, handle_record_body(it->second), "application/json");
    }
    if (request.method == "PUT") {
        const auto url = parse_handle_record_body(request.body);
        if (!url) {
            return http::Response::json(400, {{"error", "body must carry a URL value"}});
        }
        std::lock_guard lock(mutex_);
        const bool created = records_.insert_or_assign(key, *url).second;
        return http::Response::text(created ? 201 : 200, handle_record_body(*url), "application/json");
    }
    return http::Response::json(405, {{"error", "method not allowed"}});
}

http::Handler HandleServiceMock::handler() {
    return [this](const http::Request& r) { return handle(r); };
}

std::optional<std::string> HandleServiceMock::lookup(const std::string& handle) const {
    std::lock_guard lock(mutex_);
    const auto it = records_.find(handle);
    if (it == records_.end()) return std::nullopt;
    return it->second;
}

std::size_t HandleServiceMock::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

nlohmann::json HandleServiceMock::to_json() const {
    std::lock_guard lock(mutex_);
    return records_;
}

void HandleServiceMock::load_json(const nlohmann::json& j) {
    std::lock_guard lock(mutex_);
    records_ = j.get<std::map<std::string, std::string>>();
}

} // namespace fairhub::pidreg
