#include "fairhub/util/http.hpp"

#include "fairhub/error.hpp"
#include "fairhub/util/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace fairhub::http {

bool CaseInsensitiveLess::operator()(const std::string& a, const std::string& b) const noexcept {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                        [](unsigned char x, unsigned char y) {
                                            return std::tolower(x) < std::tolower(y);
                                        });
}

std::string Request::path() const {
    return target.substr(0, target.find('?'));
}

Query Request::query() const {
    Query q;
    const auto pos = target.find('?');
    if (pos == std::string::npos) {
        return q;
    }
    for (const auto& pair : text::split(std::string_view(target).substr(pos + 1), "&")) {
        if (pair.empty()) {
            continue;
        }
        const auto eq = pair.find('=');
        if (eq == std::string::npos) {
            q[text::url_decode(pair)] = "";
        } else {
            q[text::url_decode(pair.substr(0, eq))] = text::url_decode(pair.substr(eq + 1));
        }
    }
    return q;
}

std::string Request::header(const std::string& name) const {
    const auto it = headers.find(name);
    return it == headers.end() ? std::string{} : it->second;
}

std::string Response::header(const std::string& name) const {
    const auto it = headers.find(name);
    return it == headers.end() ? std::string{} : it->second;
}

Response Response::json(int status, const nlohmann::json& body) {
    Response r;
    r.status = status;
    r.headers["Content-Type"] = "application/json";
    r.body = body.dump();
    return r;
}

Response Response::text(int status, std::string body, std::string content_type) {
    Response r;
    r.status = status;
    r.headers["Content-Type"] = std::move(content_type);
    r.body = std::move(body);
    return r;
}

void to_json(nlohmann::json& j, const Exchange& e) {
    nlohmann::json req_headers = nlohmann::json::object();
    for (const auto& [k, v] : e.request.headers) {
        req_headers[k] = v;
    }
    nlohmann::json resp_headers = nlohmann::json::object();
    for (const auto& [k, v] : e.response.headers) {
        resp_headers[k] = v;
    }
    j = nlohmann::json{
        {"request",
         {{"method", e.request.method},
          {"target", e.request.target},
          {"headers", req_headers},
          {"body", e.request.body}}},
        {"response", {{"status", e.response.status}, {"headers", resp_headers}, {"body", e.response.body}}},
    };
}

void from_json(const nlohmann::json& j, Exchange& e) {
    const auto& req = j.at("request");
    e.request.method = req.at("method").get<std::string>();
    e.request.target = req.at("target").get<std::string>();
    e.request.body = req.value("body", std::string{});
    const auto req_headers = req.value("headers", nlohmann::json::object());
    for (const auto& [k, v] : req_headers.items()) {
        e.request.headers[k] = v.get<std::string>();
    }
    const auto& resp = j.at("response");
    e.response.status = resp.at("status").get<int>();
    e.response.body = resp.value("body", std::string{});
    const auto resp_headers = resp.value("headers", nlohmann::json::object());
    for (const auto& [k, v] : resp_headers.items()) {
        e.response.headers[k] = v.get<std::string>();
    }
}

Response RecordingTransport::send(const Request& request) {
    Response response = inner_->send(request);
    std::lock_guard lock(mutex_);
    exchanges_.push_back(Exchange{request, response});
    return response;
}

std::vector<Exchange> RecordingTransport::exchanges() const {
    std::lock_guard lock(mutex_);
    return exchanges_;
}

Response ReplayTransport::send(const Request& request) {
    for (const auto& e : exchanges_) {
        if (e.request.method == request.method && e.request.target == request.target &&
            e.request.body == request.body) {
            return e.response;
        }
    }
    throw Error(Errc::UpstreamUnavailable,
                "no recorded exchange for " + request.method + " " + request.target);
}

std::vector<Exchange> load_fixtures(const std::filesystem::path& dir) {
    std::vector<Exchange> out;
    if (!std::filesystem::is_directory(dir)) {
        return out;
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        std::ifstream in(file, std::ios::binary);
        out.push_back(nlohmann::json::parse(in).get<Exchange>());
    }
    return out;
}

std::filesystem::path save_fixture(const std::filesystem::path& dir, const Exchange& exchange) {
    std::filesystem::create_directories(dir);
    std::string name;
    for (const char c : exchange.request.method + "_" + exchange.request.target) {
        const auto uc = static_cast<unsigned char>(c);
        name.push_back(std::isalnum(uc) || c == '.' || c == '-' ? c : '_');
    }
    if (name.size() > 180) {
        name.resize(180);
    }
    const auto path = dir / (name + ".json");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << nlohmann::json(exchange).dump(2) << '\n';
    return path;
}

} // namespace fairhub::http
