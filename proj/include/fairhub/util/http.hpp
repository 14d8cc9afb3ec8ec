/**
 * @file http.hpp
 * @brief Transport-neutral HTTP messages, client transports and a server wrapper
 *
 * Clients for upstream services (the Handle service, EuropePMC, DataCite,
 * the cell-line naming service) talk to an HttpTransport. Production code
 * uses NetworkTransport; tests and fixture mode swap in LoopbackTransport
 * (direct call into an in-process handler) or ReplayTransport (recorded
 * exchanges replayed byte-exact).
 */

#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairhub::http {

struct CaseInsensitiveLess {
    bool operator()(const std::string& a, const std::string& b) const noexcept;
};

using Headers = std::map<std::string, std::string, CaseInsensitiveLess>;
using Query = std::map<std::string, std::string>;

struct Request {
    std::string method = "GET";
    /// Path plus optional "?query".
    std::string target = "/";
    Headers headers;
    std::string body;

    [[nodiscard]] std::string path() const;
    [[nodiscard]] Query query() const;
    [[nodiscard]] std::string header(const std::string& name) const;
};

struct Response {
    int status = 200;
    Headers headers;
    std::string body;

    [[nodiscard]] std::string header(const std::string& name) const;

    static Response json(int status, const nlohmann::json& body);
    static Response text(int status, std::string body, std::string content_type);
};

using Handler = std::function<Response(const Request&)>;

class Transport {
public:
    virtual ~Transport() = default;
    /// Throws fairhub::Error(ServiceUnreachable) when no response can be obtained.
    virtual Response send(const Request& request) = 0;
};

/// Calls an in-process handler; no sockets involved.
class LoopbackTransport final : public Transport {
public:
    explicit LoopbackTransport(Handler handler) : handler_(std::move(handler)) {}
    Response send(const Request& request) override { return handler_(request); }

private:
    Handler handler_;
};

/// Real HTTP(S) client. The base URL may carry a path prefix, which is
/// prepended to every request target.
class NetworkTransport final : public Transport {
public:
    explicit NetworkTransport(std::string base_url, std::optional<std::string> bearer = std::nullopt);
    Response send(const Request& request) override;

private:
    std::string origin_;
    std::string path_prefix_;
    std::optional<std::string> bearer_;
};

struct Exchange {
    Request request;
    Response response;
};

void to_json(nlohmann::json& j, const Exchange& e);
void from_json(const nlohmann::json& j, Exchange& e);

/// Forwards to an inner transport and keeps every exchange.
class RecordingTransport final : public Transport {
public:
    explicit RecordingTransport(std::shared_ptr<Transport> inner) : inner_(std::move(inner)) {}
    Response send(const Request& request) override;
    [[nodiscard]] std::vector<Exchange> exchanges() const;

private:
    std::shared_ptr<Transport> inner_;
    mutable std::mutex mutex_;
    std::vector<Exchange> exchanges_;
};

/// Answers from recorded exchanges. A request matches when method, target
/// and body are byte-identical to a recorded one; anything else is
/// reported as UpstreamUnavailable.
class ReplayTransport final : public Transport {
public:
    explicit ReplayTransport(std::vector<Exchange> exchanges) : exchanges_(std::move(exchanges)) {}
    Response send(const Request& request) override;

private:
    std::vector<Exchange> exchanges_;
};

/// One exchange per *.json file in @p dir.
[[nodiscard]] std::vector<Exchange> load_fixtures(const std::filesystem::path& dir);
/// Writes @p exchange into @p dir, file name derived from the request target.
std::filesystem::path save_fixture(const std::filesystem::path& dir, const Exchange& exchange);

/// Threaded HTTP/1.1 server around a Handler.
class Server {
public:
    explicit Server(Handler handler);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds and starts serving on a background thread. Port 0 picks a free
    /// port; the bound port is returned.
    int start(const std::string& host, int port);
    /// Blocks the calling thread.
    void run(const std::string& host, int port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace fairhub::http
