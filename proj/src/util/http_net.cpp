// cpp-httplib is confined to this translation unit.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "fairhub/util/http.hpp"

#include "fairhub/error.hpp"

#include <thread>

namespace fairhub::http {

NetworkTransport::NetworkTransport(std::string base_url, std::optional<std::string> bearer)
    : bearer_(std::move(bearer)) {
    const auto scheme_end = base_url.find("://");
    const auto path_start =
        scheme_end == std::string::npos ? std::string::npos : base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        origin_ = base_url;
    } else {
        origin_ = base_url.substr(0, path_start);
        path_prefix_ = base_url.substr(path_start);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') {
            path_prefix_.pop_back();
        }
    }
}

Response NetworkTransport::send(const Request& request) {
    httplib::Client client(origin_);
    client.set_connection_timeout(5);
    client.set_read_timeout(30);
    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) {
        headers.emplace(k, v);
    }
    if (bearer_) {
        headers.emplace("Authorization", "Bearer " + *bearer_);
    }
    const std::string target = path_prefix_ + request.target;
    const std::string content_type = request.header("Content-Type").empty()
                                         ? std::string("application/json")
                                         : request.header("Content-Type");
    httplib::Result result{nullptr, httplib::Error::Unknown};
    if (request.method == "GET") {
        result = client.Get(target, headers);
    } else if (request.method == "PUT") {
        result = client.Put(target, headers, request.body, content_type);
    } else if (request.method == "POST") {
        result = client.Post(target, headers, request.body, content_type);
    } else if (request.method == "DELETE") {
        result = client.Delete(target, headers);
    } else {
        throw Error(Errc::InvalidArgument, "unsupported HTTP method " + request.method);
    }
    if (!result) {
        throw Error(Errc::ServiceUnreachable,
                    origin_ + " unreachable: " + httplib::to_string(result.error()));
    }
    Response response;
    response.status = result->status;
    response.body = result->body;
    for (const auto& [k, v] : result->headers) {
        if (k == "Content-Type" || k == "Location") {
            response.headers[k] = v;
        }
    }
    return response;
}

struct Server::Impl {
    httplib::Server server;
    std::thread thread;
};

Server::Server(Handler handler) : impl_(std::make_unique<Impl>()) {
    auto dispatch = [handler = std::move(handler)](const httplib::Request& in,
                                                    httplib::Response& out) {
        Request request;
        request.method = in.method;
        request.target = in.target.empty() ? in.path : in.target;
        request.body = in.body;
        for (const auto& [k, v] : in.headers) {
            request.headers[k] = v;
        }
        Response response;
        try {
            response = handler(request);
        } catch (const Error& e) {
            response = Response::json(
                http_status(e.code()),
                {{"error", {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}}});
        } catch (const std::exception&) {
            response = Response::json(
                500, {{"error", {{"code", "Internal"}, {"message", "internal error"}}}});
        }
        out.status = response.status;
        std::string content_type = response.header("Content-Type");
        for (const auto& [k, v] : response.headers) {
            if (k != "Content-Type") {
                out.set_header(k, v);
            }
        }
        out.set_content(response.body, content_type.empty() ? "text/plain" : content_type);
    };
    const auto pattern = R"(.*)";
    impl_->server.Get(pattern, dispatch);
    impl_->server.Post(pattern, dispatch);
    impl_->server.Put(pattern, dispatch);
    impl_->server.Delete(pattern, dispatch);
}

Server::~Server() { stop(); }

int Server::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) {
        throw Error(Errc::ServiceUnreachable, "cannot bind " + host + ":" + std::to_string(port));
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void Server::run(const std::string& host, int port) {
    if (!impl_->server.listen(host, port)) {
        throw Error(Errc::ServiceUnreachable, "cannot listen on " + host + ":" + std::to_string(port));
    }
}

void Server::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) {
        impl_->thread.join();
    }
}

} // namespace fairhub::http
