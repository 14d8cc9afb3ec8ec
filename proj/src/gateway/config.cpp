#include "fairhub/gateway/config.hpp"

#include "fairhub/error.hpp"
#include "fairhub/util/text.hpp"

#include <cstdlib>

namespace fairhub::gateway {

Config config_from_env(const EnvLookup& env) {
    Config c;
    if (const auto addr = env("FAIRHUB_LISTEN_ADDR")) {
        const auto colon = addr->rfind(':');
        const auto port = colon == std::string::npos ? std::string{} : addr->substr(colon + 1);
        if (colon == 0 || port.empty() || port.size() > 5 || !text::all_digits(port) || std::stoi(port) > 65535) {
            throw Error(Errc::InvalidArgument, "FAIRHUB_LISTEN_ADDR must look like host:port");
        }
        c.listen_host = addr->substr(0, colon);
        c.listen_port = std::stoi(port);
    }
    if (const auto dir = env("FAIRHUB_DATA_DIR"); dir && !dir->empty()) c.data_dir = *dir;
    if (const auto base = env("FAIRHUB_PID_BASE_URL")) {
        if (!text::is_absolute_url(*base)) throw Error(Errc::InvalidArgument, "FAIRHUB_PID_BASE_URL must be absolute");
        c.pid_base_url = *base;
        while (c.pid_base_url.size() > 1 && c.pid_base_url.back() == '/') c.pid_base_url.pop_back();
    }
    if (const auto mode = env("FAIRHUB_FIXTURE_MODE")) {
        const auto m = text::to_lower(*mode);
        if (m == "off" || m.empty()) {
            c.fixture_mode = FixtureMode::Off;
        } else if (m == "replay") {
            c.fixture_mode = FixtureMode::Replay;
        } else if (m == "record") {
            c.fixture_mode = FixtureMode::Record;
        } else {
            throw Error(Errc::InvalidArgument, "FAIRHUB_FIXTURE_MODE must be off, replay or record");
        }
    }
    return c;
}

Config config_from_process_env() {
    return config_from_env([](const char* name) -> std::optional<std::string> {
        const char* v = std::getenv(name);
        if (!v) return std::nullopt;
        return std::string(v);
    });
}

} // namespace fairhub::gateway
