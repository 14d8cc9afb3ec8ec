/**
 * @file config.hpp
 * @brief Server configuration read from FAIRHUB_* environment variables
 */

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

namespace fairhub::gateway {

enum class FixtureMode { Off, Replay, Record };

struct Config {
    /// FAIRHUB_LISTEN_ADDR, "host:port"
    std::string listen_host = "127.0.0.1";
    int listen_port = 8080;
    /// FAIRHUB_DATA_DIR: state.json, the package store and recorded fixtures
    std::filesystem::path data_dir = "fairhub-data";
    /// FAIRHUB_PID_BASE_URL: public base URL that PIDs resolve to
    std::string pid_base_url = "http://127.0.0.1:8080";
    /// FAIRHUB_FIXTURE_MODE: off | replay | record
    FixtureMode fixture_mode = FixtureMode::Off;

    [[nodiscard]] std::filesystem::path fixture_dir() const { return data_dir / "fixtures"; }
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

/// Throws InvalidArgument for malformed values.
[[nodiscard]] Config config_from_env(const EnvLookup& env);
[[nodiscard]] Config config_from_process_env();

} // namespace fairhub::gateway
