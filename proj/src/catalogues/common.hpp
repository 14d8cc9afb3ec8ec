#pragma once

#include "fairhub/error.hpp"
#include "fairhub/pidreg/registry.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace fairhub::catalogues::detail {

// Catalogue records get a PID when an endpoint serves their kind.
inline std::optional<pidreg::PersistentIdentifier> mint_if_configured(pidreg::PidRegistry* pids,
                                                                      pidreg::ObjectKind kind,
                                                                      const std::string& object_id) {
    if (!pids) return std::nullopt;
    try {
        return pids->mint_bound(kind, object_id);
    } catch (const Error& e) {
        if (e.code() == Errc::PrefixNotConfigured) return std::nullopt;
        throw;
    }
}

template <class T>
nlohmann::json opt(const std::optional<T>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline std::optional<std::string> opt_string(const nlohmann::json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<std::string>();
}

inline std::optional<std::string> nonempty(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return s;
}

} // namespace fairhub::catalogues::detail
