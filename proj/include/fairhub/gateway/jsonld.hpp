/**
 * @file jsonld.hpp
 * @brief schema.org ScholarlyArticle JSON-LD and the article HTML page
 */

#pragma once

#include "fairhub/pidreg/registry.hpp"
#include "fairhub/pubreg/article.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairhub::gateway {

/// A linked catalogue item as it appears under "mentions".
struct Mention {
    pubreg::AssetKind kind = pubreg::AssetKind::DataPackage;
    std::string asset_id;
    std::string name;
    std::optional<pidreg::PersistentIdentifier> pid;
};

[[nodiscard]] nlohmann::ordered_json article_jsonld(const pubreg::ScholarlyArticle& article,
                                                    const std::vector<Mention>& mentions,
                                                    const std::string& base_url);

/// Compact JSON with '<', '>' and '&' written as \u escapes, so the same
/// bytes are valid both as a response body and inside a script element.
[[nodiscard]] std::string serialize_jsonld(const nlohmann::ordered_json& doc);

/// Human-readable page embedding @p jsonld_text verbatim.
[[nodiscard]] std::string article_html(const pubreg::ScholarlyArticle& article, const std::vector<Mention>& mentions,
                                       const std::string& jsonld_text);

/// True when the Accept header lists application/json or
/// application/ld+json (ignoring parameters, q=0 excluded).
[[nodiscard]] bool wants_json(std::string_view accept);

} // namespace fairhub::gateway
