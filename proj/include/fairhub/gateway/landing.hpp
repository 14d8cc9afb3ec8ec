/**
 * @file landing.hpp
 * @brief Public minimal-metadata pages that PIDs resolve to
 */

#pragma once

#include "fairhub/util/clock.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fairhub::gateway {

/// Everything a landing page may show. Built from the object without
/// consulting the visitor, so restricted content never reaches it.
struct LandingPageView {
    /// "prefix/suffix"; empty for pages that have no PID of their own.
    std::string pid;
    std::string object_kind;
    std::string title_or_designation;
    std::string owning_group_name;
    Timestamp created_at{};
    /// Set for Public objects only.
    std::optional<std::string> full_record_url;
    /// (label, url) pairs to public external registries.
    std::vector<std::pair<std::string, std::string>> external_links;

    friend bool operator==(const LandingPageView&, const LandingPageView&) = default;
};

[[nodiscard]] std::string render_landing_html(const LandingPageView& view);
[[nodiscard]] std::string render_not_found_html(const std::string& what);

} // namespace fairhub::gateway
