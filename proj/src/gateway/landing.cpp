#include "fairhub/gateway/landing.hpp"

#include "fairhub/util/text.hpp"

namespace fairhub::gateway {

std::string render_landing_html(const LandingPageView& v) {
    using text::html_escape;
    std::string h;
    h += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
    h += "<title>" + html_escape(v.title_or_designation) + "</title>\n</head>\n<body>\n<main class=\"landing\">\n";
    h += "<h1>" + html_escape(v.title_or_designation) + "</h1>\n<dl>\n";
    if (!v.pid.empty()) {
        h += "<dt>Persistent identifier</dt><dd><a href=\"https://hdl.handle.net/" + html_escape(v.pid) + "\">" +
             html_escape(v.pid) + "</a></dd>\n";
    }
    h += "<dt>Type</dt><dd>" + html_escape(v.object_kind) + "</dd>\n";
    h += "<dt>Group</dt><dd>" + html_escape(v.owning_group_name.empty() ? "-" : v.owning_group_name) + "</dd>\n";
    h += "<dt>Registered</dt><dd>" + format_iso8601(v.created_at) + "</dd>\n</dl>\n";
    if (!v.external_links.empty()) {
        h += "<ul class=\"external\">\n";
        for (const auto& [label, url] : v.external_links) {
            h += "<li><a href=\"" + html_escape(url) + "\">" + html_escape(label) + "</a></li>\n";
        }
        h += "</ul>\n";
    }
    if (v.full_record_url) {
        h += "<p><a href=\"" + html_escape(*v.full_record_url) + "\">Full record</a></p>\n";
    }
    h += "</main>\n</body>\n</html>\n";
    return h;
}

std::string render_not_found_html(const std::string& what) {
    return "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>Not found</title>\n"
           "</head>\n<body>\n<h1>Not found</h1>\n<p>" +
           text::html_escape(what) + "</p>\n</body>\n</html>\n";
}

} // namespace fairhub::gateway
