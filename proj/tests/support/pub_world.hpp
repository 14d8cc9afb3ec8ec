/**
 * @file pub_world.hpp
 * @brief Publication registry replaying the committed upstream fixtures
 */

#pragma once

#include "access_world.hpp"

#include "fairhub/pubreg/registry.hpp"

#include <filesystem>
#include <memory>
#include <random>

namespace fairhub::testkit {

inline std::filesystem::path fixture_dir() { return FAIRHUB_FIXTURE_DIR; }

inline std::shared_ptr<http::Transport> replay(const std::string& service) {
    return std::make_shared<http::ReplayTransport>(http::load_fixtures(fixture_dir() / "upstream" / service));
}

struct PubWorld : AccessWorld {
    ManualClock clock{Timestamp{std::chrono::seconds{1760000000}}};
    pubreg::PublicationRegistry reg{dir, clock, replay("europepmc"), replay("datacite")};
};

/// Random article with fields drawn from small pools; CSV-hostile
/// characters appear on purpose.
inline pubreg::ScholarlyArticle random_article(std::mt19937_64& rng, std::size_t n) {
    auto pick = [&](std::size_t k) { return std::uniform_int_distribution<std::size_t>(0, k - 1)(rng); };
    static const char* words[] = {"cardiac", "Mouse", "\"quoted\"", "strain, imaging", "iPSC", "Ünïcode",
                                  "line\nbreak", "fibrosis", "model", "α-actinin"};
    static const char* families[] = {"Keller", "Öst Hansen", "Ruiz-García", "O'Neil", "Tanaka", "Brandt-Weber"};
    static const char* givens[] = {"A", "AB", "Björn", "Hiro", "", "M"};
    pubreg::ScholarlyArticle a;
    a.article_id = make_id<ArticleId>();
    const std::size_t words_n = 1 + pick(6);
    for (std::size_t i = 0; i < words_n; ++i) a.title += (i ? " " : "") + std::string(words[pick(10)]);
    const std::size_t authors_n = pick(4);
    for (std::size_t i = 0; i < authors_n; ++i) a.authors.push_back({families[pick(6)], givens[pick(6)], std::nullopt});
    a.year = 1990 + static_cast<int>(pick(35));
    a.journal = pick(2) ? "Cardiovascular research" : "Journal, of \"Things\"";
    if (pick(3)) a.doi = "10.5555/rand." + std::to_string(n);
    if (pick(3)) a.pmid = std::to_string(40000000 + n);
    a.publication_type = pubreg::publication_types()[pick(6)];
    a.open_access = pick(2) == 1;
    return a;
}

} // namespace fairhub::testkit
