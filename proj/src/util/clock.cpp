#include "fairhub/util/clock.hpp"

#include <charconv>
#include <cstdio>
#include <ctime>

namespace fairhub {

Timestamp SystemClock::now() const {
    return std::chrono::time_point_cast<std::chrono::microseconds>(std::chrono::system_clock::now());
}

std::int64_t to_micros(Timestamp t) noexcept { return t.time_since_epoch().count(); }

Timestamp from_micros(std::int64_t micros) noexcept {
    return Timestamp{std::chrono::microseconds{micros}};
}

std::string format_iso8601(Timestamp t) {
    const auto secs = std::chrono::floor<std::chrono::seconds>(t);
    const std::time_t tt = secs.time_since_epoch().count();
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::optional<Timestamp> parse_iso8601(std::string_view text) {
    if (text.size() != 20 || text[10] != 'T' || text[13] != ':' || text[16] != ':' || text[19] != 'Z') {
        return std::nullopt;
    }
    const auto date = parse_date(text.substr(0, 10));
    if (!date) {
        return std::nullopt;
    }
    int hms[3] = {0, 0, 0};
    for (int i = 0; i < 3; ++i) {
        const char a = text[11 + 3 * i];
        const char b = text[12 + 3 * i];
        if (a < '0' || a > '9' || b < '0' || b > '9') {
            return std::nullopt;
        }
        hms[i] = (a - '0') * 10 + (b - '0');
    }
    if (hms[0] > 23 || hms[1] > 59 || hms[2] > 60) {
        return std::nullopt;
    }
    return Timestamp{std::chrono::sys_days{*date}} + std::chrono::hours{hms[0]} + std::chrono::minutes{hms[1]} +
           std::chrono::seconds{hms[2]};
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

std::optional<Date> parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        return std::nullopt;
    }
    auto number = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        int value = 0;
        const char* first = text.data() + pos;
        auto [ptr, ec] = std::from_chars(first, first + len, value);
        if (ec != std::errc{} || ptr != first + len) {
            return std::nullopt;
        }
        return value;
    };
    const auto y = number(0, 4);
    const auto m = number(5, 2);
    const auto d = number(8, 2);
    if (!y || !m || !d) {
        return std::nullopt;
    }
    const Date date{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                    std::chrono::day{static_cast<unsigned>(*d)}};
    if (!date.ok()) {
        return std::nullopt;
    }
    return date;
}

Date to_date(Timestamp t) {
    return Date{std::chrono::floor<std::chrono::days>(t)};
}

} // namespace fairhub
