/**
 * @file clock.hpp
 * @brief Injectable wall clock and timestamp helpers
 */

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fairhub {

using Timestamp = std::chrono::sys_time<std::chrono::microseconds>;
using Date = std::chrono::year_month_day;

class Clock {
public:
    virtual ~Clock() = default;
    [[nodiscard]] virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
public:
    [[nodiscard]] Timestamp now() const override;
};

/// Test clock; only moves when told to.
class ManualClock final : public Clock {
public:
    explicit ManualClock(Timestamp start = Timestamp{std::chrono::seconds{1700000000}})
        : micros_(start.time_since_epoch().count()) {}

    [[nodiscard]] Timestamp now() const override {
        return Timestamp{std::chrono::microseconds{micros_.load()}};
    }
    void set(Timestamp t) { micros_.store(t.time_since_epoch().count()); }
    void advance(std::chrono::microseconds d) { micros_.fetch_add(d.count()); }

private:
    std::atomic<std::int64_t> micros_;
};

[[nodiscard]] std::int64_t to_micros(Timestamp t) noexcept;
[[nodiscard]] Timestamp from_micros(std::int64_t micros) noexcept;

/// "2024-05-01T12:00:00Z" (second precision, UTC).
[[nodiscard]] std::string format_iso8601(Timestamp t);
/// Inverse of format_iso8601.
[[nodiscard]] std::optional<Timestamp> parse_iso8601(std::string_view text);

[[nodiscard]] std::string format_date(const Date& d);
/// Parses "YYYY-MM-DD"; nullopt on anything else or an invalid calendar date.
[[nodiscard]] std::optional<Date> parse_date(std::string_view text);
[[nodiscard]] Date to_date(Timestamp t);

} // namespace fairhub
