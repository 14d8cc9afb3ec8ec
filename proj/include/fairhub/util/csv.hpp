/**
 * @file csv.hpp
 * @brief RFC 4180 CSV reading and writing
 *
 * Records end with CRLF on output. Fields are quoted only when they contain
 * a comma, a double quote, CR or LF. The reader accepts CRLF and bare LF.
 */

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fairhub::csv {

using Row = std::vector<std::string>;

[[nodiscard]] std::string format_field(std::string_view field);
[[nodiscard]] std::string format_row(const Row& row);
[[nodiscard]] std::string format(const std::vector<Row>& rows);

/// Throws fairhub::Error(ValidationError) on an unterminated quoted field.
[[nodiscard]] std::vector<Row> parse(std::string_view data);

} // namespace fairhub::csv
