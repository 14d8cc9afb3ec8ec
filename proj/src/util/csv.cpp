#include "fairhub/util/csv.hpp"

#include "fairhub/error.hpp"

namespace fairhub::csv {

std::string format_field(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_row(const Row& row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i != 0) {
            out.push_back(',');
        }
        out += format_field(row[i]);
    }
    out += "\r\n";
    return out;
}

std::string format(const std::vector<Row>& rows) {
    std::string out;
    for (const auto& row : rows) {
        out += format_row(row);
    }
    return out;
}

std::vector<Row> parse(std::string_view data) {
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t i = 0;

    auto end_row = [&] {
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        field_started = false;
    };

    while (i < data.size()) {
        const char c = data[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < data.size() && data[i + 1] == '"') {
                    field.push_back('"');
                    i += 2;
                    continue;
                }
                in_quotes = false;
                ++i;
                continue;
            }
            field.push_back(c);
            ++i;
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                field_started = true;
                ++i;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                field_started = true;
                ++i;
                break;
            case '\r':
                if (i + 1 < data.size() && data[i + 1] == '\n') {
                    ++i;
                }
                [[fallthrough]];
            case '\n':
                end_row();
                ++i;
                break;
            default:
                field.push_back(c);
                field_started = true;
                ++i;
        }
    }
    if (in_quotes) {
        throw Error(Errc::ValidationError, "unterminated quoted CSV field");
    }
    if (field_started || !row.empty()) {
        end_row();
    }
    return rows;
}

} // namespace fairhub::csv
