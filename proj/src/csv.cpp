#include "newsbench/csv.hpp"

#include <istream>
#include <ostream>

namespace newsbench {

std::optional<std::vector<std::string>> CsvReader::next() {
    int first = in_.peek();
    if (first == std::char_traits<char>::eof()) return std::nullopt;

    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    char c;
    while (in_.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in_.peek() == '"') {
                    in_.get(c);
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\r') {
            if (in_.peek() == '\n') in_.get(c);
            fields.push_back(std::move(field));
            return fields;
        } else if (c == '\n') {
            fields.push_back(std::move(field));
            return fields;
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

std::string csv_escape(const std::string& field) {
    bool needs_quotes = field.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(fields[i]);
    }
    out << '\n';
}

}  // namespace newsbench
