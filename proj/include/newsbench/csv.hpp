#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace newsbench {

// Minimal RFC-4180 CSV: comma separated, double-quote quoting with
// doubled-quote escaping, fields may contain commas, quotes and newlines
// when quoted. Input may use LF or CRLF line ends.

class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    // Reads one record; empty optional at end of input.
    std::optional<std::vector<std::string>> next();

private:
    std::istream& in_;
};

std::string csv_escape(const std::string& field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace newsbench
