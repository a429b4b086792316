#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xclus::csv {

// RFC-4180 table: quoted fields, doubled-quote escapes, CRLF or LF line ends,
// embedded newlines inside quoted fields.
std::vector<std::vector<std::string>> parse(std::istream& in);
std::vector<std::vector<std::string>> parse_file(const std::string& path);

std::string escape_field(const std::string& field);
void write_row(std::ostream& out, const std::vector<std::string>& row);
void write(std::ostream& out, const std::vector<std::vector<std::string>>& rows);

// Shortest text that parses back to exactly the same double.
std::string format_double(double value);

}  // namespace xclus::csv
