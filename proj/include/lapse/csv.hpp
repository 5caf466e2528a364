#ifndef LAPSE_CSV_HPP
#define LAPSE_CSV_HPP

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace lapse::csv {

using Row = std::vector<std::string>;

/// Reads comma-separated records with double-quote escaping ("" inside a
/// quoted field is a literal quote; quoted fields may span lines). CRLF and
/// LF line endings are both accepted. Blank lines are skipped.
std::vector<Row> read(std::istream& in);
std::vector<Row> read_file(const std::string& path);

/// Quotes a field only when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const Row& row);

} // namespace lapse::csv

#endif
