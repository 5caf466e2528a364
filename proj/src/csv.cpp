#include "lapse/csv.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "lapse/error.hpp"

namespace lapse::csv {

std::vector<Row> read(std::istream& in)
{
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        if (field_started || !row.empty()) {
            end_field();
            rows.push_back(std::move(row));
        }
        row.clear();
    };

    char c = 0;
    while (in.get(c)) {
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') { ++line; }
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field.empty()) {
                fail(ErrorKind::parse, "line " + std::to_string(line) + ": stray quote inside unquoted field");
            }
            in_quotes = true;
            field_started = true;
            break;
        case ',':
            field_started = true;
            end_field();
            field_started = true;
            break;
        case '\r':
            break;
        case '\n':
            end_row();
            ++line;
            break;
        default:
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) { fail(ErrorKind::parse, "unterminated quoted field at end of input"); }
    end_row();
    return rows;
}

std::vector<Row> read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) { fail(ErrorKind::io, "cannot open '" + path + "' for reading"); }
    return read(in);
}

std::string escape(std::string_view field)
{
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) { return std::string(field); }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') { out.push_back('"'); }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const Row& row)
{
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i > 0) { out << ','; }
        out << escape(row[i]);
    }
    out << '\n';
}

} // namespace lapse::csv
