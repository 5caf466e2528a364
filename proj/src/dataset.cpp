#include "lapse/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "lapse/csv.hpp"
#include "lapse/error.hpp"

namespace lapse {

namespace {

using std::chrono::day;
using std::chrono::month;
using std::chrono::sys_days;
using std::chrono::year;

bool parse_fixed_digits(std::string_view text, int& out)
{
    if (text.empty()) { return false; }
    for (char c : text) {
        if (c < '0' || c > '9') { return false; }
    }
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

std::string format_double(double value)
{
    char buffer[64];
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return {buffer, ptr};
}

std::optional<double> parse_double(std::string_view text)
{
    if (text.empty()) { return std::nullopt; }
    if (text.front() == '+') { text.remove_prefix(1); }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) { return std::nullopt; }
    return value;
}

std::optional<std::int64_t> parse_int(std::string_view text)
{
    if (text.empty()) { return std::nullopt; }
    if (text.front() == '+') { text.remove_prefix(1); }
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) { return std::nullopt; }
    return value;
}

enum class Field { treatment_date, provider_code, diagnosis, prescription, charges_spent, company_code, payment_date };

struct FieldInfo {
    std::string_view name;
    Field field;
    ColumnKind kind;
};

constexpr FieldInfo kFields[] = {
    {column::treatment_date, Field::treatment_date, ColumnKind::date},
    {column::provider_code, Field::provider_code, ColumnKind::categorical},
    {column::diagnosis, Field::diagnosis, ColumnKind::categorical},
    {column::prescription, Field::prescription, ColumnKind::categorical},
    {column::charges_spent, Field::charges_spent, ColumnKind::numeric},
    {column::company_code, Field::company_code, ColumnKind::categorical},
    {column::payment_date, Field::payment_date, ColumnKind::date},
};

const FieldInfo& field_info(std::string_view name)
{
    for (const auto& info : kFields) {
        if (info.name == name) { return info; }
    }
    fail(ErrorKind::schema, "unknown column '" + std::string(name) + "'");
}

std::string cell_text(const InsuranceRecord& r, Field field)
{
    switch (field) {
    case Field::treatment_date: return format_date(r.treatment_date);
    case Field::provider_code: return std::to_string(r.provider_code);
    case Field::diagnosis: return r.diagnosis;
    case Field::prescription: return r.prescription;
    case Field::charges_spent: return format_double(r.charges_spent);
    case Field::company_code: return std::to_string(r.company_code);
    case Field::payment_date: return r.payment_date ? format_date(*r.payment_date) : std::string{};
    }
    return {};
}

Dataset from_rows(const std::vector<csv::Row>& rows, const std::vector<ColumnDecl>& schema)
{
    if (rows.size() <= 1) { fail(ErrorKind::empty_input, "CSV input has no data rows"); }

    const auto& header = rows.front();
    struct Binding {
        std::size_t index;
        const FieldInfo* info;
    };
    std::vector<Binding> bindings;
    for (const auto& decl : schema) {
        const auto& info = field_info(decl.name);
        if (info.kind != decl.kind) {
            fail(ErrorKind::schema, "column '" + decl.name + "' declared as " + std::string(to_string(decl.kind)) +
                                        " but holds " + std::string(to_string(info.kind)) + " values");
        }
        auto it = std::find(header.begin(), header.end(), decl.name);
        if (it == header.end()) { fail(ErrorKind::schema, "missing column '" + decl.name + "' in CSV header"); }
        bindings.push_back({static_cast<std::size_t>(it - header.begin()), &info});
    }

    Dataset out;
    out.schema = schema;
    out.records.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size()) {
            fail(ErrorKind::parse, "row " + std::to_string(r) + ": expected " + std::to_string(header.size()) +
                                       " cells, found " + std::to_string(row.size()));
        }
        InsuranceRecord rec;
        for (const auto& b : bindings) {
            const std::string& text = row[b.index];
            auto bad = [&](std::string_view what) {
                fail(ErrorKind::parse, "row " + std::to_string(r) + ", column '" + std::string(b.info->name) +
                                           "': cannot parse '" + text + "' as " + std::string(what));
            };
            switch (b.info->field) {
            case Field::treatment_date: {
                auto d = parse_date(text);
                if (!d) { bad("a YYYY-MM-DD date"); }
                rec.treatment_date = *d;
                break;
            }
            case Field::payment_date: {
                if (text.empty()) { break; }
                auto d = parse_date(text);
                if (!d) { bad("a YYYY-MM-DD date"); }
                rec.payment_date = *d;
                break;
            }
            case Field::provider_code:
            case Field::company_code: {
                auto v = parse_int(text);
                if (!v) { bad("an integer code"); }
                (b.info->field == Field::provider_code ? rec.provider_code : rec.company_code) = *v;
                break;
            }
            case Field::charges_spent: {
                auto v = parse_double(text);
                if (!v) { bad("a number"); }
                if (*v < 0.0) { bad("a non-negative amount"); }
                rec.charges_spent = *v;
                break;
            }
            case Field::diagnosis:
            case Field::prescription:
                if (text.empty()) { bad("a non-empty category"); }
                (b.info->field == Field::diagnosis ? rec.diagnosis : rec.prescription) = text;
                break;
            }
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

} // namespace

std::optional<Date> parse_date(std::string_view text)
{
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') { return std::nullopt; }
    int y = 0;
    int m = 0;
    int d = 0;
    if (!parse_fixed_digits(text.substr(0, 4), y) || !parse_fixed_digits(text.substr(5, 2), m) ||
        !parse_fixed_digits(text.substr(8, 2), d)) {
        return std::nullopt;
    }
    Date date{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!date.ok()) { return std::nullopt; }
    return date;
}

std::string format_date(Date date)
{
    char buffer[16];
    std::snprintf(buffer, sizeof(buffer), "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buffer;
}

std::int64_t days_between(Date earlier, Date later)
{
    return (sys_days{later} - sys_days{earlier}).count();
}

double year_fraction(Date date)
{
    const year y = date.year();
    const auto start = sys_days{y / std::chrono::January / 1};
    const auto next = sys_days{(y + std::chrono::years{1}) / std::chrono::January / 1};
    const double elapsed = static_cast<double>((sys_days{date} - start).count());
    const double length = static_cast<double>((next - start).count());
    return static_cast<double>(static_cast<int>(y)) + elapsed / length;
}

std::string_view to_string(ColumnKind kind) noexcept
{
    switch (kind) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::date: return "date";
    }
    return "unknown";
}

std::vector<ColumnDecl> insurance_schema()
{
    std::vector<ColumnDecl> schema;
    for (const auto& info : kFields) { schema.push_back({std::string(info.name), info.kind}); }
    return schema;
}

const ColumnDecl* Dataset::find_column(std::string_view name) const
{
    auto it = std::find_if(schema.begin(), schema.end(), [&](const ColumnDecl& c) { return c.name == name; });
    return it == schema.end() ? nullptr : &*it;
}

std::vector<double> Dataset::numeric_column(std::string_view name) const
{
    std::vector<double> out;
    out.reserve(records.size());
    if (name == column::time_lapse) {
        require(has_target(), ErrorKind::missing_value, "time_lapse has not been derived");
        return target;
    }
    require(find_column(name) != nullptr, ErrorKind::schema, "no column '" + std::string(name) + "'");
    const auto& info = field_info(name);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        switch (info.field) {
        case Field::treatment_date: out.push_back(year_fraction(r.treatment_date)); break;
        case Field::payment_date:
            require(r.payment_date.has_value(), ErrorKind::missing_value,
                    "record " + std::to_string(i) + " has no payment_date");
            out.push_back(year_fraction(*r.payment_date));
            break;
        case Field::provider_code: out.push_back(static_cast<double>(r.provider_code)); break;
        case Field::company_code: out.push_back(static_cast<double>(r.company_code)); break;
        case Field::charges_spent: out.push_back(r.charges_spent); break;
        case Field::diagnosis:
        case Field::prescription:
            fail(ErrorKind::type, "column '" + std::string(name) + "' holds text categories, not numbers");
        }
    }
    return out;
}

std::vector<std::string> Dataset::categorical_column(std::string_view name) const
{
    const auto* decl = find_column(name);
    require(decl != nullptr, ErrorKind::schema, "no column '" + std::string(name) + "'");
    if (decl->kind != ColumnKind::categorical) {
        fail(ErrorKind::type, "column '" + std::string(name) + "' is " + std::string(to_string(decl->kind)) +
                                  ", not categorical");
    }
    const auto& info = field_info(name);
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) { out.push_back(cell_text(r, info.field)); }
    return out;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const
{
    Dataset out;
    out.schema = schema;
    out.records.reserve(indices.size());
    for (auto i : indices) { out.records.push_back(records[i]); }
    if (!target.empty()) {
        out.target.reserve(indices.size());
        for (auto i : indices) { out.target.push_back(target[i]); }
    }
    return out;
}

Dataset parse_csv(const std::string& path, const std::vector<ColumnDecl>& schema)
{
    return from_rows(csv::read_file(path), schema);
}

Dataset parse_csv_text(std::string_view text, const std::vector<ColumnDecl>& schema)
{
    std::istringstream in{std::string(text)};
    return from_rows(csv::read(in), schema);
}

std::string to_csv_text(const Dataset& dataset)
{
    std::ostringstream out;
    csv::Row header;
    for (const auto& c : dataset.schema) { header.push_back(c.name); }
    const bool with_target = !dataset.target.empty();
    if (with_target) { header.emplace_back(column::time_lapse); }
    csv::write_row(out, header);

    std::vector<Field> fields;
    for (const auto& c : dataset.schema) { fields.push_back(field_info(c.name).field); }
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        csv::Row row;
        for (auto f : fields) { row.push_back(cell_text(dataset.records[i], f)); }
        if (with_target) { row.push_back(format_double(dataset.target[i])); }
        csv::write_row(out, row);
    }
    return out.str();
}

void write_csv(const Dataset& dataset, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) { fail(ErrorKind::io, "cannot open '" + path + "' for writing"); }
    out << to_csv_text(dataset);
    if (!out) { fail(ErrorKind::io, "failed writing '" + path + "'"); }
}

Dataset derive_time_lapse(Dataset dataset)
{
    dataset.target.clear();
    dataset.target.reserve(dataset.records.size());
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        const auto& r = dataset.records[i];
        if (!r.payment_date) {
            fail(ErrorKind::missing_value, "record " + std::to_string(i) + " has no payment_date");
        }
        const auto lapse = days_between(r.treatment_date, *r.payment_date);
        if (lapse < 0) {
            fail(ErrorKind::negative_lapse, "record " + std::to_string(i) + ": payment " +
                                                format_date(*r.payment_date) + " precedes treatment " +
                                                format_date(r.treatment_date));
        }
        dataset.target.push_back(static_cast<double>(lapse));
    }
    std::erase_if(dataset.schema, [](const ColumnDecl& c) { return c.name == column::payment_date; });
    return dataset;
}

} // namespace lapse
