#ifndef LAPSE_DATASET_HPP
#define LAPSE_DATASET_HPP

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lapse {

using Date = std::chrono::year_month_day;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD).
std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date date);

/// Signed whole-day difference `later - earlier`.
std::int64_t days_between(Date earlier, Date later);

/// Calendar year plus the elapsed fraction of that year, e.g. 2015-07-02 ->
/// 2015.4986.
double year_fraction(Date date);

struct InsuranceRecord {
    Date treatment_date{};
    std::int64_t provider_code = 0;
    std::string diagnosis;
    std::string prescription;
    double charges_spent = 0.0;
    std::int64_t company_code = 0;
    std::optional<Date> payment_date;

    friend bool operator==(const InsuranceRecord&, const InsuranceRecord&) = default;
};

enum class ColumnKind { numeric, categorical, date };

std::string_view to_string(ColumnKind kind) noexcept;

struct ColumnDecl {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;

    friend bool operator==(const ColumnDecl&, const ColumnDecl&) = default;
};

namespace column {
inline constexpr std::string_view treatment_date = "treatment_date";
inline constexpr std::string_view provider_code = "provider_code";
inline constexpr std::string_view diagnosis = "diagnosis";
inline constexpr std::string_view prescription = "prescription";
inline constexpr std::string_view charges_spent = "charges_spent";
inline constexpr std::string_view company_code = "company_code";
inline constexpr std::string_view payment_date = "payment_date";
inline constexpr std::string_view time_lapse = "time_lapse";
} // namespace column

/// The seven raw insurance columns in canonical order.
std::vector<ColumnDecl> insurance_schema();

/// Records plus the derived target. `target` is empty until
/// derive_time_lapse has run; afterwards it holds one entry per record.
struct Dataset {
    std::vector<InsuranceRecord> records;
    std::vector<double> target;
    std::vector<ColumnDecl> schema;

    [[nodiscard]] std::size_t size() const noexcept { return records.size(); }
    [[nodiscard]] bool has_target() const noexcept { return !target.empty() || records.empty(); }
    [[nodiscard]] const ColumnDecl* find_column(std::string_view name) const;

    /// Numeric view of a column: dates become year fractions, integer codes
    /// are widened, `time_lapse` reads the derived target. String
    /// categoricals raise a type error.
    [[nodiscard]] std::vector<double> numeric_column(std::string_view name) const;

    /// Category labels for a categorical column (integer codes are printed
    /// in decimal).
    [[nodiscard]] std::vector<std::string> categorical_column(std::string_view name) const;

    [[nodiscard]] Dataset subset(const std::vector<std::size_t>& indices) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Loads a CSV file whose header names every declared column (in any order;
/// undeclared extra columns are ignored). An empty `payment_date` cell is
/// read as absent; every other empty cell is a parse error.
Dataset parse_csv(const std::string& path, const std::vector<ColumnDecl>& schema = insurance_schema());
Dataset parse_csv_text(std::string_view text, const std::vector<ColumnDecl>& schema = insurance_schema());

/// Writes the declared columns, plus `time_lapse` when the target is present.
void write_csv(const Dataset& dataset, const std::string& path);
std::string to_csv_text(const Dataset& dataset);

/// target[i] = payment_date[i] - treatment_date[i] in whole days. The payment
/// date is removed from the schema; the record values are kept.
Dataset derive_time_lapse(Dataset dataset);

} // namespace lapse

#endif
