#include "lapse/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "lapse/csv.hpp"
#include "lapse/error.hpp"

namespace lapse {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Single-pass central moments up to order four (Terriberry's update).
struct Moments {
    double n = 0.0;
    double mean = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;

    void add(double x)
    {
        const double n1 = n;
        n += 1.0;
        const double delta = x - mean;
        const double delta_n = delta / n;
        const double delta_n2 = delta_n * delta_n;
        const double term1 = delta * delta_n * n1;
        mean += delta_n;
        m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2 - 4.0 * delta_n * m3;
        m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2;
        m2 += term1;
    }
};

std::string number(double v)
{
    if (std::isnan(v)) { return "NaN"; }
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6g", v);
    return buffer;
}

} // namespace

double quantile_sorted(std::span<const double> sorted, double p)
{
    require(!sorted.empty(), ErrorKind::empty_input, "quantile of an empty column");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ColumnStats describe(std::span<const double> values, std::string_view name)
{
    require(values.size() >= 2, ErrorKind::insufficient_data,
            "column '" + std::string(name) + "' needs at least 2 values for a standard deviation");

    ColumnStats s;
    s.column = std::string(name);
    s.count = values.size();

    Moments m;
    double sum = 0.0;
    for (double x : values) {
        m.add(x);
        sum += x;
    }
    const double n = m.n;
    s.mean = m.mean;
    s.sum = sum;
    s.variance = m.m2 / (n - 1.0);
    s.std_dev = std::sqrt(s.variance);
    s.sem = s.std_dev / std::sqrt(n);

    const double g_m2 = m.m2 / n;
    if (s.count >= 3 && g_m2 > 0.0) {
        const double g1 = (m.m3 / n) / std::pow(g_m2, 1.5);
        s.skewness = std::sqrt(n * (n - 1.0)) / (n - 2.0) * g1;
    } else {
        s.skewness = kNaN;
    }
    if (s.count >= 4 && g_m2 > 0.0) {
        const double g2 = (m.m4 / n) / (g_m2 * g_m2) - 3.0;
        s.kurtosis = ((n + 1.0) * g2 + 6.0) * (n - 1.0) / ((n - 2.0) * (n - 3.0));
    } else {
        s.kurtosis = kNaN;
    }

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.range = s.max - s.min;
    s.q25 = quantile_sorted(sorted, 0.25);
    s.q50 = quantile_sorted(sorted, 0.50);
    s.q75 = quantile_sorted(sorted, 0.75);

    std::size_t best_run = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) { ++j; }
        if (j - i > best_run) {
            best_run = j - i;
            s.mode = sorted[i];
        }
        i = j;
    }
    return s;
}

ColumnStats summary_statistics(const Dataset& dataset, std::string_view column)
{
    return describe(dataset.numeric_column(column), column);
}

StatsReport summary_report(const Dataset& dataset)
{
    StatsReport report;
    for (const auto& decl : dataset.schema) {
        if (decl.name == column::diagnosis || decl.name == column::prescription) { continue; }
        report.columns.push_back(summary_statistics(dataset, decl.name));
    }
    if (!dataset.target.empty()) { report.columns.push_back(summary_statistics(dataset, column::time_lapse)); }
    return report;
}

std::string to_markdown(const StatsReport& report)
{
    std::ostringstream out;
    out << "# Summary statistics\n\n"
        << "Conventions: sample standard deviation (n - 1 divisor); standard error = sd / sqrt(n); "
           "skewness = adjusted Fisher-Pearson G1; kurtosis = bias-corrected excess kurtosis G2; "
           "quantiles by linear interpolation; dates as year + elapsed fraction of year.\n\n";
    out << "| Statistic |";
    for (const auto& c : report.columns) { out << ' ' << c.column << " |"; }
    out << "\n|---|";
    for (std::size_t i = 0; i < report.columns.size(); ++i) { out << "---|"; }
    out << '\n';

    auto line = [&](const char* label, auto getter) {
        out << "| " << label << " |";
        for (const auto& c : report.columns) { out << ' ' << getter(c) << " |"; }
        out << '\n';
    };
    line("Number of observations", [](const ColumnStats& c) { return std::to_string(c.count); });
    line("Missing values", [](const ColumnStats& c) { return std::to_string(c.missing); });
    line("Mean", [](const ColumnStats& c) { return number(c.mean); });
    line("Standard error of mean", [](const ColumnStats& c) { return number(c.sem); });
    line("Mode", [](const ColumnStats& c) { return number(c.mode); });
    line("Standard deviation", [](const ColumnStats& c) { return number(c.std_dev); });
    line("Variance", [](const ColumnStats& c) { return number(c.variance); });
    line("Skewness", [](const ColumnStats& c) { return number(c.skewness); });
    line("Kurtosis (excess)", [](const ColumnStats& c) { return number(c.kurtosis); });
    line("Minimum", [](const ColumnStats& c) { return number(c.min); });
    line("Maximum", [](const ColumnStats& c) { return number(c.max); });
    line("Range", [](const ColumnStats& c) { return number(c.range); });
    line("Sum", [](const ColumnStats& c) { return number(c.sum); });
    line("Quantile 25", [](const ColumnStats& c) { return number(c.q25); });
    line("Quantile 50", [](const ColumnStats& c) { return number(c.q50); });
    line("Quantile 75", [](const ColumnStats& c) { return number(c.q75); });
    return out.str();
}

std::string to_csv(const StatsReport& report)
{
    std::ostringstream out;
    csv::write_row(out, {"column", "count", "missing", "mean", "sem", "mode", "std_dev", "variance", "skewness",
                         "kurtosis", "min", "max", "range", "sum", "q25", "q50", "q75"});
    char buffer[64];
    auto full = [&](double v) {
        std::snprintf(buffer, sizeof(buffer), "%.17g", v);
        return std::string(buffer);
    };
    for (const auto& c : report.columns) {
        csv::write_row(out, {c.column, std::to_string(c.count), std::to_string(c.missing), full(c.mean),
                             full(c.sem), full(c.mode), full(c.std_dev), full(c.variance), full(c.skewness),
                             full(c.kurtosis), full(c.min), full(c.max), full(c.range), full(c.sum), full(c.q25),
                             full(c.q50), full(c.q75)});
    }
    return out.str();
}

} // namespace lapse
