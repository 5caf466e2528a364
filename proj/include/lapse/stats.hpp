#ifndef LAPSE_STATS_HPP
#define LAPSE_STATS_HPP

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lapse/dataset.hpp"

namespace lapse {

/// Descriptive statistics for one numeric column.
///
/// Conventions (n = count, m_k = (1/n) sum (x - mean)^k):
///   std_dev   sample standard deviation, divisor n - 1
///   sem       std_dev / sqrt(n)
///   skewness  adjusted Fisher-Pearson G1 = sqrt(n(n-1)) / (n-2) * m3 / m2^1.5   (n >= 3)
///   kurtosis  excess kurtosis G2 = ((n+1) g2 + 6)(n-1) / ((n-2)(n-3)),
///             g2 = m4 / m2^2 - 3                                              (n >= 4)
///   quantiles linear interpolation between order statistics at p (n - 1)
///   mode      most frequent value; ties go to the smallest value
/// Skewness and kurtosis are NaN when undefined (too few rows or zero spread).
struct ColumnStats {
    std::string column;
    std::size_t count = 0;
    std::size_t missing = 0;
    double mean = 0.0;
    double sem = 0.0;
    double mode = 0.0;
    double std_dev = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;
    double min = 0.0;
    double max = 0.0;
    double range = 0.0;
    double sum = 0.0;
    double q25 = 0.0;
    double q50 = 0.0;
    double q75 = 0.0;
};

struct StatsReport {
    std::vector<ColumnStats> columns;
};

/// Linear-interpolation quantile of already sorted values, p in [0, 1].
double quantile_sorted(std::span<const double> sorted, double p);

ColumnStats describe(std::span<const double> values, std::string_view name = {});

/// Statistics for a dataset column (dates as year fractions; `time_lapse`
/// reads the derived target). Text categoricals raise a type error.
ColumnStats summary_statistics(const Dataset& dataset, std::string_view column);

/// Every numeric-valued column of the dataset, plus the target if derived.
StatsReport summary_report(const Dataset& dataset);

/// Markdown table with the formula conventions in a header note.
std::string to_markdown(const StatsReport& report);
std::string to_csv(const StatsReport& report);

} // namespace lapse

#endif
