#include "lapse/metrics.hpp"

#include <algorithm>
#include <string>

#include "lapse/error.hpp"

namespace lapse {

namespace {

void check_lengths(std::span<const double> y_pred, std::span<const double> y_true)
{
    require(y_pred.size() == y_true.size(), ErrorKind::shape,
            "prediction length " + std::to_string(y_pred.size()) + " != truth length " +
                std::to_string(y_true.size()));
    require(!y_true.empty(), ErrorKind::empty_input, "cannot score zero predictions");
}

} // namespace

double r_squared(std::span<const double> y_pred, std::span<const double> y_true)
{
    check_lengths(y_pred, y_true);
    const auto [lo, hi] = std::minmax_element(y_true.begin(), y_true.end());
    require(*lo != *hi, ErrorKind::undefined_score, "R^2 is undefined for a constant target");

    // Welford running mean/sum of squares for SS_tot.
    double mean = 0.0;
    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double delta = y_true[i] - mean;
        mean += delta / static_cast<double>(i + 1);
        ss_tot += delta * (y_true[i] - mean);
        const double e = y_true[i] - y_pred[i];
        ss_res += e * e;
    }
    return 1.0 - ss_res / ss_tot;
}

double mean_squared_error(std::span<const double> y_pred, std::span<const double> y_true)
{
    check_lengths(y_pred, y_true);
    double sum = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double e = y_true[i] - y_pred[i];
        sum += e * e;
    }
    return sum / static_cast<double>(y_true.size());
}

} // namespace lapse
