#ifndef LAPSE_METRICS_HPP
#define LAPSE_METRICS_HPP

#include <span>

namespace lapse {

/// Coefficient of determination, 1 - SS_res / SS_tot. Negative for
/// predictors worse than the mean of y_true. Throws on length mismatch,
/// empty input, or constant y_true (SS_tot = 0).
double r_squared(std::span<const double> y_pred, std::span<const double> y_true);

double mean_squared_error(std::span<const double> y_pred, std::span<const double> y_true);

} // namespace lapse

#endif
