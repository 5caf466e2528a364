#ifndef LAPSE_SVG_HPP
#define LAPSE_SVG_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lapse {

struct AxisLabels {
    std::string x = "actual time lapse (days)";
    std::string y = "predicted time lapse (days)";
};

/// One <circle class="marker"> per point plus a dashed identity line.
std::string scatter_svg(std::span<const double> x, std::span<const double> y, const AxisLabels& labels = {},
                        bool identity_line = true, const std::string& title = {});
void emit_scatter_svg(std::span<const double> y_true, std::span<const double> y_pred, const std::string& path,
                      const AxisLabels& labels = {}, const std::string& title = {});

/// Equal-width bins over [min, max]; every bin is right-open except the last.
/// All-equal input puts everything in bin 0.
std::vector<std::size_t> histogram_counts(std::span<const double> values, std::size_t bins);

std::string histogram_svg(std::span<const double> values, std::size_t bins, const std::string& x_label = "time lapse (days)",
                          const std::string& title = {});
/// Writes the plot and returns the bar heights.
std::vector<std::size_t> emit_histogram_svg(std::span<const double> values, std::size_t bins, const std::string& path,
                                            const std::string& x_label = "time lapse (days)",
                                            const std::string& title = {});

} // namespace lapse

#endif
