#include "lapse/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lapse/error.hpp"
#include "lapse/format.hpp"
#include "lapse/serialization.hpp"

namespace lapse {

namespace {

constexpr double width = 640.0;
constexpr double height = 480.0;
constexpr double margin_left = 70.0;
constexpr double margin_right = 20.0;
constexpr double margin_top = 40.0;
constexpr double margin_bottom = 60.0;
constexpr double plot_w = width - margin_left - margin_right;
constexpr double plot_h = height - margin_top - margin_bottom;

std::string xml_escape(const std::string& text)
{
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string num(double v) { return format_fixed(v, 2); }

struct Range {
    double lo;
    double hi;

    [[nodiscard]] double span() const { return hi > lo ? hi - lo : 1.0; }
};

Range padded(double lo, double hi)
{
    if (hi <= lo) { return {lo - 1.0, hi + 1.0}; }
    return {lo, hi};
}

void open_svg(std::ostringstream& out, const std::string& title)
{
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    if (!title.empty()) {
        out << "<text x=\"" << num(width / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
            << xml_escape(title) << "</text>\n";
    }
}

void axes(std::ostringstream& out, Range xr, Range yr, const std::string& x_label, const std::string& y_label)
{
    const double x0 = margin_left;
    const double y0 = margin_top + plot_h;
    out << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n"
        << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x0 + plot_w) << "\" y2=\"" << num(y0)
        << "\"/>\n"
        << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x0) << "\" y2=\"" << num(margin_top)
        << "\"/>\n</g>\n";
    out << "<g class=\"ticks\" font-size=\"11\">\n";
    for (int i = 0; i <= 4; ++i) {
        const double t = i / 4.0;
        out << "<text x=\"" << num(x0 + t * plot_w) << "\" y=\"" << num(y0 + 16) << "\" text-anchor=\"middle\">"
            << format_real(xr.lo + t * (xr.hi - xr.lo), 4) << "</text>\n";
        out << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(y0 - t * plot_h + 4) << "\" text-anchor=\"end\">"
            << format_real(yr.lo + t * (yr.hi - yr.lo), 4) << "</text>\n";
    }
    out << "</g>\n";
    out << "<text class=\"x-label\" x=\"" << num(x0 + plot_w / 2) << "\" y=\"" << num(height - 16)
        << "\" text-anchor=\"middle\" font-size=\"13\">" << xml_escape(x_label) << "</text>\n";
    out << "<text class=\"y-label\" x=\"18\" y=\"" << num(margin_top + plot_h / 2)
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 " << num(margin_top + plot_h / 2)
        << ")\">" << xml_escape(y_label) << "</text>\n";
}

void write_or_throw(const std::string& path, const std::string& svg)
{
    require(!path.empty(), ErrorKind::io, "empty output path");
    write_text_atomic(path, svg);
}

} // namespace

std::string scatter_svg(std::span<const double> x, std::span<const double> y, const AxisLabels& labels,
                        bool identity_line, const std::string& title)
{
    require(x.size() == y.size(), ErrorKind::shape,
            "scatter needs equal lengths, got " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
    require(!x.empty(), ErrorKind::empty_input, "scatter needs at least one point");

    // Shared range on both axes so the identity line is the diagonal.
    const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
    const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
    const Range r = padded(std::min(*xmin, *ymin), std::max(*xmax, *ymax));
    auto px = [&](double v) { return margin_left + (v - r.lo) / r.span() * plot_w; };
    auto py = [&](double v) { return margin_top + plot_h - (v - r.lo) / r.span() * plot_h; };

    std::ostringstream out;
    open_svg(out, title);
    axes(out, r, r, labels.x, labels.y);
    if (identity_line) {
        out << "<line class=\"identity\" x1=\"" << num(px(r.lo)) << "\" y1=\"" << num(py(r.lo)) << "\" x2=\""
            << num(px(r.hi)) << "\" y2=\"" << num(py(r.hi)) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    }
    out << "<g class=\"markers\" fill=\"steelblue\" fill-opacity=\"0.5\">\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        out << "<circle class=\"marker\" cx=\"" << num(px(x[i])) << "\" cy=\"" << num(py(y[i])) << "\" r=\"2\"/>\n";
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

void emit_scatter_svg(std::span<const double> y_true, std::span<const double> y_pred, const std::string& path,
                      const AxisLabels& labels, const std::string& title)
{
    write_or_throw(path, scatter_svg(y_true, y_pred, labels, true, title));
}

std::vector<std::size_t> histogram_counts(std::span<const double> values, std::size_t bins)
{
    require(!values.empty(), ErrorKind::empty_input, "histogram needs at least one value");
    require(bins >= 1, ErrorKind::parameter, "histogram needs at least one bin");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    std::vector<std::size_t> counts(bins, 0);
    const double span = *hi - *lo;
    for (double v : values) {
        std::size_t b = 0;
        if (span > 0.0) {
            b = static_cast<std::size_t>(std::floor((v - *lo) / span * static_cast<double>(bins)));
            b = std::min(b, bins - 1);
        }
        ++counts[b];
    }
    return counts;
}

std::string histogram_svg(std::span<const double> values, std::size_t bins, const std::string& x_label,
                          const std::string& title)
{
    const auto counts = histogram_counts(values, bins);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const Range xr = padded(*lo, *hi);
    const double peak = static_cast<double>(*std::max_element(counts.begin(), counts.end()));
    const Range yr{0.0, peak};

    std::ostringstream out;
    open_svg(out, title);
    axes(out, xr, yr, x_label, "frequency");
    const double bar_w = plot_w / static_cast<double>(bins);
    out << "<g class=\"bars\" fill=\"steelblue\" stroke=\"white\" stroke-width=\"0.5\">\n";
    for (std::size_t b = 0; b < bins; ++b) {
        const double h = counts[b] / yr.span() * plot_h;
        out << "<rect class=\"bar\" data-count=\"" << counts[b] << "\" x=\"" << num(margin_left + b * bar_w)
            << "\" y=\"" << num(margin_top + plot_h - h) << "\" width=\"" << num(bar_w) << "\" height=\"" << num(h)
            << "\"/>\n";
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

std::vector<std::size_t> emit_histogram_svg(std::span<const double> values, std::size_t bins, const std::string& path,
                                            const std::string& x_label, const std::string& title)
{
    const auto counts = histogram_counts(values, bins);
    write_or_throw(path, histogram_svg(values, bins, x_label, title));
    return counts;
}

} // namespace lapse
