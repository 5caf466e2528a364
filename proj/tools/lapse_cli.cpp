// Command-line front end: generate, stats, run, plot.
#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lapse/csv.hpp"
#include "lapse/error.hpp"
#include "lapse/experiment.hpp"
#include "lapse/format.hpp"
#include "lapse/serialization.hpp"
#include "lapse/stats.hpp"
#include "lapse/svg.hpp"
#include "lapse/synthetic.hpp"

namespace {

using namespace lapse;

struct GeneratorOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> rows;

    [[nodiscard]] GeneratorConfig resolve() const
    {
        GeneratorConfig c;
        if (!config.empty()) { c = generator_config_from_json(read_json_file(config)); }
        if (seed) { c.seed = *seed; }
        if (rows) { c.n_rows = *rows; }
        return c;
    }
};

void add_generator_options(CLI::App* cmd, GeneratorOptions& opts)
{
    cmd->add_option("--config", opts.config, "generator settings (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--seed", opts.seed, "generator seed");
    cmd->add_option("--rows", opts.rows, "number of claims to draw");
}

void emit(const std::string& text, const std::string& path)
{
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        write_text_atomic(path, text);
    }
}

std::vector<double> numeric_csv_column(const std::string& path, const std::string& name)
{
    const auto rows = csv::read_file(path);
    require(!rows.empty(), ErrorKind::empty_input, "'" + path + "' is empty");
    const auto& header = rows.front();
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        if (name == column::time_lapse) { return derive_time_lapse(parse_csv(path)).target; }
        fail(ErrorKind::schema, "missing column '" + name + "' in '" + path + "'");
    }
    const auto col = static_cast<std::size_t>(it - header.begin());
    std::vector<double> out;
    out.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        require(col < rows[r].size(), ErrorKind::parse, "row " + std::to_string(r) + " is too short");
        const std::string& cell = rows[r][col];
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        require(used == cell.size() && !cell.empty(), ErrorKind::parse,
                "row " + std::to_string(r) + ", column '" + name + "': cannot parse '" + cell + "' as a number");
        out.push_back(v);
    }
    return out;
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) { out.push_back(item); }
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Claims time-lapse regression toolkit"};
    app.require_subcommand(1);

    GeneratorOptions gen_opts;
    std::string gen_out;
    auto* generate = app.add_subcommand("generate", "write a synthetic claims CSV");
    add_generator_options(generate, gen_opts);
    generate->add_option("--out", gen_out, "output CSV")->required();

    GeneratorOptions stats_gen;
    std::string stats_input;
    std::string stats_format = "markdown";
    std::string stats_out;
    double stats_threshold = 100.0;
    auto* stats = app.add_subcommand("stats", "summary statistics of a claims table");
    stats->add_option("--input", stats_input, "claims CSV (synthetic data when omitted)")->check(CLI::ExistingFile);
    add_generator_options(stats, stats_gen);
    stats->add_option("--format", stats_format, "markdown or csv")->check(CLI::IsMember({"markdown", "csv"}));
    stats->add_option("--threshold", stats_threshold, "report the share of time lapses below this many days");
    stats->add_option("--out", stats_out, "output file (stdout when omitted)");

    std::string run_config;
    std::optional<std::uint64_t> run_seed;
    std::string run_models;
    bool run_quick = false;
    std::string run_out;
    std::optional<std::size_t> run_workers;
    bool run_no_plots = false;
    auto* run = app.add_subcommand("run", "grid search, cross-validate, refit and score every model");
    run->add_option("--config", run_config, "experiment settings (JSON)")->check(CLI::ExistingFile);
    run->add_option("--seed", run_seed, "experiment seed");
    run->add_option("--models", run_models, "comma-separated subset of knn,svr,tree,forest");
    run->add_flag("--quick", run_quick, "5,000-row sample, SVR fits capped at 2,000 rows");
    run->add_option("--out", run_out, "report directory");
    run->add_option("--workers", run_workers, "grid points evaluated in parallel");
    run->add_flag("--no-plots", run_no_plots, "skip SVG output");

    std::string plot_predictions;
    std::string plot_histogram;
    std::string plot_column = std::string(column::time_lapse);
    std::size_t plot_bins = 40;
    std::string plot_out;
    auto* plot = app.add_subcommand("plot", "render a scatter or histogram SVG");
    auto* pred_opt = plot->add_option("--predictions", plot_predictions, "CSV with y_true,y_pred columns")
                         ->check(CLI::ExistingFile);
    auto* hist_opt = plot->add_option("--histogram", plot_histogram, "CSV holding the column to bin")
                         ->check(CLI::ExistingFile);
    pred_opt->excludes(hist_opt);
    plot->add_option("--column", plot_column, "column for --histogram");
    plot->add_option("--bins", plot_bins, "histogram bins")->check(CLI::PositiveNumber);
    plot->add_option("--out", plot_out, "output SVG")->required();

    CLI11_PARSE(app, argc, argv);

    std::string current = "setup";
    try {
        if (generate->parsed()) {
            current = "generate";
            const auto data = generate_raw(gen_opts.resolve());
            write_text_atomic(gen_out, to_csv_text(data));
        } else if (stats->parsed()) {
            current = "stats";
            Dataset data = stats_input.empty() ? generate_raw(stats_gen.resolve()) : parse_csv(stats_input);
            data = derive_time_lapse(std::move(data));
            const auto report = summary_report(data);
            if (stats_format == "csv") {
                emit(to_csv(report), stats_out);
            } else {
                const auto below = std::count_if(data.target.begin(), data.target.end(),
                                                 [&](double v) { return v < stats_threshold; });
                const double share = data.target.empty() ? 0.0 : static_cast<double>(below) / data.target.size();
                emit(to_markdown(report) + "\nShare of time_lapse below " + format_real(stats_threshold, 6) +
                         " days: " + format_fixed(share, 4) + "\n",
                     stats_out);
            }
        } else if (run->parsed()) {
            current = "run";
            ExperimentConfig config;
            if (!run_config.empty()) { config = experiment_config_from_json(read_json_file(run_config)); }
            if (run_seed) { config.seed = *run_seed; }
            if (!run_models.empty()) { config.models = split_list(run_models); }
            if (run_quick) { apply_quick_preset(config); }
            if (!run_out.empty()) { config.out_dir = run_out; }
            if (run_workers) { config.workers = *run_workers; }
            if (run_no_plots) { config.plots = false; }
            const auto report = run_experiment(config);
            std::cout << "rows " << report.total_rows << " (train " << report.train_rows << ", test "
                      << report.test_rows << "), width " << report.feature_width << "\n";
            for (const auto& m : report.models) {
                std::cout << m.model << ": " << describe(m.best) << "  cv " << format_fixed(m.search.best().mean, 4)
                          << "  test " << format_fixed(m.test_r2, 4) << "  fit " << format_fixed(m.train_seconds, 2)
                          << " s\n";
            }
            std::cout << "report written to " << config.out_dir << "\n";
        } else if (plot->parsed()) {
            current = "plot";
            if (!plot_predictions.empty()) {
                emit_scatter_svg(numeric_csv_column(plot_predictions, "y_true"),
                                 numeric_csv_column(plot_predictions, "y_pred"), plot_out);
            } else {
                require(!plot_histogram.empty(), ErrorKind::parameter, "give --predictions or --histogram");
                const auto values = numeric_csv_column(plot_histogram, plot_column);
                emit_histogram_svg(values, plot_bins, plot_out,
                                   plot_column == column::time_lapse ? "time lapse (days)" : plot_column);
            }
        }
    } catch (const Error& e) {
        std::cerr << "lapse " << current << " failed [" << to_string(e.kind()) << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "lapse " << current << " failed: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
