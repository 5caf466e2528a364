#include "lapse/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <numeric>
#include <set>
#include <sstream>

#include "lapse/csv.hpp"
#include "lapse/error.hpp"
#include "lapse/format.hpp"
#include "lapse/metrics.hpp"
#include "lapse/random.hpp"
#include "lapse/svg.hpp"

namespace lapse {

namespace {

const std::vector<std::string>& known_models()
{
    static const std::vector<std::string> names{"knn", "svr", "tree", "forest"};
    return names;
}

template <typename F>
auto stage(const std::string& name, F&& body)
{
    try {
        return body();
    } catch (const Error& e) {
        throw Error(e.kind(), "stage " + name + ": " + e.what());
    }
}

// Independent streams under the experiment seed.
enum class Stream : std::uint64_t { subsample = 1, split, folds, forest, svr };

std::uint64_t stream_seed(std::uint64_t seed, Stream s) { return derive_seed(seed, static_cast<std::uint64_t>(s)); }

template <typename T>
std::vector<T> list_or(const Json& doc, const char* key, std::vector<T> fallback)
{
    if (!doc.contains(key)) { return fallback; }
    const auto& v = doc.at(key);
    if (v.is_array()) { return v.get<std::vector<T>>(); }
    return {v.get<T>()};
}

std::vector<NeighborBackend> backends_from(const Json& doc, std::vector<NeighborBackend> fallback)
{
    if (!doc.contains("backend")) { return fallback; }
    std::vector<NeighborBackend> out;
    for (const auto& name : list_or<std::string>(doc, "backend", {})) { out.push_back(parse_backend(name)); }
    return out;
}

std::vector<KernelKind> kernels_from(const Json& doc, std::vector<KernelKind> fallback)
{
    if (!doc.contains("kernel")) { return fallback; }
    std::vector<KernelKind> out;
    for (const auto& name : list_or<std::string>(doc, "kernel", {})) { out.push_back(parse_kernel(name)); }
    return out;
}

std::string join_fields(const std::vector<std::string>& fields)
{
    std::ostringstream out;
    csv::write_row(out, fields);
    return out.str();
}

Dataset load_dataset(const ExperimentConfig& config)
{
    if (config.csv_path) { return parse_csv(*config.csv_path); }
    return generate_raw(config.generator);
}

} // namespace

void validate(const ExperimentConfig& config)
{
    require(!config.models.empty(), ErrorKind::parameter, "at least one model must be selected");
    std::set<std::string> seen;
    for (const auto& m : config.models) {
        require(std::find(known_models().begin(), known_models().end(), m) != known_models().end(),
                ErrorKind::parameter, "unknown model '" + m + "' (expected knn, svr, tree or forest)");
        require(seen.insert(m).second, ErrorKind::parameter, "model '" + m + "' listed twice");
    }
    require(config.split_ratio > 0.0 && config.split_ratio < 1.0, ErrorKind::parameter,
            "split ratio must lie in (0, 1)");
    require(config.folds >= 2, ErrorKind::parameter, "need at least 2 folds");
    require(!config.subsample_rows || *config.subsample_rows >= 2, ErrorKind::parameter,
            "subsample_rows must be at least 2");
    require(config.workers >= 1, ErrorKind::parameter, "workers must be at least 1");
    for (const auto& m : config.models) {
        require(!grid_for(config, m).empty(), ErrorKind::parameter, "grid for '" + m + "' is empty");
    }
    if (!config.csv_path) { validate(config.generator); }
}

void apply_quick_preset(ExperimentConfig& config)
{
    if (!config.subsample_rows) { config.subsample_rows = 5000; }
    if (!config.svr.base.max_train_rows) { config.svr.base.max_train_rows = 2000; }
}

std::vector<RegressorSpec> grid_for(const ExperimentConfig& config, const std::string& model)
{
    if (model == "knn") { return knn_grid(config.knn.k, config.knn.backend, config.knn.leaf_size); }
    if (model == "svr") {
        SvrSpec base = config.svr.base;
        base.subsample_seed = stream_seed(config.seed, Stream::svr);
        return svr_grid(config.svr.C, config.svr.kernel, base);
    }
    if (model == "tree") { return tree_grid(config.tree.max_depth, config.tree.min_samples_leaf); }
    if (model == "forest") {
        std::vector<RegressorSpec> grid;
        for (auto n : config.forest.n_trees) {
            for (auto depth : config.forest.max_depth) {
                ForestSpec s;
                s.n_trees = n;
                s.tree = TreeSpec{depth, config.forest.min_samples_leaf};
                s.m_features = config.forest.m_features;
                s.bootstrap = config.forest.bootstrap;
                s.seed = stream_seed(config.seed, Stream::forest);
                grid.emplace_back(s);
            }
        }
        return grid;
    }
    fail(ErrorKind::parameter, "unknown model '" + model + "'");
}

ExperimentConfig experiment_config_from_json(const Json& doc)
{
    require(doc.is_object(), ErrorKind::parse, "experiment config must be a JSON object");
    static const std::set<std::string> known{"data",   "subsample_rows", "split_ratio", "seed",
                                             "folds",  "models",         "grids",       "unseen_category",
                                             "out_dir", "plots",         "workers"};
    for (const auto& item : doc.items()) {
        require(known.contains(item.key()), ErrorKind::parse, "config: unknown key '" + item.key() + "'");
    }
    ExperimentConfig c;
    try {
        if (doc.contains("data")) {
            const auto& data = doc.at("data");
            require(!(data.contains("csv") && data.contains("synthetic")), ErrorKind::parse,
                    "config.data: give either csv or synthetic, not both");
            if (data.contains("csv")) { c.csv_path = data.at("csv").get<std::string>(); }
            if (data.contains("synthetic")) { c.generator = generator_config_from_json(data.at("synthetic")); }
        }
        if (doc.contains("subsample_rows") && !doc.at("subsample_rows").is_null()) {
            c.subsample_rows = doc.at("subsample_rows").get<std::size_t>();
        }
        c.split_ratio = doc.value("split_ratio", c.split_ratio);
        c.seed = doc.value("seed", c.seed);
        c.folds = doc.value("folds", c.folds);
        c.models = list_or<std::string>(doc, "models", c.models);
        c.out_dir = doc.value("out_dir", c.out_dir);
        c.plots = doc.value("plots", c.plots);
        c.workers = doc.value("workers", c.workers);
        if (doc.contains("unseen_category")) {
            const auto p = doc.at("unseen_category").get<std::string>();
            require(p == "error" || p == "zeros", ErrorKind::parse, "unseen_category must be error or zeros");
            c.unseen_category = p == "error" ? UnseenPolicy::error : UnseenPolicy::zeros;
        }
        if (doc.contains("grids")) {
            const auto& g = doc.at("grids");
            if (g.contains("knn")) {
                const auto& k = g.at("knn");
                c.knn.k = list_or<std::size_t>(k, "k", c.knn.k);
                c.knn.backend = backends_from(k, c.knn.backend);
                c.knn.leaf_size = k.value("leaf_size", c.knn.leaf_size);
            }
            if (g.contains("svr")) {
                const auto& s = g.at("svr");
                c.svr.C = list_or<double>(s, "C", c.svr.C);
                c.svr.kernel = kernels_from(s, c.svr.kernel);
                auto& b = c.svr.base;
                b.epsilon = s.value("epsilon", b.epsilon);
                b.tol = s.value("tol", b.tol);
                b.max_passes = s.value("max_passes", b.max_passes);
                b.cache_mb = s.value("cache_mb", b.cache_mb);
                if (s.contains("gamma") && !s.at("gamma").is_null()) { b.kernel.gamma = s.at("gamma").get<double>(); }
                if (s.contains("max_train_rows") && !s.at("max_train_rows").is_null()) {
                    b.max_train_rows = s.at("max_train_rows").get<std::size_t>();
                }
            }
            if (g.contains("tree")) {
                const auto& t = g.at("tree");
                c.tree.max_depth = list_or<std::size_t>(t, "max_depth", c.tree.max_depth);
                c.tree.min_samples_leaf = t.value("min_samples_leaf", c.tree.min_samples_leaf);
            }
            if (g.contains("forest")) {
                const auto& f = g.at("forest");
                c.forest.n_trees = list_or<std::size_t>(f, "n_trees", c.forest.n_trees);
                c.forest.max_depth = list_or<std::size_t>(f, "max_depth", c.forest.max_depth);
                c.forest.min_samples_leaf = f.value("min_samples_leaf", c.forest.min_samples_leaf);
                c.forest.bootstrap = f.value("bootstrap", c.forest.bootstrap);
                if (f.contains("m_features") && !f.at("m_features").is_null()) {
                    c.forest.m_features = f.at("m_features").get<std::size_t>();
                }
            }
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::parse, std::string("config: ") + e.what());
    }
    return c;
}

Json to_json(const ExperimentConfig& c)
{
    Json data = c.csv_path ? Json{{"csv", *c.csv_path}} : Json{{"synthetic", to_json(c.generator)}};
    std::vector<std::string> backends;
    for (auto b : c.knn.backend) { backends.emplace_back(to_string(b)); }
    std::vector<std::string> kernels;
    for (auto k : c.svr.kernel) { kernels.emplace_back(to_string(k)); }
    Json svr{{"C", c.svr.C},
             {"kernel", kernels},
             {"epsilon", c.svr.base.epsilon},
             {"tol", c.svr.base.tol},
             {"max_passes", c.svr.base.max_passes},
             {"cache_mb", c.svr.base.cache_mb},
             {"gamma", c.svr.base.kernel.gamma ? Json(*c.svr.base.kernel.gamma) : Json(nullptr)},
             {"max_train_rows", c.svr.base.max_train_rows ? Json(*c.svr.base.max_train_rows) : Json(nullptr)}};
    Json forest{{"n_trees", c.forest.n_trees},
                {"max_depth", c.forest.max_depth},
                {"min_samples_leaf", c.forest.min_samples_leaf},
                {"bootstrap", c.forest.bootstrap},
                {"m_features", c.forest.m_features ? Json(*c.forest.m_features) : Json(nullptr)}};
    return {{"data", data},
            {"subsample_rows", c.subsample_rows ? Json(*c.subsample_rows) : Json(nullptr)},
            {"split_ratio", c.split_ratio},
            {"seed", c.seed},
            {"folds", c.folds},
            {"models", c.models},
            {"grids",
             {{"knn", {{"k", c.knn.k}, {"backend", backends}, {"leaf_size", c.knn.leaf_size}}},
              {"svr", svr},
              {"tree", {{"max_depth", c.tree.max_depth}, {"min_samples_leaf", c.tree.min_samples_leaf}}},
              {"forest", forest}}},
            {"unseen_category", c.unseen_category == UnseenPolicy::error ? "error" : "zeros"},
            {"out_dir", c.out_dir},
            {"plots", c.plots},
            {"workers", c.workers}};
}

namespace {

struct Prepared {
    Dataset data;
    PreprocessingState state;
    FeatureMatrix train;
    FeatureMatrix test;
};

Prepared prepare(const ExperimentConfig& config)
{
    Prepared p;
    Dataset raw = stage("load", [&] { return load_dataset(config); });
    p.data = stage("derive", [&] { return derive_time_lapse(std::move(raw)); });
    if (config.subsample_rows && *config.subsample_rows < p.data.records.size()) {
        p.data = stage("subsample", [&] {
            std::vector<std::size_t> rows(p.data.records.size());
            std::iota(rows.begin(), rows.end(), std::size_t{0});
            Rng rng(stream_seed(config.seed, Stream::subsample));
            shuffle(std::span<std::size_t>(rows), rng);
            rows.resize(*config.subsample_rows);
            std::sort(rows.begin(), rows.end());
            return p.data.subset(rows);
        });
    }
    // Rows are split before anything is fitted so the encoders and the
    // scaler only ever see training rows.
    const auto [train_rows, test_rows] = stage(
        "split", [&] { return split_indices(p.data.records.size(), config.split_ratio, stream_seed(config.seed, Stream::split)); });
    const Dataset train = p.data.subset(train_rows);
    p.state = stage("encode", [&] { return fit_preprocessing(train, config.unseen_category); });
    p.train = stage("scale", [&] { return p.state.transform(train); });
    p.test = stage("scale", [&] { return p.state.transform(p.data.subset(test_rows)); });
    return p;
}

} // namespace

EvaluationReport evaluate(const ExperimentConfig& config)
{
    stage("config", [&] {
        validate(config);
        return 0;
    });
    const Prepared p = prepare(config);

    EvaluationReport report;
    report.seed = config.seed;
    report.total_rows = p.data.records.size();
    report.train_rows = p.train.rows();
    report.test_rows = p.test.rows();
    report.feature_width = p.train.cols();
    report.preprocessing_fingerprint = p.state.fingerprint();
    report.test_target = p.test.target;
    report.lapse = p.data.target;
    report.company_code = p.data.numeric_column(column::company_code);

    const FoldPlan plan = stage("folds", [&] {
        return make_folds(p.train.rows(), config.folds, stream_seed(config.seed, Stream::folds));
    });
    report.fold_plan_hash = plan.hash();

    // Fixed report order regardless of how the models were listed.
    for (const auto& name : known_models()) {
        if (std::find(config.models.begin(), config.models.end(), name) == config.models.end()) { continue; }
        ModelReport m;
        m.model = name;
        m.search = stage("grid_search[" + name + "]",
                         [&] { return grid_search(grid_for(config, name), p.train, plan, config.workers); });
        m.best = m.search.best().spec;
        const auto start = std::chrono::steady_clock::now();
        const FittedModel fitted = stage("refit[" + name + "]", [&] { return fit(m.best, p.train.values, p.train.target); });
        const auto stop = std::chrono::steady_clock::now();
        m.train_seconds = std::chrono::duration<double>(stop - start).count();
        m.train_rows = p.train.rows();
        m.test_predictions = stage("score[" + name + "]", [&] { return predict(fitted, p.test.values); });
        m.test_r2 = stage("score[" + name + "]", [&] { return r_squared(m.test_predictions, p.test.target); });
        report.models.push_back(std::move(m));
    }
    return report;
}

std::string best_params_csv(const EvaluationReport& report)
{
    std::string out = join_fields({"model", "algorithm", "spec", "cv_mean"});
    for (const auto& m : report.models) {
        out += join_fields({m.model, algorithm_name(m.best), describe(m.best), format_real(m.search.best().mean)});
    }
    return out;
}

std::string training_time_csv(const EvaluationReport& report)
{
    std::string out = join_fields({"model", "train_rows", "seconds"});
    for (const auto& m : report.models) {
        out += join_fields({m.model, std::to_string(m.train_rows), format_fixed(m.train_seconds, 6)});
    }
    return out;
}

std::string cv_scores_csv(const EvaluationReport& report)
{
    std::vector<std::string> header{"model"};
    const std::size_t k = report.models.empty() ? 0 : report.models.front().search.best().fold_scores.size();
    for (std::size_t f = 0; f < k; ++f) { header.push_back("fold_" + std::to_string(f)); }
    header.emplace_back("mean");
    std::string out = join_fields(header);
    for (const auto& m : report.models) {
        std::vector<std::string> row{m.model};
        for (double s : m.search.best().fold_scores) { row.push_back(format_real(s)); }
        row.push_back(format_real(m.search.best().mean));
        out += join_fields(row);
    }
    return out;
}

std::string test_scores_csv(const EvaluationReport& report)
{
    std::string out = join_fields({"model", "test_r2"});
    for (const auto& m : report.models) { out += join_fields({m.model, format_real(m.test_r2)}); }
    return out;
}

std::string predictions_csv(std::span<const double> y_true, std::span<const double> y_pred)
{
    require(y_true.size() == y_pred.size(), ErrorKind::shape, "prediction columns differ in length");
    std::string out = "y_true,y_pred\n";
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        out += format_real(y_true[i]) + "," + format_real(y_pred[i]) + "\n";
    }
    return out;
}

std::string report_markdown(const EvaluationReport& report, const ExperimentConfig& config)
{
    std::ostringstream out;
    out << "# Time-lapse regression report\n\n";
    out << "| setting | value |\n|---|---|\n";
    out << "| data | " << (config.csv_path ? *config.csv_path : "synthetic (seed " + std::to_string(config.generator.seed) + ")")
        << " |\n";
    out << "| experiment seed | " << report.seed << " |\n";
    out << "| rows (after sampling) | " << report.total_rows << " |\n";
    out << "| train / test rows | " << report.train_rows << " / " << report.test_rows << " |\n";
    out << "| feature width | " << report.feature_width << " |\n";
    out << "| folds | " << config.folds << " |\n";
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(report.preprocessing_fingerprint));
    out << "| preprocessing fingerprint | " << hash << " |\n";
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(report.fold_plan_hash));
    out << "| fold plan hash | " << hash << " |\n\n";

    out << "## Selected hyperparameters\n\n| model | spec | mean CV R² |\n|---|---|---|\n";
    for (const auto& m : report.models) {
        out << "| " << m.model << " | " << describe(m.best) << " | " << format_fixed(m.search.best().mean, 4)
            << (m.search.tie ? " (tie)" : "") << " |\n";
    }
    out << "\n## Training time on the full training split\n\n| model | rows | seconds |\n|---|---|---|\n";
    for (const auto& m : report.models) {
        out << "| " << m.model << " | " << m.train_rows << " | " << format_fixed(m.train_seconds, 3) << " |\n";
    }
    out << "\n## Cross-validation R²\n\n| model | mean | min | max |\n|---|---|---|---|\n";
    for (const auto& m : report.models) {
        const auto& s = m.search.best().fold_scores;
        out << "| " << m.model << " | " << format_fixed(m.search.best().mean, 4) << " | "
            << format_fixed(*std::min_element(s.begin(), s.end()), 4) << " | "
            << format_fixed(*std::max_element(s.begin(), s.end()), 4) << " |\n";
    }
    out << "\n## Test R²\n\n| model | R² |\n|---|---|\n";
    for (const auto& m : report.models) { out << "| " << m.model << " | " << format_fixed(m.test_r2, 4) << " |\n"; }
    out << "\nR² = 1 - SS_res / SS_tot, where SS_res = Σ(y - ŷ)² and SS_tot = Σ(y - ȳ)². "
           "Scores below zero are reported as is.\n";
    return out.str();
}

EvaluationReport run_experiment(const ExperimentConfig& config)
{
    namespace fs = std::filesystem;
    EvaluationReport report = evaluate(config);

    stage("emit", [&] {
        const fs::path out(config.out_dir);
        std::error_code ec;
        fs::create_directories(out, ec);
        if (ec) { fail(ErrorKind::io, "cannot create '" + out.string() + "': " + ec.message()); }
        const fs::path staging = out / ".staging";
        fs::remove_all(staging, ec);
        fs::create_directories(staging, ec);
        if (ec) { fail(ErrorKind::io, "cannot create '" + staging.string() + "': " + ec.message()); }

        std::vector<std::string> written;
        auto put = [&](const std::string& name, const std::string& text) {
            write_text_atomic((staging / name).string(), text);
            written.push_back(name);
        };
        put("best_params.csv", best_params_csv(report));
        put("training_time.csv", training_time_csv(report));
        put("cv_scores.csv", cv_scores_csv(report));
        put("test_scores.csv", test_scores_csv(report));
        for (const auto& m : report.models) {
            put("grid_" + m.model + ".csv", to_csv(m.search));
            put("predictions_" + m.model + ".csv", predictions_csv(report.test_target, m.test_predictions));
        }
        put("config.json", to_json(config).dump(2) + "\n");
        put("report.md", report_markdown(report, config));
        if (config.plots) {
            for (const auto& m : report.models) {
                put("scatter_" + m.model + ".svg",
                    scatter_svg(report.test_target, m.test_predictions, {}, true, m.model + ": predicted vs actual"));
            }
            put("lapse_histogram.svg", histogram_svg(report.lapse, 40, "time lapse (days)", "time lapse distribution"));
            put("company_histogram.svg", histogram_svg(report.company_code, 40, "company code", "claims per company code"));
            put("company_lapse.svg", scatter_svg(report.company_code, report.lapse, {"company code", "time lapse (days)"}, false,
                                                 "time lapse by company"));
        }
        for (const auto& name : written) {
            fs::rename(staging / name, out / name, ec);
            if (ec) { fail(ErrorKind::io, "cannot move '" + name + "' into '" + out.string() + "': " + ec.message()); }
        }
        fs::remove_all(staging, ec);
        return 0;
    });
    return report;
}

} // namespace lapse
