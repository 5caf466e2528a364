#ifndef LAPSE_EXPERIMENT_HPP
#define LAPSE_EXPERIMENT_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lapse/model_selection.hpp"
#include "lapse/serialization.hpp"
#include "lapse/synthetic.hpp"

namespace lapse {

struct KnnGrid {
    std::vector<std::size_t> k{5, 10};
    std::vector<NeighborBackend> backend{NeighborBackend::kd_tree, NeighborBackend::ball_tree};
    std::size_t leaf_size = NeighborIndex::default_leaf_size;
};

struct SvrGrid {
    std::vector<double> C{0.1, 1.0};
    std::vector<KernelKind> kernel{KernelKind::linear, KernelKind::rbf};
    /// epsilon, tolerance, gamma, row cap etc. shared by every grid point.
    SvrSpec base;
};

struct TreeGrid {
    std::vector<std::size_t> max_depth{10, 20};
    std::size_t min_samples_leaf = 1;
};

struct ForestGrid {
    std::vector<std::size_t> n_trees{100};
    std::vector<std::size_t> max_depth{20};
    std::size_t min_samples_leaf = 1;
    std::optional<std::size_t> m_features;
    bool bootstrap = true;
};

struct ExperimentConfig {
    /// Raw claims CSV; when unset the synthetic generator is used.
    std::optional<std::string> csv_path;
    GeneratorConfig generator;
    /// Seeded row sample taken after the target is derived.
    std::optional<std::size_t> subsample_rows;
    double split_ratio = 0.8;
    std::uint64_t seed = 42;
    std::size_t folds = 10;
    std::vector<std::string> models{"knn", "svr", "tree", "forest"};
    KnnGrid knn;
    SvrGrid svr;
    TreeGrid tree;
    ForestGrid forest;
    /// Test rows may carry categories never seen in training; by default
    /// they encode to an all-zero block.
    UnseenPolicy unseen_category = UnseenPolicy::zeros;
    std::string out_dir = "report";
    bool plots = true;
    /// Grid points evaluated concurrently; results do not depend on it.
    std::size_t workers = 1;
};

void validate(const ExperimentConfig& config);

/// Desk-scale preset: 5,000-row sample (unless one is set) and SVR fits
/// capped at 2,000 rows.
void apply_quick_preset(ExperimentConfig& config);

ExperimentConfig experiment_config_from_json(const Json& doc);
Json to_json(const ExperimentConfig& config);

std::vector<RegressorSpec> grid_for(const ExperimentConfig& config, const std::string& model);

struct ModelReport {
    std::string model;
    GridSearchResult search;
    RegressorSpec best;
    double train_seconds = 0.0;
    std::size_t train_rows = 0;
    double test_r2 = 0.0;
    std::vector<double> test_predictions;
};

struct EvaluationReport {
    std::uint64_t seed = 0;
    std::size_t total_rows = 0;
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
    std::size_t feature_width = 0;
    std::uint64_t preprocessing_fingerprint = 0;
    std::uint64_t fold_plan_hash = 0;
    std::vector<double> test_target;
    /// Every modelled row, for the distribution plots.
    std::vector<double> lapse;
    std::vector<double> company_code;
    std::vector<ModelReport> models;
};

/// Runs the whole pipeline in memory and returns the report without touching
/// the file system.
EvaluationReport evaluate(const ExperimentConfig& config);

/// Table 3 analog: model, algorithm, spec, cv_mean.
std::string best_params_csv(const EvaluationReport& report);
/// Table 4 analog: model, train_rows, seconds.
std::string training_time_csv(const EvaluationReport& report);
/// Table 5 analog: model, fold_0..fold_{k-1}, mean.
std::string cv_scores_csv(const EvaluationReport& report);
/// Table 6 analog: model, test_r2.
std::string test_scores_csv(const EvaluationReport& report);
std::string predictions_csv(std::span<const double> y_true, std::span<const double> y_pred);
std::string report_markdown(const EvaluationReport& report, const ExperimentConfig& config);

/// evaluate() followed by writing every report file to config.out_dir. Files
/// are staged in a temporary directory and moved into place only after all
/// of them were produced. Errors name the failing stage.
EvaluationReport run_experiment(const ExperimentConfig& config);

} // namespace lapse

#endif
