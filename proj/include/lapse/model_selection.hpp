#ifndef LAPSE_MODEL_SELECTION_HPP
#define LAPSE_MODEL_SELECTION_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lapse/neighbors.hpp"
#include "lapse/preprocessing.hpp"
#include "lapse/svr.hpp"
#include "lapse/tree.hpp"

namespace lapse {

/// Reference regressor that always predicts the training-target mean.
struct BaselineSpec {
    friend bool operator==(const BaselineSpec&, const BaselineSpec&) = default;
};

class BaselineModel {
public:
    BaselineModel() = default;
    explicit BaselineModel(double value) : value_(value) {}
    [[nodiscard]] std::vector<double> predict(const Matrix& queries) const
    {
        return std::vector<double>(queries.rows(), value_);
    }
    [[nodiscard]] double value() const noexcept { return value_; }

private:
    double value_ = 0.0;
};

using RegressorSpec = std::variant<KnnSpec, SvrSpec, TreeSpec, ForestSpec, BaselineSpec>;
using FittedModel = std::variant<KnnModel, SvrModel, TreeModel, ForestModel, BaselineModel>;

/// "knn", "svr", "tree", "forest" or "baseline".
std::string algorithm_name(const RegressorSpec& spec);

/// Compact `name=value` list of the tuned hyperparameters, e.g.
/// "k=10 backend=ball_tree".
std::string describe(const RegressorSpec& spec);

void validate(const RegressorSpec& spec, std::size_t n_rows, std::size_t n_features);

FittedModel fit(const RegressorSpec& spec, const Matrix& x, std::span<const double> y);
std::vector<double> predict(const FittedModel& model, const Matrix& x);

struct FoldPlan {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> assignments;  // fold index per row

    [[nodiscard]] std::uint64_t hash() const;
    [[nodiscard]] std::vector<std::size_t> test_rows(std::size_t fold) const;
    [[nodiscard]] std::vector<std::size_t> train_rows(std::size_t fold) const;
    [[nodiscard]] std::vector<std::size_t> fold_sizes() const;
};

/// Seeded shuffle of [0, n), then round-robin fold assignment.
FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed);

struct CvResult {
    RegressorSpec spec;
    std::vector<double> fold_scores;
    double mean = 0.0;
    std::uint64_t plan_hash = 0;
};

/// Fits `spec` on every fold's complement and scores R^2 on the fold. Errors
/// are rethrown with the fold index prepended.
CvResult cross_validate(const RegressorSpec& spec, const FeatureMatrix& data, const FoldPlan& plan);

struct GridSearchResult {
    std::vector<CvResult> evaluated;  // grid order
    std::size_t best_index = 0;
    bool tie = false;  // another grid point matched the best mean exactly
    std::uint64_t plan_hash = 0;

    [[nodiscard]] const CvResult& best() const { return evaluated.at(best_index); }
};

/// Cross-validates every grid point on the same plan and keeps the highest
/// mean R^2 (first in grid order on ties). `workers` > 1 evaluates grid
/// points concurrently with identical results.
GridSearchResult grid_search(const std::vector<RegressorSpec>& grid, const FeatureMatrix& data, const FoldPlan& plan,
                             std::size_t workers = 1);

std::vector<RegressorSpec> knn_grid(const std::vector<std::size_t>& ks, const std::vector<NeighborBackend>& backends,
                                    std::size_t leaf_size = NeighborIndex::default_leaf_size);
std::vector<RegressorSpec> svr_grid(const std::vector<double>& cs, const std::vector<KernelKind>& kernels,
                                    const SvrSpec& base = {});
std::vector<RegressorSpec> tree_grid(const std::vector<std::size_t>& depths, std::size_t min_samples_leaf = 1);

/// One row per grid point: algorithm, spec, fold_0..fold_{k-1}, mean, best.
std::string to_csv(const GridSearchResult& result);

} // namespace lapse

#endif
