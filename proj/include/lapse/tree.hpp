#ifndef LAPSE_TREE_HPP
#define LAPSE_TREE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lapse/matrix.hpp"

namespace lapse {

struct TreeSpec {
    std::size_t max_depth = 10;
    std::size_t min_samples_leaf = 1;

    friend bool operator==(const TreeSpec&, const TreeSpec&) = default;
};

void validate(const TreeSpec& spec);

struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double sse_reduction = 0.0;

    friend bool operator==(const Split&, const Split&) = default;
};

/// Best variance-reducing split of `rows` over the candidate `features`.
///
/// Thresholds are midpoints between consecutive distinct sorted values and
/// rows with value <= threshold go left. The split with the largest SSE
/// reduction wins; ties keep the lowest feature index, then the lowest
/// threshold. Returns nothing when no admissible split reduces the SSE.
std::optional<Split> find_best_split(const Matrix& x, std::span<const double> y, std::span<const std::size_t> rows,
                                     std::span<const std::size_t> features, std::size_t min_samples_leaf = 1);

class TreeModel {
public:
    struct Node {
        std::int32_t feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        double value = 0.0;
        double weight = 0.0;  // training rows (with multiplicity) that reached the node

        [[nodiscard]] bool is_leaf() const noexcept { return feature < 0; }
        friend bool operator==(const Node&, const Node&) = default;
    };

    TreeModel() = default;
    TreeModel(std::vector<Node> nodes, std::size_t n_features);

    [[nodiscard]] double predict_one(std::span<const double> row) const noexcept;
    [[nodiscard]] std::vector<double> predict(const Matrix& queries) const;

    [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::size_t n_features() const noexcept { return n_features_; }
    /// Depth of the deepest leaf; a lone root leaf has depth 0.
    [[nodiscard]] std::size_t depth() const noexcept { return depth_; }
    [[nodiscard]] std::size_t leaf_count() const noexcept;

    /// Indented if/else rendering.
    [[nodiscard]] std::string to_text(const std::vector<std::string>& feature_names = {}) const;

    friend bool operator==(const TreeModel&, const TreeModel&) = default;

private:
    std::vector<Node> nodes_;
    std::size_t n_features_ = 0;
    std::size_t depth_ = 0;
};

TreeModel tree_fit(const TreeSpec& spec, const Matrix& train, std::span<const double> targets);

struct ForestSpec {
    std::size_t n_trees = 100;
    TreeSpec tree{20, 1};
    /// Candidate features per split; unset means max(1, d / 3).
    std::optional<std::size_t> m_features;
    bool bootstrap = true;
    std::uint64_t seed = 0;
    /// Threads fitting member trees; results do not depend on it.
    std::size_t workers = 1;

    friend bool operator==(const ForestSpec&, const ForestSpec&) = default;
};

void validate(const ForestSpec& spec, std::size_t n_features);

class ForestModel {
public:
    ForestModel() = default;
    explicit ForestModel(std::vector<TreeModel> trees);

    [[nodiscard]] std::vector<double> predict(const Matrix& queries) const;
    [[nodiscard]] const std::vector<TreeModel>& trees() const noexcept { return trees_; }

    friend bool operator==(const ForestModel&, const ForestModel&) = default;

private:
    std::vector<TreeModel> trees_;
};

/// Bagged trees: tree t draws its bootstrap sample and per-node feature
/// subsets from derive_seed(seed, t).
ForestModel forest_fit(const ForestSpec& spec, const Matrix& train, std::span<const double> targets);

} // namespace lapse

#endif
