#ifndef LAPSE_NEIGHBORS_HPP
#define LAPSE_NEIGHBORS_HPP

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lapse/matrix.hpp"

namespace lapse {

/// Euclidean distance; throws a shape error on dimension mismatch.
double distance(std::span<const double> a, std::span<const double> b);

/// Squared Euclidean distance summed in coordinate order. Every backend uses
/// this one routine so equal distances compare equal across backends.
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

enum class NeighborBackend { brute, kd_tree, ball_tree };

std::string_view to_string(NeighborBackend backend) noexcept;
NeighborBackend parse_backend(std::string_view text);

struct Neighbor {
    std::size_t index = 0;
    double distance = 0.0;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Exact k-nearest-neighbour index over a fixed point set.
///
/// The k-D tree splits at the median of the axis with the largest spread
/// (lowest axis on ties) and prunes with per-node bounding boxes. The ball
/// tree splits by assigning each point to the nearer of two far-apart seeds
/// and prunes with centroid/radius bounds. Results are ordered by
/// (distance, row index) so every backend returns the same list.
class NeighborIndex {
public:
    struct Node {
        std::size_t begin = 0;
        std::size_t end = 0;
        std::ptrdiff_t left = -1;
        std::ptrdiff_t right = -1;
        std::size_t split_axis = 0;
        double split_value = 0.0;
        double radius = 0.0;

        [[nodiscard]] bool is_leaf() const noexcept { return left < 0; }
        [[nodiscard]] std::size_t size() const noexcept { return end - begin; }
    };

    static constexpr std::size_t default_leaf_size = 30;

    NeighborIndex() = default;
    NeighborIndex(Matrix points, NeighborBackend backend, std::size_t leaf_size = default_leaf_size);

    [[nodiscard]] std::vector<Neighbor> query(std::span<const double> point, std::size_t k) const;

    [[nodiscard]] NeighborBackend backend() const noexcept { return backend_; }
    [[nodiscard]] std::size_t size() const noexcept { return points_.rows(); }
    [[nodiscard]] std::size_t dims() const noexcept { return points_.cols(); }
    [[nodiscard]] std::size_t leaf_size() const noexcept { return leaf_size_; }
    [[nodiscard]] const Matrix& points() const noexcept { return points_; }

    [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }
    /// Row indices owned by a node.
    [[nodiscard]] std::span<const std::size_t> members(const Node& node) const noexcept
    {
        return std::span<const std::size_t>(order_).subspan(node.begin, node.size());
    }
    /// Ball-tree centroid of node `i` (empty for other backends).
    [[nodiscard]] std::span<const double> centroid(std::size_t i) const noexcept;

    /// Indented text rendering of the tree, one node per line.
    [[nodiscard]] std::string dump() const;

private:
    std::size_t build_kd(std::size_t begin, std::size_t end);
    std::size_t build_ball(std::size_t begin, std::size_t end);
    void compute_box(std::size_t node);

    Matrix points_;
    NeighborBackend backend_ = NeighborBackend::brute;
    std::size_t leaf_size_ = default_leaf_size;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
    std::vector<double> lo_;       // k-D: per-node box, dims() entries each
    std::vector<double> hi_;
    std::vector<double> centers_;  // ball: per-node centroid
};

struct KnnSpec {
    std::size_t k = 5;
    NeighborBackend backend = NeighborBackend::brute;
    std::size_t leaf_size = NeighborIndex::default_leaf_size;

    friend bool operator==(const KnnSpec&, const KnnSpec&) = default;
};

/// Predicts the unweighted mean target of the k nearest training rows.
class KnnModel {
public:
    KnnModel() = default;
    KnnModel(const KnnSpec& spec, Matrix train, std::vector<double> targets);

    [[nodiscard]] std::vector<double> predict(const Matrix& queries) const;
    [[nodiscard]] double predict_one(std::span<const double> query) const;

    [[nodiscard]] const KnnSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const NeighborIndex& index() const noexcept { return index_; }
    [[nodiscard]] const std::vector<double>& targets() const noexcept { return targets_; }

private:
    KnnSpec spec_;
    NeighborIndex index_;
    std::vector<double> targets_;
};

std::vector<double> knn_fit_predict(const KnnSpec& spec, const Matrix& train, std::span<const double> targets,
                                    const Matrix& queries);

} // namespace lapse

#endif
