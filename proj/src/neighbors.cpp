#include "lapse/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "lapse/error.hpp"

namespace lapse {

namespace {

struct Candidate {
    double dist2;
    std::size_t index;

    friend bool operator<(const Candidate& a, const Candidate& b)
    {
        return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
    }
};

/// Bounded max-heap of the best k candidates seen so far.
class KBest {
public:
    explicit KBest(std::size_t k) : k_(k) { heap_.reserve(k); }

    [[nodiscard]] bool full() const noexcept { return heap_.size() == k_; }
    [[nodiscard]] double worst() const noexcept { return heap_.front().dist2; }

    void offer(Candidate c)
    {
        if (!full()) {
            heap_.push_back(c);
            std::push_heap(heap_.begin(), heap_.end());
        } else if (c < heap_.front()) {
            std::pop_heap(heap_.begin(), heap_.end());
            heap_.back() = c;
            std::push_heap(heap_.begin(), heap_.end());
        }
    }

    /// Region whose squared lower bound is `bound2` can be skipped.
    [[nodiscard]] bool prunes(double bound2) const noexcept { return full() && bound2 > worst(); }

    std::vector<Neighbor> finish()
    {
        std::sort_heap(heap_.begin(), heap_.end());
        std::vector<Neighbor> out;
        out.reserve(heap_.size());
        for (const auto& c : heap_) { out.push_back({c.index, std::sqrt(c.dist2)}); }
        return out;
    }

private:
    std::size_t k_;
    std::vector<Candidate> heap_;
};

} // namespace

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept
{
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        sum += diff * diff;
    }
    return sum;
}

double distance(std::span<const double> a, std::span<const double> b)
{
    require(a.size() == b.size(), ErrorKind::shape,
            "distance between vectors of dimension " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    return std::sqrt(squared_distance(a, b));
}

std::string_view to_string(NeighborBackend backend) noexcept
{
    switch (backend) {
    case NeighborBackend::brute: return "brute";
    case NeighborBackend::kd_tree: return "kd_tree";
    case NeighborBackend::ball_tree: return "ball_tree";
    }
    return "unknown";
}

NeighborBackend parse_backend(std::string_view text)
{
    if (text == "brute") { return NeighborBackend::brute; }
    if (text == "kd_tree") { return NeighborBackend::kd_tree; }
    if (text == "ball_tree") { return NeighborBackend::ball_tree; }
    fail(ErrorKind::parameter, "unknown neighbor backend '" + std::string(text) + "'");
}

NeighborIndex::NeighborIndex(Matrix points, NeighborBackend backend, std::size_t leaf_size)
    : points_(std::move(points)), backend_(backend), leaf_size_(leaf_size)
{
    require(points_.rows() >= 1, ErrorKind::empty_input, "cannot build a neighbor index over zero points");
    require(points_.cols() >= 1, ErrorKind::shape, "points need at least one dimension");
    require(leaf_size_ >= 1, ErrorKind::parameter, "leaf_size must be at least 1");

    order_.resize(points_.rows());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    switch (backend_) {
    case NeighborBackend::brute: nodes_.push_back({0, order_.size()}); break;
    case NeighborBackend::kd_tree: build_kd(0, order_.size()); break;
    case NeighborBackend::ball_tree: build_ball(0, order_.size()); break;
    }
}

void NeighborIndex::compute_box(std::size_t node)
{
    const std::size_t d = dims();
    lo_.resize((node + 1) * d);
    hi_.resize((node + 1) * d);
    const auto& n = nodes_[node];
    auto first = points_.row(order_[n.begin]);
    std::copy(first.begin(), first.end(), lo_.begin() + static_cast<std::ptrdiff_t>(node * d));
    std::copy(first.begin(), first.end(), hi_.begin() + static_cast<std::ptrdiff_t>(node * d));
    for (std::size_t i = n.begin + 1; i < n.end; ++i) {
        auto p = points_.row(order_[i]);
        for (std::size_t j = 0; j < d; ++j) {
            lo_[node * d + j] = std::min(lo_[node * d + j], p[j]);
            hi_[node * d + j] = std::max(hi_[node * d + j], p[j]);
        }
    }
}

std::size_t NeighborIndex::build_kd(std::size_t begin, std::size_t end)
{
    const std::size_t id = nodes_.size();
    nodes_.push_back({begin, end});
    compute_box(id);
    if (end - begin <= leaf_size_) { return id; }

    const std::size_t d = dims();
    std::size_t axis = 0;
    double spread = -1.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double s = hi_[id * d + j] - lo_[id * d + j];
        if (s > spread) {
            spread = s;
            axis = j;
        }
    }
    if (spread <= 0.0) { return id; }  // all duplicates

    auto first = order_.begin() + static_cast<std::ptrdiff_t>(begin);
    auto last = order_.begin() + static_cast<std::ptrdiff_t>(end);
    std::sort(first, last, [&](std::size_t a, std::size_t b) {
        const double va = points_(a, axis);
        const double vb = points_(b, axis);
        return va < vb || (va == vb && a < b);
    });
    const std::size_t mid = begin + (end - begin) / 2;
    nodes_[id].split_axis = axis;
    nodes_[id].split_value = points_(order_[mid], axis);

    const auto left = build_kd(begin, mid);
    const auto right = build_kd(mid, end);
    nodes_[id].left = static_cast<std::ptrdiff_t>(left);
    nodes_[id].right = static_cast<std::ptrdiff_t>(right);
    return id;
}

std::size_t NeighborIndex::build_ball(std::size_t begin, std::size_t end)
{
    const std::size_t id = nodes_.size();
    const std::size_t d = dims();
    nodes_.push_back({begin, end});
    centers_.resize((id + 1) * d, 0.0);

    auto center = std::span<double>(centers_).subspan(id * d, d);
    for (std::size_t i = begin; i < end; ++i) {
        auto p = points_.row(order_[i]);
        for (std::size_t j = 0; j < d; ++j) { center[j] += p[j]; }
    }
    for (auto& c : center) { c /= static_cast<double>(end - begin); }

    double radius2 = 0.0;
    std::size_t far_from_center = order_[begin];
    for (std::size_t i = begin; i < end; ++i) {
        const double r2 = squared_distance(points_.row(order_[i]), center);
        if (r2 > radius2) {
            radius2 = r2;
            far_from_center = order_[i];
        }
    }
    nodes_[id].radius = std::sqrt(radius2);
    if (end - begin <= leaf_size_ || radius2 == 0.0) { return id; }

    const auto seed_a = points_.row(far_from_center);
    std::size_t far_from_a = far_from_center;
    double best = -1.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double d2 = squared_distance(points_.row(order_[i]), seed_a);
        if (d2 > best) {
            best = d2;
            far_from_a = order_[i];
        }
    }
    const auto seed_b = points_.row(far_from_a);

    auto first = order_.begin() + static_cast<std::ptrdiff_t>(begin);
    auto last = order_.begin() + static_cast<std::ptrdiff_t>(end);
    auto split = std::stable_partition(first, last, [&](std::size_t i) {
        auto p = points_.row(i);
        return squared_distance(p, seed_a) <= squared_distance(p, seed_b);
    });
    const auto mid = static_cast<std::size_t>(split - order_.begin());
    if (mid == begin || mid == end) { return id; }

    const auto left = build_ball(begin, mid);
    const auto right = build_ball(mid, end);
    nodes_[id].left = static_cast<std::ptrdiff_t>(left);
    nodes_[id].right = static_cast<std::ptrdiff_t>(right);
    return id;
}

std::span<const double> NeighborIndex::centroid(std::size_t i) const noexcept
{
    if (backend_ != NeighborBackend::ball_tree) { return {}; }
    return std::span<const double>(centers_).subspan(i * dims(), dims());
}

std::vector<Neighbor> NeighborIndex::query(std::span<const double> point, std::size_t k) const
{
    require(point.size() == dims(), ErrorKind::shape,
            "query has dimension " + std::to_string(point.size()) + ", index has " + std::to_string(dims()));
    require(k >= 1 && k <= size(), ErrorKind::parameter,
            "k = " + std::to_string(k) + " must lie in [1, " + std::to_string(size()) + "]");

    KBest best(k);
    auto scan = [&](const Node& n) {
        for (std::size_t i = n.begin; i < n.end; ++i) {
            best.offer({squared_distance(points_.row(order_[i]), point), order_[i]});
        }
    };

    const std::size_t d = dims();
    switch (backend_) {
    case NeighborBackend::brute: scan(nodes_.front()); break;

    case NeighborBackend::kd_tree: {
        // Box distance is summed in the same coordinate order as
        // squared_distance, so it never exceeds the distance to a member.
        auto box_bound = [&](std::size_t id) {
            double sum = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double lo = lo_[id * d + j];
                const double hi = hi_[id * d + j];
                double gap = 0.0;
                if (point[j] < lo) {
                    gap = lo - point[j];
                } else if (point[j] > hi) {
                    gap = point[j] - hi;
                }
                sum += gap * gap;
            }
            return sum;
        };
        auto visit = [&](auto&& self, std::size_t id) -> void {
            if (best.prunes(box_bound(id))) { return; }
            const auto& n = nodes_[id];
            if (n.is_leaf()) {
                scan(n);
                return;
            }
            const auto near = point[n.split_axis] <= n.split_value ? n.left : n.right;
            const auto far = near == n.left ? n.right : n.left;
            self(self, static_cast<std::size_t>(near));
            self(self, static_cast<std::size_t>(far));
        };
        visit(visit, 0);
        break;
    }

    case NeighborBackend::ball_tree: {
        // Slack absorbs rounding in the centroid distance and radius.
        auto ball_bound = [&](std::size_t id) {
            const double to_center = std::sqrt(squared_distance(centroid(id), point));
            const double r = nodes_[id].radius;
            const double gap = to_center - r - 1e-9 * (1.0 + to_center + r);
            return gap > 0.0 ? gap * gap : 0.0;
        };
        auto visit = [&](auto&& self, std::size_t id, double bound2) -> void {
            if (best.prunes(bound2)) { return; }
            const auto& n = nodes_[id];
            if (n.is_leaf()) {
                scan(n);
                return;
            }
            const auto l = static_cast<std::size_t>(n.left);
            const auto r = static_cast<std::size_t>(n.right);
            const double bl = ball_bound(l);
            const double br = ball_bound(r);
            if (bl <= br) {
                self(self, l, bl);
                self(self, r, br);
            } else {
                self(self, r, br);
                self(self, l, bl);
            }
        };
        visit(visit, 0, ball_bound(0));
        break;
    }
    }
    return best.finish();
}

std::string NeighborIndex::dump() const
{
    std::ostringstream out;
    out << to_string(backend_) << " n=" << size() << " d=" << dims() << " leaf_size=" << leaf_size_ << '\n';
    auto visit = [&](auto&& self, std::size_t id, int depth) -> void {
        const auto& n = nodes_[id];
        out << std::string(static_cast<std::size_t>(depth) * 2, ' ');
        if (n.is_leaf()) {
            out << "leaf [" << n.begin << ", " << n.end << ")";
        } else if (backend_ == NeighborBackend::kd_tree) {
            out << "split axis=" << n.split_axis << " value=" << n.split_value << " n=" << n.size();
        } else {
            out << "ball n=" << n.size();
        }
        if (backend_ == NeighborBackend::ball_tree) { out << " radius=" << n.radius; }
        out << '\n';
        if (!n.is_leaf()) {
            self(self, static_cast<std::size_t>(n.left), depth + 1);
            self(self, static_cast<std::size_t>(n.right), depth + 1);
        }
    };
    visit(visit, 0, 0);
    return out.str();
}

KnnModel::KnnModel(const KnnSpec& spec, Matrix train, std::vector<double> targets)
    : spec_(spec), targets_(std::move(targets))
{
    require(train.rows() == targets_.size(), ErrorKind::shape, "KNN training rows and targets differ in length");
    require(spec.k >= 1 && spec.k <= train.rows(), ErrorKind::parameter,
            "k = " + std::to_string(spec.k) + " must lie in [1, " + std::to_string(train.rows()) + "]");
    index_ = NeighborIndex(std::move(train), spec.backend, spec.leaf_size);
}

double KnnModel::predict_one(std::span<const double> query) const
{
    double sum = 0.0;
    const auto neighbors = index_.query(query, spec_.k);
    for (const auto& n : neighbors) { sum += targets_[n.index]; }
    return sum / static_cast<double>(neighbors.size());
}

std::vector<double> KnnModel::predict(const Matrix& queries) const
{
    require(queries.cols() == index_.dims(), ErrorKind::shape, "query width does not match KNN training width");
    std::vector<double> out(queries.rows());
    for (std::size_t r = 0; r < queries.rows(); ++r) { out[r] = predict_one(queries.row(r)); }
    return out;
}

std::vector<double> knn_fit_predict(const KnnSpec& spec, const Matrix& train, std::span<const double> targets,
                                    const Matrix& queries)
{
    return KnnModel(spec, train, std::vector<double>(targets.begin(), targets.end())).predict(queries);
}

} // namespace lapse
