#include "lapse/tree.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "lapse/error.hpp"
#include "lapse/random.hpp"

namespace lapse {

namespace {

struct ScanResult {
    double threshold = 0.0;
    double gain = 0.0;
    bool found = false;
};

double midpoint(double a, double b) noexcept
{
    const double m = a + (b - a) / 2.0;
    return m < b ? m : a;  // adjacent doubles: keep b strictly to the right
}

/// Scans one feature whose node-local values are already sorted ascending.
/// `centered` holds targets minus the node mean; `total` is their weighted
/// sum over the node.
/// Gains closer than this (relative to the parent SSE) are ties; ties keep the
/// lower feature and the lower threshold so rounding cannot pick the winner.
double tie_band(double parent_sse) noexcept { return 1e-12 * std::max(parent_sse, 0.0); }

ScanResult scan_sorted(std::span<const double> values, std::span<const double> weights,
                       std::span<const double> centered, double total_weight, double total, double min_leaf,
                       double band)
{
    ScanResult best;
    double w_left = 0.0;
    double s_left = 0.0;
    const double parent_term = total * total / total_weight;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        w_left += weights[i];
        s_left += weights[i] * centered[i];
        if (values[i] == values[i + 1]) { continue; }
        const double w_right = total_weight - w_left;
        if (w_left < min_leaf || w_right < min_leaf) { continue; }
        const double s_right = total - s_left;
        const double gain = s_left * s_left / w_left + s_right * s_right / w_right - parent_term;
        if (!best.found || gain > best.gain + band) {
            best = {midpoint(values[i], values[i + 1]), gain, true};
        }
    }
    return best;
}

/// Reduction must clear rounding noise of the parent SSE.
bool meaningful(double gain, double parent_sse) noexcept
{
    return parent_sse > 0.0 && gain > 1e-12 * parent_sse;
}

/// Greedy depth-first builder over presorted per-feature row lists.
class TreeBuilder {
public:
    TreeBuilder(const TreeSpec& spec, const Matrix& x, std::span<const double> y, std::vector<double> weights,
                const std::vector<std::vector<std::uint32_t>>& global_order, std::size_t m_features, Rng* rng)
        : spec_(spec), x_(x), y_(y), weights_(std::move(weights)), m_features_(m_features), rng_(rng)
    {
        const std::size_t d = x.cols();
        sorted_.resize(d);
        for (std::size_t f = 0; f < d; ++f) {
            auto& list = sorted_[f];
            list.reserve(global_order[f].size());
            for (auto r : global_order[f]) {
                if (weights_[r] > 0.0) { list.push_back(r); }
            }
        }
        goes_left_.assign(x.rows(), 0);
        feature_pool_.resize(d);
        std::iota(feature_pool_.begin(), feature_pool_.end(), std::size_t{0});
    }

    TreeModel build()
    {
        const std::size_t count = sorted_.empty() ? 0 : sorted_[0].size();
        grow(0, count, 0);
        return TreeModel(std::move(nodes_), x_.cols());
    }

private:
    std::int32_t grow(std::size_t begin, std::size_t end, std::size_t depth)
    {
        const auto id = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();

        // Node statistics in feature-0 order, independent of input row order.
        const auto& base = sorted_[0];
        double w_total = 0.0;
        double wy_total = 0.0;
        double y_min = y_[base[begin]];
        double y_max = y_min;
        for (std::size_t i = begin; i < end; ++i) {
            const auto r = base[i];
            w_total += weights_[r];
            wy_total += weights_[r] * y_[r];
            y_min = std::min(y_min, y_[r]);
            y_max = std::max(y_max, y_[r]);
        }
        const double mean = wy_total / w_total;
        nodes_[id].value = mean;
        nodes_[id].weight = w_total;

        const auto min_leaf = static_cast<double>(spec_.min_samples_leaf);
        if (depth >= spec_.max_depth || w_total < 2.0 * min_leaf || y_min == y_max) { return id; }

        double s_total = 0.0;
        double parent_sse = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const auto r = base[i];
            const double c = y_[r] - mean;
            s_total += weights_[r] * c;
            parent_sse += weights_[r] * c * c;
        }
        parent_sse -= s_total * s_total / w_total;

        const double band = tie_band(parent_sse);
        const auto candidates = pick_features();
        const std::size_t len = end - begin;
        values_.resize(len);
        w_buf_.resize(len);
        c_buf_.resize(len);
        ScanResult best;
        std::size_t best_feature = 0;
        for (auto f : candidates) {
            const auto& list = sorted_[f];
            if (x_(list[begin], f) == x_(list[end - 1], f)) { continue; }
            for (std::size_t i = 0; i < len; ++i) {
                const auto r = list[begin + i];
                values_[i] = x_(r, f);
                w_buf_[i] = weights_[r];
                c_buf_[i] = y_[r] - mean;
            }
            const auto result = scan_sorted(values_, w_buf_, c_buf_, w_total, s_total, min_leaf, band);
            if (result.found && (!best.found || result.gain > best.gain + band ||
                                 (result.gain >= best.gain - band && f < best_feature))) {
                best = result;
                best_feature = f;
            }
        }
        if (!best.found || !meaningful(best.gain, parent_sse)) { return id; }

        for (std::size_t i = begin; i < end; ++i) {
            const auto r = base[i];
            goes_left_[r] = x_(r, best_feature) <= best.threshold ? 1 : 0;
        }
        std::size_t mid = begin;
        for (auto& list : sorted_) {
            scratch_.clear();
            std::size_t write = begin;
            for (std::size_t i = begin; i < end; ++i) {
                const auto r = list[i];
                if (goes_left_[r] != 0) {
                    list[write++] = r;
                } else {
                    scratch_.push_back(r);
                }
            }
            mid = write;
            std::copy(scratch_.begin(), scratch_.end(), list.begin() + static_cast<std::ptrdiff_t>(write));
        }

        nodes_[id].feature = static_cast<std::int32_t>(best_feature);
        nodes_[id].threshold = best.threshold;
        const auto left = grow(begin, mid, depth + 1);
        const auto right = grow(mid, end, depth + 1);
        nodes_[id].left = left;
        nodes_[id].right = right;
        return id;
    }

    std::vector<std::size_t> pick_features()
    {
        const std::size_t d = feature_pool_.size();
        if (rng_ == nullptr || m_features_ >= d) { return feature_pool_; }
        std::vector<std::size_t> pool(feature_pool_);
        for (std::size_t i = 0; i < m_features_; ++i) {
            const auto j = i + static_cast<std::size_t>(uniform_index(*rng_, d - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(m_features_);
        std::sort(pool.begin(), pool.end());
        return pool;
    }

    const TreeSpec& spec_;
    const Matrix& x_;
    std::span<const double> y_;
    std::vector<double> weights_;
    std::size_t m_features_;
    Rng* rng_;
    std::vector<std::vector<std::uint32_t>> sorted_;
    std::vector<char> goes_left_;
    std::vector<std::size_t> feature_pool_;
    std::vector<std::uint32_t> scratch_;
    std::vector<double> values_;
    std::vector<double> w_buf_;
    std::vector<double> c_buf_;
    std::vector<TreeModel::Node> nodes_;
};

/// Row order per feature, ascending by value then row index.
std::vector<std::vector<std::uint32_t>> presort(const Matrix& x)
{
    std::vector<std::vector<std::uint32_t>> order(x.cols());
    for (std::size_t f = 0; f < x.cols(); ++f) {
        auto& o = order[f];
        o.resize(x.rows());
        std::iota(o.begin(), o.end(), std::uint32_t{0});
        std::sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) {
            const double va = x(a, f);
            const double vb = x(b, f);
            return va < vb || (va == vb && a < b);
        });
    }
    return order;
}

void check_training_shape(const Matrix& train, std::span<const double> targets)
{
    require(train.rows() >= 1, ErrorKind::empty_input, "cannot fit a tree on zero rows");
    require(train.rows() == targets.size(), ErrorKind::shape, "tree training rows and targets differ in length");
    require(train.cols() >= 1, ErrorKind::shape, "tree training data needs at least one feature");
    require(train.rows() < std::numeric_limits<std::uint32_t>::max(), ErrorKind::parameter,
            "too many training rows");
}

} // namespace

void validate(const TreeSpec& spec)
{
    require(spec.max_depth >= 1, ErrorKind::parameter, "max_depth must be at least 1");
    require(spec.min_samples_leaf >= 1, ErrorKind::parameter, "min_samples_leaf must be at least 1");
}

std::optional<Split> find_best_split(const Matrix& x, std::span<const double> y, std::span<const std::size_t> rows,
                                     std::span<const std::size_t> features, std::size_t min_samples_leaf)
{
    require(!features.empty(), ErrorKind::parameter, "find_best_split needs at least one candidate feature");
    require(rows.size() >= 2, ErrorKind::insufficient_data, "find_best_split needs at least 2 rows");
    require(min_samples_leaf >= 1, ErrorKind::parameter, "min_samples_leaf must be at least 1");

    const std::size_t n = rows.size();
    double mean = 0.0;
    for (auto r : rows) { mean += y[r]; }
    mean /= static_cast<double>(n);
    double total = 0.0;
    double parent_sse = 0.0;
    for (auto r : rows) {
        const double c = y[r] - mean;
        total += c;
        parent_sse += c * c;
    }
    parent_sse -= total * total / static_cast<double>(n);

    const double band = tie_band(parent_sse);
    std::vector<std::size_t> order(n);
    std::vector<double> values(n);
    std::vector<double> centered(n);
    const std::vector<double> weights(n, 1.0);
    std::optional<Split> best;
    for (auto f : features) {
        require(f < x.cols(), ErrorKind::parameter, "candidate feature " + std::to_string(f) + " out of range");
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double va = x(rows[a], f);
            const double vb = x(rows[b], f);
            return va < vb || (va == vb && a < b);
        });
        for (std::size_t i = 0; i < n; ++i) {
            values[i] = x(rows[order[i]], f);
            centered[i] = y[rows[order[i]]] - mean;
        }
        const auto result = scan_sorted(values, weights, centered, static_cast<double>(n), total,
                                        static_cast<double>(min_samples_leaf), band);
        if (!result.found || !meaningful(result.gain, parent_sse)) { continue; }
        const bool better = !best || result.gain > best->sse_reduction + band ||
                            (result.gain >= best->sse_reduction - band && f < best->feature);
        if (better) { best = Split{f, result.threshold, result.gain}; }
    }
    return best;
}

TreeModel::TreeModel(std::vector<Node> nodes, std::size_t n_features)
    : nodes_(std::move(nodes)), n_features_(n_features)
{
    require(!nodes_.empty(), ErrorKind::parameter, "a tree needs at least one node");
    std::vector<std::size_t> depth(nodes_.size(), 0);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        if (n.is_leaf()) {
            depth_ = std::max(depth_, depth[i]);
            continue;
        }
        require(static_cast<std::size_t>(n.feature) < n_features_, ErrorKind::parameter, "split feature out of range");
        for (auto child : {n.left, n.right}) {
            require(child > static_cast<std::int32_t>(i) && static_cast<std::size_t>(child) < nodes_.size(),
                    ErrorKind::parameter, "tree children must follow their parent");
            depth[static_cast<std::size_t>(child)] = depth[i] + 1;
        }
    }
}

double TreeModel::predict_one(std::span<const double> row) const noexcept
{
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& n = nodes_[i];
        i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes_[i].value;
}

std::vector<double> TreeModel::predict(const Matrix& queries) const
{
    require(queries.cols() == n_features_, ErrorKind::shape,
            "query width " + std::to_string(queries.cols()) + " does not match tree width " +
                std::to_string(n_features_));
    std::vector<double> out(queries.rows());
    for (std::size_t r = 0; r < queries.rows(); ++r) { out[r] = predict_one(queries.row(r)); }
    return out;
}

std::size_t TreeModel::leaf_count() const noexcept
{
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

std::string TreeModel::to_text(const std::vector<std::string>& feature_names) const
{
    std::ostringstream out;
    out.precision(6);
    auto name = [&](std::int32_t f) {
        const auto i = static_cast<std::size_t>(f);
        return i < feature_names.size() ? feature_names[i] : "x[" + std::to_string(f) + "]";
    };
    auto visit = [&](auto&& self, std::size_t i, std::size_t depth) -> void {
        const auto& n = nodes_[i];
        const std::string pad(depth * 2, ' ');
        if (n.is_leaf()) {
            out << pad << "predict " << n.value << " (n=" << n.weight << ")\n";
            return;
        }
        out << pad << "if " << name(n.feature) << " <= " << n.threshold << ":\n";
        self(self, static_cast<std::size_t>(n.left), depth + 1);
        out << pad << "else:\n";
        self(self, static_cast<std::size_t>(n.right), depth + 1);
    };
    visit(visit, 0, 0);
    return out.str();
}

TreeModel tree_fit(const TreeSpec& spec, const Matrix& train, std::span<const double> targets)
{
    validate(spec);
    check_training_shape(train, targets);
    const auto order = presort(train);
    TreeBuilder builder(spec, train, targets, std::vector<double>(train.rows(), 1.0), order, train.cols(), nullptr);
    return builder.build();
}

void validate(const ForestSpec& spec, std::size_t n_features)
{
    require(spec.n_trees >= 1, ErrorKind::parameter, "a forest needs at least one tree");
    validate(spec.tree);
    require(!spec.m_features || (*spec.m_features >= 1 && *spec.m_features <= n_features), ErrorKind::parameter,
            "m_features must lie in [1, " + std::to_string(n_features) + "]");
}

ForestModel::ForestModel(std::vector<TreeModel> trees) : trees_(std::move(trees))
{
    require(!trees_.empty(), ErrorKind::parameter, "a forest needs at least one tree");
}

std::vector<double> ForestModel::predict(const Matrix& queries) const
{
    std::vector<double> sum(queries.rows(), 0.0);
    for (const auto& tree : trees_) {
        const auto p = tree.predict(queries);
        for (std::size_t r = 0; r < sum.size(); ++r) { sum[r] += p[r]; }
    }
    for (auto& s : sum) { s /= static_cast<double>(trees_.size()); }
    return sum;
}

ForestModel forest_fit(const ForestSpec& spec, const Matrix& train, std::span<const double> targets)
{
    check_training_shape(train, targets);
    validate(spec, train.cols());
    const std::size_t m = spec.m_features.value_or(std::max<std::size_t>(1, train.cols() / 3));
    const auto order = presort(train);

    std::vector<TreeModel> trees(spec.n_trees);
    auto fit_one = [&](std::size_t t) {
        Rng rng(derive_seed(spec.seed, t));
        std::vector<double> weights(train.rows(), spec.bootstrap ? 0.0 : 1.0);
        if (spec.bootstrap) {
            for (std::size_t i = 0; i < train.rows(); ++i) { weights[uniform_index(rng, train.rows())] += 1.0; }
        }
        TreeBuilder builder(spec.tree, train, targets, std::move(weights), order, m, &rng);
        trees[t] = builder.build();
    };

    const std::size_t workers = std::clamp<std::size_t>(spec.workers, 1, spec.n_trees);
    if (workers == 1) {
        for (std::size_t t = 0; t < spec.n_trees; ++t) { fit_one(t); }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (auto t = next++; t < spec.n_trees; t = next++) {
                    try {
                        fit_one(t);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) { error = std::current_exception(); }
                    }
                }
            });
        }
        pool.clear();
        if (error) { std::rethrow_exception(error); }
    }
    return ForestModel(std::move(trees));
}

} // namespace lapse
