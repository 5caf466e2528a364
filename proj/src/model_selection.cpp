#include "lapse/model_selection.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "lapse/csv.hpp"
#include "lapse/error.hpp"
#include "lapse/format.hpp"
#include "lapse/metrics.hpp"
#include "lapse/random.hpp"

namespace lapse {

namespace {

template <typename... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <typename... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

std::string algorithm_name(const RegressorSpec& spec)
{
    return std::visit(overloaded{
                          [](const KnnSpec&) { return std::string("knn"); },
                          [](const SvrSpec&) { return std::string("svr"); },
                          [](const TreeSpec&) { return std::string("tree"); },
                          [](const ForestSpec&) { return std::string("forest"); },
                          [](const BaselineSpec&) { return std::string("baseline"); },
                      },
                      spec);
}

std::string describe(const RegressorSpec& spec)
{
    std::ostringstream out;
    std::visit(overloaded{
                   [&](const KnnSpec& s) { out << "k=" << s.k << " backend=" << to_string(s.backend); },
                   [&](const SvrSpec& s) {
                       out << "C=" << format_real(s.C, 6) << " kernel=" << to_string(s.kernel.kind)
                           << " epsilon=" << format_real(s.epsilon, 6);
                       if (s.kernel.kind == KernelKind::rbf) {
                           out << " gamma=" << (s.kernel.gamma ? format_real(*s.kernel.gamma, 6) : "1/d");
                       }
                   },
                   [&](const TreeSpec& s) { out << "max_depth=" << s.max_depth << " min_samples_leaf=" << s.min_samples_leaf; },
                   [&](const ForestSpec& s) {
                       out << "n_trees=" << s.n_trees << " max_depth=" << s.tree.max_depth << " m_features="
                           << (s.m_features ? std::to_string(*s.m_features) : "d/3")
                           << " bootstrap=" << (s.bootstrap ? "true" : "false");
                   },
                   [&](const BaselineSpec&) { out << "mean"; },
               },
               spec);
    return out.str();
}

void validate(const RegressorSpec& spec, std::size_t n_rows, std::size_t n_features)
{
    std::visit(overloaded{
                   [&](const KnnSpec& s) {
                       require(s.k >= 1 && s.k <= n_rows, ErrorKind::parameter,
                               "k = " + std::to_string(s.k) + " must lie in [1, " + std::to_string(n_rows) + "]");
                       require(s.leaf_size >= 1, ErrorKind::parameter, "leaf_size must be at least 1");
                   },
                   [&](const SvrSpec& s) { validate(s); },
                   [&](const TreeSpec& s) { validate(s); },
                   [&](const ForestSpec& s) { validate(s, n_features); },
                   [&](const BaselineSpec&) {},
               },
               spec);
}

FittedModel fit(const RegressorSpec& spec, const Matrix& x, std::span<const double> y)
{
    require(x.rows() == y.size(), ErrorKind::shape, "training rows and targets differ in length");
    return std::visit(overloaded{
                          [&](const KnnSpec& s) -> FittedModel {
                              return KnnModel(s, x, std::vector<double>(y.begin(), y.end()));
                          },
                          [&](const SvrSpec& s) -> FittedModel { return svr_fit(s, x, y); },
                          [&](const TreeSpec& s) -> FittedModel { return tree_fit(s, x, y); },
                          [&](const ForestSpec& s) -> FittedModel { return forest_fit(s, x, y); },
                          [&](const BaselineSpec&) -> FittedModel {
                              require(!y.empty(), ErrorKind::empty_input, "cannot fit on zero rows");
                              double sum = 0.0;
                              for (double v : y) { sum += v; }
                              return BaselineModel(sum / static_cast<double>(y.size()));
                          },
                      },
                      spec);
}

std::vector<double> predict(const FittedModel& model, const Matrix& x)
{
    return std::visit([&](const auto& m) { return m.predict(x); }, model);
}

std::uint64_t FoldPlan::hash() const
{
    Fnv1a h;
    h.add(k);
    h.add(seed);
    for (auto a : assignments) { h.add(a); }
    return h.value();
}

std::vector<std::size_t> FoldPlan::test_rows(std::size_t fold) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] == fold) { out.push_back(i); }
    }
    return out;
}

std::vector<std::size_t> FoldPlan::train_rows(std::size_t fold) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] != fold) { out.push_back(i); }
    }
    return out;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const
{
    std::vector<std::size_t> sizes(k, 0);
    for (auto a : assignments) { ++sizes[a]; }
    return sizes;
}

FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed)
{
    require(k >= 2, ErrorKind::parameter, "need at least 2 folds");
    require(k <= n, ErrorKind::parameter,
            std::to_string(k) + " folds requested for only " + std::to_string(n) + " rows");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    shuffle(std::span<std::size_t>(order), rng);

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.resize(n);
    for (std::size_t i = 0; i < n; ++i) { plan.assignments[order[i]] = i % k; }
    return plan;
}

CvResult cross_validate(const RegressorSpec& spec, const FeatureMatrix& data, const FoldPlan& plan)
{
    require(plan.assignments.size() == data.rows(), ErrorKind::shape,
            "fold plan covers " + std::to_string(plan.assignments.size()) + " rows, data has " +
                std::to_string(data.rows()));
    require(data.target.size() == data.rows(), ErrorKind::shape, "feature matrix has no target");

    CvResult result;
    result.spec = spec;
    result.plan_hash = plan.hash();
    for (std::size_t f = 0; f < plan.k; ++f) {
        try {
            const auto train_idx = plan.train_rows(f);
            const auto test_idx = plan.test_rows(f);
            const auto train = data.select_rows(train_idx);
            const auto test = data.select_rows(test_idx);
            const auto model = fit(spec, train.values, train.target);
            result.fold_scores.push_back(r_squared(predict(model, test.values), test.target));
        } catch (const Error& e) {
            throw Error(e.kind(), "fold " + std::to_string(f) + ": " + e.what());
        }
    }
    double sum = 0.0;
    for (double s : result.fold_scores) { sum += s; }
    result.mean = sum / static_cast<double>(result.fold_scores.size());
    return result;
}

GridSearchResult grid_search(const std::vector<RegressorSpec>& grid, const FeatureMatrix& data, const FoldPlan& plan,
                             std::size_t workers)
{
    require(!grid.empty(), ErrorKind::parameter, "grid search needs at least one grid point");
    for (const auto& spec : grid) { validate(spec, data.rows(), data.cols()); }

    GridSearchResult out;
    out.plan_hash = plan.hash();
    out.evaluated.resize(grid.size());

    workers = std::clamp<std::size_t>(workers, 1, grid.size());
    if (workers == 1) {
        for (std::size_t g = 0; g < grid.size(); ++g) { out.evaluated[g] = cross_validate(grid[g], data, plan); }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    for (auto g = next++; g < grid.size(); g = next++) {
                        try {
                            out.evaluated[g] = cross_validate(grid[g], data, plan);
                        } catch (...) {
                            std::lock_guard lock(error_mutex);
                            if (!error) { error = std::current_exception(); }
                        }
                    }
                });
            }
        }
        if (error) { std::rethrow_exception(error); }
    }

    for (std::size_t g = 1; g < out.evaluated.size(); ++g) {
        if (out.evaluated[g].mean > out.evaluated[out.best_index].mean) { out.best_index = g; }
    }
    const double best = out.evaluated[out.best_index].mean;
    for (std::size_t g = 0; g < out.evaluated.size(); ++g) {
        if (g != out.best_index && out.evaluated[g].mean == best) { out.tie = true; }
    }
    return out;
}

std::vector<RegressorSpec> knn_grid(const std::vector<std::size_t>& ks, const std::vector<NeighborBackend>& backends,
                                    std::size_t leaf_size)
{
    std::vector<RegressorSpec> grid;
    for (auto k : ks) {
        for (auto b : backends) { grid.emplace_back(KnnSpec{k, b, leaf_size}); }
    }
    return grid;
}

std::vector<RegressorSpec> svr_grid(const std::vector<double>& cs, const std::vector<KernelKind>& kernels,
                                    const SvrSpec& base)
{
    std::vector<RegressorSpec> grid;
    for (auto c : cs) {
        for (auto kind : kernels) {
            SvrSpec s = base;
            s.C = c;
            s.kernel.kind = kind;
            grid.emplace_back(s);
        }
    }
    return grid;
}

std::vector<RegressorSpec> tree_grid(const std::vector<std::size_t>& depths, std::size_t min_samples_leaf)
{
    std::vector<RegressorSpec> grid;
    for (auto d : depths) { grid.emplace_back(TreeSpec{d, min_samples_leaf}); }
    return grid;
}

std::string to_csv(const GridSearchResult& result)
{
    std::ostringstream out;
    csv::Row header{"algorithm", "spec"};
    const std::size_t k = result.evaluated.empty() ? 0 : result.evaluated.front().fold_scores.size();
    for (std::size_t f = 0; f < k; ++f) { header.push_back("fold_" + std::to_string(f)); }
    header.emplace_back("mean");
    header.emplace_back("best");
    csv::write_row(out, header);
    for (std::size_t g = 0; g < result.evaluated.size(); ++g) {
        const auto& cv = result.evaluated[g];
        csv::Row row{algorithm_name(cv.spec), describe(cv.spec)};
        for (double s : cv.fold_scores) { row.push_back(format_real(s)); }
        row.push_back(format_real(cv.mean));
        row.emplace_back(g == result.best_index ? "1" : "0");
        csv::write_row(out, row);
    }
    return out.str();
}

} // namespace lapse
