#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "lapse/error.hpp"
#include "lapse/metrics.hpp"
#include "lapse/model_selection.hpp"
#include "lapse/random.hpp"
#include "lapse/serialization.hpp"

using namespace lapse;

namespace {

ErrorKind kind_of(auto&& body)
{
    try {
        body();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::io;
}

// Two-pass 1 - SS_res / SS_tot.
double r2_oracle(const std::vector<double>& pred, const std::vector<double>& truth)
{
    const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());
    double res = 0.0, tot = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
        tot += (truth[i] - mean) * (truth[i] - mean);
    }
    return 1.0 - res / tot;
}

FeatureMatrix learnable(std::size_t n, Rng& rng, double noise = 0.0)
{
    FeatureMatrix m;
    m.values = Matrix(n, 3);
    m.target.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < 3; ++c) { m.values(r, c) = uniform01(rng); }
        m.target[r] = 10.0 * m.values(r, 0) + (m.values(r, 1) > 0.5 ? 5.0 : 0.0) + noise * standard_normal(rng);
    }
    return m;
}

} // namespace

TEST_CASE("r_squared fixed cases")
{
    const std::vector<double> t{1, 2, 3};
    CHECK(r_squared(t, t) == 1.0);
    CHECK(r_squared(std::vector<double>{2, 2, 2}, t) == 0.0);
    CHECK(r_squared(std::vector<double>{0, 1}, std::vector<double>{0, 2}) == 0.5);
    CHECK(r_squared(std::vector<double>{3, 2, 1}, t) < 0.0);
    CHECK(kind_of([] { r_squared(std::vector<double>{1, 2}, std::vector<double>{5, 5}); }) == ErrorKind::undefined_score);
    CHECK(kind_of([] { r_squared(std::vector<double>{1}, std::vector<double>{1, 2}); }) == ErrorKind::shape);
    CHECK(kind_of([] { r_squared(std::vector<double>{}, std::vector<double>{}); }) == ErrorKind::empty_input);
    CHECK(mean_squared_error(std::vector<double>{0, 1}, std::vector<double>{0, 3}) == 2.0);
}

TEST_CASE("r_squared against the two-pass oracle, permutation and translation")
{
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + uniform_index(rng, 200);
        std::vector<double> t(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            t[i] = 100.0 * standard_normal(rng);
            p[i] = t[i] + 50.0 * standard_normal(rng);
        }
        const double r = r_squared(p, t);
        CHECK(std::abs(r - r2_oracle(p, t)) <= 1e-12);

        auto perm = std::vector<std::size_t>(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        shuffle(std::span<std::size_t>(perm), rng);
        std::vector<double> tp(n), pp(n), ts(n), ps(n);
        for (std::size_t i = 0; i < n; ++i) {
            tp[i] = t[perm[i]];
            pp[i] = p[perm[i]];
            ts[i] = t[i] + 37.5;
            ps[i] = p[i] + 37.5;
        }
        CHECK(r_squared(pp, tp) == doctest::Approx(r).epsilon(1e-12));
        CHECK(r_squared(ps, ts) == doctest::Approx(r).epsilon(1e-9));
    }
}

TEST_CASE("fold plans")
{
    const auto loo = make_folds(10, 10, 1);
    CHECK(loo.fold_sizes() == std::vector<std::size_t>(10, 1));

    auto sizes = make_folds(10, 3, 1).fold_sizes();
    std::sort(sizes.rbegin(), sizes.rend());
    CHECK(sizes == std::vector<std::size_t>{4, 3, 3});

    for (std::size_t n : {10u, 101u, 1000u, 57u}) {
        const auto plan = make_folds(n, 10, n);
        std::set<std::size_t> all;
        std::size_t total = 0;
        for (std::size_t f = 0; f < 10; ++f) {
            const auto test = plan.test_rows(f);
            const auto train = plan.train_rows(f);
            CHECK(test.size() + train.size() == n);
            total += test.size();
            all.insert(test.begin(), test.end());
        }
        CHECK(total == n);
        CHECK(all.size() == n);
        const auto s = plan.fold_sizes();
        CHECK(*std::max_element(s.begin(), s.end()) - *std::min_element(s.begin(), s.end()) <= 1);
    }

    CHECK(make_folds(50, 5, 7).assignments == make_folds(50, 5, 7).assignments);
    CHECK(make_folds(50, 5, 7).hash() == make_folds(50, 5, 7).hash());
    CHECK(make_folds(50, 5, 7).hash() != make_folds(50, 5, 8).hash());
    CHECK(kind_of([] { make_folds(5, 6, 1); }) == ErrorKind::parameter);
    CHECK(kind_of([] { make_folds(5, 1, 1); }) == ErrorKind::parameter);
}

TEST_CASE("cross-validation")
{
    // y = x0 on unique rows, two folds: a fully grown tree cannot reproduce
    // unseen values exactly, so use a linear SVR with a tiny tube instead.
    FeatureMatrix line;
    line.values = Matrix(20, 1);
    line.target.resize(20);
    for (std::size_t r = 0; r < 20; ++r) {
        line.values(r, 0) = static_cast<double>(r) / 19.0;
        line.target[r] = line.values(r, 0);
    }
    SvrSpec svr;
    svr.C = 1000.0;
    svr.epsilon = 1e-4;
    svr.tol = 1e-6;
    svr.max_passes = 1000;
    const auto plan2 = make_folds(20, 2, 3);
    const auto exact = cross_validate(svr, line, plan2);
    for (double s : exact.fold_scores) { CHECK(s == doctest::Approx(1.0).epsilon(1e-4)); }

    // Training rows memorised by a full tree: scoring on the training rows
    // themselves gives 1.
    const auto tree = std::get<TreeModel>(fit(TreeSpec{50, 1}, line.values, line.target));
    CHECK(r_squared(tree.predict(line.values), line.target) == 1.0);

    // Constant predictor on fixed 6-row data: each fold scores at most 0.
    FeatureMatrix six;
    six.values = Matrix(6, 1, {0, 1, 2, 3, 4, 5});
    six.target = {3, 1, 4, 2, 5, 9};
    const auto plan3 = make_folds(6, 3, 2);
    const auto dummy = cross_validate(BaselineSpec{}, six, plan3);
    for (double s : dummy.fold_scores) { CHECK(s <= 0.0); }
    // Hand-scored: predict the training mean on each held-out pair.
    for (std::size_t f = 0; f < 3; ++f) {
        const auto tr = plan3.train_rows(f);
        const auto te = plan3.test_rows(f);
        double mean = 0.0;
        for (auto r : tr) { mean += six.target[r]; }
        mean /= static_cast<double>(tr.size());
        std::vector<double> truth, pred;
        for (auto r : te) {
            truth.push_back(six.target[r]);
            pred.push_back(mean);
        }
        CHECK(dummy.fold_scores[f] == doctest::Approx(r2_oracle(pred, truth)).epsilon(1e-12));
    }
    const double hand = std::accumulate(dummy.fold_scores.begin(), dummy.fold_scores.end(), 0.0) / 3.0;
    CHECK(std::abs(dummy.mean - hand) <= 1e-12);
    CHECK(dummy.plan_hash == plan3.hash());
}

TEST_CASE("fold errors carry the fold index")
{
    FeatureMatrix m;
    m.values = Matrix(4, 1, {0, 1, 2, 3});
    m.target = {1, 1, 2, 2};
    // Leave-one-out leaves a constant held-out fold, which cannot be scored.
    try {
        cross_validate(TreeSpec{}, m, make_folds(4, 4, 0));
        FAIL("expected an undefined score");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::undefined_score);
        CHECK(std::string(e.what()).rfind("fold ", 0) == 0);
    }
}

TEST_CASE("grid search")
{
    Rng rng(32);
    const auto data = learnable(120, rng, 0.1);
    const auto plan = make_folds(120, 5, 4);

    const std::vector<RegressorSpec> single{TreeSpec{4, 1}};
    const auto one = grid_search(single, data, plan);
    CHECK(one.best_index == 0);
    CHECK_FALSE(one.tie);

    const std::vector<RegressorSpec> dominated{BaselineSpec{}, TreeSpec{20, 1}};
    const auto res = grid_search(dominated, data, plan);
    CHECK(std::holds_alternative<TreeSpec>(res.best().spec));
    for (const auto& e : res.evaluated) {
        CHECK(e.plan_hash == plan.hash());
        CHECK(res.best().mean >= e.mean);
    }

    const std::vector<RegressorSpec> same{TreeSpec{3, 1}, TreeSpec{3, 1}};
    const auto tied = grid_search(same, data, plan);
    CHECK(tied.best_index == 0);
    CHECK(tied.tie);

    CHECK(kind_of([&] { grid_search({}, data, plan); }) == ErrorKind::parameter);
    CHECK(kind_of([&] { grid_search({KnnSpec{500}}, data, plan); }) == ErrorKind::parameter);
}

TEST_CASE("grid search argmax matches recomputation, for any worker count")
{
    Rng rng(33);
    for (int trial = 0; trial < 5; ++trial) {
        const auto data = learnable(90, rng, 1.0);
        const auto plan = make_folds(90, 4, trial);
        auto grid = knn_grid({1, 3, 7}, {NeighborBackend::kd_tree, NeighborBackend::ball_tree});
        for (auto& s : tree_grid({2, 4, 8})) { grid.push_back(s); }
        const auto res = grid_search(grid, data, plan);
        std::size_t best = 0;
        double best_mean = -1e300;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto cv = cross_validate(grid[i], data, plan);
            CHECK(cv.fold_scores == res.evaluated[i].fold_scores);
            if (cv.mean > best_mean) {
                best_mean = cv.mean;
                best = i;
            }
        }
        CHECK(res.best_index == best);
        CHECK(res.best().mean == best_mean);

        const auto parallel = grid_search(grid, data, plan, 3);
        CHECK(parallel.best_index == res.best_index);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(parallel.evaluated[i].fold_scores == res.evaluated[i].fold_scores);
        }
    }
}

TEST_CASE("grids, names and exports")
{
    const auto knn = knn_grid({5, 10}, {NeighborBackend::kd_tree, NeighborBackend::ball_tree});
    CHECK(knn.size() == 4);
    CHECK(describe(knn[3]) == "k=10 backend=ball_tree");
    const auto svr = svr_grid({0.1, 1.0}, {KernelKind::linear, KernelKind::rbf});
    CHECK(svr.size() == 4);
    CHECK(describe(svr[2]) == "C=1 kernel=linear epsilon=0.1");
    CHECK(describe(tree_grid({10, 20})[1]) == "max_depth=20 min_samples_leaf=1");
    CHECK(algorithm_name(ForestSpec{}) == "forest");
    CHECK(algorithm_name(BaselineSpec{}) == "baseline");

    for (const auto& spec : std::vector<RegressorSpec>{knn[1], svr[3], TreeSpec{7, 2}, ForestSpec{}, BaselineSpec{}}) {
        CHECK(regressor_spec_from_json(Json::parse(to_json(spec).dump())) == spec);
    }

    Rng rng(34);
    const auto data = learnable(40, rng);
    const auto res = grid_search(tree_grid({1, 3}), data, make_folds(40, 4, 0));
    const auto csv = to_csv(res);
    CHECK(csv.rfind("algorithm,spec,fold_0,fold_1,fold_2,fold_3,mean,best\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
