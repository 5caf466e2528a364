#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lapse/error.hpp"
#include "lapse/neighbors.hpp"
#include "lapse/random.hpp"

using namespace lapse;

namespace {

constexpr NeighborBackend all_backends[] = {NeighborBackend::brute, NeighborBackend::kd_tree, NeighborBackend::ball_tree};

Matrix random_points(std::size_t n, std::size_t d, Rng& rng, double grid = 0.0)
{
    Matrix m(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            const double u = uniform01(rng);
            // A coarse grid forces many exact distance ties.
            m(r, c) = grid > 0.0 ? std::floor(u * grid) / grid : u;
        }
    }
    return m;
}

// Sorts every (squared distance, index) pair; no pruning involved.
std::vector<std::size_t> oracle(const Matrix& pts, std::span<const double> q, std::size_t k)
{
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t r = 0; r < pts.rows(); ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < pts.cols(); ++c) {
            const double diff = pts(r, c) - q[c];
            s += diff * diff;
        }
        all.emplace_back(s, r);
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < k; ++i) { out.push_back(all[i].second); }
    return out;
}

std::vector<std::size_t> indices(const std::vector<Neighbor>& result)
{
    std::vector<std::size_t> out;
    for (const auto& n : result) { out.push_back(n.index); }
    return out;
}

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

} // namespace

TEST_CASE("euclidean distance")
{
    const std::vector<double> a{0, 0}, b{3, 4};
    CHECK(distance(a, b) == 5.0);
    CHECK(distance(a, a) == 0.0);
    CHECK(distance(b, a) == distance(a, b));
    const std::vector<double> c{1, 2, 3};
    CHECK(kind_of([&] { distance(a, c); }) == ErrorKind::shape);

    Rng rng(1);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x(10), y(10);
        for (auto& v : x) { v = standard_normal(rng); }
        for (auto& v : y) { v = standard_normal(rng); }
        double s = 0.0;
        for (int j = 0; j < 10; ++j) { s += (x[j] - y[j]) * (x[j] - y[j]); }
        CHECK(std::abs(distance(x, y) - std::sqrt(s)) <= 1e-12);
    }
}

TEST_CASE("single point and empty input")
{
    for (auto backend : all_backends) {
        NeighborIndex index(Matrix(1, 3, {1, 2, 3}), backend);
        REQUIRE(index.nodes().size() == 1);
        CHECK(index.nodes()[0].is_leaf());
        const std::vector<double> q{1, 2, 3};
        CHECK(index.query(q, 1) == std::vector<Neighbor>{{0, 0.0}});
        CHECK(kind_of([&] { (void)index.query(q, 2); }) == ErrorKind::parameter);
        CHECK(kind_of([&] { (void)index.query(std::vector<double>{1.0}, 1); }) == ErrorKind::shape);
        CHECK(kind_of([&] { NeighborIndex(Matrix(0, 3), backend); }) == ErrorKind::empty_input);
    }
}

TEST_CASE("every point sits in exactly one leaf")
{
    Rng rng(2);
    const auto pts = random_points(1000, 10, rng);
    for (auto backend : {NeighborBackend::kd_tree, NeighborBackend::ball_tree}) {
        NeighborIndex index(pts, backend, 16);
        std::vector<int> seen(pts.rows(), 0);
        for (const auto& node : index.nodes()) {
            if (!node.is_leaf()) { continue; }
            CHECK(node.size() <= 16);
            for (auto r : index.members(node)) { ++seen[r]; }
        }
        CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    }
}

TEST_CASE("node invariants of both trees")
{
    Rng rng(3);
    const auto pts = random_points(400, 4, rng);
    NeighborIndex kd(pts, NeighborBackend::kd_tree, 8);
    for (const auto& node : kd.nodes()) {
        if (node.is_leaf()) { continue; }
        const auto& l = kd.nodes()[static_cast<std::size_t>(node.left)];
        const auto& r = kd.nodes()[static_cast<std::size_t>(node.right)];
        for (auto i : kd.members(l)) { CHECK(pts(i, node.split_axis) <= node.split_value); }
        for (auto i : kd.members(r)) { CHECK(pts(i, node.split_axis) >= node.split_value); }
    }
    NeighborIndex ball(pts, NeighborBackend::ball_tree, 8);
    for (std::size_t n = 0; n < ball.nodes().size(); ++n) {
        const auto& node = ball.nodes()[n];
        for (auto i : ball.members(node)) { CHECK(distance(pts.row(i), ball.centroid(n)) <= node.radius + 1e-9); }
    }
    CHECK_FALSE(kd.dump().empty());
    CHECK_FALSE(ball.dump().empty());
}

TEST_CASE("duplicate points build and query")
{
    Matrix pts(50, 2);
    for (std::size_t r = 0; r < 50; ++r) {
        pts(r, 0) = 0.5;
        pts(r, 1) = r < 25 ? 0.5 : 0.25;
    }
    for (auto backend : all_backends) {
        NeighborIndex index(pts, backend, 4);
        const std::vector<double> q{0.5, 0.5};
        const auto got = index.query(q, 30);
        CHECK(indices(got) == oracle(pts, q, 30));
    }
}

TEST_CASE("backends agree with exhaustive sorting")
{
    Rng rng(4);
    for (double grid : {0.0, 4.0}) {
        const auto pts = random_points(500, 10, rng, grid);
        for (auto backend : all_backends) {
            NeighborIndex index(pts, backend, 10);
            for (int q = 0; q < 30; ++q) {
                const auto query = random_points(1, 10, rng, grid);
                for (std::size_t k : {1, 5, 10}) {
                    const auto got = index.query(query.row(0), k);
                    CHECK(indices(got) == oracle(pts, query.row(0), k));
                    CHECK(std::is_sorted(got.begin(), got.end(),
                                         [](const Neighbor& a, const Neighbor& b) { return a.distance < b.distance; }));
                }
            }
        }
    }
}

TEST_CASE("k = n returns everything in ascending order; self match at distance 0")
{
    Rng rng(5);
    const auto pts = random_points(60, 3, rng);
    for (auto backend : all_backends) {
        NeighborIndex index(pts, backend, 5);
        const auto all = index.query(pts.row(7), 60);
        CHECK(all.size() == 60);
        CHECK(all.front() == Neighbor{7, 0.0});
        for (std::size_t i = 1; i < all.size(); ++i) { CHECK(all[i - 1].distance <= all[i].distance); }
    }
}

TEST_CASE("knn regression")
{
    Rng rng(6);
    const auto pts = random_points(80, 3, rng);
    std::vector<double> y(80);
    for (auto& v : y) { v = standard_normal(rng) * 5.0; }

    KnnModel one({1, NeighborBackend::kd_tree, 8}, pts, y);
    for (std::size_t r = 0; r < 80; ++r) { CHECK(one.predict_one(pts.row(r)) == y[r]); }

    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 80.0;
    KnnModel all({80, NeighborBackend::ball_tree, 8}, pts, y);
    CHECK(all.predict_one(pts.row(3)) == doctest::Approx(mean).epsilon(1e-12));

    const auto queries = random_points(40, 3, rng);
    const auto brute = knn_fit_predict({10, NeighborBackend::brute, 30}, pts, y, queries);
    CHECK(knn_fit_predict({10, NeighborBackend::ball_tree, 30}, pts, y, queries) == brute);
    CHECK(knn_fit_predict({10, NeighborBackend::kd_tree, 30}, pts, y, queries) == brute);
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    for (double p : brute) {
        CHECK(p >= *lo);
        CHECK(p <= *hi);
    }

    // Hand average of the oracle neighbours.
    const auto nn = oracle(pts, queries.row(0), 10);
    double s = 0.0;
    for (auto i : nn) { s += y[i]; }
    CHECK(brute[0] == doctest::Approx(s / 10.0).epsilon(1e-12));

    CHECK(kind_of([&] { KnnModel({81, NeighborBackend::brute, 8}, pts, y); }) == ErrorKind::parameter);
    CHECK(kind_of([&] { KnnModel({0, NeighborBackend::brute, 8}, pts, y); }) == ErrorKind::parameter);
}

TEST_CASE("backend names")
{
    for (auto b : all_backends) { CHECK(parse_backend(to_string(b)) == b); }
    CHECK(kind_of([] { parse_backend("octree"); }) == ErrorKind::parameter);
}
