#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "socfno/forest.hpp"

using namespace socfno;

namespace {

PixelTable random_table(std::size_t n, std::size_t f, std::mt19937_64& rng) {
    PixelTable t;
    t.features = f;
    std::vector<double> row(f);
    for (std::size_t i = 0; i < n; ++i) {
        for (double& v : row) v = uniform01(rng);
        t.push(row, 3.0 * row[0] - 2.0 * row[f - 1] * row[1] + 0.3 * standard_normal(rng));
    }
    return t;
}

oracle::Split oracle_split(const PixelTable& t, std::span<const std::size_t> rows, std::size_t min_leaf) {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (std::size_t r : rows) {
        x.emplace_back(t.x.begin() + static_cast<std::ptrdiff_t>(r * t.features),
                       t.x.begin() + static_cast<std::ptrdiff_t>((r + 1) * t.features));
        y.push_back(t.y[r]);
    }
    return oracle::exhaustive_split(x, y, min_leaf);
}

double tree_mean(const Forest& f, std::span<const double> row) {
    double s = 0.0;
    for (const auto& t : f.trees) {
        std::size_t n = 0;
        while (!t.nodes[n].is_leaf())
            n = row[static_cast<std::size_t>(t.nodes[n].feature)] <= t.nodes[n].threshold ? t.nodes[n].left
                                                                                          : t.nodes[n].right;
        s += t.nodes[n].value;
    }
    return s / static_cast<double>(f.trees.size());
}

}  // namespace

TEST_CASE("constant target is reproduced exactly") {
    std::mt19937_64 rng(1);
    PixelTable t = random_table(100, 6, rng);
    for (double& y : t.y) y = 4.2;
    ForestConfig cfg;
    cfg.n_trees = 3;
    const Forest f = fit_forest(t, cfg);
    for (const auto& tree : f.trees) CHECK(tree.nodes.size() == 1);
    for (std::size_t r = 0; r < t.rows(); ++r)
        CHECK(f.predict(std::span<const double>(t.x).subspan(r * 6, 6)) == 4.2);
}

TEST_CASE("step data gives an exact stump") {
    PixelTable t;
    t.features = 1;
    std::mt19937_64 rng(2);
    for (int i = 0; i < 40; ++i) {
        const double x = i < 20 ? uniform(rng, -2.0, -1.0) : uniform(rng, 1.0, 2.0);
        const double row[] = {x};
        t.push(row, x > 0 ? 1.0 : 0.0);
    }
    ForestConfig cfg;
    cfg.n_trees = 1;
    cfg.max_depth = 1;
    cfg.bootstrap = false;
    const Forest f = fit_forest(t, cfg);
    REQUIRE(f.trees[0].nodes.size() == 3);
    const double thr = f.trees[0].nodes[0].threshold;
    CHECK(thr > -1.0);
    CHECK(thr < 1.0);
    for (std::size_t r = 0; r < t.rows(); ++r) CHECK(f.predict(std::span<const double>(&t.x[r], 1)) == t.y[r]);
}

TEST_CASE("best split matches the exhaustive oracle") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 50 + uniform_index(rng, 450);
        PixelTable t = random_table(n, 6, rng);
        // Quantize some features so ties and repeated values appear.
        for (std::size_t r = 0; r < n; ++r) t.x[r * 6 + 2] = std::round(t.x[r * 6 + 2] * 4.0);
        std::vector<std::size_t> rows(n), feats(6);
        std::iota(rows.begin(), rows.end(), 0);
        std::iota(feats.begin(), feats.end(), 0);
        const std::size_t min_leaf = 1 + uniform_index(rng, 10);
        const SplitChoice got = best_split(t, rows, feats, min_leaf, SplitCriterion::Variance);
        const oracle::Split want = oracle_split(t, rows, min_leaf);
        REQUIRE(got.found == want.found);
        CHECK(got.feature == want.feature);
        CHECK(std::abs(got.threshold - want.threshold) < 1e-12);
    }
}

TEST_CASE("root of every tree matches the oracle on its bootstrap rows") {
    std::mt19937_64 rng(4);
    const PixelTable t = random_table(200, 6, rng);
    ForestConfig cfg;
    cfg.n_trees = 5;
    cfg.seed = 11;
    const Forest f = fit_forest(t, cfg);
    for (std::size_t k = 0; k < cfg.n_trees; ++k) {
        const auto rows = tree_rows(cfg, t.rows(), k);
        const oracle::Split want = oracle_split(t, rows, cfg.min_samples_leaf);
        const TreeNode& root = f.trees[k].nodes[0];
        REQUIRE(want.found);
        CHECK(static_cast<std::size_t>(root.feature) == want.feature);
        CHECK(std::abs(root.threshold - want.threshold) < 1e-12);
    }
}

TEST_CASE("tree structure respects depth and leaf size") {
    std::mt19937_64 rng(5);
    const PixelTable t = random_table(400, 6, rng);
    ForestConfig cfg;
    cfg.n_trees = 2;
    cfg.max_depth = 4;
    cfg.min_samples_leaf = 7;
    const Forest f = fit_forest(t, cfg);
    for (const auto& tree : f.trees) {
        CHECK(tree.depth() <= 4);
        for (const auto& n : tree.nodes)
            if (n.is_leaf()) CHECK(n.samples >= 7);
    }
}

TEST_CASE("raster predictions equal per-pixel traversal and ignore pixel order") {
    std::mt19937_64 rng(6);
    const PixelTable t = random_table(300, 6, rng);
    ForestConfig cfg;
    cfg.n_trees = 4;
    const Forest f = fit_forest(t, cfg);

    const Tensor raster = Tensor::uniform({6, 7, 9}, 0.0, 1.0, rng);
    const Tensor pred = predict_forest(f, raster);
    REQUIRE(pred.shape() == Shape{1, 7, 9});
    std::vector<double> row(6);
    for (std::size_t p = 0; p < 63; ++p) {
        for (std::size_t c = 0; c < 6; ++c) row[c] = raster.channel(c)[p];
        CHECK(std::abs(pred[p] - tree_mean(f, row)) < 1e-12);
    }

    std::vector<std::size_t> perm(63);
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(perm, rng);
    Tensor shuffled({6, 7, 9});
    for (std::size_t c = 0; c < 6; ++c)
        for (std::size_t p = 0; p < 63; ++p) shuffled.channel(c)[p] = raster.channel(c)[perm[p]];
    const Tensor sp = predict_forest(f, shuffled);
    for (std::size_t p = 0; p < 63; ++p) CHECK(sp[p] == pred[perm[p]]);

    const Tensor flat = predict_forest(f, Tensor({6, 4, 4}, 0.3));
    for (double v : flat.values()) CHECK(v == flat[0]);
}

TEST_CASE("fitting is seeded") {
    std::mt19937_64 rng(7);
    const PixelTable t = random_table(150, 6, rng);
    ForestConfig cfg;
    cfg.n_trees = 3;
    cfg.features_per_split = 3;
    cfg.seed = 4;
    const Forest a = fit_forest(t, cfg), b = fit_forest(t, cfg);
    CHECK(to_json(a) == to_json(b));
    cfg.seed = 5;
    CHECK_FALSE(to_json(fit_forest(t, cfg)) == to_json(a));
}

TEST_CASE("absolute-error criterion uses median leaves") {
    PixelTable t;
    t.features = 1;
    for (double y : {1.0, 2.0, 100.0}) {
        const double row[] = {0.0};
        t.push(row, y);
    }
    ForestConfig cfg;
    cfg.n_trees = 1;
    cfg.bootstrap = false;
    cfg.min_samples_leaf = 1;
    cfg.criterion = SplitCriterion::AbsoluteError;
    const Forest f = fit_forest(t, cfg);
    const double row[] = {0.0};
    CHECK(f.predict(row) == 2.0);
}

TEST_CASE("forest JSON round trip predicts identically") {
    std::mt19937_64 rng(8);
    const PixelTable t = random_table(200, 6, rng);
    ForestConfig cfg;
    cfg.n_trees = 3;
    const Forest f = fit_forest(t, cfg);
    const Forest back = forest_from_json(to_json(f));
    const Tensor raster = Tensor::uniform({6, 5, 5}, 0.0, 1.0, rng);
    CHECK(predict_forest(back, raster) == predict_forest(f, raster));
}

TEST_CASE("invalid forest settings") {
    ForestConfig cfg;
    cfg.n_trees = 0;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    PixelTable tiny;
    tiny.features = 1;
    const double row[] = {1.0};
    tiny.push(row, 1.0);
    CHECK_THROWS_AS(fit_forest(tiny, ForestConfig{}), InvalidArgument);
    CHECK_THROWS_AS(parse_split_criterion("gini"), InvalidArgument);
}
