#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "socfno/tensor.hpp"

namespace socfno {

enum class SplitCriterion { Variance, AbsoluteError };

std::string to_string(SplitCriterion c);
SplitCriterion parse_split_criterion(const std::string& name);

struct ForestConfig {
    std::size_t n_trees = 10;
    std::size_t max_depth = 10;  // root is depth 0
    std::size_t min_samples_leaf = 5;
    std::size_t features_per_split = 0;  // 0 = all features
    bool bootstrap = true;
    std::uint64_t seed = 0;
    // AbsoluteError splits on the summed absolute deviation and uses median leaves.
    SplitCriterion criterion = SplitCriterion::Variance;
    std::size_t max_pixels = 2'000'000;

    void validate() const;
};

nlohmann::json to_json(const ForestConfig& cfg);
ForestConfig forest_config_from_json(const nlohmann::json& j);

/// Row-major [n, features] matrix with one target per row.
struct PixelTable {
    std::size_t features = 0;
    std::vector<double> x;
    std::vector<double> y;

    std::size_t rows() const { return y.size(); }
    double at(std::size_t row, std::size_t f) const { return x[row * features + f]; }
    void push(std::span<const double> row, double target);
};

/// Every pixel of each [C,H,W] raster as one row; targets are [1,H,W].
PixelTable pixels_from_rasters(const std::vector<Tensor>& inputs, const std::vector<Tensor>& targets);

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // go left when x[feature] <= threshold
    double value = 0.0;
    std::size_t samples = 0;
    std::size_t left = 0;
    std::size_t right = 0;

    bool is_leaf() const { return feature < 0; }
};

/// Nodes in pre-order; node 0 is the root.
struct RegressionTree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> features) const;
    std::size_t depth() const;
};

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double cost = 0.0;  // impurity of the two children
};

/// Greedy best split over the given features for rows[], scanning features in
/// the listed order and thresholds ascending; the first strictly better
/// candidate wins.
SplitChoice best_split(const PixelTable& table, std::span<const std::size_t> rows,
                       std::span<const std::size_t> features, std::size_t min_samples_leaf,
                       SplitCriterion criterion);

struct Forest {
    ForestConfig config;
    std::size_t features = 0;
    std::vector<RegressionTree> trees;

    double predict(std::span<const double> features) const;
};

/// Seed of tree t.
std::uint64_t tree_seed(std::uint64_t forest_seed, std::size_t tree);
/// Row indices tree t is fit on (bootstrap resample or identity).
std::vector<std::size_t> tree_rows(const ForestConfig& cfg, std::size_t n, std::size_t tree);

RegressionTree fit_tree(const PixelTable& table, std::vector<std::size_t> rows, const ForestConfig& cfg,
                        std::uint64_t seed);
Forest fit_forest(const PixelTable& table, const ForestConfig& cfg);

/// Independent per-pixel prediction of a [C,H,W] raster -> [1,H,W].
Tensor predict_forest(const Forest& forest, const Tensor& raster);

nlohmann::json to_json(const Forest& forest);
Forest forest_from_json(const nlohmann::json& j);

}  // namespace socfno
