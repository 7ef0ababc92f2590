#include "socfno/forest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>

namespace socfno {

std::string to_string(SplitCriterion c) { return c == SplitCriterion::Variance ? "variance" : "mae"; }

SplitCriterion parse_split_criterion(const std::string& name) {
    if (name == "variance" || name == "mse") return SplitCriterion::Variance;
    if (name == "mae" || name == "absolute") return SplitCriterion::AbsoluteError;
    throw InvalidArgument("unknown split criterion '" + name + "' (expected variance|mae)");
}

void ForestConfig::validate() const {
    if (n_trees < 1) throw InvalidArgument("ForestConfig: n_trees must be at least 1");
    if (max_depth < 1) throw InvalidArgument("ForestConfig: max_depth must be at least 1");
    if (min_samples_leaf < 1) throw InvalidArgument("ForestConfig: min_samples_leaf must be at least 1");
    if (max_pixels < 2 * min_samples_leaf) throw InvalidArgument("ForestConfig: max_pixels is too small");
}

nlohmann::json to_json(const ForestConfig& cfg) {
    return {{"n_trees", cfg.n_trees},
            {"max_depth", cfg.max_depth},
            {"min_samples_leaf", cfg.min_samples_leaf},
            {"features_per_split", cfg.features_per_split},
            {"bootstrap", cfg.bootstrap},
            {"seed", cfg.seed},
            {"criterion", to_string(cfg.criterion)},
            {"max_pixels", cfg.max_pixels}};
}

ForestConfig forest_config_from_json(const nlohmann::json& j) {
    ForestConfig cfg;
    cfg.n_trees = j.value("n_trees", cfg.n_trees);
    cfg.max_depth = j.value("max_depth", cfg.max_depth);
    cfg.min_samples_leaf = j.value("min_samples_leaf", cfg.min_samples_leaf);
    cfg.features_per_split = j.value("features_per_split", cfg.features_per_split);
    cfg.bootstrap = j.value("bootstrap", cfg.bootstrap);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.criterion = parse_split_criterion(j.value("criterion", to_string(cfg.criterion)));
    cfg.max_pixels = j.value("max_pixels", cfg.max_pixels);
    cfg.validate();
    return cfg;
}

void PixelTable::push(std::span<const double> row, double target) {
    if (features == 0) features = row.size();
    if (row.size() != features) throw InvalidArgument("PixelTable: row width mismatch");
    x.insert(x.end(), row.begin(), row.end());
    y.push_back(target);
}

PixelTable pixels_from_rasters(const std::vector<Tensor>& inputs, const std::vector<Tensor>& targets) {
    if (inputs.size() != targets.size()) throw InvalidArgument("pixels_from_rasters: input/target count mismatch");
    PixelTable table;
    std::vector<double> row;
    for (std::size_t r = 0; r < inputs.size(); ++r) {
        const Tensor& in = inputs[r];
        if (in.rank() != 3 || targets[r].size() != in.dim(1) * in.dim(2))
            throw InvalidArgument("pixels_from_rasters: raster " + std::to_string(r) + " has inconsistent shape");
        const std::size_t plane = in.dim(1) * in.dim(2);
        row.resize(in.dim(0));
        for (std::size_t p = 0; p < plane; ++p) {
            for (std::size_t c = 0; c < in.dim(0); ++c) row[c] = in.channel(c)[p];
            table.push(row, targets[r][p]);
        }
    }
    return table;
}

double RegressionTree::predict(std::span<const double> features) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf())
        i = features[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return nodes[i].value;
}

std::size_t RegressionTree::depth() const {
    std::function<std::size_t(std::size_t)> rec = [&](std::size_t i) -> std::size_t {
        if (nodes[i].is_leaf()) return 0;
        return 1 + std::max(rec(nodes[i].left), rec(nodes[i].right));
    };
    return nodes.empty() ? 0 : rec(0);
}

namespace {

// Incremental mean: reproduces a constant sequence exactly.
double running_mean(std::span<const double> values) {
    double mean = 0.0;
    std::size_t k = 0;
    for (double v : values) mean += (v - mean) / static_cast<double>(++k);
    return mean;
}

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
    const double upper = v[n / 2];
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2));
    return lower + 0.5 * (upper - lower);
}

// Running sum of absolute deviations from the median, via two heaps.
class RunningAbsDev {
public:
    void push(double v) {
        if (low_.empty() || v <= low_.top()) {
            low_.push(v);
            low_sum_ += v;
        } else {
            high_.push(v);
            high_sum_ += v;
        }
        if (low_.size() > high_.size() + 1) {
            const double t = low_.top();
            low_.pop();
            low_sum_ -= t;
            high_.push(t);
            high_sum_ += t;
        } else if (high_.size() > low_.size()) {
            const double t = high_.top();
            high_.pop();
            high_sum_ -= t;
            low_.push(t);
            low_sum_ += t;
        }
    }
    double value() const {
        const double m = low_.top();
        return (m * static_cast<double>(low_.size()) - low_sum_) + (high_sum_ - m * static_cast<double>(high_.size()));
    }

private:
    std::priority_queue<double> low_;
    std::priority_queue<double, std::vector<double>, std::greater<>> high_;
    double low_sum_ = 0.0;
    double high_sum_ = 0.0;
};

}  // namespace

SplitChoice best_split(const PixelTable& table, std::span<const std::size_t> rows,
                       std::span<const std::size_t> features, std::size_t min_samples_leaf,
                       SplitCriterion criterion) {
    SplitChoice best;
    const std::size_t n = rows.size();
    if (n < 2 * min_samples_leaf || n < 2) return best;

    double centre = 0.0;
    if (criterion == SplitCriterion::Variance) {
        std::vector<double> ys(n);
        for (std::size_t i = 0; i < n; ++i) ys[i] = table.y[rows[i]];
        centre = running_mean(ys);
    }

    std::vector<std::size_t> order(n);
    std::vector<double> left_cost(n), right_cost(n);
    for (std::size_t f : features) {
        for (std::size_t i = 0; i < n; ++i) order[i] = rows[i];
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return table.at(a, f) < table.at(b, f); });

        if (criterion == SplitCriterion::Variance) {
            double s = 0.0, q = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = table.y[order[i]] - centre;
                s += d;
                q += d * d;
                left_cost[i] = q - s * s / static_cast<double>(i + 1);
            }
            s = 0.0;
            q = 0.0;
            for (std::size_t i = n; i-- > 0;) {
                const double d = table.y[order[i]] - centre;
                s += d;
                q += d * d;
                right_cost[i] = q - s * s / static_cast<double>(n - i);
            }
        } else {
            RunningAbsDev fwd, bwd;
            for (std::size_t i = 0; i < n; ++i) {
                fwd.push(table.y[order[i]]);
                left_cost[i] = fwd.value();
            }
            for (std::size_t i = n; i-- > 0;) {
                bwd.push(table.y[order[i]]);
                right_cost[i] = bwd.value();
            }
        }

        // Left child = order[0..i], right child = order[i+1..n).
        for (std::size_t i = min_samples_leaf - 1; i + min_samples_leaf < n; ++i) {
            const double a = table.at(order[i], f), b = table.at(order[i + 1], f);
            if (!(a < b)) continue;
            const double cost = left_cost[i] + right_cost[i + 1];
            if (!best.found || cost < best.cost) {
                double mid = a + 0.5 * (b - a);
                if (!(mid < b)) mid = a;
                best = {true, f, mid, cost};
            }
        }
    }
    return best;
}

std::uint64_t tree_seed(std::uint64_t forest_seed, std::size_t tree) { return mix_seed(forest_seed, 0x7700 + tree); }

std::vector<std::size_t> tree_rows(const ForestConfig& cfg, std::size_t n, std::size_t tree) {
    std::vector<std::size_t> rows(n);
    if (!cfg.bootstrap) {
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        return rows;
    }
    std::mt19937_64 rng(tree_seed(cfg.seed, tree));
    for (auto& r : rows) r = uniform_index(rng, n);
    return rows;
}

namespace {

class TreeBuilder {
public:
    TreeBuilder(const PixelTable& table, const ForestConfig& cfg, std::uint64_t seed)
        : table_(table), cfg_(cfg), rng_(mix_seed(seed, 1)) {}

    RegressionTree build(std::vector<std::size_t> rows) {
        RegressionTree tree;
        grow(tree, std::move(rows), 0);
        return tree;
    }

private:
    double leaf_value(const std::vector<std::size_t>& rows) const {
        std::vector<double> ys(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) ys[i] = table_.y[rows[i]];
        return cfg_.criterion == SplitCriterion::Variance ? running_mean(ys) : median_of(std::move(ys));
    }

    std::vector<std::size_t> candidate_features() {
        std::vector<std::size_t> all(table_.features);
        std::iota(all.begin(), all.end(), std::size_t{0});
        const std::size_t k = cfg_.features_per_split;
        if (k == 0 || k >= all.size()) return all;
        for (std::size_t i = 0; i < k; ++i) std::swap(all[i], all[i + uniform_index(rng_, all.size() - i)]);
        all.resize(k);
        std::sort(all.begin(), all.end());
        return all;
    }

    std::size_t grow(RegressionTree& tree, std::vector<std::size_t> rows, std::size_t depth) {
        const std::size_t index = tree.nodes.size();
        tree.nodes.push_back({});
        tree.nodes[index].value = leaf_value(rows);
        tree.nodes[index].samples = rows.size();

        const double first = table_.y[rows.front()];
        const bool pure = std::all_of(rows.begin(), rows.end(), [&](std::size_t r) { return table_.y[r] == first; });
        if (pure || depth >= cfg_.max_depth || rows.size() < 2 * cfg_.min_samples_leaf) return index;

        const auto features = candidate_features();
        const SplitChoice split = best_split(table_, rows, features, cfg_.min_samples_leaf, cfg_.criterion);
        if (!split.found) return index;

        std::vector<std::size_t> left, right;
        for (std::size_t r : rows) (table_.at(r, split.feature) <= split.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        tree.nodes[index].feature = static_cast<int>(split.feature);
        tree.nodes[index].threshold = split.threshold;
        const std::size_t l = grow(tree, std::move(left), depth + 1);
        const std::size_t r = grow(tree, std::move(right), depth + 1);
        tree.nodes[index].left = l;
        tree.nodes[index].right = r;
        return index;
    }

    const PixelTable& table_;
    const ForestConfig& cfg_;
    std::mt19937_64 rng_;
};

}  // namespace

RegressionTree fit_tree(const PixelTable& table, std::vector<std::size_t> rows, const ForestConfig& cfg,
                        std::uint64_t seed) {
    if (rows.empty()) throw InvalidArgument("fit_tree: no samples");
    return TreeBuilder(table, cfg, seed).build(std::move(rows));
}

Forest fit_forest(const PixelTable& table, const ForestConfig& cfg) {
    cfg.validate();
    if (table.rows() < 2 * cfg.min_samples_leaf)
        throw InvalidArgument("fit_forest: need at least " + std::to_string(2 * cfg.min_samples_leaf) +
                              " samples, got " + std::to_string(table.rows()));
    std::vector<std::size_t> base(table.rows());
    std::iota(base.begin(), base.end(), std::size_t{0});
    if (base.size() > cfg.max_pixels) {
        std::mt19937_64 rng(mix_seed(cfg.seed, 0x5ab));
        shuffle(base, rng);
        base.resize(cfg.max_pixels);
        std::sort(base.begin(), base.end());
    }

    Forest forest;
    forest.config = cfg;
    forest.features = table.features;
    for (std::size_t t = 0; t < cfg.n_trees; ++t) {
        std::vector<std::size_t> rows = tree_rows(cfg, base.size(), t);
        for (auto& r : rows) r = base[r];
        forest.trees.push_back(fit_tree(table, std::move(rows), cfg, tree_seed(cfg.seed, t)));
    }
    return forest;
}

double Forest::predict(std::span<const double> x) const {
    double mean = 0.0;
    std::size_t k = 0;
    for (const auto& tree : trees) mean += (tree.predict(x) - mean) / static_cast<double>(++k);
    return mean;
}

Tensor predict_forest(const Forest& forest, const Tensor& raster) {
    if (raster.rank() != 3 || raster.dim(0) != forest.features)
        throw InvalidArgument("predict_forest: expected [" + std::to_string(forest.features) + ",H,W] raster, got " +
                              shape_string(raster.shape()));
    const std::size_t plane = raster.dim(1) * raster.dim(2);
    Tensor out({1, raster.dim(1), raster.dim(2)});
    std::vector<double> row(forest.features);
    for (std::size_t p = 0; p < plane; ++p) {
        for (std::size_t c = 0; c < forest.features; ++c) row[c] = raster.channel(c)[p];
        out[p] = forest.predict(row);
    }
    return out;
}

nlohmann::json to_json(const Forest& forest) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : forest.trees) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& node : tree.nodes)
            nodes.push_back({{"feature", node.feature},
                             {"threshold", node.threshold},
                             {"value", node.value},
                             {"samples", node.samples}});
        trees.push_back(std::move(nodes));
    }
    return {{"kind", "forest"},
            {"version", 1},
            {"layout", "pre-order; an internal node is followed by its left subtree, then its right subtree"},
            {"features", forest.features},
            {"config", to_json(forest.config)},
            {"trees", std::move(trees)}};
}

Forest forest_from_json(const nlohmann::json& j) {
    try {
        if (j.at("kind").get<std::string>() != "forest") throw InvalidArgument("checkpoint is not a forest");
        Forest forest;
        forest.features = j.at("features").get<std::size_t>();
        forest.config = forest_config_from_json(j.at("config"));
        for (const auto& nodes : j.at("trees")) {
            RegressionTree tree;
            for (const auto& n : nodes) {
                TreeNode node;
                node.feature = n.at("feature").get<int>();
                node.threshold = n.at("threshold").get<double>();
                node.value = n.at("value").get<double>();
                node.samples = n.value("samples", std::size_t{0});
                if (node.feature >= static_cast<int>(forest.features))
                    throw InvalidArgument("forest checkpoint: feature index out of range");
                tree.nodes.push_back(node);
            }
            // Rebuild child links from the pre-order layout.
            std::size_t next = 0;
            std::function<std::size_t()> link = [&]() -> std::size_t {
                if (next >= tree.nodes.size()) throw InvalidArgument("forest checkpoint: truncated tree");
                const std::size_t i = next++;
                if (!tree.nodes[i].is_leaf()) {
                    tree.nodes[i].left = link();
                    tree.nodes[i].right = link();
                }
                return i;
            };
            link();
            if (next != tree.nodes.size()) throw InvalidArgument("forest checkpoint: trailing nodes in tree");
            forest.trees.push_back(std::move(tree));
        }
        if (forest.trees.empty()) throw InvalidArgument("forest checkpoint has no trees");
        return forest;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed forest checkpoint: ") + e.what());
    }
}

}  // namespace socfno
