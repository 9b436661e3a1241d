#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "itele/ml/dataset.hpp"
#include "itele/rng.hpp"

namespace itele::ml {

/// Binary split node. attr < 0 marks a leaf. `dist` is the training class
/// weight reaching the node; `left_fraction` is the known-value weight share
/// that went left, used to route instances whose split attribute is missing.
struct TreeNode {
    int attr{-1};
    double threshold{0.0};
    int left{-1};
    int right{-1};
    double left_fraction{0.5};
    std::vector<double> dist;

    bool is_leaf() const { return attr < 0; }
};

struct TreeParams {
    int min_leaf{2};
    int max_depth{0};  // 0 = unbounded
};

struct TreeModel {
    std::vector<std::string> class_names;
    std::vector<std::string> attribute_names;
    TreeParams params;
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    Prediction predict(const AttributeVector& attrs) const;
    Predictor predictor() const;
    size_t leaf_count() const;
    int depth() const;
};

/// Top-down induction with gain-ratio splits on midpoint thresholds.
/// Instances missing the split attribute descend both branches with weight
/// split by the known-value fractions. The result is deterministic; the seed
/// parameter exists for trainer-signature uniformity and is unused.
TreeModel train_tree(const Dataset& data, const TreeParams& params, uint64_t seed = 0);

namespace detail {

/// Weighted training item: instance index plus accumulated weight.
struct Item {
    size_t index;
    double weight;
};

/// Shared builder. When rng is non-null each node's candidate attributes are
/// a uniform random subset of size attrs_per_split; otherwise all attributes
/// compete.
std::vector<TreeNode> build_tree(const Dataset& data, std::vector<Item> items, int min_leaf,
                                 int max_depth, int attrs_per_split, Rng* rng);

}  // namespace detail

}  // namespace itele::ml
