#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "itele/ml/tree.hpp"

namespace itele::ml {

struct ForestParams {
    int n_trees{100};
    int max_depth{0};  // 0 = unbounded
    int attrs_per_split{3};
    int min_leaf{1};
    bool bootstrap{true};
};

/// Bagged trees with per-node attribute subsampling. Tree t consumes the
/// generator derived as seed + t; prediction is majority vote over tree
/// verdicts with ties broken by class order.
struct ForestModel {
    std::vector<std::string> class_names;
    std::vector<std::string> attribute_names;
    ForestParams params;
    uint64_t seed{0};
    std::vector<TreeModel> trees;

    Prediction predict(const AttributeVector& attrs) const;
    Predictor predictor() const;
};

ForestModel train_forest(const Dataset& data, const ForestParams& params, uint64_t seed);

}  // namespace itele::ml
