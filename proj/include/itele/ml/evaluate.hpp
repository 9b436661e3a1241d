#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "itele/ml/dataset.hpp"
#include "itele/ml/forest.hpp"
#include "itele/ml/mlp.hpp"
#include "itele/ml/tree.hpp"

namespace itele::ml {

struct ConfusionMatrix {
    std::vector<std::string> class_names;
    std::vector<std::vector<uint64_t>> counts;  // [truth][prediction]

    explicit ConfusionMatrix(std::vector<std::string> names = {});
    void add(int truth, int prediction) { counts[truth][prediction] += 1; }
    uint64_t total() const;
    uint64_t correct() const;
    double accuracy() const;
    std::string to_string() const;  // row = truth, column = prediction
};

/// Stratified fold assignment: per-class shuffle then round-robin deal, so
/// per-class fold sizes differ by at most one. fold[i] is instance i's fold.
std::vector<int> stratified_fold_assignment(const Dataset& data, int k, uint64_t seed);

/// Pooled k-fold confusion matrix and its accuracy. Fold f's trainer runs
/// with seed + 1 + f; the fold split itself uses seed.
std::pair<ConfusionMatrix, double> cross_validate(const Dataset& data, const Trainer& trainer,
                                                  int k = 10, uint64_t seed = 1);

struct MeritEntry {
    std::string attribute;
    double merit;  // bits
};

/// Single-threshold information gain per attribute, averaged over the k
/// folds' training portions, ranked descending. Missing values are excluded
/// from their attribute's computation (weights renormalize over the rest).
std::vector<MeritEntry> info_gain_merit(const Dataset& data, int k = 10, uint64_t seed = 1);

using ParamList = std::vector<std::pair<std::string, double>>;

struct GridPoint {
    ParamList params;
    double accuracy{0.0};
};

/// Builds a trainer for "tree", "forest", or "mlp"; unknown keys in params
/// are rejected, absent keys take the module defaults.
Trainer make_trainer(const std::string& algorithm, const ParamList& params);

TreeParams tree_params(const ParamList& params);
ForestParams forest_params(const ParamList& params);
MlpParams mlp_params(const ParamList& params);

/// cross_validate per grid point (same seed, so every point sees identical
/// folds); result ranked by accuracy descending, grid order on ties.
std::vector<GridPoint> tune_grid(const Dataset& data, const std::string& algorithm,
                                 const std::vector<ParamList>& grid, int k = 10,
                                 uint64_t seed = 1);

std::string format_grid_report(const std::vector<GridPoint>& points);

}  // namespace itele::ml
