#include "itele/ml/forest.hpp"

#include <algorithm>
#include <memory>

namespace itele::ml {

ForestModel train_forest(const Dataset& data, const ForestParams& params, uint64_t seed) {
    if (data.instances.empty())
        throw EmptyDataset();
    if (params.n_trees < 1)
        throw DataError("n_trees must be >= 1");
    if (params.attrs_per_split < 1 || params.attrs_per_split > static_cast<int>(kAttributeCount))
        throw DataError("attrs_per_split must be in [1, " + std::to_string(kAttributeCount) + "]");

    ForestModel model;
    model.class_names = data.class_names;
    model.attribute_names = data.attribute_names;
    model.params = params;
    model.seed = seed;
    model.trees.reserve(params.n_trees);

    size_t n = data.size();
    for (int t = 0; t < params.n_trees; ++t) {
        Rng rng = Rng::derive(seed, static_cast<uint64_t>(t));
        std::vector<detail::Item> items;
        if (params.bootstrap) {
            // Multiplicity of each bootstrap draw becomes the item weight.
            std::vector<uint32_t> count(n, 0);
            for (size_t i = 0; i < n; ++i)
                count[rng.uniform_int(n)] += 1;
            for (size_t i = 0; i < n; ++i)
                if (count[i])
                    items.push_back({i, static_cast<double>(count[i])});
        } else {
            items.reserve(n);
            for (size_t i = 0; i < n; ++i)
                items.push_back({i, 1.0});
        }
        TreeModel tree;
        tree.class_names = data.class_names;
        tree.attribute_names = data.attribute_names;
        tree.params = {params.min_leaf, params.max_depth};
        tree.nodes = detail::build_tree(data, std::move(items), params.min_leaf, params.max_depth,
                                        params.attrs_per_split, &rng);
        model.trees.push_back(std::move(tree));
    }
    return model;
}

Prediction ForestModel::predict(const AttributeVector& attrs) const {
    Prediction p;
    p.scores.assign(class_names.size(), 0.0);
    for (const TreeModel& tree : trees)
        p.scores[tree.predict(attrs).class_index] += 1.0;
    for (double& s : p.scores)
        s /= static_cast<double>(trees.size());
    p.class_index = 0;
    for (size_t c = 1; c < p.scores.size(); ++c)
        if (p.scores[c] > p.scores[p.class_index])
            p.class_index = static_cast<int>(c);
    return p;
}

Predictor ForestModel::predictor() const {
    auto shared = std::make_shared<ForestModel>(*this);
    return [shared](const AttributeVector& a) { return shared->predict(a); };
}

}  // namespace itele::ml
