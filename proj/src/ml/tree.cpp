#include "itele/ml/tree.hpp"

#include <algorithm>
#include <cmath>

namespace itele::ml {

namespace {

constexpr double kEps = 1e-12;

double entropy(const std::vector<double>& weights, double total) {
    if (total <= kEps)
        return 0.0;
    double h = 0.0;
    for (double w : weights) {
        if (w > kEps) {
            double p = w / total;
            h -= p * std::log2(p);
        }
    }
    return h;
}

struct SplitChoice {
    int attr{-1};
    double threshold{0.0};
    double gain_ratio{-1.0};
};

struct KnownValue {
    double value;
    double weight;
    int label;
};

}  // namespace

namespace detail {

class Builder {
  public:
    Builder(const Dataset& data, int min_leaf, int max_depth, int attrs_per_split, Rng* rng)
        : data_(data),
          n_classes_(data.class_names.size()),
          min_leaf_(static_cast<double>(min_leaf)),
          max_depth_(max_depth),
          attrs_per_split_(attrs_per_split),
          rng_(rng) {}

    std::vector<TreeNode> build(std::vector<Item> items) {
        nodes_.clear();
        grow(std::move(items), 0);
        return std::move(nodes_);
    }

  private:
    const Dataset& data_;
    size_t n_classes_;
    double min_leaf_;
    int max_depth_;
    int attrs_per_split_;
    Rng* rng_;
    std::vector<TreeNode> nodes_;

    std::vector<double> class_dist(const std::vector<Item>& items) const {
        std::vector<double> dist(n_classes_, 0.0);
        for (const Item& it : items)
            dist[data_.instances[it.index].label] += it.weight * data_.instances[it.index].weight;
        return dist;
    }

    std::vector<int> candidate_attrs() {
        int n = static_cast<int>(kAttributeCount);
        if (!rng_ || attrs_per_split_ >= n) {
            std::vector<int> all(n);
            for (int i = 0; i < n; ++i)
                all[i] = i;
            return all;
        }
        // Partial Fisher-Yates; result sorted so evaluation order is stable.
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i)
            pool[i] = i;
        std::vector<int> picked;
        for (int i = 0; i < attrs_per_split_; ++i) {
            size_t j = i + static_cast<size_t>(rng_->uniform_int(n - i));
            std::swap(pool[i], pool[j]);
            picked.push_back(pool[i]);
        }
        std::sort(picked.begin(), picked.end());
        return picked;
    }

    SplitChoice best_split(const std::vector<Item>& items, const std::vector<int>& attrs,
                           double total_weight) const {
        SplitChoice best;
        std::vector<KnownValue> known;
        std::vector<double> left(n_classes_), right(n_classes_);
        for (int a : attrs) {
            known.clear();
            for (const Item& it : items) {
                const Instance& inst = data_.instances[it.index];
                if (inst.attrs.present[a])
                    known.push_back({inst.attrs.values[a], it.weight * inst.weight, inst.label});
            }
            if (known.size() < 2)
                continue;
            std::sort(known.begin(), known.end(),
                      [](const KnownValue& x, const KnownValue& y) { return x.value < y.value; });

            std::fill(left.begin(), left.end(), 0.0);
            std::fill(right.begin(), right.end(), 0.0);
            double w_known = 0.0;
            for (const KnownValue& kv : known) {
                right[kv.label] += kv.weight;
                w_known += kv.weight;
            }
            if (w_known <= kEps)
                continue;
            double h_known = entropy(right, w_known);

            double w_left = 0.0;
            for (size_t i = 0; i + 1 < known.size(); ++i) {
                left[known[i].label] += known[i].weight;
                right[known[i].label] -= known[i].weight;
                w_left += known[i].weight;
                if (known[i].value >= known[i + 1].value)
                    continue;  // threshold only between distinct values
                double w_right = w_known - w_left;
                if (w_left < min_leaf_ - kEps || w_right < min_leaf_ - kEps)
                    continue;
                double h_split =
                    (w_left * entropy(left, w_left) + w_right * entropy(right, w_right)) / w_known;
                double gain = (w_known / total_weight) * (h_known - h_split);
                if (gain <= kEps)
                    continue;
                double pl = w_left / w_known;
                double split_info = -(pl * std::log2(pl) + (1 - pl) * std::log2(1 - pl));
                if (split_info <= kEps)
                    continue;
                double ratio = gain / split_info;
                // Attrs ascend and thresholds ascend within an attr, so
                // first-wins gives the lowest (attr, threshold) on ties.
                if (ratio > best.gain_ratio + kEps)
                    best = {a, (known[i].value + known[i + 1].value) / 2.0, ratio};
            }
        }
        return best;
    }

    int grow(std::vector<Item> items, int depth) {
        int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        std::vector<double> dist = class_dist(items);
        nodes_[id].dist = dist;

        double total = 0.0;
        int live_classes = 0;
        for (double w : dist) {
            total += w;
            if (w > kEps)
                ++live_classes;
        }
        bool depth_cap = max_depth_ > 0 && depth >= max_depth_;
        if (depth_cap || live_classes <= 1 || total < 2 * min_leaf_ - kEps)
            return id;

        SplitChoice choice = best_split(items, candidate_attrs(), total);
        if (choice.attr < 0)
            return id;

        std::vector<Item> left_items, right_items;
        double w_left = 0.0, w_right = 0.0;
        std::vector<Item> missing;
        for (const Item& it : items) {
            const Instance& inst = data_.instances[it.index];
            if (!inst.attrs.present[choice.attr]) {
                missing.push_back(it);
            } else if (inst.attrs.values[choice.attr] <= choice.threshold) {
                left_items.push_back(it);
                w_left += it.weight * inst.weight;
            } else {
                right_items.push_back(it);
                w_right += it.weight * inst.weight;
            }
        }
        double fl = w_left / (w_left + w_right);
        for (const Item& it : missing) {
            if (fl > kEps)
                left_items.push_back({it.index, it.weight * fl});
            if (1.0 - fl > kEps)
                right_items.push_back({it.index, it.weight * (1.0 - fl)});
        }
        items.clear();
        items.shrink_to_fit();

        nodes_[id].attr = choice.attr;
        nodes_[id].threshold = choice.threshold;
        nodes_[id].left_fraction = fl;
        int l = grow(std::move(left_items), depth + 1);
        nodes_[id].left = l;
        int r = grow(std::move(right_items), depth + 1);
        nodes_[id].right = r;
        return id;
    }
};

std::vector<TreeNode> build_tree(const Dataset& data, std::vector<Item> items, int min_leaf,
                                 int max_depth, int attrs_per_split, Rng* rng) {
    Builder b(data, min_leaf, max_depth, attrs_per_split, rng);
    return b.build(std::move(items));
}

}  // namespace detail

TreeModel train_tree(const Dataset& data, const TreeParams& params, uint64_t) {
    if (data.instances.empty())
        throw EmptyDataset();
    if (params.min_leaf < 1)
        throw DataError("min_leaf must be >= 1");
    std::vector<detail::Item> items;
    items.reserve(data.size());
    for (size_t i = 0; i < data.size(); ++i)
        items.push_back({i, 1.0});
    TreeModel model;
    model.class_names = data.class_names;
    model.attribute_names = data.attribute_names;
    model.params = params;
    model.nodes = detail::build_tree(data, std::move(items), params.min_leaf, params.max_depth,
                                     static_cast<int>(kAttributeCount), nullptr);
    return model;
}

namespace {

void accumulate(const std::vector<TreeNode>& nodes, int id, const AttributeVector& attrs,
                double weight, std::vector<double>& acc) {
    const TreeNode& n = nodes[id];
    if (n.is_leaf()) {
        double total = 0.0;
        for (double w : n.dist)
            total += w;
        if (total <= 0.0) {
            for (size_t c = 0; c < acc.size(); ++c)
                acc[c] += weight / static_cast<double>(acc.size());
        } else {
            for (size_t c = 0; c < acc.size(); ++c)
                acc[c] += weight * n.dist[c] / total;
        }
        return;
    }
    if (attrs.present[n.attr]) {
        int next = attrs.values[n.attr] <= n.threshold ? n.left : n.right;
        accumulate(nodes, next, attrs, weight, acc);
        return;
    }
    if (n.left_fraction > 0.0)
        accumulate(nodes, n.left, attrs, weight * n.left_fraction, acc);
    if (n.left_fraction < 1.0)
        accumulate(nodes, n.right, attrs, weight * (1.0 - n.left_fraction), acc);
}

}  // namespace

Prediction TreeModel::predict(const AttributeVector& attrs) const {
    Prediction p;
    p.scores.assign(class_names.size(), 0.0);
    accumulate(nodes, 0, attrs, 1.0, p.scores);
    p.class_index = 0;
    for (size_t c = 1; c < p.scores.size(); ++c)
        if (p.scores[c] > p.scores[p.class_index])
            p.class_index = static_cast<int>(c);
    return p;
}

Predictor TreeModel::predictor() const {
    return [model = *this](const AttributeVector& a) { return model.predict(a); };
}

size_t TreeModel::leaf_count() const {
    size_t n = 0;
    for (const auto& node : nodes)
        if (node.is_leaf())
            ++n;
    return n;
}

int TreeModel::depth() const {
    // Depth of the root is 0; computed iteratively over the child links.
    std::vector<int> depth(nodes.size(), 0);
    int best = 0;
    for (size_t i = 0; i < nodes.size(); ++i) {
        if (!nodes[i].is_leaf()) {
            depth[nodes[i].left] = depth[i] + 1;
            depth[nodes[i].right] = depth[i] + 1;
        }
        best = std::max(best, depth[i]);
    }
    return best;
}

}  // namespace itele::ml
