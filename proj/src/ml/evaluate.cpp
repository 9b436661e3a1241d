#include "itele/ml/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "itele/ml/forest.hpp"
#include "itele/ml/mlp.hpp"
#include "itele/ml/tree.hpp"
#include "itele/rng.hpp"

namespace itele::ml {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> names)
    : class_names(std::move(names)),
      counts(class_names.size(), std::vector<uint64_t>(class_names.size(), 0)) {}

uint64_t ConfusionMatrix::total() const {
    uint64_t n = 0;
    for (const auto& row : counts)
        for (uint64_t c : row)
            n += c;
    return n;
}

uint64_t ConfusionMatrix::correct() const {
    uint64_t n = 0;
    for (size_t i = 0; i < counts.size(); ++i)
        n += counts[i][i];
    return n;
}

double ConfusionMatrix::accuracy() const {
    uint64_t t = total();
    return t == 0 ? 0.0 : static_cast<double>(correct()) / static_cast<double>(t);
}

std::string ConfusionMatrix::to_string() const {
    std::ostringstream out;
    size_t width = 9;
    for (const auto& n : class_names)
        width = std::max(width, n.size() + 2);
    out << std::string(width, ' ');
    for (const auto& n : class_names)
        out << n << std::string(width - n.size(), ' ');
    out << "<- prediction\n";
    for (size_t i = 0; i < counts.size(); ++i) {
        out << class_names[i] << std::string(width - class_names[i].size(), ' ');
        for (size_t j = 0; j < counts[i].size(); ++j) {
            std::string v = std::to_string(counts[i][j]);
            out << v << std::string(width - v.size(), ' ');
        }
        out << "\n";
    }
    char acc[64];
    std::snprintf(acc, sizeof(acc), "accuracy %.4f (%llu/%llu)\n", accuracy(),
                  static_cast<unsigned long long>(correct()),
                  static_cast<unsigned long long>(total()));
    out << acc;
    return out.str();
}

std::vector<int> stratified_fold_assignment(const Dataset& data, int k, uint64_t seed) {
    std::vector<int> fold(data.size(), 0);
    Rng rng(seed);
    for (size_t c = 0; c < data.class_names.size(); ++c) {
        std::vector<size_t> members;
        for (size_t i = 0; i < data.size(); ++i)
            if (data.instances[i].label == static_cast<int>(c))
                members.push_back(i);
        rng.shuffle(members);
        for (size_t pos = 0; pos < members.size(); ++pos)
            fold[members[pos]] = static_cast<int>(pos % static_cast<size_t>(k));
    }
    return fold;
}

std::pair<ConfusionMatrix, double> cross_validate(const Dataset& data, const Trainer& trainer,
                                                  int k, uint64_t seed) {
    if (k < 2)
        throw DataError("cross_validate needs k >= 2");
    if (data.size() < static_cast<size_t>(k))
        throw TooFewInstances("cross_validate: " + std::to_string(data.size()) +
                              " instances for " + std::to_string(k) + " folds");

    std::vector<int> fold = stratified_fold_assignment(data, k, seed);
    ConfusionMatrix cm(data.class_names);
    for (int f = 0; f < k; ++f) {
        Dataset train;
        train.class_names = data.class_names;
        train.attribute_names = data.attribute_names;
        for (size_t i = 0; i < data.size(); ++i)
            if (fold[i] != f)
                train.instances.push_back(data.instances[i]);
        if (train.instances.empty())
            continue;
        Predictor predict = trainer(train, seed + 1 + static_cast<uint64_t>(f));
        for (size_t i = 0; i < data.size(); ++i)
            if (fold[i] == f)
                cm.add(data.instances[i].label, predict(data.instances[i].attrs).class_index);
    }
    return {cm, cm.accuracy()};
}

namespace {

double entropy_of(const std::vector<double>& weights, double total) {
    if (total <= 0)
        return 0.0;
    double h = 0.0;
    for (double w : weights)
        if (w > 1e-12) {
            double p = w / total;
            h -= p * std::log2(p);
        }
    return h;
}

// Best single-threshold gain for one attribute over the given instances,
// restricted to rows where the attribute is known.
double best_binary_gain(const Dataset& data, const std::vector<size_t>& rows, size_t attr) {
    struct Kv {
        double value;
        double weight;
        int label;
    };
    std::vector<Kv> known;
    for (size_t i : rows) {
        const Instance& inst = data.instances[i];
        if (inst.attrs.present[attr])
            known.push_back({inst.attrs.values[attr], inst.weight, inst.label});
    }
    if (known.size() < 2)
        return 0.0;
    std::sort(known.begin(), known.end(), [](const Kv& a, const Kv& b) { return a.value < b.value; });

    size_t nc = data.class_names.size();
    std::vector<double> left(nc, 0.0), right(nc, 0.0);
    double w_total = 0.0;
    for (const Kv& kv : known) {
        right[kv.label] += kv.weight;
        w_total += kv.weight;
    }
    double h_all = entropy_of(right, w_total);

    double best = 0.0;
    double w_left = 0.0;
    for (size_t i = 0; i + 1 < known.size(); ++i) {
        left[known[i].label] += known[i].weight;
        right[known[i].label] -= known[i].weight;
        w_left += known[i].weight;
        if (known[i].value >= known[i + 1].value)
            continue;
        double w_right = w_total - w_left;
        double h_split =
            (w_left * entropy_of(left, w_left) + w_right * entropy_of(right, w_right)) / w_total;
        best = std::max(best, h_all - h_split);
    }
    return best;
}

}  // namespace

std::vector<MeritEntry> info_gain_merit(const Dataset& data, int k, uint64_t seed) {
    if (data.instances.empty())
        throw EmptyDataset();
    std::vector<int> fold = data.size() >= static_cast<size_t>(k)
                                ? stratified_fold_assignment(data, k, seed)
                                : std::vector<int>(data.size(), -1);

    std::vector<double> merit(kAttributeCount, 0.0);
    int folds_used = 0;
    for (int f = 0; f < k; ++f) {
        std::vector<size_t> rows;
        for (size_t i = 0; i < data.size(); ++i)
            if (fold[i] != f)
                rows.push_back(i);
        if (rows.empty())
            continue;
        ++folds_used;
        for (size_t a = 0; a < kAttributeCount; ++a)
            merit[a] += best_binary_gain(data, rows, a);
    }
    std::vector<MeritEntry> out;
    for (size_t a = 0; a < kAttributeCount; ++a)
        out.push_back({data.attribute_names[a], folds_used ? merit[a] / folds_used : 0.0});
    std::stable_sort(out.begin(), out.end(),
                     [](const MeritEntry& x, const MeritEntry& y) { return x.merit > y.merit; });
    return out;
}

namespace {

double param_or(const ParamList& params, const std::string& key, double def) {
    for (const auto& [k, v] : params)
        if (k == key)
            return v;
    return def;
}

void check_keys(const ParamList& params, std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : params) {
        bool ok = false;
        for (const char* a : allowed)
            if (k == a)
                ok = true;
        if (!ok)
            throw ConfigError("unknown parameter '" + k + "' for this algorithm");
    }
}

}  // namespace

TreeParams tree_params(const ParamList& params) {
    check_keys(params, {"min_leaf", "max_depth"});
    TreeParams tp;
    tp.min_leaf = static_cast<int>(param_or(params, "min_leaf", 2));
    tp.max_depth = static_cast<int>(param_or(params, "max_depth", 0));
    return tp;
}

ForestParams forest_params(const ParamList& params) {
    check_keys(params, {"n_trees", "max_depth", "attrs_per_split", "min_leaf", "bootstrap"});
    ForestParams fp;
    fp.n_trees = static_cast<int>(param_or(params, "n_trees", 100));
    fp.max_depth = static_cast<int>(param_or(params, "max_depth", 0));
    fp.attrs_per_split = static_cast<int>(param_or(params, "attrs_per_split", 3));
    fp.min_leaf = static_cast<int>(param_or(params, "min_leaf", 1));
    fp.bootstrap = param_or(params, "bootstrap", 1) != 0;
    return fp;
}

MlpParams mlp_params(const ParamList& params) {
    check_keys(params, {"hidden_units", "epochs", "learning_rate"});
    MlpParams mp;
    mp.hidden_units = static_cast<int>(param_or(params, "hidden_units", 8));
    mp.epochs = static_cast<int>(param_or(params, "epochs", 200));
    mp.learning_rate = param_or(params, "learning_rate", 0.1);
    return mp;
}

Trainer make_trainer(const std::string& algorithm, const ParamList& params) {
    if (algorithm == "tree") {
        TreeParams tp = tree_params(params);
        return [tp](const Dataset& d, uint64_t seed) {
            return train_tree(d, tp, seed).predictor();
        };
    }
    if (algorithm == "forest") {
        ForestParams fp = forest_params(params);
        return [fp](const Dataset& d, uint64_t seed) {
            return train_forest(d, fp, seed).predictor();
        };
    }
    if (algorithm == "mlp") {
        MlpParams mp = mlp_params(params);
        return [mp](const Dataset& d, uint64_t seed) {
            return train_mlp(d, mp, seed).predictor();
        };
    }
    throw ConfigError("unknown algorithm '" + algorithm + "' (expected tree, forest, or mlp)");
}

std::vector<GridPoint> tune_grid(const Dataset& data, const std::string& algorithm,
                                 const std::vector<ParamList>& grid, int k, uint64_t seed) {
    if (grid.empty())
        throw ConfigError("empty tuning grid");
    std::vector<GridPoint> out;
    out.reserve(grid.size());
    for (const ParamList& point : grid) {
        Trainer trainer = make_trainer(algorithm, point);
        auto [cm, acc] = cross_validate(data, trainer, k, seed);
        out.push_back({point, acc});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const GridPoint& a, const GridPoint& b) { return a.accuracy > b.accuracy; });
    return out;
}

std::string format_grid_report(const std::vector<GridPoint>& points) {
    std::ostringstream out;
    for (const GridPoint& p : points) {
        for (const auto& [k, v] : p.params) {
            char buf[64];
            if (v == static_cast<double>(static_cast<long long>(v)))
                std::snprintf(buf, sizeof(buf), "%s=%lld,", k.c_str(),
                              static_cast<long long>(v));
            else
                std::snprintf(buf, sizeof(buf), "%s=%g,", k.c_str(), v);
            out << buf;
        }
        char acc[32];
        std::snprintf(acc, sizeof(acc), " accuracy=%.4f", p.accuracy);
        out << acc << "\n";
    }
    return out.str();
}

}  // namespace itele::ml
