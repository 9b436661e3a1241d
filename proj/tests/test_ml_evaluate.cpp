#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "itele/ml/evaluate.hpp"
#include "itele/rng.hpp"

using namespace itele;
using namespace itele::ml;

namespace {

Instance make_instance(std::vector<double> values, int label) {
    Instance inst;
    inst.label = label;
    for (size_t i = 0; i < kAttributeCount; ++i) {
        inst.attrs.values[i] = i < values.size() ? values[i] : 0.0;
        inst.attrs.present[i] = true;
    }
    return inst;
}

// attr0 copies the label, everything else is noise.
Dataset leaky_dataset(size_t n, uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    d.class_names = {"a", "b"};
    for (size_t i = 0; i < n; ++i) {
        int label = int(rng.uniform_int(2));
        std::vector<double> v{double(label)};
        for (size_t a = 1; a < kAttributeCount; ++a)
            v.push_back(rng.uniform(0, 1));
        d.instances.push_back(make_instance(v, label));
    }
    return d;
}

}  // namespace

TEST_CASE("confusion matrix bookkeeping and rendering") {
    ConfusionMatrix cm({"video", "nonvideo"});
    cm.add(0, 0);
    cm.add(0, 0);
    cm.add(0, 1);
    cm.add(1, 1);
    CHECK(cm.total() == 4);
    CHECK(cm.correct() == 3);
    CHECK(cm.accuracy() == doctest::Approx(0.75));
    std::string s = cm.to_string();
    CHECK(s.find("accuracy 0.7500 (3/4)") != std::string::npos);
    CHECK(s.find("<- prediction") != std::string::npos);
    CHECK(s.find("video") != std::string::npos);
    CHECK(ConfusionMatrix({"a"}).accuracy() == doctest::Approx(0.0));
}

TEST_CASE("stratified folds balance every class to within one") {
    Rng rng(13);
    Dataset d;
    d.class_names = {"a", "b", "c"};
    // Deliberately skewed class sizes, not divisible by k.
    for (int label = 0; label < 3; ++label) {
        size_t n = label == 0 ? 47 : label == 1 ? 22 : 9;
        for (size_t i = 0; i < n; ++i)
            d.instances.push_back(make_instance({rng.uniform(0, 1)}, label));
    }
    int k = 10;
    auto fold = stratified_fold_assignment(d, k, 3);
    REQUIRE(fold.size() == d.size());
    std::map<int, std::map<int, size_t>> per_class;  // class -> fold -> count
    for (size_t i = 0; i < d.size(); ++i) {
        CHECK(fold[i] >= 0);
        CHECK(fold[i] < k);
        per_class[d.instances[i].label][fold[i]] += 1;
    }
    for (const auto& [label, counts] : per_class) {
        size_t lo = SIZE_MAX, hi = 0;
        for (int f = 0; f < k; ++f) {
            size_t c = counts.count(f) ? counts.at(f) : 0;
            lo = std::min(lo, c);
            hi = std::max(hi, c);
        }
        CHECK(hi - lo <= 1);
    }
}

TEST_CASE("cross validation is perfect on a label leak and deterministic") {
    Dataset d = leaky_dataset(100, 5);
    Trainer trainer = make_trainer("tree", {{"min_leaf", 1}});
    auto [cm, acc] = cross_validate(d, trainer, 10, 1);
    CHECK(acc == doctest::Approx(1.0));
    CHECK(cm.total() == 100);  // every instance predicted exactly once

    auto [cm2, acc2] = cross_validate(d, trainer, 10, 1);
    CHECK(cm2.counts == cm.counts);
}

TEST_CASE("cross validation rejects degenerate setups") {
    Dataset d = leaky_dataset(8, 6);
    Trainer trainer = make_trainer("tree", {});
    CHECK_THROWS_AS(cross_validate(d, trainer, 1, 1), DataError);
    CHECK_THROWS_AS(cross_validate(d, trainer, 10, 1), TooFewInstances);
}

TEST_CASE("merit of a label copy equals the class entropy") {
    // Balanced two-class data: entropy is exactly 1 bit. attr0 copies the
    // label, attr1 is constant (zero merit).
    Dataset d;
    d.class_names = {"a", "b"};
    for (int i = 0; i < 40; ++i)
        d.instances.push_back(make_instance({double(i % 2), 7.0}, i % 2));
    auto merits = info_gain_merit(d, 10, 1);
    REQUIRE(merits.size() == kAttributeCount);
    CHECK(merits[0].attribute == "idle_fraction");  // attr0's name slot
    CHECK(merits[0].merit == doctest::Approx(1.0));
    for (size_t i = 1; i < merits.size(); ++i) {
        CHECK(merits[i].merit == doctest::Approx(0.0));
        CHECK(merits[i].merit <= merits[i - 1].merit);
    }
}

TEST_CASE("merit ranking is descending on noisy data") {
    Rng rng(19);
    Dataset d;
    d.class_names = {"a", "b"};
    for (int i = 0; i < 80; ++i) {
        int label = int(rng.uniform_int(2));
        std::vector<double> v;
        v.push_back(label + rng.uniform(-0.3, 0.3));  // strong signal
        v.push_back(label + rng.uniform(-2.0, 2.0));  // weak signal
        for (size_t a = 2; a < kAttributeCount; ++a)
            v.push_back(rng.uniform(0, 1));
        d.instances.push_back(make_instance(v, label));
    }
    auto merits = info_gain_merit(d);
    for (size_t i = 1; i < merits.size(); ++i)
        CHECK(merits[i].merit <= merits[i - 1].merit + 1e-12);
    CHECK(merits[0].attribute == "idle_fraction");
}

TEST_CASE("trainer factory: defaults, explicit params, unknown keys") {
    Dataset d = leaky_dataset(40, 25);
    for (const char* algo : {"tree", "forest", "mlp"}) {
        Trainer t = make_trainer(algo, {});
        Predictor p = t(d, 1);
        CHECK(p(d.instances[0].attrs).scores.size() == 2);
    }
    CHECK_THROWS_AS(make_trainer("svm", {}), ConfigError);
    CHECK_THROWS_AS(make_trainer("tree", {{"n_trees", 5}}), ConfigError);
    CHECK_THROWS_AS(make_trainer("forest", {{"hidden_units", 5}}), ConfigError);
    CHECK_THROWS_AS(make_trainer("mlp", {{"min_leaf", 5}}), ConfigError);

    TreeParams tp = tree_params({{"min_leaf", 4}, {"max_depth", 3}});
    CHECK(tp.min_leaf == 4);
    CHECK(tp.max_depth == 3);
    CHECK(tree_params({}).min_leaf == 2);

    ForestParams fp = forest_params({{"n_trees", 25}, {"bootstrap", 0}});
    CHECK(fp.n_trees == 25);
    CHECK_FALSE(fp.bootstrap);
    CHECK(fp.attrs_per_split == 3);
    CHECK(forest_params({}).n_trees == 100);

    MlpParams mp = mlp_params({{"hidden_units", 12}, {"learning_rate", 0.05}});
    CHECK(mp.hidden_units == 12);
    CHECK(mp.learning_rate == doctest::Approx(0.05));
    CHECK(mlp_params({}).epochs == 200);
}

TEST_CASE("a single grid point reproduces plain cross validation") {
    Dataset d = leaky_dataset(60, 31);
    ParamList point = {{"min_leaf", 2}, {"max_depth", 2}};
    auto points = tune_grid(d, "tree", {point}, 10, 1);
    REQUIRE(points.size() == 1);
    auto [cm, acc] = cross_validate(d, make_trainer("tree", point), 10, 1);
    CHECK(points[0].accuracy == doctest::Approx(acc));
    CHECK(points[0].params == point);
}

TEST_CASE("grid results rank by accuracy with stable ties") {
    Rng rng(37);
    Dataset d;
    d.class_names = {"a", "b"};
    for (int i = 0; i < 60; ++i) {
        int label = int(rng.uniform_int(2));
        std::vector<double> v;
        for (size_t a = 0; a < kAttributeCount; ++a)
            v.push_back(label * 0.6 + rng.uniform(0, 1));
        d.instances.push_back(make_instance(v, label));
    }
    std::vector<ParamList> grid;
    for (double depth : {1, 2, 3})
        for (double trees : {1, 5})
            grid.push_back({{"max_depth", depth}, {"n_trees", trees}});
    auto points = tune_grid(d, "forest", grid, 5, 1);
    REQUIRE(points.size() == grid.size());
    for (size_t i = 1; i < points.size(); ++i)
        CHECK(points[i].accuracy <= points[i - 1].accuracy + 1e-12);

    CHECK_THROWS_AS(tune_grid(d, "forest", {}, 5, 1), ConfigError);

    std::string report = format_grid_report(points);
    CHECK(report.find("max_depth=") != std::string::npos);
    CHECK(report.find("accuracy=0.") != std::string::npos);
    // One line per grid point.
    CHECK(size_t(std::count(report.begin(), report.end(), '\n')) == points.size());
}
