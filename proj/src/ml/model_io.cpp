#include "itele/ml/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace itele::ml {

namespace {

using nlohmann::json;

constexpr const char* kFormatTag = "itele-model";
constexpr int kFormatVersion = 1;

json nodes_to_json(const std::vector<TreeNode>& nodes) {
    json arr = json::array();
    for (const TreeNode& n : nodes)
        arr.push_back({n.attr, n.threshold, n.left, n.right, n.left_fraction, n.dist});
    return arr;
}

std::vector<TreeNode> nodes_from_json(const json& arr, size_t n_classes) {
    std::vector<TreeNode> nodes;
    nodes.reserve(arr.size());
    for (const auto& e : arr) {
        if (!e.is_array() || e.size() != 6)
            throw DataError("model file: bad tree node record");
        TreeNode n;
        n.attr = e[0].get<int>();
        n.threshold = e[1].get<double>();
        n.left = e[2].get<int>();
        n.right = e[3].get<int>();
        n.left_fraction = e[4].get<double>();
        n.dist = e[5].get<std::vector<double>>();
        if (n.dist.size() != n_classes)
            throw DataError("model file: node distribution size mismatch");
        if (n.attr >= static_cast<int>(kAttributeCount))
            throw DataError("model file: node attribute out of range");
        nodes.push_back(std::move(n));
    }
    if (nodes.empty())
        throw DataError("model file: empty tree");
    for (const TreeNode& n : nodes)
        if (!n.is_leaf() && (n.left < 0 || n.right < 0 ||
                             n.left >= static_cast<int>(nodes.size()) ||
                             n.right >= static_cast<int>(nodes.size())))
            throw DataError("model file: dangling child link");
    return nodes;
}

json header_json(const std::string& algorithm, const std::vector<std::string>& classes,
                 const std::vector<std::string>& attrs) {
    json j;
    j["format"] = kFormatTag;
    j["version"] = kFormatVersion;
    j["algorithm"] = algorithm;
    j["classes"] = classes;
    j["attributes"] = attrs;
    return j;
}

json parse_header(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded())
        throw DataError("model file: not valid JSON");
    if (!j.is_object() || j.value("format", "") != kFormatTag)
        throw DataError("model file: missing format tag");
    if (j.value("version", 0) != kFormatVersion)
        throw DataError("model file: unsupported version");
    return j;
}

void write_file(const std::string& text, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write model: " + path);
    out << text << '\n';
    if (!out)
        throw DataError("write failed: " + path);
}

}  // namespace

std::string serialize_model(const TreeModel& model) {
    json j = header_json("tree", model.class_names, model.attribute_names);
    j["params"] = {{"min_leaf", model.params.min_leaf}, {"max_depth", model.params.max_depth}};
    j["nodes"] = nodes_to_json(model.nodes);
    return j.dump();
}

std::string serialize_model(const ForestModel& model) {
    json j = header_json("forest", model.class_names, model.attribute_names);
    j["params"] = {{"n_trees", model.params.n_trees},
                   {"max_depth", model.params.max_depth},
                   {"attrs_per_split", model.params.attrs_per_split},
                   {"min_leaf", model.params.min_leaf},
                   {"bootstrap", model.params.bootstrap}};
    j["seed"] = model.seed;
    json trees = json::array();
    for (const TreeModel& t : model.trees)
        trees.push_back(nodes_to_json(t.nodes));
    j["trees"] = std::move(trees);
    return j.dump();
}

std::string serialize_model(const MlpModel& model) {
    json j = header_json("mlp", model.class_names, model.attribute_names);
    j["params"] = {{"hidden_units", model.params.hidden_units},
                   {"epochs", model.params.epochs},
                   {"learning_rate", model.params.learning_rate}};
    j["seed"] = model.seed;
    j["mean"] = model.mean;
    j["stdev"] = model.stdev;
    j["w1"] = model.w1;
    j["w2"] = model.w2;
    return j.dump();
}

void save_model(const TreeModel& model, const std::string& path) {
    write_file(serialize_model(model), path);
}
void save_model(const ForestModel& model, const std::string& path) {
    write_file(serialize_model(model), path);
}
void save_model(const MlpModel& model, const std::string& path) {
    write_file(serialize_model(model), path);
}

LoadedModel parse_model(const std::string& text) {
    json j = parse_header(text);
    LoadedModel out;
    out.algorithm = j.value("algorithm", "");
    out.class_names = j.at("classes").get<std::vector<std::string>>();
    out.attribute_names = j.at("attributes").get<std::vector<std::string>>();
    if (out.class_names.empty())
        throw DataError("model file: no classes");

    if (out.algorithm == "tree") {
        TreeModel m;
        m.class_names = out.class_names;
        m.attribute_names = out.attribute_names;
        m.params.min_leaf = j.at("params").value("min_leaf", 2);
        m.params.max_depth = j.at("params").value("max_depth", 0);
        m.nodes = nodes_from_json(j.at("nodes"), out.class_names.size());
        out.predict = m.predictor();
        return out;
    }
    if (out.algorithm == "forest") {
        auto m = std::make_shared<ForestModel>();
        m->class_names = out.class_names;
        m->attribute_names = out.attribute_names;
        const json& p = j.at("params");
        m->params.n_trees = p.value("n_trees", 100);
        m->params.max_depth = p.value("max_depth", 0);
        m->params.attrs_per_split = p.value("attrs_per_split", 3);
        m->params.min_leaf = p.value("min_leaf", 1);
        m->params.bootstrap = p.value("bootstrap", true);
        m->seed = j.value("seed", 0);
        for (const auto& t : j.at("trees")) {
            TreeModel tree;
            tree.class_names = m->class_names;
            tree.attribute_names = m->attribute_names;
            tree.nodes = nodes_from_json(t, m->class_names.size());
            m->trees.push_back(std::move(tree));
        }
        if (m->trees.empty())
            throw DataError("model file: empty forest");
        out.predict = [m](const AttributeVector& a) { return m->predict(a); };
        return out;
    }
    if (out.algorithm == "mlp") {
        MlpModel m;
        m.class_names = out.class_names;
        m.attribute_names = out.attribute_names;
        const json& p = j.at("params");
        m.params.hidden_units = p.value("hidden_units", 8);
        m.params.epochs = p.value("epochs", 200);
        m.params.learning_rate = p.value("learning_rate", 0.1);
        m.seed = j.value("seed", 0);
        m.mean = j.at("mean").get<std::vector<double>>();
        m.stdev = j.at("stdev").get<std::vector<double>>();
        m.w1 = j.at("w1").get<std::vector<std::vector<double>>>();
        m.w2 = j.at("w2").get<std::vector<std::vector<double>>>();
        if (m.mean.size() != kAttributeCount || m.stdev.size() != kAttributeCount)
            throw DataError("model file: standardization vectors must have 7 entries");
        if (m.w2.size() != m.class_names.size())
            throw DataError("model file: output layer size mismatch");
        out.predict = m.predictor();
        return out;
    }
    throw DataError("model file: unknown algorithm '" + out.algorithm + "'");
}

LoadedModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open model: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

}  // namespace itele::ml
