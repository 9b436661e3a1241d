#pragma once

#include <string>

#include "itele/ml/forest.hpp"
#include "itele/ml/mlp.hpp"
#include "itele/ml/tree.hpp"

namespace itele::ml {

std::string serialize_model(const TreeModel& model);
std::string serialize_model(const ForestModel& model);
std::string serialize_model(const MlpModel& model);

void save_model(const TreeModel& model, const std::string& path);
void save_model(const ForestModel& model, const std::string& path);
void save_model(const MlpModel& model, const std::string& path);

/// Algorithm-agnostic handle for a deserialized model.
struct LoadedModel {
    std::string algorithm;
    std::vector<std::string> class_names;
    std::vector<std::string> attribute_names;
    Predictor predict;
};

LoadedModel parse_model(const std::string& text);
LoadedModel load_model(const std::string& path);

}  // namespace itele::ml
