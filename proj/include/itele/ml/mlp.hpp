#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "itele/ml/dataset.hpp"

namespace itele::ml {

struct MlpParams {
    int hidden_units{8};
    int epochs{200};
    double learning_rate{0.1};
};

/// One sigmoid hidden layer, softmax output, trained by per-instance SGD on
/// cross-entropy. Inputs are standardized with training-set statistics;
/// missing values impute to the training mean (zero after standardization).
struct MlpModel {
    std::vector<std::string> class_names;
    std::vector<std::string> attribute_names;
    MlpParams params;
    uint64_t seed{0};

    std::vector<double> mean;   // per attribute
    std::vector<double> stdev;  // per attribute, >= tiny
    // w1[h] = hidden unit h's weights over inputs plus trailing bias;
    // w2[c] = class c's weights over hidden units plus trailing bias.
    std::vector<std::vector<double>> w1;
    std::vector<std::vector<double>> w2;

    Prediction predict(const AttributeVector& attrs) const;
    Predictor predictor() const;
};

MlpModel train_mlp(const Dataset& data, const MlpParams& params, uint64_t seed);

/// Mean cross-entropy over the instances plus its analytic gradient, laid
/// out as (w1 rows..., then w2 rows..., flattened). Drives both SGD and the
/// finite-difference gradient check.
struct MlpGradient {
    double loss{0.0};
    std::vector<double> grad;  // parallel to flatten_weights order
};
MlpGradient mlp_loss_and_gradient(const MlpModel& model, const Dataset& data);
std::vector<double> flatten_weights(const MlpModel& model);
void unflatten_weights(MlpModel& model, const std::vector<double>& flat);

}  // namespace itele::ml
