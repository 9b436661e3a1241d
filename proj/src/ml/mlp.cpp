#include "itele/ml/mlp.hpp"

#include <cmath>

#include "itele/rng.hpp"

namespace itele::ml {

namespace {

double sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

std::vector<double> standardized_input(const MlpModel& m, const AttributeVector& attrs) {
    std::vector<double> x(kAttributeCount);
    for (size_t i = 0; i < kAttributeCount; ++i) {
        double v = attrs.present[i] ? attrs.values[i] : m.mean[i];
        x[i] = (v - m.mean[i]) / m.stdev[i];
    }
    return x;
}

struct Activation {
    std::vector<double> x;  // standardized input
    std::vector<double> h;  // hidden activations
    std::vector<double> p;  // softmax output
};

Activation forward(const MlpModel& m, const AttributeVector& attrs) {
    Activation act;
    act.x = standardized_input(m, attrs);
    size_t nh = m.w1.size();
    size_t nc = m.w2.size();
    act.h.resize(nh);
    for (size_t j = 0; j < nh; ++j) {
        double z = m.w1[j][kAttributeCount];  // bias
        for (size_t i = 0; i < kAttributeCount; ++i)
            z += m.w1[j][i] * act.x[i];
        act.h[j] = sigmoid(z);
    }
    act.p.resize(nc);
    double zmax = -1e300;
    for (size_t c = 0; c < nc; ++c) {
        double z = m.w2[c][nh];  // bias
        for (size_t j = 0; j < nh; ++j)
            z += m.w2[c][j] * act.h[j];
        act.p[c] = z;
        zmax = std::max(zmax, z);
    }
    double sum = 0.0;
    for (double& p : act.p) {
        p = std::exp(p - zmax);
        sum += p;
    }
    for (double& p : act.p)
        p /= sum;
    return act;
}

// Accumulates d(loss)/d(weights) for one instance into gw1/gw2 with the
// given scale; returns the instance's cross-entropy.
double backward(const MlpModel& m, const Instance& inst, double scale,
                std::vector<std::vector<double>>& gw1, std::vector<std::vector<double>>& gw2) {
    Activation act = forward(m, inst.attrs);
    size_t nh = m.w1.size();
    size_t nc = m.w2.size();

    std::vector<double> dout(nc);
    for (size_t c = 0; c < nc; ++c)
        dout[c] = act.p[c] - (static_cast<int>(c) == inst.label ? 1.0 : 0.0);

    std::vector<double> dh(nh, 0.0);
    for (size_t c = 0; c < nc; ++c) {
        for (size_t j = 0; j < nh; ++j) {
            gw2[c][j] += scale * dout[c] * act.h[j];
            dh[j] += m.w2[c][j] * dout[c];
        }
        gw2[c][nh] += scale * dout[c];
    }
    for (size_t j = 0; j < nh; ++j) {
        double g = dh[j] * act.h[j] * (1.0 - act.h[j]);
        for (size_t i = 0; i < kAttributeCount; ++i)
            gw1[j][i] += scale * g * act.x[i];
        gw1[j][kAttributeCount] += scale * g;
    }
    double p = std::max(act.p[inst.label], 1e-300);
    return -std::log(p);
}

}  // namespace

MlpModel train_mlp(const Dataset& data, const MlpParams& params, uint64_t seed) {
    if (data.instances.empty())
        throw EmptyDataset();
    if (params.hidden_units < 1)
        throw DataError("hidden_units must be >= 1");

    MlpModel m;
    m.class_names = data.class_names;
    m.attribute_names = data.attribute_names;
    m.params = params;
    m.seed = seed;

    m.mean.assign(kAttributeCount, 0.0);
    m.stdev.assign(kAttributeCount, 1.0);
    for (size_t i = 0; i < kAttributeCount; ++i) {
        double sum = 0.0, count = 0.0;
        for (const Instance& inst : data.instances) {
            if (inst.attrs.present[i]) {
                sum += inst.attrs.values[i];
                count += 1.0;
            }
        }
        double mu = count > 0 ? sum / count : 0.0;
        double var = 0.0;
        for (const Instance& inst : data.instances) {
            if (inst.attrs.present[i]) {
                double d = inst.attrs.values[i] - mu;
                var += d * d;
            }
        }
        var = count > 0 ? var / count : 0.0;
        m.mean[i] = mu;
        m.stdev[i] = var > 1e-24 ? std::sqrt(var) : 1.0;
    }

    Rng rng(seed);
    size_t nh = static_cast<size_t>(params.hidden_units);
    size_t nc = data.class_names.size();
    double s1 = 1.0 / std::sqrt(static_cast<double>(kAttributeCount + 1));
    double s2 = 1.0 / std::sqrt(static_cast<double>(nh + 1));
    m.w1.assign(nh, std::vector<double>(kAttributeCount + 1));
    m.w2.assign(nc, std::vector<double>(nh + 1));
    for (auto& row : m.w1)
        for (double& w : row)
            w = rng.uniform(-s1, s1);
    for (auto& row : m.w2)
        for (double& w : row)
            w = rng.uniform(-s2, s2);

    std::vector<size_t> order(data.size());
    for (size_t i = 0; i < order.size(); ++i)
        order[i] = i;

    std::vector<std::vector<double>> gw1(nh, std::vector<double>(kAttributeCount + 1));
    std::vector<std::vector<double>> gw2(nc, std::vector<double>(nh + 1));
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        rng.shuffle(order);
        for (size_t idx : order) {
            const Instance& inst = data.instances[idx];
            for (auto& row : gw1)
                std::fill(row.begin(), row.end(), 0.0);
            for (auto& row : gw2)
                std::fill(row.begin(), row.end(), 0.0);
            backward(m, inst, inst.weight, gw1, gw2);
            for (size_t j = 0; j < nh; ++j)
                for (size_t i = 0; i <= kAttributeCount; ++i)
                    m.w1[j][i] -= params.learning_rate * gw1[j][i];
            for (size_t c = 0; c < nc; ++c)
                for (size_t j = 0; j <= nh; ++j)
                    m.w2[c][j] -= params.learning_rate * gw2[c][j];
        }
    }
    return m;
}

Prediction MlpModel::predict(const AttributeVector& attrs) const {
    Activation act = forward(*this, attrs);
    Prediction p;
    p.scores = act.p;
    p.class_index = 0;
    for (size_t c = 1; c < p.scores.size(); ++c)
        if (p.scores[c] > p.scores[p.class_index])
            p.class_index = static_cast<int>(c);
    return p;
}

Predictor MlpModel::predictor() const {
    return [model = *this](const AttributeVector& a) { return model.predict(a); };
}

MlpGradient mlp_loss_and_gradient(const MlpModel& model, const Dataset& data) {
    if (data.instances.empty())
        throw EmptyDataset();
    size_t nh = model.w1.size();
    size_t nc = model.w2.size();
    std::vector<std::vector<double>> gw1(nh, std::vector<double>(kAttributeCount + 1, 0.0));
    std::vector<std::vector<double>> gw2(nc, std::vector<double>(nh + 1, 0.0));
    double total_w = 0.0;
    for (const Instance& inst : data.instances)
        total_w += inst.weight;
    MlpGradient out;
    for (const Instance& inst : data.instances)
        out.loss += inst.weight * backward(model, inst, inst.weight / total_w, gw1, gw2);
    out.loss /= total_w;
    for (const auto& row : gw1)
        out.grad.insert(out.grad.end(), row.begin(), row.end());
    for (const auto& row : gw2)
        out.grad.insert(out.grad.end(), row.begin(), row.end());
    return out;
}

std::vector<double> flatten_weights(const MlpModel& model) {
    std::vector<double> flat;
    for (const auto& row : model.w1)
        flat.insert(flat.end(), row.begin(), row.end());
    for (const auto& row : model.w2)
        flat.insert(flat.end(), row.begin(), row.end());
    return flat;
}

void unflatten_weights(MlpModel& model, const std::vector<double>& flat) {
    size_t pos = 0;
    for (auto& row : model.w1)
        for (double& w : row)
            w = flat[pos++];
    for (auto& row : model.w2)
        for (double& w : row)
            w = flat[pos++];
    if (pos != flat.size())
        throw DataError("weight vector length mismatch");
}

}  // namespace itele::ml
