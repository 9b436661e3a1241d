#pragma once

#include <functional>
#include <string>
#include <vector>

#include "itele/common.hpp"
#include "itele/features.hpp"

namespace itele::ml {

struct EmptyDataset : DataError {
    EmptyDataset() : DataError("empty dataset") {}
};

struct TooFewInstances : DataError {
    explicit TooFewInstances(const std::string& what) : DataError(what) {}
};

inline const std::vector<std::string> kIdentifierClasses = {"video", "nonvideo"};
inline const std::vector<std::string> kResolutionClasses = {"low", "medium", "high", "ultrahigh"};

struct Instance {
    AttributeVector attrs;
    int label{0};
    double weight{1.0};
};

/// Class order is significant: prediction ties break toward the earlier
/// class. The identifier and resolution class sets always load in their
/// canonical order regardless of row order in the file.
struct Dataset {
    std::vector<std::string> class_names;
    std::vector<std::string> attribute_names{kAttributeNames.begin(), kAttributeNames.end()};
    std::vector<Instance> instances;
    /// Optional per-instance sub-profile annotation (parallel to instances;
    /// empty when the file has no window column).
    std::vector<std::string> windows;

    size_t size() const { return instances.size(); }
    bool has_windows() const { return !windows.empty(); }
    int class_index(const std::string& name) const;  // -1 when unknown
    std::vector<double> class_weights() const;
};

Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& data, const std::string& path);

/// Instances whose window annotation equals `window` (annotation column
/// itself is dropped from the result).
Dataset filter_by_window(const Dataset& data, const std::string& window);

/// Distinct window annotations; canonical sub-profile order when the labels
/// are the canonical eight, otherwise order of first appearance.
std::vector<std::string> distinct_windows(const Dataset& data);

struct Prediction {
    int class_index{0};
    std::vector<double> scores;
};

using Predictor = std::function<Prediction(const AttributeVector&)>;
using Trainer = std::function<Predictor(const Dataset&, uint64_t seed)>;

}  // namespace itele::ml
