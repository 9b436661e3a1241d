#include "itele/ml/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace itele::ml {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string field;
    while (in >> field)
        out.push_back(field);
    return out;
}

double parse_value(const std::string& field, int lineno) {
    double v = 0;
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || p != field.data() + field.size())
        throw DataError("dataset line " + std::to_string(lineno) + ": bad value '" + field + "'");
    return v;
}

std::string format_value(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
}

bool matches_canonical(const std::set<std::string>& seen, const std::vector<std::string>& canon) {
    for (const auto& s : seen)
        if (std::find(canon.begin(), canon.end(), s) == canon.end())
            return false;
    return !seen.empty();
}

}  // namespace

int Dataset::class_index(const std::string& name) const {
    auto it = std::find(class_names.begin(), class_names.end(), name);
    return it == class_names.end() ? -1 : static_cast<int>(it - class_names.begin());
}

std::vector<double> Dataset::class_weights() const {
    std::vector<double> w(class_names.size(), 0.0);
    for (const auto& inst : instances)
        w[inst.label] += inst.weight;
    return w;
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open dataset: " + path);

    std::string line;
    if (!std::getline(in, line))
        throw DataError("dataset has no header: " + path);
    auto header = split_fields(line);

    bool has_window = !header.empty() && header.back() == "window";
    size_t expect = kAttributeCount + 1 + (has_window ? 1 : 0);
    if (header.size() != expect)
        throw DataError("dataset header: expected " + std::to_string(kAttributeCount) +
                        " attribute columns, 'label'" + (has_window ? ", 'window'" : "") +
                        " in " + path);
    for (size_t i = 0; i < kAttributeCount; ++i)
        if (header[i] != kAttributeNames[i])
            throw DataError("dataset header: column " + std::to_string(i + 1) + " must be '" +
                            kAttributeNames[i] + "', got '" + header[i] + "'");
    if (header[kAttributeCount] != "label")
        throw DataError("dataset header: missing 'label' column");

    Dataset data;
    std::vector<std::string> labels;
    std::set<std::string> label_set;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        auto fields = split_fields(line);
        if (fields.size() != expect)
            throw DataError("dataset line " + std::to_string(lineno) + ": expected " +
                            std::to_string(expect) + " fields, got " +
                            std::to_string(fields.size()));
        Instance inst;
        for (size_t i = 0; i < kAttributeCount; ++i) {
            if (fields[i] == "?") {
                inst.attrs.present[i] = false;
            } else {
                inst.attrs.present[i] = true;
                inst.attrs.values[i] = parse_value(fields[i], lineno);
            }
        }
        labels.push_back(fields[kAttributeCount]);
        label_set.insert(fields[kAttributeCount]);
        if (has_window)
            data.windows.push_back(fields[kAttributeCount + 1]);
        data.instances.push_back(inst);
    }
    if (data.instances.empty())
        throw EmptyDataset();

    if (matches_canonical(label_set, kIdentifierClasses)) {
        data.class_names = kIdentifierClasses;
    } else if (matches_canonical(label_set, kResolutionClasses)) {
        data.class_names = kResolutionClasses;
    } else {
        for (const auto& l : labels)
            if (std::find(data.class_names.begin(), data.class_names.end(), l) ==
                data.class_names.end())
                data.class_names.push_back(l);
    }
    for (size_t i = 0; i < labels.size(); ++i)
        data.instances[i].label = data.class_index(labels[i]);
    return data;
}

void save_dataset(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write dataset: " + path);
    for (size_t i = 0; i < kAttributeCount; ++i)
        out << kAttributeNames[i] << '\t';
    out << "label";
    if (data.has_windows())
        out << "\twindow";
    out << '\n';
    for (size_t n = 0; n < data.instances.size(); ++n) {
        const Instance& inst = data.instances[n];
        for (size_t i = 0; i < kAttributeCount; ++i) {
            if (inst.attrs.present[i])
                out << format_value(inst.attrs.values[i]);
            else
                out << '?';
            out << '\t';
        }
        out << data.class_names[inst.label];
        if (data.has_windows())
            out << '\t' << data.windows[n];
        out << '\n';
    }
    if (!out)
        throw DataError("write failed: " + path);
}

Dataset filter_by_window(const Dataset& data, const std::string& window) {
    if (!data.has_windows())
        throw DataError("dataset has no window annotations");
    Dataset out;
    out.class_names = data.class_names;
    out.attribute_names = data.attribute_names;
    for (size_t i = 0; i < data.instances.size(); ++i)
        if (data.windows[i] == window)
            out.instances.push_back(data.instances[i]);
    return out;
}

std::vector<std::string> distinct_windows(const Dataset& data) {
    std::vector<std::string> seen;
    for (const auto& w : data.windows)
        if (std::find(seen.begin(), seen.end(), w) == seen.end())
            seen.push_back(w);

    std::vector<std::string> canon;
    for (const auto& w : kSubProfileWindows)
        canon.push_back(window_label(w));
    bool all_canon = std::all_of(seen.begin(), seen.end(), [&](const std::string& w) {
        return std::find(canon.begin(), canon.end(), w) != canon.end();
    });
    if (all_canon && !seen.empty()) {
        std::vector<std::string> ordered;
        for (const auto& w : canon)
            if (std::find(seen.begin(), seen.end(), w) != seen.end())
                ordered.push_back(w);
        return ordered;
    }
    return seen;
}

}  // namespace itele::ml
