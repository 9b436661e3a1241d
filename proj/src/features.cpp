#include "itele/features.hpp"

#include <cmath>

#include "itele/common.hpp"

namespace itele {

double mean_rate(const Profile& profile) {
    if (profile.empty())
        throw DataError("mean_rate of empty profile");
    double sum = 0.0;
    for (uint64_t b : profile)
        sum += static_cast<double>(b);
    return sum / static_cast<double>(profile.size());
}

double idle_fraction(const Profile& profile) {
    if (profile.empty())
        throw DataError("idle_fraction of empty profile");
    size_t idle = 0;
    for (uint64_t b : profile)
        if (b == 0)
            ++idle;
    return static_cast<double>(idle) / static_cast<double>(profile.size());
}

std::optional<double> coefficient_of_variation(const Profile& profile, int k) {
    if (profile.empty() || k <= 0)
        return std::nullopt;
    size_t windows = profile.size() / static_cast<size_t>(k);
    if (windows < 4)
        return std::nullopt;
    double mu = mean_rate(profile);
    if (mu <= 0.0)
        return std::nullopt;

    // Window rates over whole windows only; trailing remainder is dropped.
    double sum = 0.0;
    double sum_sq = 0.0;
    for (size_t w = 0; w < windows; ++w) {
        uint64_t bytes = 0;
        for (size_t i = w * k; i < (w + 1) * static_cast<size_t>(k); ++i)
            bytes += profile[i];
        double rate = static_cast<double>(bytes) / static_cast<double>(k);
        sum += rate;
        sum_sq += rate * rate;
    }
    double n = static_cast<double>(windows);
    double mean = sum / n;
    double var = sum_sq / n - mean * mean;
    if (var < 0.0)
        var = 0.0;
    return std::sqrt(var) / mu;
}

AttributeVector compute_attributes(const Profile& profile) {
    AttributeVector out;
    out.values[0] = idle_fraction(profile);
    out.present[0] = true;
    out.values[1] = mean_rate(profile);
    out.present[1] = true;
    for (size_t i = 0; i < kCvScales.size(); ++i) {
        auto cv = coefficient_of_variation(profile, kCvScales[i]);
        out.present[2 + i] = cv.has_value();
        out.values[2 + i] = cv.value_or(0.0);
    }
    return out;
}

std::vector<int> available_cv_scales(size_t profile_len) {
    std::vector<int> out;
    for (int k : kCvScales)
        if (profile_len / static_cast<size_t>(k) >= 4)
            out.push_back(k);
    return out;
}

std::vector<Profile> split_sub_profiles(const Profile& profile) {
    if (profile.size() != 128)
        throw DataError("sub-profiles need exactly 128 samples, got " +
                        std::to_string(profile.size()));
    std::vector<Profile> out;
    out.reserve(kSubProfileWindows.size());
    for (const auto& w : kSubProfileWindows)
        out.emplace_back(profile.begin() + w.begin, profile.begin() + w.end);
    return out;
}

std::string window_label(const SubProfileWindow& w) {
    return "[" + std::to_string(w.begin + 1) + "," + std::to_string(w.end) + "]";
}

}  // namespace itele
