#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace itele {

/// A traffic profile is a run of consecutive one-second byte counts for one
/// flow direction. All attributes are computed from it alone.
using Profile = std::vector<uint64_t>;

inline constexpr std::array<int, 5> kCvScales = {1, 2, 4, 8, 16};

inline constexpr std::array<const char*, 7> kAttributeNames = {
    "idle_fraction", "mean_rate", "cv1", "cv2", "cv4", "cv8", "cv16"};
inline constexpr size_t kAttributeCount = kAttributeNames.size();

/// Attribute vector with per-slot availability. A missing slot means the
/// profile was too short (or silent) for that statistic to be defined.
struct AttributeVector {
    std::array<double, kAttributeCount> values{};
    std::array<bool, kAttributeCount> present{};

    double idle_fraction() const { return values[0]; }
    double mean_rate() const { return values[1]; }
};

double mean_rate(const Profile& profile);
double idle_fraction(const Profile& profile);

/// Coefficient of variation of non-overlapping k-second window rates:
/// population standard deviation of the window rates divided by the profile
/// mean rate. Trailing samples that do not fill a window are discarded.
/// Undefined (nullopt) when fewer than 4 whole windows fit or the profile
/// mean is zero.
std::optional<double> coefficient_of_variation(const Profile& profile, int k);

AttributeVector compute_attributes(const Profile& profile);

/// Which CV scales are defined for a profile of the given length (assuming a
/// nonzero mean); used to reason about attribute availability by flow age.
std::vector<int> available_cv_scales(size_t profile_len);

/// The eight training windows carved out of a 128-second profile, as
/// half-open [begin, end) index ranges.
struct SubProfileWindow {
    size_t begin;
    size_t end;
};
inline constexpr std::array<SubProfileWindow, 8> kSubProfileWindows = {{
    {0, 16},
    {0, 32},
    {0, 48},
    {0, 64},
    {16, 80},
    {32, 96},
    {48, 112},
    {64, 128},
}};

std::vector<Profile> split_sub_profiles(const Profile& profile);

/// Canonical window label, 1-based inclusive: {0,16} -> "[1,16]".
std::string window_label(const SubProfileWindow& w);

}  // namespace itele
