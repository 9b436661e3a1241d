#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "itele/common.hpp"
#include "itele/features.hpp"
#include "itele/rng.hpp"

using namespace itele;

namespace {

// Independent reference: two-pass population sigma over long doubles.
std::optional<long double> cv_oracle(const Profile& profile, int k) {
    size_t windows = profile.size() / size_t(k);
    if (windows < 4)
        return std::nullopt;
    long double total = 0;
    for (uint64_t b : profile)
        total += b;
    long double mu = total / (long double)profile.size();
    if (mu <= 0)
        return std::nullopt;
    std::vector<long double> rates;
    for (size_t w = 0; w < windows; ++w) {
        long double bytes = 0;
        for (size_t i = w * k; i < (w + 1) * size_t(k); ++i)
            bytes += profile[i];
        rates.push_back(bytes / k);
    }
    long double mean = 0;
    for (long double r : rates)
        mean += r;
    mean /= rates.size();
    long double var = 0;
    for (long double r : rates)
        var += (r - mean) * (r - mean);
    var /= rates.size();
    return sqrtl(var) / mu;
}

Profile random_profile(Rng& rng, size_t len, double zero_prob = 0.2) {
    Profile p(len);
    for (auto& b : p)
        b = rng.uniform() < zero_prob ? 0 : rng.uniform_int(2'000'000);
    return p;
}

}  // namespace

TEST_CASE("mean rate and idle fraction on hand-checked profiles") {
    CHECK(mean_rate({10, 20, 30}) == doctest::Approx(20.0));
    CHECK(mean_rate({0, 0, 0, 4}) == doctest::Approx(1.0));
    CHECK(idle_fraction({0, 5, 0, 3}) == doctest::Approx(0.5));
    CHECK(idle_fraction({1, 2, 3}) == doctest::Approx(0.0));
    CHECK(idle_fraction({0, 0}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(mean_rate({}), DataError);
    CHECK_THROWS_AS(idle_fraction({}), DataError);
}

TEST_CASE("cv1 of a two-level profile is exactly 1") {
    // rates {0,0,8,8}: mu = 4, sigma = 4.
    auto cv = coefficient_of_variation({0, 0, 8, 8}, 1);
    REQUIRE(cv.has_value());
    CHECK(*cv == doctest::Approx(1.0));
}

TEST_CASE("constant profile has zero variation at every scale") {
    Profile p(64, 1000);
    for (int k : kCvScales) {
        auto cv = coefficient_of_variation(p, k);
        REQUIRE(cv.has_value());
        CHECK(*cv == doctest::Approx(0.0));
    }
}

TEST_CASE("window aggregation averages out fine structure") {
    // Alternating 0/8: cv1 = 1 but every 2-second window holds the same 8
    // bytes, so cv2 = 0.
    Profile p;
    for (int i = 0; i < 16; ++i)
        p.push_back(i % 2 ? 8 : 0);
    CHECK(*coefficient_of_variation(p, 1) == doctest::Approx(1.0));
    CHECK(*coefficient_of_variation(p, 2) == doctest::Approx(0.0));
}

TEST_CASE("trailing partial window is discarded") {
    // len 9, k 2: four whole windows, the final 1000000 never participates.
    Profile p = {4, 4, 4, 4, 4, 4, 4, 4, 1'000'000};
    auto cv = coefficient_of_variation(p, 2);
    REQUIRE(cv.has_value());
    // All four window rates equal 4, so sigma = 0 regardless of the tail.
    CHECK(*cv == doctest::Approx(0.0));
}

TEST_CASE("cv undefined below four windows or at zero mean") {
    CHECK_FALSE(coefficient_of_variation({1, 2, 3}, 1).has_value());
    CHECK_FALSE(coefficient_of_variation({0, 0, 8, 8}, 2).has_value());  // 2 windows
    CHECK_FALSE(coefficient_of_variation(Profile(64, 0), 1).has_value());
    CHECK_FALSE(coefficient_of_variation({1, 2, 3, 4}, 0).has_value());
}

TEST_CASE("cv matches the two-pass oracle on random profiles") {
    Rng rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        size_t len = 1 + rng.uniform_int(200);
        Profile p = random_profile(rng, len);
        for (int k : kCvScales) {
            auto got = coefficient_of_variation(p, k);
            auto want = cv_oracle(p, k);
            REQUIRE(got.has_value() == want.has_value());
            if (!got)
                continue;
            double w = double(*want);
            CHECK(std::abs(*got - w) <= 1e-9 * std::max(1.0, std::abs(w)));
        }
    }
}

TEST_CASE("availability follows floor(len/k) >= 4 exactly") {
    CHECK(available_cv_scales(3) == std::vector<int>{});
    CHECK(available_cv_scales(4) == std::vector<int>{1});
    CHECK(available_cv_scales(7) == std::vector<int>{1});
    CHECK(available_cv_scales(8) == std::vector<int>{1, 2});
    CHECK(available_cv_scales(16) == std::vector<int>{1, 2, 4});
    CHECK(available_cv_scales(20) == std::vector<int>{1, 2, 4});
    CHECK(available_cv_scales(31) == std::vector<int>{1, 2, 4});
    CHECK(available_cv_scales(32) == std::vector<int>{1, 2, 4, 8});
    CHECK(available_cv_scales(64) == std::vector<int>{1, 2, 4, 8, 16});
    CHECK(available_cv_scales(128) == std::vector<int>{1, 2, 4, 8, 16});
}

TEST_CASE("availability property holds for 1000 random lengths") {
    Rng rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        size_t len = rng.uniform_int(400);
        auto scales = available_cv_scales(len);
        std::set<int> got(scales.begin(), scales.end());
        for (int k : kCvScales) {
            bool want = len / size_t(k) >= 4;
            CHECK(got.count(k) == size_t(want));
        }
        // The full attribute vector agrees whenever the profile is nonzero.
        if (len == 0)
            continue;
        Profile p(len, 100);
        auto attrs = compute_attributes(p);
        CHECK(attrs.present[0]);
        CHECK(attrs.present[1]);
        for (size_t i = 0; i < kCvScales.size(); ++i)
            CHECK(attrs.present[2 + i] == (got.count(kCvScales[i]) > 0));
    }
}

TEST_CASE("all-zero profile defines idle and mean but no cv") {
    auto attrs = compute_attributes(Profile(64, 0));
    CHECK(attrs.present[0]);
    CHECK(attrs.idle_fraction() == doctest::Approx(1.0));
    CHECK(attrs.present[1]);
    CHECK(attrs.mean_rate() == doctest::Approx(0.0));
    for (size_t i = 2; i < kAttributeCount; ++i)
        CHECK_FALSE(attrs.present[i]);
}

TEST_CASE("attribute vector layout is the canonical seven") {
    REQUIRE(kAttributeCount == 7);
    CHECK(std::string(kAttributeNames[0]) == "idle_fraction");
    CHECK(std::string(kAttributeNames[1]) == "mean_rate");
    CHECK(std::string(kAttributeNames[2]) == "cv1");
    CHECK(std::string(kAttributeNames[6]) == "cv16");
}

TEST_CASE("sub-profile windows cover the documented eight slices") {
    REQUIRE(kSubProfileWindows.size() == 8);
    CHECK(window_label(kSubProfileWindows[0]) == "[1,16]");
    CHECK(window_label(kSubProfileWindows[1]) == "[1,32]");
    CHECK(window_label(kSubProfileWindows[2]) == "[1,48]");
    CHECK(window_label(kSubProfileWindows[3]) == "[1,64]");
    CHECK(window_label(kSubProfileWindows[4]) == "[17,80]");
    CHECK(window_label(kSubProfileWindows[5]) == "[33,96]");
    CHECK(window_label(kSubProfileWindows[6]) == "[49,112]");
    CHECK(window_label(kSubProfileWindows[7]) == "[65,128]");

    // First four anchored at the start and growing by 16; last four sliding
    // 64-second windows stepping by 16.
    for (size_t i = 0; i < 4; ++i) {
        CHECK(kSubProfileWindows[i].begin == 0);
        CHECK(kSubProfileWindows[i].end == 16 * (i + 1));
    }
    for (size_t i = 4; i < 8; ++i) {
        CHECK(kSubProfileWindows[i].begin == 16 * (i - 3));
        CHECK(kSubProfileWindows[i].end - kSubProfileWindows[i].begin == 64);
    }
}

TEST_CASE("split_sub_profiles slices verbatim and rejects other lengths") {
    Rng rng(3);
    Profile p = random_profile(rng, 128, 0.1);
    auto subs = split_sub_profiles(p);
    REQUIRE(subs.size() == 8);
    for (size_t i = 0; i < 8; ++i) {
        const auto& w = kSubProfileWindows[i];
        REQUIRE(subs[i].size() == w.end - w.begin);
        for (size_t j = 0; j < subs[i].size(); ++j)
            CHECK(subs[i][j] == p[w.begin + j]);
    }
    CHECK_THROWS_AS(split_sub_profiles(Profile(127, 1)), DataError);
    CHECK_THROWS_AS(split_sub_profiles(Profile(129, 1)), DataError);
}
