#include <gtest/gtest.h>

#include <cmath>

#include "adasense/bounds.hpp"
#include "adasense/rng.hpp"

using namespace adasense;

// Golden values: 40-digit mpmath evaluations of the closed forms.
TEST(DetectionLower, Examples) {
    const auto b = detection_lower_bound(100, 10, 100, 1.0 / (2.0 * std::exp(1.0)));
    EXPECT_NEAR(b.value, 0.447213595499957939, 1e-12);
    EXPECT_FALSE(b.clamped);
    const auto half = detection_lower_bound(100, 10, 100, 0.5);
    EXPECT_EQ(half.value, 0.0);
    EXPECT_TRUE(half.clamped);
    EXPECT_NEAR(detection_lower_bound(1e4, 100, 1e4, 0.05).value, 0.214596602628934724, 1e-12);
    EXPECT_EQ(detection_lower_bound(1e4, 100, 1e4, 0.05).name, "detection_lower");
}

TEST(DetectionLower, Errors) {
    EXPECT_THROW(detection_lower_bound(10, 2, 10, 0.0), InvalidEpsilon);
    EXPECT_THROW(detection_lower_bound(10, 2, 10, 1.0), InvalidEpsilon);
    EXPECT_THROW(detection_lower_bound(10, 2, 0, 0.1), ValidationError);
    EXPECT_THROW(detection_lower_bound(1, 2, 10, 0.1), InvalidDimension);
}

TEST(EstimationLower, Examples) {
    const auto zero = estimation_lower_bound(3, 1, 1, 0.25);
    EXPECT_NEAR(zero.value, 0.0, 1e-7);
    EXPECT_NEAR(estimation_lower_bound(16384, 16, 16384, 0.05).value, 3.18563517757207084, 1e-12);
    // s = 1, large n, eps = 1/(2e): bracket -> 1
    const double n = 1e9;
    EXPECT_NEAR(estimation_lower_bound(n, 1, 4.0, 1.0 / (2.0 * std::exp(1.0))).value, std::sqrt(2 * n / 4.0), 1e-3);
    EXPECT_THROW(estimation_lower_bound(5, 5, 5, 0.1), InvalidSparsity);
    EXPECT_THROW(estimation_lower_bound(5, 2, 5, 1.5), InvalidEpsilon);
    EXPECT_TRUE(estimation_lower_bound(10, 1, 10, 0.45).clamped);
}

TEST(EstimationUpper, Examples) {
    const auto b = estimation_upper_bound(65536, 1, 65536);
    EXPECT_NEAR(b.value, 7.81005453817546573, 1e-12);
    EXPECT_FALSE(b.validity_flag);
    // m = 4n (2 ln(s+1) + 5 ln log2 n) makes the bound exactly 1
    const double n = 1000, s = 7;
    const double m = 4 * n * (2 * std::log(s + 1) + 5 * std::log(std::log2(n)));
    EXPECT_NEAR(estimation_upper_bound(n, s, m).value, 1.0, 1e-14);
    EXPECT_TRUE(estimation_upper_bound(1024, 200, 1024).validity_flag);
    EXPECT_FALSE(estimation_upper_bound(16384, 4, 16384).validity_flag);
    EXPECT_NEAR(estimation_upper_bound(16384, 4, 16384).value, 8.10287911126520357, 1e-12);
    EXPECT_THROW(estimation_upper_bound(4, 1, 4), InvalidDimension);
}

TEST(MdsSufficient, Examples) {
    EXPECT_NEAR(mds_sufficient_magnitude(65536, 256, 65536).value, 0.331284832568076821, 1e-12);
    const double n = 5000;
    const double m = 32 * n * std::log(std::log(std::log(n))) / n;
    EXPECT_NEAR(mds_sufficient_magnitude(n, n, m).value, 1.0, 1e-14);
    EXPECT_FALSE(mds_sufficient_magnitude(16, 1, 16).validity_flag);  // lnlnln 16 = 0.0196 < 1
    EXPECT_TRUE(mds_sufficient_magnitude(1e7, 1, 1e7).validity_flag);    // lnlnln 1e7 = 1.022
    EXPECT_THROW(mds_sufficient_magnitude(15, 1, 15), InvalidDimension);
}

TEST(CsLower, IdenticalToEstimationLower) {
    Rng r(1);
    for (int t = 0; t < 500; ++t) {
        const double n = 2 + double(r.below(100000));
        const double s = 1 + double(r.below(static_cast<std::uint64_t>(n - 1)));
        const double m = 0.1 + 1e5 * r.uniform();
        const double eps = 0.001 + 0.998 * r.uniform();
        const auto a = estimation_lower_bound(n, s, m, eps), b = cs_lower_bound(n, s, m, eps);
        ASSERT_EQ(a.value, b.value);
        ASSERT_EQ(a.clamped, b.clamped);
    }
    EXPECT_EQ(cs_lower_bound(100, 5, 100, 0.1).name, "cs_lower");
}

TEST(Bounds, Monotonicity) {
    Rng r(2);
    for (int t = 0; t < 500; ++t) {
        const double n = 64 + double(r.below(1u << 20));
        const double s = 1 + double(r.below(32));
        const double m = 1 + 1e5 * r.uniform();
        const double eps = 0.01 + 0.45 * r.uniform();
        const double up = 1.0 + r.uniform();
        // non-increasing in m and eps
        ASSERT_GE(detection_lower_bound(n, s, m, eps).value, detection_lower_bound(n, s, m * up, eps).value);
        ASSERT_GE(detection_lower_bound(n, s, m, eps).value,
                  detection_lower_bound(n, s, m, std::min(0.999, eps * up)).value);
        ASSERT_GE(estimation_lower_bound(n, s, m, eps).value, estimation_lower_bound(n, s, m * up, eps).value);
        ASSERT_GE(estimation_lower_bound(n, s, m, eps).value,
                  estimation_lower_bound(n, s, m, std::min(0.999, eps * up)).value);
        ASSERT_GE(estimation_upper_bound(n, s, m).value, estimation_upper_bound(n, s, m * up).value);
        ASSERT_GE(mds_sufficient_magnitude(n, s, m).value, mds_sufficient_magnitude(n, s, m * up).value);
        // non-decreasing in n
        const double n2 = std::floor(n * up);
        ASSERT_LE(detection_lower_bound(n, s, m, eps).value, detection_lower_bound(n2, s, m, eps).value);
        ASSERT_LE(estimation_lower_bound(n, s, m, eps).value, estimation_lower_bound(n2, s, m, eps).value);
        ASSERT_LE(estimation_upper_bound(n, s, m).value, estimation_upper_bound(n2, s, m).value);
        ASSERT_LE(mds_sufficient_magnitude(n, s, m).value, mds_sufficient_magnitude(n2, s, m).value);
    }
}

TEST(Bounds, EstimationExceedsDetectionOnAcceptanceGrid) {
    // checked on the concrete operating points only, where the stated
    // log-term condition holds
    for (double n : {16384.0, 65536.0})
        for (double s : {4.0, 16.0, 256.0})
            for (double eps : {0.05, 0.25}) {
                const double lhs = std::log(s) + std::log((n - s) / (n + 1));
                if (lhs < (1.0 / s - 1.0) * std::log(1.0 / (2 * eps))) continue;
                EXPECT_GE(estimation_lower_bound(n, s, n, eps).value, detection_lower_bound(n, s, n, eps).value);
            }
}
