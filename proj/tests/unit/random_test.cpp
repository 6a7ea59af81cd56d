#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "hfrisk/error.hpp"
#include "hfrisk/random.hpp"

using namespace hfrisk;

TEST(DeriveSeed, StableAndTagSensitive) {
    EXPECT_EQ(derive_seed(42, "cohort"), derive_seed(42, "cohort"));
    EXPECT_NE(derive_seed(42, "cohort"), derive_seed(42, "prep"));
    EXPECT_NE(derive_seed(42, "cohort"), derive_seed(43, "cohort"));
    EXPECT_NE(derive_seed(42, std::uint64_t{0}), derive_seed(42, std::uint64_t{1}));
}

TEST(Rng, SameSeedSameStream) {
    Rng a(7), b(7);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.bits(), b.bits());
}

TEST(Rng, UniformRanges) {
    Rng rng(1);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
        const double o = rng.uniform_open();
        EXPECT_GT(o, 0.0);
        EXPECT_LT(o, 1.0);
        EXPECT_LT(rng.index(7), 7u);
    }
}

TEST(Rng, NormalMoments) {
    Rng rng(3);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, ShuffleIsPermutation) {
    Rng rng(5);
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    rng.shuffle(std::span<int>(v));
    EXPECT_EQ(std::set<int>(v.begin(), v.end()).size(), 10u);
}

TEST(ErrorCodes, CategoryMapping) {
    EXPECT_EQ(exit_code_for(ConfigError("x").category()), 2);
    EXPECT_EQ(exit_code_for(SchemaError("x").category()), 3);
    EXPECT_EQ(exit_code_for(NumericError("x").category()), 4);
}
