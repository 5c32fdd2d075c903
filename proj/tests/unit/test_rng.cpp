#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fdilab/rng.hpp"

using fdilab::SplitMix64;

TEST(SplitMix64, ReferenceOutputsSeedZero) {
    SplitMix64 rng(0);
    EXPECT_EQ(rng.next(), 0xE220A8397B1DCDAFull);
    EXPECT_EQ(rng.next(), 0x6E789E6AA1B965F4ull);
    EXPECT_EQ(rng.next(), 0x06C45D188009454Full);
}

TEST(SplitMix64, ReferenceOutputsSeed42) {
    SplitMix64 rng(42);
    EXPECT_EQ(rng.next(), 0xbdd732262feb6e95ull);
    EXPECT_EQ(rng.next(), 0x28efe333b266f103ull);
    EXPECT_EQ(rng.next(), 0x47526757130f9f52ull);
}

TEST(SplitMix64, AtDoesNotAdvance) {
    SplitMix64 rng(7);
    const auto third = rng.at(2);
    EXPECT_EQ(rng.counter(), 0u);
    rng.next();
    rng.next();
    EXPECT_EQ(rng.next(), third);
}

TEST(SplitMix64, UniformInUnitInterval) {
    SplitMix64 rng(3);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(SplitMix64, NormalMomentsAndCounter) {
    SplitMix64 rng(11);
    const int n = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    EXPECT_EQ(rng.counter(), 2u * n);
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(SplitMix64, DerivedStreamsDiffer) {
    EXPECT_NE(SplitMix64::derive(5, 0), SplitMix64::derive(5, 1));
    EXPECT_NE(SplitMix64::derive(5, 0), SplitMix64::derive(6, 0));
    EXPECT_EQ(SplitMix64::derive(5, 3), SplitMix64::derive(5, 3));
}
