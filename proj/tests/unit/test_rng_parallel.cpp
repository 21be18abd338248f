#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qkica/parallel.hpp"
#include "qkica/rng.hpp"

using namespace qkica;

TEST(CounterRng, SameKeySameStream) {
    CounterRng a(42, {1, 2});
    CounterRng b(42, {1, 2});
    for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(CounterRng, StreamsDiffer) {
    CounterRng a(42, {1});
    CounterRng b(42, {2});
    int same = 0;
    for (int i = 0; i < 100; ++i) same += a.next_u64() == b.next_u64();
    EXPECT_EQ(same, 0);
}

TEST(CounterRng, SeekReplaysDraws) {
    CounterRng a(7);
    std::vector<double> first;
    for (int i = 0; i < 10; ++i) first.push_back(a.uniform());
    a.seek(0);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(a.uniform(), first[static_cast<std::size_t>(i)]);
}

TEST(CounterRng, UniformOpenIntervalAndMoments) {
    CounterRng r(3);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sq += u * u;
    }
    EXPECT_NEAR(sum / n, 0.5, 0.005);
    EXPECT_NEAR(sq / n - 0.25, 1.0 / 12.0 - 0.0, 0.005);
}

TEST(CounterRng, NormalMoments) {
    CounterRng r(5);
    double sum = 0.0, sq = 0.0, q = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        sum += z;
        sq += z * z;
        q += z * z * z * z;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sq / n, 1.0, 0.02);
    EXPECT_NEAR(q / n, 3.0, 0.1);
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
    for (int threads : {1, 2, 5}) {
        std::vector<std::atomic<int>> hits(103);
        parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i]++; });
        for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    }
}

TEST(ParallelFor, RethrowsWorkerException) {
    EXPECT_THROW(parallel_for(10, 3,
                              [](std::size_t i) {
                                  if (i == 7) throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}

TEST(ParallelFor, ZeroWorkIsNoop) {
    int calls = 0;
    parallel_for(0, 4, [&](std::size_t) { ++calls; });
    EXPECT_EQ(calls, 0);
}
