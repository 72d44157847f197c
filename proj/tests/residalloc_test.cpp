#include "oracle.hpp"

#include "hummingbird/error.hpp"
#include "hummingbird/residalloc.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>

using namespace hummingbird;
using namespace hummingbird::residalloc;

namespace {

struct Held
{
    std::int64_t start, end;
    std::uint32_t id;
};

/// First Fit by brute force over the currently held intervals.
std::uint32_t first_fit(const std::map<Handle, Held>& held, std::int64_t start, std::int64_t end)
{
    for (std::uint32_t id = 0;; ++id) {
        bool used = false;
        for (const auto& [_, h] : held)
            if (h.id == id && h.start < end && start < h.end) used = true;
        if (!used) return id;
    }
}

void check_no_concurrent_duplicates(const std::map<Handle, Held>& held)
{
    for (auto a = held.begin(); a != held.end(); ++a)
        for (auto b = std::next(a); b != held.end(); ++b)
            if (a->second.id == b->second.id) {
                ASSERT_FALSE(a->second.start < b->second.end && b->second.start < a->second.end)
                    << "handles " << a->first << " and " << b->first << " share id " << a->second.id;
            }
}

} // namespace

TEST(ResIdAlloc, FirstFitExample)
{
    FirstFitAllocator a;
    EXPECT_EQ(a.assign({0, 10, 1}), 0u);
    EXPECT_EQ(a.assign({5, 15, 2}), 1u);
    EXPECT_EQ(a.assign({12, 20, 3}), 0u);
    EXPECT_EQ(a.high_water(), 2u);
}

TEST(ResIdAlloc, DisjointAllZeroAndCliqueDistinct)
{
    FirstFitAllocator a;
    for (Handle h = 0; h < 50; ++h) EXPECT_EQ(a.assign({std::int64_t(h) * 10, std::int64_t(h) * 10 + 10, h}), 0u);
    FirstFitAllocator c;
    for (Handle h = 0; h < 50; ++h) EXPECT_EQ(c.assign({0, 100 + std::int64_t(h), h}), h);
}

TEST(ResIdAlloc, ReleaseAndReuse)
{
    FirstFitAllocator a;
    EXPECT_EQ(a.assign({0, 10, 1}), 0u);
    a.release(1);
    EXPECT_EQ(a.assign({20, 30, 2}), 0u);
    EXPECT_EQ(a.assign({0, 40, 3}), 1u);
    a.release(2);
    EXPECT_EQ(a.assign({5, 6, 4}), 0u);
    try {
        a.release(99);
        FAIL() << "unknown handle accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::unknown_handle);
    }
}

TEST(ResIdAlloc, ExpiredIntervalsCollectedLazily)
{
    FirstFitAllocator a;
    EXPECT_EQ(a.assign({0, 10, 1}), 0u);
    EXPECT_EQ(a.assign({0, 100, 2}, 10), 0u);
    EXPECT_EQ(a.active_count(), 1u);
    EXPECT_EQ(a.assign({20, 30, 3}, 10), 1u);
    a.collect_expired(100);
    EXPECT_EQ(a.active_count(), 0u);
}

TEST(ResIdAlloc, CapacityExhaustion)
{
    FirstFitAllocator a(3);
    for (Handle h = 0; h < 3; ++h) a.assign({0, 10, h});
    try {
        a.assign({5, 6, 9});
        FAIL() << "fourth concurrent id assigned";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::id_space_exhausted);
    }
    EXPECT_EQ(a.assign({10, 20, 10}), 0u);
}

TEST(ResIdAlloc, ScopeIsPerIngress)
{
    ResIdAllocator a;
    EXPECT_EQ(a.assign(1, {0, 10, 1}), 0u);
    EXPECT_EQ(a.assign(2, {0, 10, 2}), 0u);
    EXPECT_EQ(a.assign(1, {0, 10, 3}), 1u);
    ASSERT_NE(a.find(1), nullptr);
    EXPECT_EQ(a.find(1)->active_count(), 2u);
    EXPECT_EQ(a.find(3), nullptr);
}

TEST(ResIdAlloc, OptimalColoringExamples)
{
    const std::vector<ReservationInterval> ex{{0, 10, 0}, {5, 15, 1}, {12, 20, 2}};
    EXPECT_EQ(optimal_coloring(ex), 2u);
    const std::vector<ReservationInterval> disjoint{{0, 1, 0}, {1, 2, 1}, {5, 9, 2}};
    EXPECT_EQ(optimal_coloring(disjoint), 1u);
    std::vector<ReservationInterval> nested;
    for (int k = 0; k < 7; ++k) nested.push_back({k, 100 - k, Handle(k)});
    EXPECT_EQ(optimal_coloring(nested), 7u);
    EXPECT_EQ(optimal_coloring(std::vector<ReservationInterval>{}), 0u);
}

TEST(ResIdAlloc, OptimalColoringMatchesBruteForce)
{
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<ReservationInterval> v;
        const int n = 1 + int(rng() % 60);
        for (int i = 0; i < n; ++i) {
            const auto s = std::int64_t(rng() % 1000);
            v.push_back({s, s + 1 + std::int64_t(rng() % 200), Handle(i)});
        }
        ASSERT_EQ(optimal_coloring(v), oracle::max_overlap(v));
    }
}

TEST(ResIdAlloc, RandomAssignReleaseMatchesBruteForceFirstFit)
{
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        FirstFitAllocator a;
        std::map<Handle, Held> held;
        Handle next = 0;
        for (int op = 0; op < 400; ++op) {
            if (!held.empty() && rng() % 4 == 0) {
                auto it = held.begin();
                std::advance(it, long(rng() % held.size()));
                a.release(it->first);
                held.erase(it);
            } else {
                const auto s = std::int64_t(rng() % 5000);
                const auto e = s + 1 + std::int64_t(rng() % 800);
                const auto expect = first_fit(held, s, e);
                const auto id = a.assign({s, e, next});
                ASSERT_EQ(id, expect);
                held[next++] = Held{s, e, id};
            }
            check_no_concurrent_duplicates(held);
            ASSERT_EQ(a.active_count(), held.size());
        }
    }
}
