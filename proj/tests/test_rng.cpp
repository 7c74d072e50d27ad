#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "gzsl/rng.hpp"

using gzsl::Rng;

TEST_CASE("same seed reproduces the stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 100; ++i) same += a.next_u64() == b.next_u64();
    CHECK(same < 3);
}

TEST_CASE("zero seed works") {
    Rng r(0);
    std::set<std::uint64_t> vals;
    for (int i = 0; i < 100; ++i) vals.insert(r.next_u64());
    CHECK(vals.size() == 100);
}

TEST_CASE("uniform stays in the half-open unit interval") {
    Rng r(7);
    for (int i = 0; i < 100000; ++i) {
        double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("uniform range respects bounds and mean") {
    Rng r(3);
    double sum = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double u = r.uniform(-2.0, 6.0);
        CHECK(u >= -2.0);
        CHECK(u < 6.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 2.0) < 0.05);
}

TEST_CASE("normal moments") {
    Rng r(11);
    const int n = 200000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        double x = r.normal();
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("index is bounded and covers small ranges") {
    Rng r(5);
    std::set<std::size_t> hit;
    for (int i = 0; i < 1000; ++i) {
        std::size_t k = r.index(7);
        CHECK(k < 7);
        hit.insert(k);
    }
    CHECK(hit.size() == 7);
}

TEST_CASE("shuffle permutes and is seed-stable") {
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<int> w = v;
    Rng a(9);
    a.shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == w);

    std::vector<int> v2 = w;
    Rng b(9);
    b.shuffle(v2);
    CHECK(v == v2);
}

TEST_CASE("fork decorrelates from the parent") {
    Rng parent(123);
    Rng child = parent.fork();
    int same = 0;
    for (int i = 0; i < 100; ++i) same += parent.next_u64() == child.next_u64();
    CHECK(same < 3);
}

TEST_CASE("fill helpers consume the stream deterministically") {
    Rng a(77), b(77);
    std::vector<double> u(50), v(50);
    a.fill_normal(u, 1.0, 2.0);
    b.fill_normal(v, 1.0, 2.0);
    CHECK(u == v);
}
