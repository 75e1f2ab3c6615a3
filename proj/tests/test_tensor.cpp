#include <doctest.h>

#include "stroke/rng.hpp"
#include "stroke/tensor.hpp"

using namespace stroke;

TEST_CASE("shape bookkeeping") {
    Tensor t({2, 3, 4});
    CHECK(t.size() == 24);
    CHECK(t.rank() == 3);
    CHECK(t.dim(1) == 3);
    CHECK(numel(t.shape) == 24);
    CHECK(strides_of(t.shape) == Shape{12, 4, 1});
    for (std::int64_t i = 0; i < t.size(); ++i) {
        CHECK(t[i] == 0.0f);
    }
}

TEST_CASE("data length must match the shape") {
    CHECK_THROWS_AS(Tensor({2, 2}, std::vector<float>{1.0f, 2.0f, 3.0f}), DimensionError);
    CHECK_THROWS_AS(Tensor({0, 4}), DimensionError);
    CHECK_THROWS_AS(Tensor({2, -1}), DimensionError);
}

TEST_CASE("fill and cast") {
    Tensor t({2, 2}, 1.5f);
    const Tensor64 d = cast<double>(t);
    CHECK(d.shape == t.shape);
    CHECK(d[3] == doctest::Approx(1.5));
}

TEST_CASE("rng is deterministic and splits streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    Rng c(42);
    CHECK(c.fork(0).next_u64() != c.fork(1).next_u64());

    // uniform stays in [0,1); normal has roughly the right spread
    Rng r(7);
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double g = r.normal();
        sum += g;
        sq += g * g;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("shuffle is a permutation") {
    Rng r(3);
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    auto w = v;
    r.shuffle(w.begin(), w.end());
    auto sorted = w;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == v);
}
