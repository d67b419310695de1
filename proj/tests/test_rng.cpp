#include <vector>

#include "doctest.h"
#include "umom/rng.hpp"

using namespace umom;

TEST_CASE("derived streams are reproducible and distinct") {
    CHECK(derive_seed(42, 0) == derive_seed(42, 0));
    CHECK(derive_seed(42, 0) != derive_seed(42, 1));
    CHECK(derive_seed(42, 7) != derive_seed(43, 7));

    Engine a(derive_seed(99, 3));
    Engine b(derive_seed(99, 3));
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("uniform01 stays in [0,1) and below() respects its bound") {
    Engine rng(123);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (std::uint64_t n : {1ULL, 2ULL, 7ULL, 1000ULL}) {
        for (int i = 0; i < 2000; ++i) {
            CHECK(rng.below(n) < n);
        }
    }
}

TEST_CASE("below() covers small ranges roughly uniformly") {
    Engine rng(7);
    std::vector<int> counts(5, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ++counts[rng.below(5)];
    for (int c : counts) {
        CHECK(c > draws / 5 - 1000);
        CHECK(c < draws / 5 + 1000);
    }
}
