#include <doctest.h>

#include <random>
#include <set>

#include "gpm/vertex_set.hpp"

using namespace gpm;

namespace {

std::vector<VertexId> sorted_sample(std::mt19937_64& rng, std::size_t n,
                                    VertexId range) {
    std::set<VertexId> s;
    while (s.size() < n) s.insert(rng() % range);
    return {s.begin(), s.end()};
}

} // namespace

TEST_CASE("intersect merge and gallop paths agree with a reference") {
    std::mt19937_64 rng(42);
    for (int t = 0; t < 50; ++t) {
        auto a = sorted_sample(rng, 8, 64);
        auto b = sorted_sample(rng, 1 + rng() % 400, 2048);
        // reference via std::set
        std::vector<VertexId> want;
        for (auto v : a)
            if (std::binary_search(b.begin(), b.end(), v)) want.push_back(v);
        std::vector<VertexId> got(a.size());
        got.resize(intersect(a, b, got.data()));
        CHECK(got == want);
        // commutes
        std::vector<VertexId> got2(a.size());
        got2.resize(intersect(b, a, got2.data()));
        CHECK(got2 == want);
    }
}

TEST_CASE("subtract removes exactly the shared elements") {
    std::vector<VertexId> a{1, 3, 5, 7, 9};
    std::vector<VertexId> b{3, 4, 9, 10};
    std::vector<VertexId> out(a.size());
    out.resize(subtract(a, b, out.data()));
    CHECK(out == std::vector<VertexId>{1, 5, 7});

    out.resize(5);
    out.resize(subtract(a, {}, out.data()));
    CHECK(out == a);
}

TEST_CASE("empty inputs") {
    std::vector<VertexId> a{1, 2, 3};
    VertexId buf[4];
    CHECK(intersect(a, {}, buf) == 0);
    CHECK(intersect({}, a, buf) == 0);
    CHECK(subtract({}, a, buf) == 0);
}
