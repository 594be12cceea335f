#include <doctest.h>

#include <algorithm>

#include "gpm/gen.hpp"
#include "gpm/graph.hpp"

using namespace gpm;

TEST_CASE("fixed-shape generators") {
    CHECK(gen_complete(4).size() == 6);
    CHECK(gen_star(5).size() == 5);
    CHECK(gen_path(5).size() == 4);
    CHECK(gen_cycle(5).size() == 5);
}

TEST_CASE("erdos-renyi is deterministic per seed") {
    auto a = gen_erdos_renyi(64, 0.3, 7);
    auto b = gen_erdos_renyi(64, 0.3, 7);
    CHECK(a == b);
    auto c = gen_erdos_renyi(64, 0.3, 8);
    CHECK(a != c);
}

TEST_CASE("rmat is deterministic and skewed") {
    auto a = gen_rmat(1 << 14, 16, 7);
    auto b = gen_rmat(1 << 14, 16, 7);
    CHECK(a == b);
    auto g = preprocess({a, {}});
    std::vector<std::uint64_t> deg;
    for (VertexId v = 0; v < g.num_vertices; ++v) deg.push_back(g.degree(v));
    std::sort(deg.begin(), deg.end());
    std::uint64_t median = deg[deg.size() / 2];
    std::uint64_t max = deg.back();
    INFO("median=" << median << " max=" << max);
    CHECK(max > 50 * median);
}

TEST_CASE("dispatcher and validation") {
    CHECK(gen_graph("complete", 4, 0, 0, 0).size() == 6);
    CHECK_THROWS_AS(gen_graph("nope", 4, 0, 0, 0), ConfigError);
    CHECK_THROWS_AS(gen_erdos_renyi(8, 1.5, 0), ConfigError);
}
