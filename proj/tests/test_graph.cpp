#include <doctest.h>

#include <random>
#include <sstream>

#include "gpm/gen.hpp"
#include "gpm/graph.hpp"

using namespace gpm;

namespace {

Graph from_edges(const std::vector<std::pair<VertexId, VertexId>>& edges) {
    RawEdges raw;
    raw.edges = edges;
    return preprocess(raw);
}

} // namespace

TEST_CASE("load_edge_list parses pairs and keeps duplicates") {
    std::istringstream in("0 1\n1 2\n");
    auto raw = load_edge_list(in);
    REQUIRE(raw.edges.size() == 2);
    CHECK(raw.edges[0] == std::pair<VertexId, VertexId>{0, 1});
    CHECK(raw.edges[1] == std::pair<VertexId, VertexId>{1, 2});

    std::istringstream dup("0 1\n1 0\n0 1\n");
    CHECK(load_edge_list(dup).edges.size() == 3);

    std::istringstream loop("0 0\n0 1\n");
    auto raw2 = load_edge_list(loop);
    CHECK(raw2.edges.size() == 2); // self-loop kept until preprocess
}

TEST_CASE("load_edge_list rejects malformed input") {
    std::istringstream bad("0 1\nnope\n");
    CHECK_THROWS_WITH_AS(load_edge_list(bad),
                         doctest::Contains("line 2"), ParseError);
    std::istringstream empty("# only a comment\n");
    CHECK_THROWS_AS(load_edge_list(empty), ParseError);
    std::istringstream extra("0 1 2\n");
    CHECK_THROWS_AS(load_edge_list(extra), ParseError);
}

TEST_CASE("preprocess removes self-loops and duplicates, remaps densely") {
    auto g = from_edges({{0, 0}, {0, 1}});
    REQUIRE(g.num_vertices == 2);
    CHECK(g.degree(0) == 1);
    CHECK(g.degree(1) == 1);
    CHECK(g.neighbors_of(0)[0] == 1);
    CHECK(g.neighbors_of(1)[0] == 0);

    auto g2 = from_edges({{0, 1}, {1, 0}});
    CHECK(g2.num_directed_edges() == 2);
    CHECK(g2.degree(0) == 1);

    // K4 with scattered original ids: degrees all 3, ids remapped dense
    auto g3 = from_edges({{10, 20}, {10, 30}, {10, 40}, {20, 30}, {20, 40}, {30, 40}});
    REQUIRE(g3.num_vertices == 4);
    for (VertexId v = 0; v < 4; ++v) CHECK(g3.degree(v) == 3);
}

TEST_CASE("preprocess remaps in first-appearance order") {
    auto g = from_edges({{7, 3}, {3, 9}});
    // 7 -> 0, 3 -> 1, 9 -> 2
    REQUIRE(g.num_vertices == 3);
    CHECK(g.degree(1) == 2);
    CHECK(g.neighbors_of(0)[0] == 1);
}

TEST_CASE("orientation produces a DAG covering every edge once") {
    auto k4 = from_edges(gen_complete(4));
    auto d = orient(k4);
    CHECK(d.num_directed_edges() == 6);
    std::vector<std::uint64_t> outdeg;
    for (VertexId v = 0; v < 4; ++v) outdeg.push_back(d.degree(v));
    std::sort(outdeg.begin(), outdeg.end());
    CHECK(outdeg == std::vector<std::uint64_t>{0, 1, 2, 3});

    // star: all edges point leaf -> center
    auto star = from_edges(gen_star(5));
    auto ds = orient(star);
    CHECK(ds.degree(0) == 0); // center (highest degree) keeps nothing
    for (VertexId v = 1; v <= 5; ++v) {
        REQUIRE(ds.degree(v) == 1);
        CHECK(ds.neighbors_of(v)[0] == 0);
    }
}

TEST_CASE("orientation soundness on random graphs") {
    for (std::uint64_t seed : {7u, 8u, 9u}) {
        auto g = preprocess({gen_erdos_renyi(32, 0.3, seed), {}});
        auto d = orient(g);
        CHECK(d.num_directed_edges() * 2 == g.num_directed_edges());
        // topological-sort check: count in-degrees, peel
        std::vector<std::uint64_t> indeg(d.num_vertices, 0);
        for (VertexId u = 0; u < d.num_vertices; ++u)
            for (VertexId v : d.neighbors_of(u)) ++indeg[v];
        std::vector<VertexId> queue;
        for (VertexId v = 0; v < d.num_vertices; ++v)
            if (indeg[v] == 0) queue.push_back(v);
        std::uint64_t seen = 0;
        while (!queue.empty()) {
            VertexId u = queue.back();
            queue.pop_back();
            ++seen;
            for (VertexId v : d.neighbors_of(u))
                if (--indeg[v] == 0) queue.push_back(v);
        }
        CHECK(seen == d.num_vertices); // acyclic
    }
}

TEST_CASE("partition respects the map and covers the graph") {
    auto path = from_edges({{0, 1}, {1, 2}});
    auto parts = partition(path, PartitionMap::modulo(2));
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].num_owned() == 2);
    CHECK(parts[1].num_owned() == 1);
    CHECK(parts[0].local_edge_list(0).size() == 1);
    CHECK(parts[0].local_edge_list(2).size() == 1);
    auto center = parts[1].local_edge_list(1);
    REQUIRE(center.size() == 2);
    CHECK(center[0] == 0);
    CHECK(center[1] == 2);

    CHECK_THROWS_AS(parts[0].local_edge_list(1), OwnershipError);
    CHECK_THROWS_AS(PartitionMap::modulo(0), ConfigError);

    // single partition is the identity
    auto whole = partition(path, PartitionMap::modulo(1));
    CHECK(whole[0].num_owned() == 3);
}

TEST_CASE("partition coverage is disjoint and complete") {
    auto g = preprocess({gen_erdos_renyi(64, 0.1, 7), {}});
    for (PartitionId n : {1u, 2u, 4u, 8u}) {
        auto parts = partition(g, PartitionMap::modulo(n));
        std::vector<int> owners(g.num_vertices, 0);
        for (auto& p : parts)
            for (VertexId v : p.owned_vertices()) ++owners[v];
        for (VertexId v = 0; v < g.num_vertices; ++v) CHECK(owners[v] == 1);
        // symmetry on the union of partitioned data
        for (auto& p : parts) {
            for (VertexId v : p.owned_vertices()) {
                for (VertexId u : p.local_edge_list(v)) {
                    auto nb = g.neighbors_of(u);
                    CHECK(std::binary_search(nb.begin(), nb.end(), v));
                }
            }
        }
    }
}

TEST_CASE("edge list round-trips through write/load/preprocess") {
    std::mt19937_64 seeds(3);
    for (int t = 0; t < 4; ++t) {
        auto g = preprocess({gen_erdos_renyi(256, 0.05, seeds()), {}});
        std::stringstream buf;
        write_edge_list(buf, g);
        auto g2 = preprocess(load_edge_list(buf));
        REQUIRE(g2.num_vertices == g.num_vertices);
        CHECK(g2.offsets == g.offsets);
        CHECK(g2.neighbors == g.neighbors);
    }
}

TEST_CASE("partitioned graph binary dump round-trips") {
    auto g = preprocess({gen_erdos_renyi(48, 0.2, 7), {}});
    auto map = PartitionMap::modulo(4);
    auto parts = partition(g, map);
    std::stringstream buf;
    parts[2].save(buf);
    auto loaded = PartitionedGraph::load(buf, map);
    CHECK(loaded.my_partition() == 2);
    CHECK(loaded.num_vertices() == g.num_vertices);
    CHECK(loaded.num_owned() == parts[2].num_owned());
    for (VertexId v : parts[2].owned_vertices()) {
        auto a = parts[2].local_edge_list(v);
        auto b = loaded.local_edge_list(v);
        REQUIRE(a.size() == b.size());
        CHECK(std::equal(a.begin(), a.end(), b.begin()));
    }
    CHECK(loaded.graph_bytes() == parts[2].graph_bytes());
}

TEST_CASE("labels load and survive remapping") {
    RawEdges raw;
    raw.edges = {{5, 6}, {6, 7}};
    std::istringstream labels("5 1\n6 2\n7 1\n");
    load_labels(labels, raw);
    auto g = preprocess(raw);
    REQUIRE(g.labels.size() == 3);
    CHECK(g.labels[0] == 1); // original 5
    CHECK(g.labels[1] == 2); // original 6
    CHECK(g.labels[2] == 1); // original 7
}
