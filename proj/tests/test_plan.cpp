#include <doctest.h>

#include <sstream>

#include "gpm/gen.hpp"
#include "gpm/graph.hpp"
#include "gpm/oracle.hpp"
#include "gpm/plan.hpp"

using namespace gpm;

namespace {

std::vector<std::vector<VertexId>> adjacency(const Graph& g) {
    std::vector<std::vector<VertexId>> adj(g.num_vertices);
    for (VertexId v = 0; v < g.num_vertices; ++v) {
        auto nb = g.neighbors_of(v);
        adj[v].assign(nb.begin(), nb.end());
    }
    return adj;
}

Graph er(std::uint64_t n, double p, std::uint64_t seed) {
    return preprocess({gen_erdos_renyi(n, p, seed), {}});
}

} // namespace

TEST_CASE("clique plans validate and self-match once") {
    for (std::uint32_t k : {3u, 4u, 5u}) {
        auto plan = clique_plan(k);
        auto check = validate_plan(plan, clique_pattern(k));
        CHECK(check.ok);
        CHECK(check.self_match_count == 1);
        // intersect everything seen so far, keep everything active
        for (std::uint32_t p = 1; p < k; ++p)
            CHECK(plan.intersect_sources[p].size() == p);
        for (std::uint32_t d = 0; d + 1 < k; ++d)
            CHECK(plan.active_after[d].size() == d + 1);
    }
    CHECK_THROWS_AS(clique_plan(2), ConfigError);
}

TEST_CASE("clique reuse annotations follow the running intersection") {
    auto plan = clique_plan(5);
    CHECK(plan.reuse_from_parent[3]);
    CHECK(plan.reuse_from_parent[4]);
    CHECK(plan.store_intersection[2]);
    CHECK(plan.store_intersection[3]);
    CHECK_FALSE(plan.store_intersection[1]);
    auto tri = clique_plan(3);
    CHECK_FALSE(tri.store_intersection[1]); // no deeper level to feed
}

TEST_CASE("motif plans validate and break symmetry exactly") {
    for (std::uint32_t k : {3u, 4u}) {
        auto motifs = motif_patterns(k);
        CHECK(motifs.size() == (k == 3 ? 2 : 6));
        for (auto& [pattern, plan] : motifs) {
            auto check = validate_plan(plan, pattern);
            INFO(plan.name << ": " << check.message);
            CHECK(check.ok);
            CHECK(check.self_match_count == 1);
        }
    }
    CHECK_THROWS_AS(motif_patterns(5), ConfigError);
}

TEST_CASE("validate_plan flags a dropped-but-needed active position") {
    auto plan = clique_plan(4);
    // drop position 0 from depth-2 actives although level 3 intersects it
    auto& act = plan.active_after[2];
    act.erase(act.begin());
    auto check = validate_plan(plan, clique_pattern(4));
    CHECK_FALSE(check.ok);
    CHECK(check.level == 3);
}

TEST_CASE("validate_plan flags re-activation") {
    auto plan = clique_plan(4);
    plan.active_after[1] = {1};       // drops 0 early (also breaks coverage)
    plan.active_after[2] = {0, 1, 2}; // 0 comes back
    auto check = validate_plan(plan, clique_pattern(4));
    CHECK_FALSE(check.ok);
}

TEST_CASE("interpreter counts on analytic graphs") {
    auto k4 = adjacency(preprocess({gen_complete(4), {}}));
    CHECK(enumerate_plan(clique_plan(3), k4) == 4);
    auto k5 = adjacency(preprocess({gen_complete(5), {}}));
    CHECK(enumerate_plan(clique_plan(4), k5) == 5);

    auto m3 = motif_patterns(3);
    CHECK(enumerate_plan(m3[0].second, k4) == 4); // triangle
    CHECK(enumerate_plan(m3[1].second, k4) == 0); // wedge, vertex-induced

    auto star4 = adjacency(preprocess({gen_star(4), {}}));
    CHECK(enumerate_plan(m3[0].second, star4) == 0);
    CHECK(enumerate_plan(m3[1].second, star4) == 6); // C(4,2)
}

TEST_CASE("interpreter agrees with the oracle on random graphs") {
    using oracle::OracleSemantics;
    for (std::uint64_t seed : {11u, 12u}) {
        auto g = er(20, 0.4, seed);
        auto adj = adjacency(g);
        for (auto& [pattern, plan] : motif_patterns(4)) {
            oracle::OraclePattern op{pattern.k, pattern.edges};
            auto want = oracle::oracle_count(g, op, OracleSemantics::VertexInduced);
            INFO(plan.name);
            CHECK(enumerate_plan(plan, adj) == want);
        }
    }
}

TEST_CASE("removing restrictions multiplies clique counts by |Aut|") {
    auto g = er(32, 0.5, 7);
    auto adj = adjacency(g);
    auto restricted = enumerate_plan(clique_plan(3, true), adj);
    auto free = enumerate_plan(clique_plan(3, false), adj);
    CHECK(free == 6 * restricted);
}

TEST_CASE("plan text format round-trips") {
    for (auto& [pattern, plan] : motif_patterns(4)) {
        std::stringstream buf;
        format_plan(buf, plan);
        auto parsed = parse_plan(buf);
        CHECK(parsed.k == plan.k);
        CHECK(parsed.semantics == plan.semantics);
        CHECK(parsed.intersect_sources == plan.intersect_sources);
        CHECK(parsed.anti_sources == plan.anti_sources);
        CHECK(parsed.active_after == plan.active_after);
        // restriction order may differ; compare as sets
        auto a = plan.restrictions, b = parsed.restrictions;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
        CHECK(validate_plan(parsed, pattern).ok);
    }
    std::istringstream bad("level 0: intersect=[] anti=[] restrict=[] active=[]\n");
    CHECK_THROWS_AS(parse_plan(bad), ParseError);
}

TEST_CASE("make_app wiring") {
    CHECK(make_app("tc").plans.size() == 1);
    CHECK(make_app("3mc").plans.size() == 2);
    CHECK(make_app("4mc").plans.size() == 6);
    CHECK(make_app("kcc:5").plans[0].k == 5);
    CHECK_THROWS_AS(make_app("frobnicate"), ConfigError);
    CHECK_THROWS_AS(make_app("3mc", /*oriented=*/true), ConfigError);
    // oriented clique plans carry no restrictions
    CHECK(make_app("tc", true).plans[0].restrictions.empty());
}

TEST_CASE("labeled matching filters by position label") {
    Pattern p;
    p.k = 3;
    p.edges = {{0, 1}, {0, 2}, {1, 2}};
    p.labels = {1, 2, 2};
    auto plan = plan_from_pattern(p, Semantics::VertexInduced, {{1, 2}}, "ltri");
    // triangle 0-1-2 labeled (1,2,2) plus triangle 0-1-3 labeled (1,2,1)
    std::vector<std::vector<VertexId>> adj{{1, 2, 3}, {0, 2, 3}, {0, 1}, {0, 1}};
    std::vector<std::uint32_t> labels{1, 2, 2, 1};
    CHECK(enumerate_plan(plan, adj, &labels) == 1);
}
