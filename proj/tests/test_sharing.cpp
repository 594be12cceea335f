#include <doctest.h>

#include "gpm/cache.hpp"
#include "gpm/dedup.hpp"
#include "gpm/gen.hpp"
#include "gpm/graph.hpp"
#include "gpm/plan.hpp"
#include "gpm/runner.hpp"

using namespace gpm;

TEST_CASE("dedup table: first claims, later requesters share") {
    DedupTable t(8);
    int a = 0, b = 0;
    void* owner = nullptr;
    CHECK(t.lookup_or_claim(42, &a, &owner) == DedupTable::Outcome::Claimed);
    CHECK(t.lookup_or_claim(42, &b, &owner) == DedupTable::Outcome::Shared);
    CHECK(owner == &a);
}

TEST_CASE("dedup table: colliding keys are dropped, both fetch") {
    DedupTable t(0); // single slot, everything collides
    int a = 0, b = 0;
    void* owner = nullptr;
    CHECK(t.lookup_or_claim(1, &a, &owner) == DedupTable::Outcome::Claimed);
    CHECK(t.lookup_or_claim(2, &b, &owner) == DedupTable::Outcome::Dropped);
    // the dropped vertex never enters the table
    CHECK(t.lookup_or_claim(2, &b, &owner) == DedupTable::Outcome::Dropped);
    t.clear();
    CHECK(t.lookup_or_claim(2, &b, &owner) == DedupTable::Outcome::Claimed);
}

TEST_CASE("dedup probe/claim split matches the combined op") {
    DedupTable t(4);
    int a = 0;
    void* owner = nullptr;
    CHECK(t.probe(9, &owner) == DedupTable::Outcome::Claimed); // would claim
    CHECK(t.claim(9, &a));
    CHECK(t.probe(9, &owner) == DedupTable::Outcome::Shared);
    CHECK(owner == &a);
    CHECK_FALSE(t.claim(9, &a)); // already taken
}

TEST_CASE("cache obeys threshold, capacity and the full flag") {
    EdgeListCache cache(/*capacity=*/200 * sizeof(VertexId), /*threshold=*/4);
    std::vector<VertexId> small{1, 2, 3};
    std::vector<VertexId> big(100);
    std::vector<VertexId> big2(150);
    for (std::size_t i = 0; i < big.size(); ++i) big[i] = i;
    for (std::size_t i = 0; i < big2.size(); ++i) big2[i] = i;

    CHECK(cache.insert(7, small) == EdgeListCache::InsertResult::SkippedDegree);
    CHECK(cache.get(7) == nullptr);

    CHECK(cache.insert(8, big) == EdgeListCache::InsertResult::Inserted);
    REQUIRE(cache.get(8) != nullptr);
    CHECK(cache.get(8)->size() == 100);
    CHECK(cache.insert(8, big) == EdgeListCache::InsertResult::AlreadyPresent);

    auto used_before = cache.used_bytes();
    // 150 more words exceed the 200-word capacity: nothing stored, cache closes
    CHECK(cache.insert(9, big2) == EdgeListCache::InsertResult::SkippedFull);
    CHECK(cache.full());
    CHECK(cache.used_bytes() == used_before); // monotone, no partial insert
    CHECK(cache.insert(10, big) == EdgeListCache::InsertResult::SkippedFull);
    CHECK(cache.get(8) != nullptr); // never evicts
}

TEST_CASE("each sharing mechanism can be disabled without changing counts") {
    auto g = preprocess({gen_erdos_renyi(36, 0.3, 9), {}});
    EngineConfig base;
    base.compute_threads = 2;
    auto want = run_inproc(g, make_app("kcc:4"), 2, base).global_counts[0].second;
    for (int mask = 1; mask < 4; ++mask) {
        EngineConfig cfg = base;
        cfg.enable_vertical_reuse = !(mask & 1);
        cfg.enable_compute_reuse = !(mask & 2);
        auto got = run_inproc(g, make_app("kcc:4"), 2, cfg).global_counts[0].second;
        CHECK(got == want);
    }
    EngineConfig nc = base;
    nc.enable_cache = false;
    CHECK(run_inproc(g, make_app("kcc:4"), 2, nc).global_counts[0].second == want);
    EngineConfig nd = base;
    nd.enable_dedup = false;
    CHECK(run_inproc(g, make_app("kcc:4"), 2, nd).global_counts[0].second == want);
}

TEST_CASE("computation reuse saves the predicted intersections on K8") {
    auto g = preprocess({gen_complete(8), {}});
    EngineConfig with;
    with.compute_threads = 1;
    EngineConfig without = with;
    without.enable_compute_reuse = false;

    auto a = run_inproc(g, make_app("kcc:5"), 1, with);
    auto b = run_inproc(g, make_app("kcc:5"), 1, without);
    CHECK(a.global_counts[0].second == 56); // C(8,5)
    CHECK(b.global_counts[0].second == 56);
    // reuse turns a (d)-way chain into one intersection per extension:
    // depth-2 parents save 1 op each, depth-3 parents save 2
    std::uint64_t depth2 = 56;  // C(8,3) ordered triangles
    std::uint64_t depth3 = 70;  // C(8,4)
    auto saved = b.workers[0].intersection_ops - a.workers[0].intersection_ops;
    CHECK(saved == depth2 * 1 + depth3 * 2);
}

TEST_CASE("one fetch serves every same-chunk requester of a hot vertex") {
    // leaves first so the center lands on worker 1 under the explicit map
    std::vector<std::pair<VertexId, VertexId>> edges;
    const VertexId leaves = 300;
    for (VertexId i = 0; i < leaves; ++i) edges.emplace_back(i + 1, 0);
    RawEdges raw;
    raw.edges = edges;
    auto g = preprocess(raw);
    // after remap: leaf_1 -> 0, center -> 1, leaf_2 -> 2, ...
    std::vector<PartitionId> where(g.num_vertices, 0);
    where[1] = 1;
    auto map = PartitionMap::table(where);

    EngineConfig cfg;
    cfg.compute_threads = 1;
    cfg.enable_cache = false;
    auto report = run_inproc(g, make_app("tc"), 2, cfg, map);
    CHECK(report.global_counts[0].second == 0);
    // worker 0 materialized the center's list exactly once per chunk; the
    // whole run fits one level-1 chunk here
    CHECK(report.workers[0].fetched.at(1) == 1);
    CHECK(report.workers[0].dedup_shared >= leaves - 2);

    EngineConfig nodedup = cfg;
    nodedup.enable_dedup = false;
    auto loud = run_inproc(g, make_app("tc"), 2, nodedup, map);
    CHECK(loud.global_counts[0].second == 0);
    CHECK(loud.workers[0].fetched.at(1) >= 100 * report.workers[0].fetched.at(1));
}

TEST_CASE("cache cuts fetched bytes on a skewed graph") {
    auto g = preprocess({gen_rmat(1 << 10, 8, 7), {}});
    EngineConfig with;
    with.compute_threads = 2;
    with.cache_fraction = 0.10;
    EngineConfig without = with;
    without.enable_cache = false;

    auto a = run_inproc(g, make_app("tc"), 2, with);
    auto b = run_inproc(g, make_app("tc"), 2, without);
    CHECK(a.global_counts[0].second == b.global_counts[0].second);
    auto bytes = [](const RunReport& r) {
        return r.workers[0].bytes_received + r.workers[1].bytes_received;
    };
    CHECK(bytes(a) < bytes(b));
    CHECK(a.workers[0].cache_hits + a.workers[1].cache_hits > 0);
    for (auto& w : a.workers) {
        CHECK(w.cache_bytes <= static_cast<std::uint64_t>(
                                   with.cache_fraction * g.neighbors.size() *
                                   sizeof(VertexId)) +
                                   1);
    }
}
