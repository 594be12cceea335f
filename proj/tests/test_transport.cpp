#include <doctest.h>

#include <random>
#include <thread>

#include "gpm/gen.hpp"
#include "gpm/graph.hpp"
#include "gpm/transport.hpp"
#include "gpm/wire.hpp"

using namespace gpm;

TEST_CASE("frame header round-trips and rejects junk") {
    Frame f;
    f.type = MsgType::FetchReq;
    f.request_id = 0xDEADBEEF12345ull;
    f.payload = {1, 2, 3};
    std::uint8_t buf[kHeaderBytes];
    encode_header(f, buf);
    auto h = decode_header(buf);
    CHECK(h.type == MsgType::FetchReq);
    CHECK(h.request_id == f.request_id);
    CHECK(h.payload_len == 3);

    buf[0] ^= 0xFF;
    CHECK_THROWS_AS(decode_header(buf), ProtocolError);
}

TEST_CASE("fetch payload codecs round-trip") {
    FetchRequest req{3, {1, 5, 5, 9}};
    auto decoded = decode_fetch_request(encode_fetch_request(req));
    CHECK(decoded.requester == 3);
    CHECK(decoded.ids == req.ids);

    FetchResponse resp;
    resp.entries = {{1, {2, 3}}, {5, {}}, {9, {0, 1, 2, 3, 4}}};
    auto back = decode_fetch_response(encode_fetch_response(resp));
    REQUIRE(back.entries.size() == 3);
    CHECK(back.entries[0].neighbors == std::vector<VertexId>{2, 3});
    CHECK(back.entries[1].neighbors.empty());
    CHECK(back.entries[2].v == 9);

    CHECK(decode_u64s(encode_u64s({7, 8})) == std::vector<std::uint64_t>{7, 8});
    std::vector<std::uint8_t> truncated = {1, 2};
    CHECK_THROWS_AS(decode_u64s(truncated), ProtocolError);
}

namespace {

struct TwoWorkers {
    Graph g;
    std::vector<PartitionedGraph> parts;
    InProcFabric fabric{2};

    TwoWorkers() {
        g = preprocess({gen_erdos_renyi(40, 0.3, 5), {}});
        parts = partition(g, PartitionMap::modulo(2));
        fabric.endpoint(0).serve(&parts[0]);
        fabric.endpoint(1).serve(&parts[1]);
    }
};

} // namespace

TEST_CASE("in-process fetch matches the responder's local lists byte for byte") {
    TwoWorkers w;
    auto& ep0 = w.fabric.endpoint(0);
    std::vector<VertexId> ids;
    for (VertexId v : w.parts[1].owned_vertices()) ids.push_back(v);
    auto resp = ep0.fetch_batch(1, ids);
    REQUIRE(resp.entries.size() == ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto local = w.parts[1].local_edge_list(ids[i]);
        CHECK(resp.entries[i].v == ids[i]);
        REQUIRE(resp.entries[i].neighbors.size() == local.size());
        CHECK(std::equal(local.begin(), local.end(), resp.entries[i].neighbors.begin()));
    }

    // repeating the request gives identical bytes
    auto resp2 = ep0.fetch_batch(1, ids);
    REQUIRE(resp2.entries.size() == resp.entries.size());
    for (std::size_t i = 0; i < resp.entries.size(); ++i)
        CHECK(resp2.entries[i].neighbors == resp.entries[i].neighbors);
}

TEST_CASE("empty fetch takes the zero-message fast path") {
    TwoWorkers w;
    auto before = w.fabric.endpoint(0).stats().messages_sent.load();
    auto resp = w.fabric.endpoint(0).fetch_batch(1, {});
    CHECK(resp.entries.empty());
    CHECK(w.fabric.endpoint(0).stats().messages_sent.load() == before);
}

TEST_CASE("non-owned vertices earn a protocol error naming the vertex") {
    TwoWorkers w;
    // vertex 0 belongs to worker 0; asking worker 1 for it must fail
    CHECK_THROWS_WITH_AS(w.fabric.endpoint(0).fetch_batch(1, {0}),
                         doctest::Contains("vertex 0 not owned"), ProtocolError);
}

TEST_CASE("requester and responder byte counters agree") {
    TwoWorkers w;
    auto& ep0 = w.fabric.endpoint(0);
    auto& ep1 = w.fabric.endpoint(1);
    std::vector<VertexId> ids{1, 3, 5};
    ep0.fetch_batch(1, ids);
    ep1.fetch_batch(0, {0, 2});
    auto sent = ep0.stats().bytes_sent.load() + ep1.stats().bytes_sent.load();
    auto received = ep0.stats().bytes_received.load() + ep1.stats().bytes_received.load();
    CHECK(sent == received);
}

TEST_CASE("responder survives a large randomized request stream") {
    TwoWorkers w;
    std::mt19937_64 rng(11);
    auto owned = w.parts[1].owned_vertices();
    for (int round = 0; round < 50; ++round) {
        std::vector<VertexId> ids;
        for (int i = 0; i < 40; ++i) ids.push_back(owned[rng() % owned.size()]);
        std::sort(ids.begin(), ids.end());
        auto resp = w.fabric.endpoint(0).fetch_batch(1, ids);
        REQUIRE(resp.entries.size() == ids.size());
        for (std::size_t i = 0; i < ids.size(); ++i) {
            auto local = w.parts[1].local_edge_list(ids[i]);
            CHECK(std::equal(local.begin(), local.end(),
                             resp.entries[i].neighbors.begin(),
                             resp.entries[i].neighbors.end()));
        }
    }
}

TEST_CASE("barrier releases everyone only after the last arrival") {
    InProcFabric fabric(4);
    std::atomic<int> arrived{0};
    std::atomic<int> released{0};
    std::vector<std::thread> threads;
    for (PartitionId i = 0; i < 4; ++i) {
        threads.emplace_back([&, i] {
            std::this_thread::sleep_for(std::chrono::milliseconds(10 * i));
            arrived.fetch_add(1);
            fabric.endpoint(i).barrier();
            CHECK(arrived.load() == 4); // nobody passes early
            released.fetch_add(1);
        });
    }
    for (auto& t : threads) t.join();
    CHECK(released.load() == 4);
}

TEST_CASE("reduction sums per-worker contributions") {
    InProcFabric fabric(4);
    std::vector<std::thread> threads;
    std::vector<std::vector<std::uint64_t>> results(4);
    for (PartitionId i = 0; i < 4; ++i) {
        threads.emplace_back(
            [&, i] { results[i] = fabric.endpoint(i).reduce_sum({1, i}); });
    }
    for (auto& t : threads) t.join();
    for (auto& r : results) {
        CHECK(r == std::vector<std::uint64_t>{4, 0 + 1 + 2 + 3});
    }
}

TEST_CASE("cluster file parsing") {
    CHECK_THROWS_AS(parse_cluster_file("/nonexistent/cluster.txt"), ConfigError);
}
