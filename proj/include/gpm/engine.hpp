#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "gpm/graph.hpp"
#include "gpm/metrics.hpp"
#include "gpm/plan.hpp"
#include "gpm/transport.hpp"

namespace gpm {

struct EngineConfig {
    std::size_t chunk_bytes = 4u << 20;
    std::uint32_t mini_batch = 64;      // embeddings per dispatch unit
    std::uint32_t compute_threads = 3;
    std::uint32_t comm_threads = 0;     // 0 = compute_threads/3, at least 1
    std::uint32_t insertion_buffer = 256;
    double cache_fraction = 0.10;
    std::uint64_t cache_degree_threshold = 64;
    std::uint32_t dedup_table_bits = 16;
    bool enable_cache = true;
    bool enable_dedup = true;
    bool enable_vertical_reuse = true; // parent-pointer edge list bindings
    bool enable_compute_reuse = true;  // stored running intersections
};

struct RunResult {
    std::vector<std::uint64_t> local_counts;
    std::vector<std::uint64_t> global_counts;
    WorkerMetrics metrics;
};

/// One worker's mining engine: owns the embedding lifecycle, chunked
/// BFS-DFS exploration, circulant batch pipeline and thread pools. The
/// graph and endpoint must outlive the engine.
class Engine {
  public:
    Engine(const PartitionedGraph& graph, Endpoint& endpoint, EngineConfig cfg = {});
    ~Engine();

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    // Explores every plan in the app over the local partition and returns
    // globally reduced counts. All workers must call run with the same app.
    RunResult run(const PatternApp& app);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace gpm
