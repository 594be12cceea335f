#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gpm/types.hpp"

namespace gpm {

/// Per-worker counters for one run. Field list mirrors the report schema in
/// metrics.cpp; keep the two in sync.
struct WorkerMetrics {
    std::uint64_t bytes_sent = 0;
    std::uint64_t bytes_received = 0;
    std::uint64_t messages_sent = 0;
    std::uint64_t messages_received = 0;
    std::uint64_t fetch_count = 0; // remote per-vertex list deliveries requested
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
    std::uint64_t cache_inserts = 0;
    std::uint64_t cache_bytes = 0;
    std::uint64_t dedup_claimed = 0;
    std::uint64_t dedup_shared = 0;
    std::uint64_t dedup_dropped = 0;
    std::uint64_t peak_live_chunks = 0;
    std::uint64_t peak_arena_bytes = 0;
    std::uint64_t embeddings_created = 0;
    std::uint64_t ready_transitions = 0;
    std::uint64_t zombie_transitions = 0;
    std::uint64_t terminated_transitions = 0;
    std::uint64_t intersection_ops = 0;

    double time_load_s = 0.0;
    double time_partition_s = 0.0;
    double time_explore_s = 0.0;
    double time_reduce_s = 0.0;

    // remote fetch demand multiset, keyed by vertex id
    std::map<VertexId, std::uint64_t> fetched;
};

struct RunReport {
    std::vector<std::pair<std::string, std::uint64_t>> global_counts;
    std::vector<WorkerMetrics> workers;
};

// flat key-value text: "global.<plan>=<count>", "worker.<i>.<name>=<value>"
void write_report(std::ostream& out, const RunReport& report);
RunReport parse_report(std::istream& in);

} // namespace gpm
