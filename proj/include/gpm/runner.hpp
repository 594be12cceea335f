#pragma once

#include <optional>
#include <string>

#include "gpm/engine.hpp"
#include "gpm/graph.hpp"
#include "gpm/metrics.hpp"
#include "gpm/plan.hpp"

namespace gpm {

struct RunSpec {
    std::string app = "tc";
    std::string graph_path;
    std::string labels_path; // optional
    PartitionId workers = 1;
    bool orient = false;
    EngineConfig cfg;
};

// load + labels + preprocess (+ orient); fills the load-phase timing
Graph load_and_prepare(const RunSpec& spec, double* load_seconds = nullptr);

// N engine instances over the in-process fabric, one thread each. The
// partition map defaults to modulo(workers).
RunReport run_inproc(const Graph& g, const PatternApp& app, PartitionId workers,
                     const EngineConfig& cfg,
                     const std::optional<PartitionMap>& map = std::nullopt);

RunReport run_inproc_spec(const RunSpec& spec);

// one OS process = one worker; peers resolved through the cluster file
RunReport run_socket_worker(const RunSpec& spec, PartitionId rank,
                            const std::string& cluster_path);

} // namespace gpm
