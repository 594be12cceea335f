#include "gpm/runner.hpp"

#include <chrono>
#include <thread>

#include "gpm/error.hpp"
#include "gpm/transport.hpp"

namespace gpm {

namespace {

using clock_t_ = std::chrono::steady_clock;

double seconds_since(clock_t_::time_point t0) {
    return std::chrono::duration<double>(clock_t_::now() - t0).count();
}

} // namespace

Graph load_and_prepare(const RunSpec& spec, double* load_seconds) {
    auto t0 = clock_t_::now();
    auto raw = load_edge_list_file(spec.graph_path);
    if (!spec.labels_path.empty()) load_labels_file(spec.labels_path, raw);
    Graph g = preprocess(raw);
    if (spec.orient) g = orient(g);
    if (load_seconds) *load_seconds = seconds_since(t0);
    return g;
}

RunReport run_inproc(const Graph& g, const PatternApp& app, PartitionId workers,
                     const EngineConfig& cfg, const std::optional<PartitionMap>& map) {
    if (workers == 0) throw ConfigError("workers must be >= 1");
    auto t0 = clock_t_::now();
    PartitionMap pmap = map ? *map : PartitionMap::modulo(workers);
    if (pmap.num_partitions() != workers)
        throw ConfigError("partition map does not cover the requested workers");
    auto parts = partition(g, pmap);
    double partition_s = seconds_since(t0);

    InProcFabric fabric(workers);
    std::vector<RunResult> results(workers);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (PartitionId i = 0; i < workers; ++i) {
        threads.emplace_back([&, i] {
            try {
                Engine engine(parts[i], fabric.endpoint(i), cfg);
                results[i] = engine.run(app);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);

    RunReport report;
    for (std::size_t p = 0; p < app.plans.size(); ++p)
        report.global_counts.emplace_back(app.plans[p].name,
                                          results[0].global_counts[p]);
    for (PartitionId i = 0; i < workers; ++i) {
        results[i].metrics.time_partition_s = partition_s;
        report.workers.push_back(std::move(results[i].metrics));
    }
    return report;
}

RunReport run_inproc_spec(const RunSpec& spec) {
    double load_s = 0.0;
    Graph g = load_and_prepare(spec, &load_s);
    auto app = make_app(spec.app, spec.orient);
    auto report = run_inproc(g, app, spec.workers, spec.cfg);
    for (auto& w : report.workers) w.time_load_s = load_s;
    return report;
}

RunReport run_socket_worker(const RunSpec& spec, PartitionId rank,
                            const std::string& cluster_path) {
    auto peers = parse_cluster_file(cluster_path);
    if (spec.workers != 0 && spec.workers != peers.size())
        throw ConfigError("workers flag disagrees with the cluster file");
    auto n = static_cast<PartitionId>(peers.size());
    if (rank >= n) throw ConfigError("rank out of range for the cluster file");

    double load_s = 0.0;
    Graph g = load_and_prepare(spec, &load_s);
    auto app = make_app(spec.app, spec.orient);

    auto t0 = clock_t_::now();
    PartitionedGraph part(g, PartitionMap::modulo(n), rank);
    double partition_s = seconds_since(t0);

    auto endpoint = make_socket_endpoint(rank, peers);
    RunResult result;
    {
        Engine engine(part, *endpoint, spec.cfg);
        result = engine.run(app);
        // final alignment so no peer tears the mesh down mid-run
        endpoint->barrier();
    }
    endpoint->shutdown();

    RunReport report;
    for (std::size_t p = 0; p < app.plans.size(); ++p)
        report.global_counts.emplace_back(app.plans[p].name, result.global_counts[p]);
    result.metrics.time_load_s = load_s;
    result.metrics.time_partition_s = partition_s;
    report.workers.push_back(std::move(result.metrics));
    return report;
}

} // namespace gpm
