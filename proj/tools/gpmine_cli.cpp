#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "gpm/gen.hpp"
#include "gpm/oracle.hpp"
#include "gpm/runner.hpp"

namespace {

void print_counts(const gpm::RunReport& report) {
    std::string line;
    for (const auto& [name, count] : report.global_counts) {
        if (!line.empty()) line += ", ";
        line += name + ": " + std::to_string(count);
    }
    std::cout << line << '\n';
}

int cmd_run(const gpm::RunSpec& spec, const std::string& mode,
            const std::string& cluster, int rank, const std::string& report_path) {
    gpm::RunReport report;
    if (mode == "inproc") {
        report = gpm::run_inproc_spec(spec);
    } else if (mode == "socket") {
        if (cluster.empty()) throw gpm::ConfigError("socket mode needs --cluster");
        if (rank < 0) throw gpm::ConfigError("socket mode needs --rank");
        report = gpm::run_socket_worker(spec, static_cast<gpm::PartitionId>(rank),
                                        cluster);
    } else {
        throw gpm::ConfigError("unknown mode: " + mode);
    }
    print_counts(report);
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) throw gpm::ConfigError("cannot write report: " + report_path);
        gpm::write_report(out, report);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App cli{"distributed graph pattern mining engine"};
    cli.require_subcommand(1);

    // run
    gpm::RunSpec spec;
    std::string mode = "inproc";
    std::string cluster, report_path;
    int rank = -1;
    std::uint64_t seed = 7;
    bool no_cache = false, no_dedup = false, no_vreuse = false, no_creuse = false;
    auto* run = cli.add_subcommand("run", "execute a mining app");
    run->add_option("--app", spec.app, "tc | 3mc | 4mc | kcc:K")->required();
    run->add_option("--graph", spec.graph_path, "edge list file")->required();
    run->add_option("--labels", spec.labels_path, "vertex label file");
    run->add_option("--workers", spec.workers, "number of partitions");
    run->add_option("--mode", mode, "inproc | socket");
    run->add_option("--cluster", cluster, "cluster file (socket mode)");
    run->add_option("--rank", rank, "this worker's partition (socket mode)");
    run->add_option("--threads", spec.cfg.compute_threads, "compute threads");
    run->add_option("--chunk-bytes", spec.cfg.chunk_bytes, "chunk budget in bytes");
    run->add_option("--cache-fraction", spec.cfg.cache_fraction,
                    "cache size as a fraction of graph bytes");
    run->add_option("--cache-threshold", spec.cfg.cache_degree_threshold,
                    "minimum degree to cache");
    run->add_flag("--no-cache", no_cache, "disable the static edge-list cache");
    run->add_flag("--no-dedup", no_dedup, "disable horizontal sharing");
    run->add_flag("--no-vreuse", no_vreuse, "disable parent edge-list reuse");
    run->add_flag("--no-creuse", no_creuse, "disable intersection reuse");
    run->add_flag("--orient", spec.orient, "orient the graph before mining");
    run->add_option("--report", report_path, "write the metrics report here");
    run->add_option("--seed", seed, "seed recorded for fixtures");

    // gen
    std::string kind = "erdos-renyi", out_path;
    std::uint64_t n = 64, edge_factor = 16;
    double p = 0.3;
    auto* gen = cli.add_subcommand("gen", "generate a synthetic graph");
    gen->add_option("--kind", kind, "complete|star|path|cycle|erdos-renyi|rmat")
        ->required();
    gen->add_option("--n", n, "vertices (leaves for star)")->required();
    gen->add_option("--p", p, "edge probability (erdos-renyi)");
    gen->add_option("--edge-factor", edge_factor, "edges per vertex (rmat)");
    gen->add_option("--seed", seed, "generator seed");
    gen->add_option("--out", out_path, "output edge list file")->required();

    // oracle
    std::string og_path, pattern_name, semantics = "vertex";
    auto* oracle = cli.add_subcommand("oracle", "exhaustive reference count");
    oracle->add_option("--graph", og_path, "edge list file")->required();
    oracle->add_option("--pattern", pattern_name,
                       "triangle|wedge|4clique|diamond|4cycle|tailed_triangle|"
                       "3star|4path|Kclique")
        ->required();
    oracle->add_option("--semantics", semantics, "vertex | edge");

    CLI11_PARSE(cli, argc, argv);

    try {
        if (run->parsed()) {
            spec.cfg.enable_cache = !no_cache;
            spec.cfg.enable_dedup = !no_dedup;
            spec.cfg.enable_vertical_reuse = !no_vreuse;
            spec.cfg.enable_compute_reuse = !no_creuse;
            return cmd_run(spec, mode, cluster, rank, report_path);
        }
        if (gen->parsed()) {
            gpm::write_edges_file(out_path, gpm::gen_graph(kind, n, p, edge_factor, seed));
            return 0;
        }
        if (oracle->parsed()) {
            auto g = gpm::preprocess(gpm::load_edge_list_file(og_path));
            auto pat = gpm::oracle::oracle_pattern_by_name(pattern_name);
            auto sem = semantics == "edge"
                           ? gpm::oracle::OracleSemantics::EdgeInduced
                           : gpm::oracle::OracleSemantics::VertexInduced;
            std::cout << pattern_name << ": " << gpm::oracle::oracle_count(g, pat, sem)
                      << '\n';
            return 0;
        }
    } catch (const gpm::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
