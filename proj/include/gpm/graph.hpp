#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gpm/error.hpp"
#include "gpm/types.hpp"

namespace gpm {

// Edges exactly as parsed: original ids, self-loops and duplicates intact.
struct RawEdges {
    std::vector<std::pair<VertexId, VertexId>> edges;
    // original id -> label, from an optional side file
    std::unordered_map<VertexId, std::uint32_t> labels;
};

/// Canonical undirected (or oriented) graph with dense ids and sorted CSR.
struct Graph {
    VertexId num_vertices = 0;
    std::vector<std::uint64_t> offsets;   // size num_vertices + 1
    std::vector<VertexId> neighbors;
    std::vector<std::uint32_t> labels;    // empty when unlabeled

    std::uint64_t num_directed_edges() const { return neighbors.size(); }

    std::span<const VertexId> neighbors_of(VertexId v) const {
        return {neighbors.data() + offsets[v],
                neighbors.data() + offsets[v + 1]};
    }
    std::uint64_t degree(VertexId v) const { return offsets[v + 1] - offsets[v]; }
};

// "u v" per line, '#' comments skipped. Throws ParseError with line number.
RawEdges load_edge_list(std::istream& in);
RawEdges load_edge_list_file(const std::string& path);
// "v label" per line, merged into raw.labels.
void load_labels(std::istream& in, RawEdges& raw);
void load_labels_file(const std::string& path, RawEdges& raw);

// Drops self-loops and duplicates, remaps ids to [0,|V|) in first-appearance
// order, materializes both directions, sorts adjacency.
Graph preprocess(const RawEdges& raw);

// Keeps u->v iff (degree(u), u) < (degree(v), v); the result is a DAG with
// one directed edge per undirected edge.
Graph orient(const Graph& g);

void write_edge_list(std::ostream& out, const Graph& g);

/// Vertex -> partition id. Pure, identical on every worker.
class PartitionMap {
  public:
    PartitionMap() = default;

    static PartitionMap modulo(PartitionId num_partitions);
    // Explicit per-vertex assignment; used by tests that need hand-placed
    // vertices.
    static PartitionMap table(std::vector<PartitionId> assignment);

    PartitionId operator()(VertexId v) const { return fn_(v); }
    PartitionId num_partitions() const { return num_partitions_; }

  private:
    PartitionId num_partitions_ = 1;
    std::function<PartitionId(VertexId)> fn_ = [](VertexId) { return 0; };
};

/// One worker's share of the graph: CSR for owned vertices plus the
/// replicated global degree array. Immutable after construction.
class PartitionedGraph {
  public:
    PartitionedGraph() = default;
    PartitionedGraph(const Graph& g, const PartitionMap& map, PartitionId mine);

    VertexId num_vertices() const { return num_vertices_; }
    PartitionId num_partitions() const { return map_.num_partitions(); }
    PartitionId my_partition() const { return my_partition_; }
    const PartitionMap& partition_map() const { return map_; }

    bool owns(VertexId v) const { return map_(v) == my_partition_; }
    std::uint64_t num_owned() const { return owned_vertices_.size(); }
    std::span<const VertexId> owned_vertices() const { return owned_vertices_; }

    // Sorted neighbor view; OwnershipError on non-owned vertices.
    std::span<const VertexId> local_edge_list(VertexId v) const;

    std::uint64_t degree(VertexId v) const { return (*degrees_)[v]; }
    std::span<const std::uint64_t> degrees() const { return *degrees_; }
    // Total adjacency payload of the whole graph, in bytes.
    std::uint64_t graph_bytes() const { return total_adjacency_ * sizeof(VertexId); }

    bool has_labels() const { return labels_ && !labels_->empty(); }
    std::uint32_t label(VertexId v) const { return (*labels_)[v]; }

    void save(std::ostream& out) const;
    static PartitionedGraph load(std::istream& in, const PartitionMap& map);

  private:
    VertexId num_vertices_ = 0;
    PartitionId my_partition_ = 0;
    PartitionMap map_;
    std::vector<VertexId> owned_vertices_;            // ascending
    std::vector<std::uint64_t> owned_offsets_;        // CSR over owned index
    std::vector<VertexId> owned_neighbors_;
    std::unordered_map<VertexId, std::uint64_t> owned_index_;
    std::shared_ptr<const std::vector<std::uint64_t>> degrees_;
    std::shared_ptr<const std::vector<std::uint32_t>> labels_;
    std::uint64_t total_adjacency_ = 0;

    friend std::vector<PartitionedGraph> partition(const Graph&, const PartitionMap&);
};

// Builds all N partitions at once (in-process mode); ConfigError when the
// map has zero partitions.
std::vector<PartitionedGraph> partition(const Graph& g, const PartitionMap& map);

} // namespace gpm
