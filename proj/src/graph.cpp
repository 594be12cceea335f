#include "gpm/graph.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace gpm {

namespace {

bool blank_or_comment(const std::string& line) {
    for (char c : line) {
        if (c == '#') return true;
        if (!isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

} // namespace

RawEdges load_edge_list(std::istream& in) {
    RawEdges raw;
    std::string line;
    std::uint64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank_or_comment(line)) continue;
        std::istringstream ls(line);
        std::uint64_t u, v;
        if (!(ls >> u >> v)) {
            throw ParseError("edge list: malformed line " + std::to_string(lineno) +
                             ": '" + line + "'");
        }
        std::string rest;
        if (ls >> rest) {
            throw ParseError("edge list: trailing tokens on line " +
                             std::to_string(lineno));
        }
        raw.edges.emplace_back(u, v);
    }
    if (raw.edges.empty()) throw ParseError("edge list: no edges in input");
    return raw;
}

RawEdges load_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open edge list: " + path);
    return load_edge_list(in);
}

void load_labels(std::istream& in, RawEdges& raw) {
    std::string line;
    std::uint64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank_or_comment(line)) continue;
        std::istringstream ls(line);
        std::uint64_t v, label;
        if (!(ls >> v >> label)) {
            throw ParseError("label file: malformed line " + std::to_string(lineno));
        }
        raw.labels[v] = static_cast<std::uint32_t>(label);
    }
}

void load_labels_file(const std::string& path, RawEdges& raw) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open label file: " + path);
    load_labels(in, raw);
}

Graph preprocess(const RawEdges& raw) {
    // Dense remap in first-appearance order.
    std::unordered_map<VertexId, VertexId> remap;
    remap.reserve(raw.edges.size() * 2);
    auto dense = [&](VertexId orig) {
        auto [it, fresh] = remap.emplace(orig, remap.size());
        (void)fresh;
        return it->second;
    };

    std::vector<std::pair<VertexId, VertexId>> edges;
    edges.reserve(raw.edges.size());
    for (auto [u, v] : raw.edges) {
        VertexId du = dense(u), dv = dense(v);
        if (du == dv) continue; // self-loop
        edges.emplace_back(std::min(du, dv), std::max(du, dv));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    Graph g;
    g.num_vertices = remap.size();
    std::vector<std::uint64_t> deg(g.num_vertices, 0);
    for (auto [u, v] : edges) {
        ++deg[u];
        ++deg[v];
    }
    g.offsets.assign(g.num_vertices + 1, 0);
    for (VertexId v = 0; v < g.num_vertices; ++v) g.offsets[v + 1] = g.offsets[v] + deg[v];
    g.neighbors.resize(g.offsets.back());
    std::vector<std::uint64_t> cur(g.offsets.begin(), g.offsets.end() - 1);
    for (auto [u, v] : edges) {
        g.neighbors[cur[u]++] = v;
        g.neighbors[cur[v]++] = u;
    }
    for (VertexId v = 0; v < g.num_vertices; ++v) {
        std::sort(g.neighbors.begin() + g.offsets[v], g.neighbors.begin() + g.offsets[v + 1]);
    }

    if (!raw.labels.empty()) {
        g.labels.assign(g.num_vertices, 0);
        for (auto& [orig, label] : raw.labels) {
            auto it = remap.find(orig);
            if (it != remap.end()) g.labels[it->second] = label;
        }
    }
    return g;
}

Graph orient(const Graph& g) {
    Graph out;
    out.num_vertices = g.num_vertices;
    out.labels = g.labels;
    out.offsets.assign(g.num_vertices + 1, 0);
    auto keeps = [&](VertexId u, VertexId v) {
        auto du = g.degree(u), dv = g.degree(v);
        return du < dv || (du == dv && u < v);
    };
    for (VertexId u = 0; u < g.num_vertices; ++u) {
        std::uint64_t kept = 0;
        for (VertexId v : g.neighbors_of(u))
            if (keeps(u, v)) ++kept;
        out.offsets[u + 1] = kept;
    }
    for (VertexId u = 0; u < g.num_vertices; ++u) out.offsets[u + 1] += out.offsets[u];
    out.neighbors.resize(out.offsets.back());
    std::vector<std::uint64_t> cur(out.offsets.begin(), out.offsets.end() - 1);
    for (VertexId u = 0; u < g.num_vertices; ++u) {
        for (VertexId v : g.neighbors_of(u))
            if (keeps(u, v)) out.neighbors[cur[u]++] = v;
    }
    // source lists were sorted, so kept sublists stay sorted
    return out;
}

void write_edge_list(std::ostream& out, const Graph& g) {
    for (VertexId u = 0; u < g.num_vertices; ++u) {
        for (VertexId v : g.neighbors_of(u)) {
            if (u < v) out << u << ' ' << v << '\n';
        }
    }
}

PartitionMap PartitionMap::modulo(PartitionId num_partitions) {
    if (num_partitions == 0) throw ConfigError("partition count must be >= 1");
    PartitionMap m;
    m.num_partitions_ = num_partitions;
    m.fn_ = [num_partitions](VertexId v) {
        return static_cast<PartitionId>(v % num_partitions);
    };
    return m;
}

PartitionMap PartitionMap::table(std::vector<PartitionId> assignment) {
    PartitionId n = 1;
    for (PartitionId p : assignment) n = std::max(n, p + 1);
    PartitionMap m;
    m.num_partitions_ = n;
    auto shared = std::make_shared<std::vector<PartitionId>>(std::move(assignment));
    m.fn_ = [shared](VertexId v) {
        if (v >= shared->size()) throw ConfigError("partition table: vertex out of range");
        return (*shared)[v];
    };
    return m;
}

PartitionedGraph::PartitionedGraph(const Graph& g, const PartitionMap& map,
                                   PartitionId mine)
    : num_vertices_(g.num_vertices), my_partition_(mine), map_(map) {
    if (map.num_partitions() == 0) throw ConfigError("partition count must be >= 1");
    auto degrees = std::make_shared<std::vector<std::uint64_t>>(g.num_vertices);
    for (VertexId v = 0; v < g.num_vertices; ++v) (*degrees)[v] = g.degree(v);
    degrees_ = degrees;
    total_adjacency_ = g.neighbors.size();
    if (!g.labels.empty())
        labels_ = std::make_shared<std::vector<std::uint32_t>>(g.labels);

    for (VertexId v = 0; v < g.num_vertices; ++v)
        if (map(v) == mine) owned_vertices_.push_back(v);
    owned_offsets_.reserve(owned_vertices_.size() + 1);
    owned_offsets_.push_back(0);
    for (std::uint64_t i = 0; i < owned_vertices_.size(); ++i) {
        VertexId v = owned_vertices_[i];
        owned_index_.emplace(v, i);
        auto nb = g.neighbors_of(v);
        owned_neighbors_.insert(owned_neighbors_.end(), nb.begin(), nb.end());
        owned_offsets_.push_back(owned_neighbors_.size());
    }
}

std::span<const VertexId> PartitionedGraph::local_edge_list(VertexId v) const {
    auto it = owned_index_.find(v);
    if (it == owned_index_.end()) {
        throw OwnershipError("vertex " + std::to_string(v) + " not owned by partition " +
                             std::to_string(my_partition_));
    }
    std::uint64_t i = it->second;
    return {owned_neighbors_.data() + owned_offsets_[i],
            owned_neighbors_.data() + owned_offsets_[i + 1]};
}

std::vector<PartitionedGraph> partition(const Graph& g, const PartitionMap& map) {
    if (map.num_partitions() == 0) throw ConfigError("partition count must be >= 1");
    std::vector<PartitionedGraph> parts;
    parts.reserve(map.num_partitions());
    for (PartitionId i = 0; i < map.num_partitions(); ++i)
        parts.emplace_back(g, map, i);
    // share the replicated arrays instead of one copy per worker
    for (PartitionId i = 1; i < map.num_partitions(); ++i) {
        parts[i].degrees_ = parts[0].degrees_;
        parts[i].labels_ = parts[0].labels_;
    }
    return parts;
}

namespace {

constexpr std::uint64_t kPartitionMagic = 0x31504d5047ull; // "GPMP1"
constexpr std::uint64_t kPartitionVersion = 1;

void put_u64(std::ostream& out, std::uint64_t x) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw ParseError("partition dump: truncated");
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return x;
}

template <class T>
void put_vec(std::ostream& out, const std::vector<T>& v) {
    put_u64(out, v.size());
    for (auto x : v) put_u64(out, static_cast<std::uint64_t>(x));
}

template <class T>
std::vector<T> get_vec(std::istream& in) {
    std::uint64_t n = get_u64(in);
    std::vector<T> v(n);
    for (std::uint64_t i = 0; i < n; ++i) v[i] = static_cast<T>(get_u64(in));
    return v;
}

} // namespace

void PartitionedGraph::save(std::ostream& out) const {
    put_u64(out, kPartitionMagic);
    put_u64(out, kPartitionVersion);
    put_u64(out, map_.num_partitions());
    put_u64(out, my_partition_);
    put_u64(out, num_vertices_);
    put_u64(out, total_adjacency_);
    put_vec(out, owned_vertices_);
    put_vec(out, owned_offsets_);
    put_vec(out, owned_neighbors_);
    put_vec(out, *degrees_);
    put_vec(out, labels_ ? *labels_ : std::vector<std::uint32_t>{});
}

PartitionedGraph PartitionedGraph::load(std::istream& in, const PartitionMap& map) {
    if (get_u64(in) != kPartitionMagic) throw ParseError("partition dump: bad magic");
    if (get_u64(in) != kPartitionVersion) throw ParseError("partition dump: bad version");
    PartitionedGraph g;
    auto n = get_u64(in);
    if (n != map.num_partitions())
        throw ConfigError("partition dump: partition count mismatch");
    g.map_ = map;
    g.my_partition_ = static_cast<PartitionId>(get_u64(in));
    g.num_vertices_ = get_u64(in);
    g.total_adjacency_ = get_u64(in);
    g.owned_vertices_ = get_vec<VertexId>(in);
    g.owned_offsets_ = get_vec<std::uint64_t>(in);
    g.owned_neighbors_ = get_vec<VertexId>(in);
    g.degrees_ = std::make_shared<std::vector<std::uint64_t>>(get_vec<std::uint64_t>(in));
    auto labels = get_vec<std::uint32_t>(in);
    if (!labels.empty())
        g.labels_ = std::make_shared<std::vector<std::uint32_t>>(std::move(labels));
    for (std::uint64_t i = 0; i < g.owned_vertices_.size(); ++i)
        g.owned_index_.emplace(g.owned_vertices_[i], i);
    return g;
}

} // namespace gpm
