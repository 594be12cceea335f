#include "gpm/gen.hpp"

#include <fstream>
#include <random>

#include "gpm/error.hpp"

namespace gpm {

namespace {

// fixed-width uniform in [0,1); identical across platforms for a given seed
inline double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t round_up_pow2(std::uint64_t n) {
    std::uint64_t r = 1;
    while (r < n) r <<= 1;
    return r;
}

} // namespace

std::vector<std::pair<VertexId, VertexId>> gen_complete(std::uint64_t n) {
    std::vector<std::pair<VertexId, VertexId>> e;
    for (VertexId i = 0; i < n; ++i)
        for (VertexId j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return e;
}

std::vector<std::pair<VertexId, VertexId>> gen_star(std::uint64_t leaves) {
    std::vector<std::pair<VertexId, VertexId>> e;
    for (VertexId i = 1; i <= leaves; ++i) e.emplace_back(0, i);
    return e;
}

std::vector<std::pair<VertexId, VertexId>> gen_path(std::uint64_t n) {
    std::vector<std::pair<VertexId, VertexId>> e;
    for (VertexId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return e;
}

std::vector<std::pair<VertexId, VertexId>> gen_cycle(std::uint64_t n) {
    auto e = gen_path(n);
    if (n >= 3) e.emplace_back(n - 1, 0);
    return e;
}

std::vector<std::pair<VertexId, VertexId>> gen_erdos_renyi(std::uint64_t n, double p,
                                                           std::uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw ConfigError("erdos-renyi: p must be in [0,1]");
    std::mt19937_64 rng(seed);
    std::vector<std::pair<VertexId, VertexId>> e;
    for (VertexId i = 0; i < n; ++i)
        for (VertexId j = i + 1; j < n; ++j)
            if (u01(rng) < p) e.emplace_back(i, j);
    return e;
}

std::vector<std::pair<VertexId, VertexId>> gen_rmat(std::uint64_t n,
                                                    std::uint64_t edge_factor,
                                                    std::uint64_t seed, double a,
                                                    double b, double c) {
    if (n < 2) throw ConfigError("rmat: need n >= 2");
    if (a + b + c >= 1.0) throw ConfigError("rmat: a+b+c must be < 1");
    n = round_up_pow2(n);
    std::mt19937_64 rng(seed);
    std::vector<std::pair<VertexId, VertexId>> e;
    std::uint64_t m = n * edge_factor;
    e.reserve(m);
    for (std::uint64_t i = 0; i < m; ++i) {
        VertexId u = 0, v = 0;
        for (std::uint64_t half = n >> 1; half > 0; half >>= 1) {
            double r = u01(rng);
            if (r < a) {
                // upper-left: nothing to add
            } else if (r < a + b) {
                v += half;
            } else if (r < a + b + c) {
                u += half;
            } else {
                u += half;
                v += half;
            }
        }
        e.emplace_back(u, v);
    }
    return e;
}

std::vector<std::pair<VertexId, VertexId>> gen_graph(const std::string& kind,
                                                     std::uint64_t n, double p,
                                                     std::uint64_t edge_factor,
                                                     std::uint64_t seed) {
    if (kind == "complete") return gen_complete(n);
    if (kind == "star") return gen_star(n);
    if (kind == "path") return gen_path(n);
    if (kind == "cycle") return gen_cycle(n);
    if (kind == "erdos-renyi") return gen_erdos_renyi(n, p, seed);
    if (kind == "rmat") return gen_rmat(n, edge_factor, seed);
    throw ConfigError("unknown generator kind: " + kind);
}

void write_edges_file(const std::string& path,
                      const std::vector<std::pair<VertexId, VertexId>>& edges) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    for (auto [u, v] : edges) out << u << ' ' << v << '\n';
}

} // namespace gpm
