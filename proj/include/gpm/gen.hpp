#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gpm/types.hpp"

namespace gpm {

// Deterministic synthetic inputs. All generators return a raw edge list
// (duplicates and self-loops possible for rmat; preprocess cleans them).

std::vector<std::pair<VertexId, VertexId>> gen_complete(std::uint64_t n);
// center is vertex 0, leaves 1..n
std::vector<std::pair<VertexId, VertexId>> gen_star(std::uint64_t leaves);
std::vector<std::pair<VertexId, VertexId>> gen_path(std::uint64_t n);
std::vector<std::pair<VertexId, VertexId>> gen_cycle(std::uint64_t n);
std::vector<std::pair<VertexId, VertexId>> gen_erdos_renyi(std::uint64_t n, double p,
                                                           std::uint64_t seed);
// num_vertices rounded up to a power of two; edges = edge_factor * n with
// the usual skewed quadrant probabilities
std::vector<std::pair<VertexId, VertexId>> gen_rmat(std::uint64_t n,
                                                    std::uint64_t edge_factor,
                                                    std::uint64_t seed,
                                                    double a = 0.57, double b = 0.19,
                                                    double c = 0.19);

// dispatcher for the CLI: kind in {complete, star, path, cycle, erdos-renyi, rmat}
std::vector<std::pair<VertexId, VertexId>> gen_graph(const std::string& kind,
                                                     std::uint64_t n, double p,
                                                     std::uint64_t edge_factor,
                                                     std::uint64_t seed);

void write_edges_file(const std::string& path,
                      const std::vector<std::pair<VertexId, VertexId>>& edges);

} // namespace gpm
