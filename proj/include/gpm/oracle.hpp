#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gpm/graph.hpp"
#include "gpm/types.hpp"

// Exhaustive counting reference. Deliberately self-contained: enumerates
// vertex combinations and classifies induced edge masks, with no code from
// the plan interpreter or the engine.

namespace gpm::oracle {

struct OraclePattern {
    std::uint32_t k = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
};

enum class OracleSemantics { VertexInduced, EdgeInduced };

OraclePattern oracle_clique(std::uint32_t k);
// by plan name: triangle, wedge, 4clique, diamond, 4cycle, tailed_triangle,
// 3star, 4path, Kclique
OraclePattern oracle_pattern_by_name(const std::string& name);

// Refuses (ConfigError) when C(|V|,k) * k^2 exceeds the work guard.
std::uint64_t oracle_count(const Graph& g, const OraclePattern& p,
                           OracleSemantics semantics);

} // namespace gpm::oracle
