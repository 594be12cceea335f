#pragma once

#include <cstddef>
#include <cstdint>

namespace gpm {

// Vertex ids are dense in [0, |V|) after preprocessing.
using VertexId = std::uint64_t;
using PartitionId = std::uint32_t;

inline constexpr VertexId kInvalidVertex = ~VertexId{0};

} // namespace gpm
