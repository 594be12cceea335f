#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "gpm/types.hpp"

namespace gpm {

/// Small connected query graph over vertices [0,k).
struct Pattern {
    std::uint32_t k = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    std::vector<std::uint32_t> labels; // empty = unlabeled

    bool has_edge(std::uint32_t a, std::uint32_t b) const;
    bool connected() const;
};

enum class Semantics { EdgeInduced, VertexInduced };

/// Enumeration program for one pattern. Position p is matched at depth p;
/// candidates for p come from intersecting the edge lists at
/// intersect_sources[p], excluding adjacency to anti_sources[p] (the
/// vertex-induced non-edges), subject to the order restrictions.
struct MatchPlan {
    std::string name;
    std::uint32_t k = 0;
    Semantics semantics = Semantics::VertexInduced;
    std::vector<std::uint32_t> labels; // per position; empty = unlabeled

    // all indexed by position; index 0 unused for the source vectors
    std::vector<std::vector<std::uint32_t>> intersect_sources;
    std::vector<std::vector<std::uint32_t>> anti_sources;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> restrictions; // v[a] < v[b]
    // active_after[d]: positions whose edge lists a depth-d embedding keeps
    std::vector<std::vector<std::uint32_t>> active_after;

    // derived by finalize()
    std::vector<bool> store_intersection;  // depth-p embeddings keep raw C_p
    std::vector<bool> reuse_from_parent;   // C_p = parent's stored set ∩ N(v_{p-1})
    std::vector<std::vector<std::uint32_t>> lower_bound_positions; // cand > v[q]
    std::vector<std::vector<std::uint32_t>> upper_bound_positions; // cand < v[q]

    void finalize();
    bool position_active(std::uint32_t depth, std::uint32_t pos) const;
};

struct PlanCheck {
    bool ok = true;
    int level = -1;
    std::string message;
    std::uint64_t self_match_count = 0;
};

// Derives sources and minimal active sets from a pattern; positions match
// pattern vertices in identity order.
MatchPlan plan_from_pattern(const Pattern& p, Semantics semantics,
                            std::vector<std::pair<std::uint32_t, std::uint32_t>> restrictions,
                            std::string name);

Pattern clique_pattern(std::uint32_t k);
// Full symmetry break (strictly increasing ids); restrictions can be dropped
// for oriented inputs where the DAG itself breaks the symmetry.
MatchPlan clique_plan(std::uint32_t k, bool with_restrictions = true);

// One (pattern, plan) pair per isomorphism class of connected size-k
// patterns, vertex-induced; k in {3,4}.
std::vector<std::pair<Pattern, MatchPlan>> motif_patterns(std::uint32_t k);

// Structural invariants plus a self-match run: the plan applied to its own
// pattern graph must find exactly one embedding.
PlanCheck validate_plan(const MatchPlan& plan, const Pattern& pattern);

// Reference interpreter over a plain adjacency list; drives validate_plan
// and small plan tests. Not a counting oracle.
std::uint64_t enumerate_plan(const MatchPlan& plan,
                             const std::vector<std::vector<VertexId>>& adj,
                             const std::vector<std::uint32_t>* vertex_labels = nullptr);

void format_plan(std::ostream& out, const MatchPlan& plan);
MatchPlan parse_plan(std::istream& in);

/// Named set of plans executed together (one aggregate count per plan).
struct PatternApp {
    std::string name;
    std::vector<Pattern> patterns;
    std::vector<MatchPlan> plans;
};

// app_name: "tc", "3mc", "4mc", or "kcc:K" (K >= 3). With oriented=true the
// clique apps use restriction-free plans; motif apps reject orientation.
PatternApp make_app(const std::string& app_name, bool oriented = false);

} // namespace gpm
