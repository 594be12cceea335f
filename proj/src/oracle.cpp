#include "gpm/oracle.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "gpm/error.hpp"

namespace gpm::oracle {

namespace {

constexpr std::uint64_t kWorkGuard = 1'000'000'000ull;

std::uint64_t choose(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    std::uint64_t r = 1;
    for (std::uint64_t i = 0; i < k; ++i) {
        if (r > kWorkGuard * 4) return r; // avoid overflow, guard fails anyway
        r = r * (n - i) / (i + 1);
    }
    return r;
}

// pair (i,j), i<j<k, mapped to a bit index
inline int pair_bit(int i, int j, int k) {
    int idx = 0;
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) {
            if (a == i && b == j) return idx;
            ++idx;
        }
    (void)k;
    return -1;
}

std::vector<std::vector<int>> all_permutations(int k) {
    std::vector<int> p(k);
    std::iota(p.begin(), p.end(), 0);
    std::vector<std::vector<int>> out;
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

std::uint32_t pattern_mask(const OraclePattern& p) {
    std::uint32_t mask = 0;
    for (auto [a, b] : p.edges) {
        int i = std::min(a, b), j = std::max(a, b);
        mask |= 1u << pair_bit(i, j, static_cast<int>(p.k));
    }
    return mask;
}

// #injective mappings of the pattern into a k-vertex graph given by mask
std::uint64_t embed_maps(std::uint32_t pat_mask, std::uint32_t mask, int k,
                         const std::vector<std::vector<int>>& perms,
                         bool induced) {
    std::uint64_t n = 0;
    for (const auto& perm : perms) {
        bool ok = true;
        int idx = 0;
        for (int a = 0; a < k && ok; ++a) {
            for (int b = a + 1; b < k && ok; ++b, ++idx) {
                int pa = perm[a], pb = perm[b];
                bool want = pat_mask >> pair_bit(std::min(pa, pb), std::max(pa, pb), k) & 1;
                bool have = mask >> idx & 1;
                if (induced ? (want != have) : (want && !have)) ok = false;
            }
        }
        if (ok) ++n;
    }
    return n;
}

struct CombinationCounter {
    const Graph& g;
    int k;
    std::vector<std::uint64_t> mask_histogram;
    std::vector<VertexId> chosen;

    void run() {
        chosen.clear();
        descend(0, 0);
    }

    void descend(VertexId first, std::uint32_t mask) {
        int depth = static_cast<int>(chosen.size());
        if (depth == k) {
            ++mask_histogram[mask];
            return;
        }
        for (VertexId v = first; v < g.num_vertices; ++v) {
            std::uint32_t m = mask;
            for (int i = 0; i < depth; ++i) {
                if (sorted_has(g.neighbors_of(chosen[i]), v))
                    m |= 1u << pair_bit(i, depth, k);
            }
            chosen.push_back(v);
            descend(v + 1, m);
            chosen.pop_back();
        }
    }

    static bool sorted_has(std::span<const VertexId> l, VertexId v) {
        return std::binary_search(l.begin(), l.end(), v);
    }
};

} // namespace

OraclePattern oracle_clique(std::uint32_t k) {
    OraclePattern p;
    p.k = k;
    for (std::uint32_t a = 0; a < k; ++a)
        for (std::uint32_t b = a + 1; b < k; ++b) p.edges.emplace_back(a, b);
    return p;
}

OraclePattern oracle_pattern_by_name(const std::string& name) {
    using E = std::vector<std::pair<std::uint32_t, std::uint32_t>>;
    if (name == "triangle") return oracle_clique(3);
    if (name == "wedge") return {3, E{{0, 1}, {0, 2}}};
    if (name == "4clique") return oracle_clique(4);
    if (name == "diamond") return {4, E{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}}};
    if (name == "4cycle") return {4, E{{0, 1}, {1, 2}, {2, 3}, {0, 3}}};
    if (name == "tailed_triangle") return {4, E{{0, 1}, {0, 2}, {1, 2}, {0, 3}}};
    if (name == "3star") return {4, E{{0, 1}, {0, 2}, {0, 3}}};
    if (name == "4path") return {4, E{{0, 1}, {1, 2}, {2, 3}}};
    if (name.size() > 6 && name.substr(1) == "clique")
        return oracle_clique(static_cast<std::uint32_t>(name[0] - '0'));
    auto colon = name.find("clique");
    if (colon != std::string::npos)
        return oracle_clique(std::stoul(name.substr(0, colon)));
    throw ConfigError("oracle: unknown pattern name " + name);
}

std::uint64_t oracle_count(const Graph& g, const OraclePattern& p,
                           OracleSemantics semantics) {
    int k = static_cast<int>(p.k);
    if (k < 1 || k > 5) throw ConfigError("oracle supports 1 <= k <= 5");
    std::uint64_t work = choose(g.num_vertices, p.k) * p.k * p.k;
    if (work > kWorkGuard) {
        throw ConfigError("oracle refuses: C(" + std::to_string(g.num_vertices) + "," +
                          std::to_string(p.k) + ")*k^2 = " + std::to_string(work) +
                          " exceeds guard " + std::to_string(kWorkGuard));
    }
    if (static_cast<std::uint64_t>(k) > g.num_vertices) return 0;

    int bits = k * (k - 1) / 2;
    auto perms = all_permutations(k);
    std::uint32_t pmask = pattern_mask(p);

    // classify every possible induced mask once
    std::vector<std::uint64_t> value(std::size_t{1} << bits, 0);
    std::uint64_t aut = embed_maps(pmask, pmask, k, perms, /*induced=*/true);
    for (std::uint32_t mask = 0; mask < value.size(); ++mask) {
        if (semantics == OracleSemantics::VertexInduced) {
            // counted once if the induced subgraph is isomorphic to p
            value[mask] = embed_maps(pmask, mask, k, perms, true) > 0 ? 1 : 0;
        } else {
            value[mask] = embed_maps(pmask, mask, k, perms, false) / aut;
        }
    }

    CombinationCounter cc{g, k, std::vector<std::uint64_t>(value.size(), 0), {}};
    cc.run();
    std::uint64_t total = 0;
    for (std::size_t m = 0; m < value.size(); ++m) total += value[m] * cc.mask_histogram[m];
    return total;
}

} // namespace gpm::oracle
