#pragma once

#include <algorithm>
#include <cstddef>
#include <span>

#include "gpm/types.hpp"

namespace gpm {

// Operations on sorted, duplicate-free vertex lists. Output buffers must be
// at least min(|a|,|b|) long (|a| for subtract) and must not alias inputs.

inline bool sorted_contains(std::span<const VertexId> list, VertexId v) {
    return std::binary_search(list.begin(), list.end(), v);
}

namespace detail {

inline std::size_t intersect_merge(std::span<const VertexId> a,
                                   std::span<const VertexId> b,
                                   VertexId* out) {
    std::size_t i = 0, j = 0, n = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            out[n++] = a[i];
            ++i;
            ++j;
        }
    }
    return n;
}

// a is the short list; binary-search each element in b.
inline std::size_t intersect_gallop(std::span<const VertexId> a,
                                    std::span<const VertexId> b,
                                    VertexId* out) {
    std::size_t n = 0;
    const VertexId* lo = b.data();
    const VertexId* end = b.data() + b.size();
    for (VertexId v : a) {
        lo = std::lower_bound(lo, end, v);
        if (lo == end) break;
        if (*lo == v) out[n++] = v;
    }
    return n;
}

} // namespace detail

// Size ratio above which we switch from linear merge to galloping.
inline constexpr std::size_t kGallopRatio = 32;

inline std::size_t intersect(std::span<const VertexId> a,
                             std::span<const VertexId> b,
                             VertexId* out) {
    if (a.size() > b.size()) std::swap(a, b);
    if (a.empty()) return 0;
    if (b.size() / a.size() > kGallopRatio)
        return detail::intersect_gallop(a, b, out);
    return detail::intersect_merge(a, b, out);
}

// out = a \ b
inline std::size_t subtract(std::span<const VertexId> a,
                            std::span<const VertexId> b,
                            VertexId* out) {
    std::size_t i = 0, j = 0, n = 0;
    while (i < a.size()) {
        if (j == b.size() || a[i] < b[j]) {
            out[n++] = a[i++];
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            ++i;
            ++j;
        }
    }
    return n;
}

} // namespace gpm
