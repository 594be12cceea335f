#pragma once

#include <atomic>
#include <cstdint>

#include "gpm/error.hpp"

namespace gpm {

enum class EmbeddingState : std::uint8_t { Pending, Ready, Zombie, Terminated };

struct LifecycleStats {
    std::atomic<std::uint64_t> ready{0};
    std::atomic<std::uint64_t> zombie{0};
    std::atomic<std::uint64_t> terminated{0};
};

/// Intrusive lifecycle cell. Transitions are
/// Pending -> Ready -> Zombie -> Terminated only; an embedding terminates
/// when it is a zombie with no live children, then notifies its parent.
struct LifecycleNode {
    LifecycleNode* parent = nullptr;
    std::atomic<std::uint32_t> pending_children{0};
    std::atomic<EmbeddingState> state{EmbeddingState::Pending};
};

inline void mark_ready(LifecycleNode& n, LifecycleStats& stats) {
    auto was = n.state.exchange(EmbeddingState::Ready);
    if (was != EmbeddingState::Pending)
        throw LifecycleError("ready transition from non-pending state");
    stats.ready.fetch_add(1, std::memory_order_relaxed);
}

// on_terminate(node) runs once per terminated node, bottom-up; the owner
// reclaims arena bookkeeping there. Both the zombie-side and the last-child
// side may observe the condition; the CAS arbitrates.
template <class F>
void terminate_cascade(LifecycleNode* n, LifecycleStats& stats, F&& on_terminate) {
    while (n != nullptr) {
        auto expect = EmbeddingState::Zombie;
        if (!n->state.compare_exchange_strong(expect, EmbeddingState::Terminated))
            return;
        stats.terminated.fetch_add(1, std::memory_order_relaxed);
        on_terminate(*n);
        LifecycleNode* parent = n->parent;
        if (parent == nullptr) return;
        if (parent->pending_children.fetch_sub(1) != 1) return;
        if (parent->state.load() != EmbeddingState::Zombie) return;
        n = parent;
    }
}

template <class F>
void mark_zombie(LifecycleNode& n, LifecycleStats& stats, F&& on_terminate) {
    auto was = n.state.exchange(EmbeddingState::Zombie);
    if (was != EmbeddingState::Ready)
        throw LifecycleError("zombie transition from non-ready state");
    stats.zombie.fetch_add(1, std::memory_order_relaxed);
    if (n.pending_children.load() == 0)
        terminate_cascade(&n, stats, static_cast<F&&>(on_terminate));
}

template <class F>
void retire(LifecycleNode& n, LifecycleStats& stats, F&& on_terminate) {
    if (n.state.load() != EmbeddingState::Zombie)
        throw LifecycleError("retire requires a zombie embedding");
    if (n.pending_children.load() == 0)
        terminate_cascade(&n, stats, static_cast<F&&>(on_terminate));
}

} // namespace gpm
