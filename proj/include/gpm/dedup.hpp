#pragma once

#include <atomic>
#include <cstdint>
#include <memory>

#include "gpm/types.hpp"

namespace gpm {

/// Collision-dropping claim table: one fetch per claimed vertex within a
/// chunk. No chains; an occupied slot with a different key drops the insert
/// and the requester pays for its own fetch.
class DedupTable {
  public:
    enum class Outcome { Shared, Claimed, Dropped };

    explicit DedupTable(std::uint32_t bits = 16)
        : mask_((std::uint64_t{1} << bits) - 1),
          entries_(new Entry[std::size_t{1} << bits]) {
        clear();
    }

    // owner_out is set on Shared; on Claimed the caller becomes the owner.
    Outcome lookup_or_claim(VertexId v, void* owner, void** owner_out) {
        Entry& e = entries_[slot(v)];
        VertexId expected = kInvalidVertex;
        if (e.key.compare_exchange_strong(expected, v, std::memory_order_acq_rel)) {
            e.owner.store(owner, std::memory_order_release);
            return Outcome::Claimed;
        }
        if (expected == v) {
            void* o = e.owner.load(std::memory_order_acquire);
            if (o != nullptr) {
                *owner_out = o;
                return Outcome::Shared;
            }
            // claimer published the key but not yet the owner; treat as a
            // drop and fetch redundantly
        }
        return Outcome::Dropped;
    }

    // read-only variant for callers that must size an allocation before
    // committing the claim; pair with claim() under external serialization
    Outcome probe(VertexId v, void** owner_out) const {
        const Entry& e = entries_[slot(v)];
        VertexId key = e.key.load(std::memory_order_acquire);
        if (key == kInvalidVertex) return Outcome::Claimed;
        if (key == v) {
            void* o = e.owner.load(std::memory_order_acquire);
            if (o != nullptr) {
                *owner_out = o;
                return Outcome::Shared;
            }
        }
        return Outcome::Dropped;
    }

    bool claim(VertexId v, void* owner) {
        Entry& e = entries_[slot(v)];
        VertexId expected = kInvalidVertex;
        if (!e.key.compare_exchange_strong(expected, v, std::memory_order_acq_rel))
            return false;
        e.owner.store(owner, std::memory_order_release);
        return true;
    }

    void clear() {
        for (std::size_t i = 0; i <= mask_; ++i) {
            entries_[i].key.store(kInvalidVertex, std::memory_order_relaxed);
            entries_[i].owner.store(nullptr, std::memory_order_relaxed);
        }
    }

    std::size_t capacity() const { return mask_ + 1; }

  private:
    struct Entry {
        std::atomic<VertexId> key;
        std::atomic<void*> owner;
    };

    std::size_t slot(VertexId v) const {
        return (v * 0x9E3779B97F4A7C15ull >> 17) & mask_;
    }

    std::size_t mask_;
    std::unique_ptr<Entry[]> entries_;
};

} // namespace gpm
