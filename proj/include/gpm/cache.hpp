#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "gpm/types.hpp"

namespace gpm {

/// Static no-eviction store for remote edge lists: first accessed first
/// cached, degree above threshold, until full. Safe for concurrent readers
/// and insert-once writers; insert races keep the first copy.
class EdgeListCache {
  public:
    EdgeListCache(std::uint64_t capacity_bytes, std::uint64_t degree_threshold)
        : capacity_(capacity_bytes), threshold_(degree_threshold) {}

    enum class InsertResult { Inserted, SkippedDegree, SkippedFull, AlreadyPresent };

    // nullptr on miss; returned span stays valid for the cache's lifetime
    const std::vector<VertexId>* get(VertexId v) const {
        std::shared_lock lk(mu_);
        auto it = map_.find(v);
        return it == map_.end() ? nullptr : &it->second;
    }

    InsertResult insert(VertexId v, std::span<const VertexId> list) {
        if (list.size() <= threshold_) return InsertResult::SkippedDegree;
        if (full_.load(std::memory_order_acquire)) return InsertResult::SkippedFull;
        std::uint64_t bytes = list.size() * sizeof(VertexId);
        std::unique_lock lk(mu_);
        if (map_.count(v)) return InsertResult::AlreadyPresent;
        if (used_ + bytes > capacity_) {
            // no partial storage; from here on the cache is closed
            full_.store(true, std::memory_order_release);
            return InsertResult::SkippedFull;
        }
        map_.emplace(v, std::vector<VertexId>(list.begin(), list.end()));
        used_ += bytes;
        return InsertResult::Inserted;
    }

    std::uint64_t used_bytes() const {
        std::shared_lock lk(mu_);
        return used_;
    }
    std::uint64_t capacity_bytes() const { return capacity_; }
    bool full() const { return full_.load(std::memory_order_acquire); }

  private:
    std::uint64_t capacity_;
    std::uint64_t threshold_;
    mutable std::shared_mutex mu_;
    std::unordered_map<VertexId, std::vector<VertexId>> map_;
    std::uint64_t used_ = 0;
    std::atomic<bool> full_{false};
};

} // namespace gpm
