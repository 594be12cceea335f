#include "gpm/engine.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>

#include "gpm/cache.hpp"
#include "gpm/dedup.hpp"
#include "gpm/error.hpp"
#include "gpm/lifecycle.hpp"
#include "gpm/vertex_set.hpp"

namespace gpm {

namespace {

enum class SlotKind : std::uint8_t { Owned, Parent, Sibling, Local, Cached };

struct Chunk;
struct Embedding;

struct Slot {
    const VertexId* data; // null until materialized (Sibling)
    Embedding* owner;     // Sibling only
    std::uint32_t len;
    SlotKind kind;
    std::uint8_t position;
};

// Variable-size record living in a chunk arena. Trailing layout:
// VertexId vertices[depth+1]; Slot slots[num_slots]; VertexId reuse[reuse_len];
// VertexId owned[...], referenced by the slots that keep private copies.
struct Embedding {
    LifecycleNode life; // first member: LifecycleNode* == Embedding*
    Chunk* home;
    std::uint8_t depth;
    std::uint8_t num_slots;
    std::uint8_t new_slot; // index into slots(), 0xFF when nothing new
    PartitionId src_partition;
    std::uint32_t reuse_len;

    Embedding* parent() { return reinterpret_cast<Embedding*>(life.parent); }
    VertexId* vertices() { return reinterpret_cast<VertexId*>(this + 1); }
    Slot* slots() { return reinterpret_cast<Slot*>(vertices() + depth + 1); }
    VertexId* reuse_data() { return reinterpret_cast<VertexId*>(slots() + num_slots); }

    std::span<const VertexId> slot_data(std::uint32_t position) {
        for (std::uint32_t i = 0; i < num_slots; ++i) {
            Slot& s = slots()[i];
            if (s.position == position) {
                GPM_CHECK(s.data != nullptr, "reading unmaterialized edge list");
                return {s.data, s.len};
            }
        }
        throw LogicError("no slot for position " + std::to_string(position));
    }
};

static_assert(std::is_standard_layout_v<Embedding>);
static_assert(sizeof(Embedding) % alignof(VertexId) == 0);
static_assert(sizeof(Slot) % alignof(VertexId) == 0);

inline Embedding* as_embedding(LifecycleNode& n) {
    return reinterpret_cast<Embedding*>(&n);
}

struct Demand {
    VertexId v;
    Embedding* e;
};

struct BatchT {
    PartitionId target = 0;
    std::vector<std::uint32_t> items; // chunk item indices, insertion order
    std::vector<Demand> demands;      // sorted by vertex at seal
    FetchResponse response;
    std::atomic<bool> staged{false};
    std::exception_ptr error;

    bool needs_fetch() const { return !demands.empty(); }
};

struct Chunk {
    std::uint32_t level;
    std::size_t cap;
    std::size_t used = 0;
    std::unique_ptr<std::uint8_t[]> arena;
    std::vector<Embedding*> items;
    std::vector<Demand> demands;
    std::vector<BatchT> batches;
    std::atomic<std::uint64_t> live_children{0};
    std::atomic<std::uint64_t> own_live{0};
    std::unique_ptr<DedupTable> dedup;
    std::mutex insert_mu;

    Chunk(std::uint32_t lvl, std::size_t bytes, std::uint32_t dedup_bits, bool with_dedup)
        : level(lvl), cap(bytes), arena(new std::uint8_t[bytes]) {
        if (with_dedup) dedup = std::make_unique<DedupTable>(dedup_bits);
    }

    void* alloc(std::size_t n) {
        n = (n + 7) & ~std::size_t{7};
        if (used + n > cap) return nullptr;
        void* p = arena.get() + used;
        used += n;
        return p;
    }
};

// all compute threads run one function; the coordinator waits out the phase
class ComputePool {
  public:
    void start(std::uint32_t n) {
        threads_.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i)
            threads_.emplace_back([this, i] { loop(i); });
    }

    ~ComputePool() {
        {
            std::lock_guard lk(mu_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    void run_phase(const std::function<void(std::uint32_t)>& fn) {
        std::unique_lock lk(mu_);
        fn_ = &fn;
        remaining_ = static_cast<std::uint32_t>(threads_.size());
        ++generation_;
        cv_.notify_all();
        done_cv_.wait(lk, [&] { return remaining_ == 0; });
        fn_ = nullptr;
    }

  private:
    void loop(std::uint32_t tid) {
        std::uint64_t seen = 0;
        for (;;) {
            const std::function<void(std::uint32_t)>* fn;
            {
                std::unique_lock lk(mu_);
                cv_.wait(lk, [&] { return stop_ || generation_ != seen; });
                if (stop_) return;
                seen = generation_;
                fn = fn_;
            }
            (*fn)(tid);
            {
                std::lock_guard lk(mu_);
                if (--remaining_ == 0) done_cv_.notify_all();
            }
        }
    }

    std::vector<std::thread> threads_;
    std::mutex mu_;
    std::condition_variable cv_, done_cv_;
    const std::function<void(std::uint32_t)>* fn_ = nullptr;
    std::uint64_t generation_ = 0;
    std::uint32_t remaining_ = 0;
    bool stop_ = false;
};

class CommPool {
  public:
    void start(std::uint32_t n) {
        for (std::uint32_t i = 0; i < n; ++i)
            threads_.emplace_back([this] { loop(); });
    }

    ~CommPool() {
        {
            std::lock_guard lk(mu_);
            stop_ = true;
        }
        cv_.notify_all();
        for (auto& t : threads_) t.join();
    }

    void submit(std::function<void()> job) {
        {
            std::lock_guard lk(mu_);
            jobs_.push_back(std::move(job));
        }
        cv_.notify_one();
    }

  private:
    void loop() {
        for (;;) {
            std::function<void()> job;
            {
                std::unique_lock lk(mu_);
                cv_.wait(lk, [&] { return stop_ || !jobs_.empty(); });
                if (jobs_.empty()) {
                    if (stop_) return;
                    continue;
                }
                job = std::move(jobs_.front());
                jobs_.pop_front();
            }
            job();
        }
    }

    std::vector<std::thread> threads_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::function<void()>> jobs_;
    bool stop_ = false;
};

struct Park {
    std::uint32_t item;
    std::uint64_t child_offset;
};

struct BatchState {
    std::span<const std::uint32_t> items;
    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> full{false};
    std::mutex park_mu;
    std::vector<Park> parked;
    std::exception_ptr error;
};

struct PendingChild {
    Embedding* parent;
    std::uint32_t parent_item;
    VertexId v;
    std::uint64_t cand_index;
    std::uint32_t raw_off;
    std::uint32_t raw_len;
};

struct ThreadCtx {
    std::vector<VertexId> buf_a, buf_b, buf_c;
    std::vector<PendingChild> pending;
    std::vector<VertexId> raw_stash;
    std::vector<std::pair<Embedding*, std::uint32_t>> completed; // parent + item
    std::uint64_t emit_count = 0;
    std::uint64_t intersection_ops = 0;
    std::uint64_t created = 0;
    std::uint64_t cache_hits = 0, cache_misses = 0;
    std::uint64_t dedup_claimed = 0, dedup_shared = 0, dedup_dropped = 0;
};

enum class ItemOut { Done, Parked };

} // namespace

struct Engine::Impl {
    const PartitionedGraph& graph;
    Endpoint& ep;
    EngineConfig cfg;

    ComputePool pool;
    CommPool comm;
    std::vector<ThreadCtx> ctxs;
    std::uint64_t max_degree = 0;

    std::unique_ptr<EdgeListCache> cache;
    const MatchPlan* plan = nullptr;

    // run-level instrumentation
    LifecycleStats life_stats;
    std::atomic<std::uint64_t> created{0};
    std::atomic<std::uint64_t> live_chunks{0}, peak_live_chunks{0};
    std::atomic<std::uint64_t> arena_bytes{0}, peak_arena_bytes{0};
    WorkerMetrics metrics;

    std::mutex staged_mu;
    std::condition_variable staged_cv;

    Impl(const PartitionedGraph& g, Endpoint& e, EngineConfig c)
        : graph(g), ep(e), cfg(c) {
        if (cfg.compute_threads == 0) throw ConfigError("compute_threads must be >= 1");
        if (cfg.mini_batch == 0) throw ConfigError("mini_batch must be >= 1");
        if (cfg.comm_threads == 0)
            cfg.comm_threads = std::max(1u, cfg.compute_threads / 3);
        for (auto d : graph.degrees()) max_degree = std::max(max_degree, d);
        ctxs.resize(cfg.compute_threads);
        for (auto& ctx : ctxs) {
            ctx.buf_a.resize(max_degree + 1);
            ctx.buf_b.resize(max_degree + 1);
            ctx.buf_c.resize(max_degree + 1);
        }
        pool.start(cfg.compute_threads);
        comm.start(cfg.comm_threads);
    }

    PartitionId num_parts() const { return graph.num_partitions(); }
    PartitionId mine() const { return graph.my_partition(); }

    // ---- chunk bookkeeping ----

    std::unique_ptr<Chunk> new_chunk(std::uint32_t level) {
        auto c = std::make_unique<Chunk>(level, cfg.chunk_bytes, cfg.dedup_table_bits,
                                         cfg.enable_dedup);
        auto live = live_chunks.fetch_add(1) + 1;
        auto peak = peak_live_chunks.load();
        while (live > peak && !peak_live_chunks.compare_exchange_weak(peak, live)) {
        }
        auto bytes = arena_bytes.fetch_add(cfg.chunk_bytes) + cfg.chunk_bytes;
        auto bpeak = peak_arena_bytes.load();
        while (bytes > bpeak && !peak_arena_bytes.compare_exchange_weak(bpeak, bytes)) {
        }
        return c;
    }

    void release_chunk(Chunk& chunk) {
        GPM_CHECK(chunk.own_live.load() == 0, "chunk released with live embeddings");
        GPM_CHECK(chunk.live_children.load() == 0, "chunk released with live children");
        live_chunks.fetch_sub(1);
        arena_bytes.fetch_sub(cfg.chunk_bytes);
    }

    // chunk counters maintained at each bottom-up termination
    void on_terminate(LifecycleNode& n) {
        Embedding* e = as_embedding(n);
        e->home->own_live.fetch_sub(1);
        if (Embedding* p = e->parent()) p->home->live_children.fetch_sub(1);
    }

    void zombie(Embedding* e) {
        mark_zombie(e->life, life_stats, [this](LifecycleNode& n) { on_terminate(n); });
    }

    // ---- candidate computation ----

    // raw candidate set C_p: pure intersection of the intersect-source
    // lists. Result lives in buf_a (or is a direct slot view for a single
    // source); apply_anti never writes buf_a.
    std::span<const VertexId> compute_raw(Embedding* e, std::uint32_t p, ThreadCtx& ctx) {
        const auto& sources = plan->intersect_sources[p];
        if (cfg.enable_compute_reuse && plan->reuse_from_parent[p]) {
            if (e->reuse_len == 0)
                throw LogicError("reuse data absent though the plan stores it");
            std::span<const VertexId> base{e->reuse_data(), e->reuse_len};
            auto newest = e->slot_data(p - 1);
            ++ctx.intersection_ops;
            std::size_t n = intersect(base, newest, ctx.buf_a.data());
            return {ctx.buf_a.data(), n};
        }
        std::array<std::span<const VertexId>, 16> lists;
        GPM_CHECK(sources.size() <= lists.size(), "too many intersect sources");
        for (std::size_t i = 0; i < sources.size(); ++i)
            lists[i] = e->slot_data(sources[i]);
        // shortest first; deterministic and keeps intermediates small
        std::stable_sort(lists.begin(), lists.begin() + sources.size(),
                         [](auto a, auto b) { return a.size() < b.size(); });
        if (sources.size() == 1) return lists[0];
        ++ctx.intersection_ops;
        std::size_t n = intersect(lists[0], lists[1], ctx.buf_a.data());
        for (std::size_t i = 2; i < sources.size(); ++i) {
            ++ctx.intersection_ops;
            n = intersect({ctx.buf_a.data(), n}, lists[i], ctx.buf_b.data());
            std::copy_n(ctx.buf_b.data(), n, ctx.buf_a.data());
        }
        return {ctx.buf_a.data(), n};
    }

    // raw minus anti-source adjacency (vertex-induced exclusions); ping-pongs
    // between buf_c and buf_b, leaving raw intact
    std::span<const VertexId> apply_anti(Embedding* e, std::uint32_t p,
                                         std::span<const VertexId> cand, ThreadCtx& ctx) {
        const auto& anti = plan->anti_sources[p];
        if (anti.empty()) return cand;
        VertexId* cur = ctx.buf_c.data();
        VertexId* other = ctx.buf_b.data();
        std::size_t n = subtract(cand, e->slot_data(anti[0]), cur);
        for (std::size_t i = 1; i < anti.size(); ++i) {
            n = subtract({cur, n}, e->slot_data(anti[i]), other);
            std::swap(cur, other);
        }
        return {cur, n};
    }

    bool passes_filters(Embedding* e, std::uint32_t p, VertexId v) {
        for (std::uint32_t i = 0; i <= e->depth; ++i)
            if (e->vertices()[i] == v) return false;
        if (!plan->labels.empty() && graph.label(v) != plan->labels[p]) return false;
        return true;
    }

    // ---- child insertion (serialized behind chunk.insert_mu) ----

    static std::size_t embedding_bytes(std::uint32_t depth, std::uint32_t nslots,
                                       std::uint32_t reuse_len,
                                       std::uint64_t owned_words) {
        return sizeof(Embedding) + sizeof(VertexId) * (depth + 1) + sizeof(Slot) * nslots +
               sizeof(VertexId) * (reuse_len + owned_words);
    }

    // false when the arena is full; ConfigError when even an empty chunk
    // could not host this child
    bool insert_child(Chunk& next, const PendingChild& pc, ThreadCtx& ctx) {
        std::uint32_t p = pc.parent->depth + 1;
        const auto& actives = plan->active_after[p];
        auto nslots = static_cast<std::uint32_t>(actives.size());

        bool new_active = std::find(actives.begin(), actives.end(), p) != actives.end();
        enum class NewKind { None, Local, Cached, Sib, Fetch } nk = NewKind::None;
        const std::vector<VertexId>* cached = nullptr;
        Embedding* sib_owner = nullptr;
        bool will_claim = false;
        if (new_active) {
            if (graph.owns(pc.v)) {
                nk = NewKind::Local;
            } else {
                if (cfg.enable_cache) {
                    cached = cache->get(pc.v);
                    if (cached != nullptr) {
                        nk = NewKind::Cached;
                        ++ctx.cache_hits;
                    } else {
                        ++ctx.cache_misses;
                    }
                }
                if (nk == NewKind::None && next.dedup) {
                    void* owner = nullptr;
                    // probe first: the outcome decides the allocation size;
                    // the claim is published once the record exists
                    auto out = next.dedup->probe(pc.v, &owner);
                    if (out == DedupTable::Outcome::Shared) {
                        nk = NewKind::Sib;
                        sib_owner = static_cast<Embedding*>(owner);
                        ++ctx.dedup_shared;
                    } else {
                        nk = NewKind::Fetch;
                        will_claim = (out == DedupTable::Outcome::Claimed);
                        if (will_claim)
                            ++ctx.dedup_claimed;
                        else
                            ++ctx.dedup_dropped;
                    }
                } else if (nk == NewKind::None) {
                    nk = NewKind::Fetch;
                }
            }
        }

        std::uint64_t owned_words = 0;
        if (nk == NewKind::Fetch) owned_words += graph.degree(pc.v);
        if (!cfg.enable_vertical_reuse) {
            for (auto q : actives)
                if (q != p) owned_words += pc.parent->slot_data(q).size();
        }
        std::uint32_t reuse_len =
            (cfg.enable_compute_reuse && plan->store_intersection[p]) ? pc.raw_len : 0;

        std::size_t bytes = embedding_bytes(p, nslots, reuse_len, owned_words);
        void* mem = next.alloc(bytes);
        if (mem == nullptr) {
            if (next.items.empty())
                throw ConfigError("chunk_bytes too small: one embedding needs " +
                                  std::to_string(bytes) + " bytes, configure at least " +
                                  std::to_string(bytes + 64));
            return false;
        }

        auto* e = new (mem) Embedding();
        e->life.parent = &pc.parent->life;
        e->home = &next;
        e->depth = static_cast<std::uint8_t>(p);
        e->num_slots = static_cast<std::uint8_t>(nslots);
        e->new_slot = 0xFF;
        e->src_partition = mine();
        e->reuse_len = reuse_len;

        std::copy_n(pc.parent->vertices(), p, e->vertices());
        e->vertices()[p] = pc.v;

        VertexId* owned_cursor = e->reuse_data() + reuse_len;
        for (std::uint32_t i = 0; i < nslots; ++i) {
            Slot& s = e->slots()[i];
            s.position = static_cast<std::uint8_t>(actives[i]);
            s.owner = nullptr;
            if (actives[i] == p) {
                e->new_slot = static_cast<std::uint8_t>(i);
                switch (nk) {
                    case NewKind::Local: {
                        auto list = graph.local_edge_list(pc.v);
                        s.kind = SlotKind::Local;
                        s.data = list.data();
                        s.len = static_cast<std::uint32_t>(list.size());
                        break;
                    }
                    case NewKind::Cached:
                        s.kind = SlotKind::Cached;
                        s.data = cached->data();
                        s.len = static_cast<std::uint32_t>(cached->size());
                        break;
                    case NewKind::Sib:
                        s.kind = SlotKind::Sibling;
                        s.owner = sib_owner;
                        s.data = nullptr;
                        s.len = static_cast<std::uint32_t>(graph.degree(pc.v));
                        e->src_partition = graph.partition_map()(pc.v);
                        break;
                    case NewKind::Fetch:
                        s.kind = SlotKind::Owned;
                        s.data = owned_cursor;
                        s.len = static_cast<std::uint32_t>(graph.degree(pc.v));
                        owned_cursor += graph.degree(pc.v);
                        e->src_partition = graph.partition_map()(pc.v);
                        next.demands.push_back({pc.v, e});
                        if (will_claim)
                            GPM_CHECK(next.dedup->claim(pc.v, e),
                                      "dedup claim raced under the insert lock");
                        break;
                    default:
                        throw LogicError("active new position without a binding");
                }
            } else {
                auto parent_list = pc.parent->slot_data(actives[i]);
                if (cfg.enable_vertical_reuse) {
                    s.kind = SlotKind::Parent;
                    s.data = parent_list.data();
                } else {
                    s.kind = SlotKind::Owned; // private copy, no fetch
                    std::copy(parent_list.begin(), parent_list.end(), owned_cursor);
                    s.data = owned_cursor;
                    owned_cursor += parent_list.size();
                }
                s.len = static_cast<std::uint32_t>(parent_list.size());
            }
        }
        if (reuse_len > 0)
            std::copy_n(ctx.raw_stash.data() + pc.raw_off, reuse_len, e->reuse_data());

        pc.parent->life.pending_children.fetch_add(1);
        pc.parent->home->live_children.fetch_add(1);
        next.own_live.fetch_add(1);
        next.items.push_back(e);
        ++ctx.created;
        return true;
    }

    // flush the thread-local buffer into the next chunk; on arena exhaustion
    // records parks and reports failure
    bool flush(ThreadCtx& ctx, Chunk& next, BatchState& bs) {
        std::size_t inserted = 0;
        {
            std::lock_guard lk(next.insert_mu);
            while (inserted < ctx.pending.size()) {
                if (!insert_child(next, ctx.pending[inserted], ctx)) break;
                ++inserted;
            }
        }
        bool ok = inserted == ctx.pending.size();
        if (!ok) {
            bs.full.store(true);
            std::vector<std::uint32_t> parked_items;
            {
                std::lock_guard lk(bs.park_mu);
                for (std::size_t i = inserted; i < ctx.pending.size(); ++i) {
                    const auto& pc = ctx.pending[i];
                    // one park per parent, at its first un-inserted child
                    if (std::find(parked_items.begin(), parked_items.end(),
                                  pc.parent_item) == parked_items.end()) {
                        parked_items.push_back(pc.parent_item);
                        bs.parked.push_back({pc.parent_item, pc.cand_index});
                    }
                }
            }
            for (auto& [parent, item] : ctx.completed) {
                if (std::find(parked_items.begin(), parked_items.end(), item) ==
                    parked_items.end())
                    zombie(parent);
            }
        } else {
            for (auto& [parent, item] : ctx.completed) zombie(parent);
        }
        ctx.pending.clear();
        ctx.raw_stash.clear();
        ctx.completed.clear();
        return ok;
    }

    ItemOut process_item(ThreadCtx& ctx, Chunk& chunk, std::uint32_t item,
                         std::uint64_t child_offset, Chunk* next, BatchState& bs) {
        Embedding* e = chunk.items[item];
        if (e->life.state.load() != EmbeddingState::Ready)
            throw LifecycleError("extend invoked on non-ready embedding");
        std::uint32_t p = e->depth + 1;
        bool emit_level = (p == plan->k - 1);

        auto raw = compute_raw(e, p, ctx);
        auto cand = apply_anti(e, p, raw, ctx);

        VertexId lo = 0;
        VertexId hi = kInvalidVertex;
        for (auto q : plan->lower_bound_positions[p])
            lo = std::max(lo, e->vertices()[q] + 1);
        for (auto q : plan->upper_bound_positions[p])
            hi = std::min(hi, e->vertices()[q]);

        auto it = std::lower_bound(cand.begin(), cand.end(), lo);
        std::uint64_t cand_index = 0;
        std::uint32_t raw_off = 0;
        bool raw_stashed = false;
        for (; it != cand.end() && *it < hi; ++it) {
            VertexId v = *it;
            if (!passes_filters(e, p, v)) continue;
            std::uint64_t ci = cand_index++;
            if (ci < child_offset) continue;
            if (emit_level) {
                ++ctx.emit_count;
                continue;
            }
            if (!raw_stashed) {
                // one stash entry feeds every child of this extension
                raw_off = static_cast<std::uint32_t>(ctx.raw_stash.size());
                ctx.raw_stash.insert(ctx.raw_stash.end(), raw.begin(), raw.end());
                raw_stashed = true;
            }
            ctx.pending.push_back(
                {e, item, v, ci, raw_off, static_cast<std::uint32_t>(raw.size())});
            if (ctx.pending.size() >= cfg.insertion_buffer) {
                if (!flush(ctx, *next, bs)) return ItemOut::Parked;
                raw_stashed = false; // stash was reset by the flush
            }
        }
        if (emit_level) {
            zombie(e);
            return ItemOut::Done;
        }
        ctx.completed.emplace_back(e, item);
        return ItemOut::Done;
    }

    void worker_main(std::uint32_t tid, Chunk& chunk, BatchState& bs, Chunk* next) {
        ThreadCtx& ctx = ctxs[tid];
        try {
            for (;;) {
                if (bs.full.load()) break;
                Park park{0, 0};
                bool have_park = false;
                {
                    std::lock_guard lk(bs.park_mu);
                    if (!bs.parked.empty()) {
                        park = bs.parked.back();
                        bs.parked.pop_back();
                        have_park = true;
                    }
                }
                if (have_park) {
                    if (process_item(ctx, chunk, park.item, park.child_offset, next, bs) ==
                        ItemOut::Parked)
                        break;
                    continue;
                }
                std::size_t at = bs.cursor.fetch_add(cfg.mini_batch);
                if (at >= bs.items.size()) break;
                std::size_t end = std::min(at + cfg.mini_batch, bs.items.size());
                bool parked = false;
                for (std::size_t i = at; i < end; ++i) {
                    if (bs.full.load()) {
                        std::lock_guard lk(bs.park_mu);
                        for (std::size_t j = i; j < end; ++j)
                            bs.parked.push_back({bs.items[j], 0});
                        parked = true;
                        break;
                    }
                    if (process_item(ctx, chunk, bs.items[i], 0, next, bs) ==
                        ItemOut::Parked) {
                        std::lock_guard lk(bs.park_mu);
                        for (std::size_t j = i + 1; j < end; ++j)
                            bs.parked.push_back({bs.items[j], 0});
                        parked = true;
                        break;
                    }
                }
                if (parked) break;
            }
            if (!ctx.pending.empty() || !ctx.completed.empty()) {
                GPM_CHECK(next != nullptr, "buffered children at emit level");
                flush(ctx, *next, bs);
            }
        } catch (...) {
            std::lock_guard lk(bs.park_mu);
            if (!bs.error) bs.error = std::current_exception();
            bs.full.store(true); // unblock peers
        }
    }

    // ---- batches and pipeline ----

    void seal_and_shuffle(Chunk& chunk) {
        if (chunk.dedup) chunk.dedup->clear(); // sealed: no further sharing
        PartitionId n = num_parts(), k = mine();
        chunk.batches = std::vector<BatchT>(n);
        for (PartitionId j = 0; j < n; ++j)
            chunk.batches[j].target = (k + j) % n;
        for (std::uint32_t idx = 0; idx < chunk.items.size(); ++idx) {
            PartitionId src = chunk.items[idx]->src_partition;
            chunk.batches[(src + n - k) % n].items.push_back(idx);
        }
        for (auto& d : chunk.demands) {
            PartitionId src = graph.partition_map()(d.v);
            chunk.batches[(src + n - k) % n].demands.push_back(d);
        }
        chunk.demands.clear();
        for (auto& b : chunk.batches) {
            std::stable_sort(b.demands.begin(), b.demands.end(),
                             [](const Demand& a, const Demand& c) { return a.v < c.v; });
            if (!b.needs_fetch()) b.staged.store(true);
        }
        issue_next_fetch(chunk, 0);
    }

    // pipelined prefetch: the fetch for a batch starts as soon as the
    // previous batch's data arrived, never waiting on compute
    void issue_next_fetch(Chunk& chunk, PartitionId from) {
        for (PartitionId j = from; j < chunk.batches.size(); ++j) {
            if (!chunk.batches[j].needs_fetch()) continue;
            comm.submit([this, &chunk, j] {
                BatchT& batch = chunk.batches[j];
                bool failed = false;
                try {
                    std::vector<VertexId> ids;
                    ids.reserve(batch.demands.size());
                    for (auto& d : batch.demands) ids.push_back(d.v);
                    batch.response = ep.fetch_batch(batch.target, ids);
                } catch (...) {
                    batch.error = std::current_exception();
                    failed = true;
                }
                // chain before publishing: the chunk may be released as soon
                // as its last staged batch is consumed
                if (!failed) issue_next_fetch(chunk, j + 1);
                {
                    std::lock_guard lk(staged_mu);
                    batch.staged.store(true);
                }
                staged_cv.notify_all();
            });
            return;
        }
    }

    void wait_staged(BatchT& b) {
        std::unique_lock lk(staged_mu);
        staged_cv.wait(lk, [&] { return b.staged.load(); });
    }

    void materialize(BatchT& b) {
        if (b.error) std::rethrow_exception(b.error);
        if (!b.needs_fetch()) return;
        auto& entries = b.response.entries;
        if (entries.size() != b.demands.size())
            throw ProtocolError("response entry count mismatch");
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const Demand& d = b.demands[i];
            FetchEntry& entry = entries[i];
            if (entry.v != d.v) throw ProtocolError("response order mismatch");
            if (entry.neighbors.size() != graph.degree(d.v))
                throw ProtocolError("degree mismatch for vertex " + std::to_string(d.v));
            Slot& s = d.e->slots()[d.e->new_slot];
            std::copy(entry.neighbors.begin(), entry.neighbors.end(),
                      const_cast<VertexId*>(s.data));
            metrics.fetch_count += 1;
            metrics.fetched[d.v] += 1;
        }
        if (cfg.enable_cache) {
            for (std::size_t i = 0; i < b.demands.size(); ++i) {
                if (i > 0 && b.demands[i].v == b.demands[i - 1].v) continue;
                const Demand& d = b.demands[i];
                Slot& s = d.e->slots()[d.e->new_slot];
                if (cache->insert(d.v, {s.data, s.len}) ==
                    EdgeListCache::InsertResult::Inserted)
                    metrics.cache_inserts += 1;
            }
            GPM_CHECK(cache->used_bytes() <= cache->capacity_bytes(),
                      "cache exceeded its capacity");
        }
        b.response = FetchResponse{}; // staging freed once materialized
    }

    void mark_batch_ready(Chunk& chunk, BatchT& b) {
        for (auto idx : b.items) {
            Embedding* e = chunk.items[idx];
            for (std::uint32_t i = 0; i < e->num_slots; ++i) {
                Slot& s = e->slots()[i];
                if (s.kind == SlotKind::Sibling && s.data == nullptr)
                    s.data = s.owner->slots()[s.owner->new_slot].data;
            }
            mark_ready(e->life, life_stats);
        }
    }

    void process_chunk(Chunk& chunk, std::uint32_t depth) {
        seal_and_shuffle(chunk);
        bool emit_level = (depth == plan->k - 2);
        std::unique_ptr<Chunk> next = emit_level ? nullptr : new_chunk(depth + 1);
        for (auto& b : chunk.batches) {
            wait_staged(b);
            materialize(b);
            if (b.items.empty()) continue;
            mark_batch_ready(chunk, b);
            BatchState bs;
            bs.items = b.items;
            for (;;) {
                pool.run_phase(
                    [&](std::uint32_t tid) { worker_main(tid, chunk, bs, next.get()); });
                if (bs.error) std::rethrow_exception(bs.error);
                if (!bs.full.load()) break;
                // next chunk full: descend, release, resume with a fresh one
                process_chunk(*next, depth + 1);
                release_chunk(*next);
                next = new_chunk(depth + 1);
                bs.full.store(false);
            }
        }
        if (next) {
            if (!next->items.empty()) process_chunk(*next, depth + 1);
            release_chunk(*next);
        }
    }

    enum class RootOut { Inserted, Skipped, Full };

    RootOut insert_root(Chunk& chunk, VertexId v) {
        if (!plan->labels.empty() && graph.label(v) != plan->labels[0])
            return RootOut::Skipped;
        const auto& actives = plan->active_after[0];
        auto nslots = static_cast<std::uint32_t>(actives.size());
        std::size_t bytes = embedding_bytes(0, nslots, 0, 0);
        void* mem = chunk.alloc(bytes);
        if (mem == nullptr) {
            if (chunk.items.empty())
                throw ConfigError("chunk_bytes too small for a root embedding (" +
                                  std::to_string(bytes) + " bytes)");
            return RootOut::Full;
        }
        auto* e = new (mem) Embedding();
        e->life.parent = nullptr;
        e->home = &chunk;
        e->depth = 0;
        e->num_slots = static_cast<std::uint8_t>(nslots);
        e->new_slot = 0xFF;
        e->src_partition = mine();
        e->reuse_len = 0;
        e->vertices()[0] = v;
        for (std::uint32_t i = 0; i < nslots; ++i) {
            GPM_CHECK(actives[i] == 0, "root with non-root active position");
            auto list = graph.local_edge_list(v);
            Slot& s = e->slots()[i];
            s.kind = SlotKind::Local;
            s.position = 0;
            s.owner = nullptr;
            s.data = list.data();
            s.len = static_cast<std::uint32_t>(list.size());
            e->new_slot = static_cast<std::uint8_t>(i);
        }
        chunk.own_live.fetch_add(1);
        chunk.items.push_back(e);
        created.fetch_add(1, std::memory_order_relaxed);
        return RootOut::Inserted;
    }

    std::uint64_t explore_plan(const MatchPlan& p) {
        plan = &p;
        if (p.k > 64) throw ConfigError("pattern too large");
        if (!p.labels.empty() && !graph.has_labels())
            throw ConfigError("labeled plan on an unlabeled graph");
        for (auto& ctx : ctxs) {
            ctx.emit_count = 0;
            GPM_CHECK(ctx.pending.empty() && ctx.completed.empty(),
                      "stale thread-local insertion state");
        }
        if (p.k == 1) {
            // single-vertex pattern: every (label-matching) owned vertex
            std::uint64_t n = 0;
            for (VertexId v : graph.owned_vertices())
                if (p.labels.empty() || graph.label(v) == p.labels[0]) ++n;
            return n;
        }

        // roots streamed in segments; each segment explored to completion
        auto owned = graph.owned_vertices();
        std::size_t at = 0;
        while (at < owned.size()) {
            auto root_chunk = new_chunk(0);
            while (at < owned.size()) {
                auto out = insert_root(*root_chunk, owned[at]);
                if (out == RootOut::Full) break;
                ++at;
            }
            if (!root_chunk->items.empty()) process_chunk(*root_chunk, 0);
            release_chunk(*root_chunk);
        }

        std::uint64_t count = 0;
        for (auto& ctx : ctxs) {
            count += ctx.emit_count;
            ctx.emit_count = 0;
        }
        return count;
    }

    void merge_thread_counters() {
        for (auto& ctx : ctxs) {
            metrics.intersection_ops += ctx.intersection_ops;
            metrics.cache_hits += ctx.cache_hits;
            metrics.cache_misses += ctx.cache_misses;
            metrics.dedup_claimed += ctx.dedup_claimed;
            metrics.dedup_shared += ctx.dedup_shared;
            metrics.dedup_dropped += ctx.dedup_dropped;
            metrics.embeddings_created += ctx.created;
            ctx.intersection_ops = ctx.cache_hits = ctx.cache_misses = 0;
            ctx.dedup_claimed = ctx.dedup_shared = ctx.dedup_dropped = 0;
            ctx.created = 0;
        }
    }
};

Engine::Engine(const PartitionedGraph& graph, Endpoint& endpoint, EngineConfig cfg)
    : impl_(std::make_unique<Impl>(graph, endpoint, cfg)) {}

Engine::~Engine() = default;

RunResult Engine::run(const PatternApp& app) {
    auto& im = *impl_;
    if (app.plans.empty()) throw ConfigError("app has no plans");
    using clock = std::chrono::steady_clock;
    auto seconds = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };

    im.metrics = WorkerMetrics{};
    im.life_stats.ready = im.life_stats.zombie = im.life_stats.terminated = 0;
    im.created = 0;
    im.peak_live_chunks = im.peak_arena_bytes = 0;
    GPM_CHECK(im.live_chunks.load() == 0 && im.arena_bytes.load() == 0,
              "chunks leaked across runs");
    im.cache = std::make_unique<EdgeListCache>(
        static_cast<std::uint64_t>(im.cfg.cache_fraction *
                                   static_cast<double>(im.graph.graph_bytes())),
        im.cfg.cache_degree_threshold);

    auto sent0 = im.ep.stats().bytes_sent.load();
    auto recv0 = im.ep.stats().bytes_received.load();
    auto msent0 = im.ep.stats().messages_sent.load();
    auto mrecv0 = im.ep.stats().messages_received.load();

    im.ep.serve(&im.graph);
    im.ep.barrier();

    RunResult result;
    auto t_explore = clock::now();
    std::uint64_t fingerprint = 1469598103934665603ull; // FNV offset basis
    for (const auto& plan : app.plans) {
        for (char c : plan.name) fingerprint = (fingerprint ^ c) * 1099511628211ull;
        fingerprint = (fingerprint ^ plan.k) * 1099511628211ull;
        result.local_counts.push_back(im.explore_plan(plan));
    }
    im.merge_thread_counters();
    auto t_reduce = clock::now();

    // plan fingerprint rides along; equal on all workers iff the apps match
    std::vector<std::uint64_t> payload;
    payload.push_back(fingerprint % 1000000007ull);
    for (auto c : result.local_counts) payload.push_back(c);
    auto reduced = im.ep.reduce_sum(payload);
    if (reduced.at(0) != (fingerprint % 1000000007ull) * im.num_parts())
        throw ProtocolError("plan set mismatch across workers");
    result.global_counts.assign(reduced.begin() + 1, reduced.end());
    auto t_done = clock::now();

    auto& m = im.metrics;
    m.time_explore_s = seconds(t_explore, t_reduce);
    m.time_reduce_s = seconds(t_reduce, t_done);
    m.bytes_sent = im.ep.stats().bytes_sent.load() - sent0;
    m.bytes_received = im.ep.stats().bytes_received.load() - recv0;
    m.messages_sent = im.ep.stats().messages_sent.load() - msent0;
    m.messages_received = im.ep.stats().messages_received.load() - mrecv0;
    m.cache_bytes = im.cache->used_bytes();
    m.peak_live_chunks = im.peak_live_chunks.load();
    m.peak_arena_bytes = im.peak_arena_bytes.load();
    m.embeddings_created += im.created.load(); // plus root embeddings
    m.ready_transitions = im.life_stats.ready.load();
    m.zombie_transitions = im.life_stats.zombie.load();
    m.terminated_transitions = im.life_stats.terminated.load();
    result.metrics = m;
    return result;
}

} // namespace gpm
