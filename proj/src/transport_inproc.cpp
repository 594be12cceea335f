#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <semaphore>
#include <thread>

#include "gpm/error.hpp"
#include "gpm/transport.hpp"

namespace gpm {

namespace {

constexpr auto kInprocTimeout = std::chrono::seconds(120);

} // namespace

class InProcEndpoint;

struct InProcFabric::Impl {
    PartitionId n;
    std::vector<std::unique_ptr<InProcEndpoint>> endpoints;

    std::mutex barrier_mu;
    std::condition_variable barrier_cv;
    PartitionId barrier_count = 0;
    std::uint64_t barrier_gen = 0;

    std::mutex reduce_mu;
    std::condition_variable reduce_cv;
    PartitionId reduce_count = 0;
    std::uint64_t reduce_gen = 0;
    std::vector<std::uint64_t> reduce_acc;
    std::vector<std::uint64_t> reduce_result;
};

class InProcEndpoint final : public Endpoint {
  public:
    InProcEndpoint(InProcFabric::Impl* fab, PartitionId me) : fab_(fab), me_(me) {
        inflight_.reserve(fab->n);
        for (PartitionId i = 0; i < fab->n; ++i)
            inflight_.push_back(
                std::make_unique<std::counting_semaphore<>>(kMaxInflightFetches));
    }

    ~InProcEndpoint() override { shutdown(); }

    PartitionId my_partition() const override { return me_; }
    PartitionId num_partitions() const override { return fab_->n; }

    void serve(const PartitionedGraph* graph) override {
        {
            std::lock_guard lk(inbox_mu_);
            graph_ = graph;
        }
        if (!responder_.joinable())
            responder_ = std::thread([this] { respond_loop(); });
    }

    FetchResponse fetch_batch(PartitionId target,
                              const std::vector<VertexId>& ids) override {
        if (ids.empty()) return {}; // fast path, zero messages
        if (target >= fab_->n) throw ConfigError("fetch target out of range");
        if (target == me_)
            throw ProtocolError("fetch_batch addressed to the local partition");
        inflight_[target]->acquire();
        struct Release {
            std::counting_semaphore<>* s;
            ~Release() { s->release(); }
        } release{inflight_[target].get()};

        Frame req;
        req.type = MsgType::FetchReq;
        req.request_id = next_request_id();
        req.payload = encode_fetch_request({me_, ids});
        stats_.bytes_sent += req.wire_size();
        stats_.messages_sent += 1;
        fab_->endpoints[target]->enqueue_request(me_, std::move(req));

        Frame resp = await_response(req.request_id, target);
        stats_.bytes_received += resp.wire_size();
        stats_.messages_received += 1;
        if (resp.type == MsgType::Error)
            throw ProtocolError("responder " + std::to_string(target) + ": " +
                                decode_error(resp.payload));
        return decode_fetch_response(resp.payload);
    }

    void barrier() override {
        std::unique_lock lk(fab_->barrier_mu);
        std::uint64_t gen = fab_->barrier_gen;
        if (++fab_->barrier_count == fab_->n) {
            fab_->barrier_count = 0;
            ++fab_->barrier_gen;
            fab_->barrier_cv.notify_all();
            return;
        }
        if (!fab_->barrier_cv.wait_for(lk, kInprocTimeout,
                                       [&] { return fab_->barrier_gen != gen; }))
            throw TransportError("barrier timeout on partition " + std::to_string(me_));
    }

    std::vector<std::uint64_t> reduce_sum(const std::vector<std::uint64_t>& vals) override {
        std::unique_lock lk(fab_->reduce_mu);
        std::uint64_t gen = fab_->reduce_gen;
        if (fab_->reduce_count == 0) {
            fab_->reduce_acc = vals;
        } else {
            if (fab_->reduce_acc.size() != vals.size())
                throw ProtocolError("reduction size mismatch across workers");
            for (std::size_t i = 0; i < vals.size(); ++i) fab_->reduce_acc[i] += vals[i];
        }
        if (++fab_->reduce_count == fab_->n) {
            fab_->reduce_count = 0;
            fab_->reduce_result = fab_->reduce_acc;
            ++fab_->reduce_gen;
            fab_->reduce_cv.notify_all();
            return fab_->reduce_result;
        }
        if (!fab_->reduce_cv.wait_for(lk, kInprocTimeout,
                                      [&] { return fab_->reduce_gen != gen; }))
            throw TransportError("reduce timeout on partition " + std::to_string(me_));
        return fab_->reduce_result;
    }

    void shutdown() override {
        {
            std::lock_guard lk(inbox_mu_);
            if (closing_) return;
            closing_ = true;
        }
        inbox_cv_.notify_all();
        if (responder_.joinable()) responder_.join();
    }

  private:
    struct Incoming {
        PartitionId from;
        Frame frame;
    };

    std::uint64_t next_request_id() {
        return (static_cast<std::uint64_t>(me_) << 48) | next_seq_++;
    }

    void enqueue_request(PartitionId from, Frame frame) {
        {
            std::lock_guard lk(inbox_mu_);
            inbox_.push_back({from, std::move(frame)});
        }
        inbox_cv_.notify_one();
    }

    void deliver_response(Frame frame) {
        {
            std::lock_guard lk(resp_mu_);
            responses_.emplace(frame.request_id, std::move(frame));
        }
        resp_cv_.notify_all();
    }

    Frame await_response(std::uint64_t id, PartitionId target) {
        std::unique_lock lk(resp_mu_);
        if (!resp_cv_.wait_for(lk, kInprocTimeout,
                               [&] { return responses_.count(id) != 0; }))
            throw TransportError("fetch timeout waiting for partition " +
                                 std::to_string(target));
        auto node = responses_.extract(id);
        return std::move(node.mapped());
    }

    // responder: answers fetch requests by copying from the local partition
    void respond_loop() {
        for (;;) {
            Incoming in;
            {
                std::unique_lock lk(inbox_mu_);
                inbox_cv_.wait(lk, [&] { return closing_ || !inbox_.empty(); });
                if (inbox_.empty()) {
                    if (closing_) return;
                    continue;
                }
                in = std::move(inbox_.front());
                inbox_.pop_front();
            }
            stats_.bytes_received += in.frame.wire_size();
            stats_.messages_received += 1;

            Frame out;
            out.request_id = in.frame.request_id;
            try {
                auto req = decode_fetch_request(in.frame.payload);
                const PartitionedGraph* g = graph_;
                if (!g) throw ProtocolError("responder has no graph");
                FetchResponse resp;
                resp.entries.reserve(req.ids.size());
                for (VertexId v : req.ids) {
                    auto list = g->local_edge_list(v); // OwnershipError on bad ids
                    FetchEntry e;
                    e.v = v;
                    e.neighbors.assign(list.begin(), list.end());
                    resp.entries.push_back(std::move(e));
                }
                out.type = MsgType::FetchResp;
                out.payload = encode_fetch_response(resp);
            } catch (const std::exception& ex) {
                out.type = MsgType::Error;
                out.payload = encode_error(1, ex.what());
            }
            stats_.bytes_sent += out.wire_size();
            stats_.messages_sent += 1;
            fab_->endpoints[in.from]->deliver_response(std::move(out));
        }
    }

    InProcFabric::Impl* fab_;
    PartitionId me_;
    std::atomic<const PartitionedGraph*> graph_{nullptr};

    std::mutex inbox_mu_;
    std::condition_variable inbox_cv_;
    std::deque<Incoming> inbox_;
    bool closing_ = false;
    std::thread responder_;

    std::mutex resp_mu_;
    std::condition_variable resp_cv_;
    std::map<std::uint64_t, Frame> responses_;

    std::uint64_t next_seq_ = 1;
    std::vector<std::unique_ptr<std::counting_semaphore<>>> inflight_;

    friend class InProcFabric;
};

InProcFabric::InProcFabric(PartitionId n) : impl_(std::make_unique<Impl>()) {
    if (n == 0) throw ConfigError("fabric needs at least one partition");
    impl_->n = n;
    for (PartitionId i = 0; i < n; ++i)
        impl_->endpoints.push_back(std::make_unique<InProcEndpoint>(impl_.get(), i));
}

InProcFabric::~InProcFabric() {
    if (!impl_) return;
    for (auto& ep : impl_->endpoints) ep->shutdown();
}

Endpoint& InProcFabric::endpoint(PartitionId i) {
    if (i >= impl_->n) throw ConfigError("endpoint index out of range");
    return *impl_->endpoints[i];
}

} // namespace gpm
