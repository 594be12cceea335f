#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gpm/graph.hpp"
#include "gpm/types.hpp"
#include "gpm/wire.hpp"

namespace gpm {

struct TransportStats {
    std::atomic<std::uint64_t> bytes_sent{0};
    std::atomic<std::uint64_t> bytes_received{0};
    std::atomic<std::uint64_t> messages_sent{0};
    std::atomic<std::uint64_t> messages_received{0};
};

/// Message-passing endpoint for one worker. fetch_batch blocks; concurrent
/// calls to different partitions proceed in parallel, calls to the same
/// partition serialize behind the in-flight cap.
class Endpoint {
  public:
    virtual ~Endpoint() = default;

    virtual PartitionId my_partition() const = 0;
    virtual PartitionId num_partitions() const = 0;

    // Starts answering FetchRequests from this graph until shutdown.
    virtual void serve(const PartitionedGraph* graph) = 0;

    // One request message, one response message; entries in request order.
    virtual FetchResponse fetch_batch(PartitionId target,
                                      const std::vector<VertexId>& ids) = 0;

    virtual void barrier() = 0;
    // element-wise global sum; every caller gets the result
    virtual std::vector<std::uint64_t> reduce_sum(const std::vector<std::uint64_t>& vals) = 0;

    virtual void shutdown() = 0;

    const TransportStats& stats() const { return stats_; }

  protected:
    TransportStats stats_;
};

// At most this many outstanding fetch_batch calls per (requester, responder)
// pair; bounds responder buffering when compute lags.
inline constexpr int kMaxInflightFetches = 2;

/// All-in-one-process backend: N endpoints exchanging encoded frames over
/// shared queues. The test and default CLI backend.
class InProcFabric {
  public:
    explicit InProcFabric(PartitionId n);
    ~InProcFabric();

    Endpoint& endpoint(PartitionId i);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct ClusterPeer {
    PartitionId partition;
    std::string host;
    std::uint16_t port;
};

// "partition_id host port" per line
std::vector<ClusterPeer> parse_cluster_file(const std::string& path);

// Socket backend: one endpoint per OS process, peers from the cluster file.
// Connect phase retries until all peers are up or the deadline passes.
std::unique_ptr<Endpoint> make_socket_endpoint(PartitionId rank,
                                               const std::vector<ClusterPeer>& peers,
                                               double connect_timeout_s = 20.0);

} // namespace gpm
