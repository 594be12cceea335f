#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <condition_variable>
#include <csignal>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <semaphore>
#include <sstream>
#include <thread>

#include "gpm/error.hpp"
#include "gpm/transport.hpp"

namespace gpm {

namespace {

constexpr auto kIoTimeout = std::chrono::seconds(120);

void write_all(int fd, const std::uint8_t* data, std::size_t len) {
    while (len > 0) {
        ssize_t n = ::send(fd, data, len, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("send: ") + std::strerror(errno));
        }
        data += n;
        len -= static_cast<std::size_t>(n);
    }
}

// false on clean EOF at a frame boundary
bool read_all(int fd, std::uint8_t* data, std::size_t len, bool eof_ok) {
    std::size_t got = 0;
    while (got < len) {
        ssize_t n = ::recv(fd, data + got, len - got, 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("recv: ") + std::strerror(errno));
        }
        if (n == 0) {
            if (got == 0 && eof_ok) return false;
            throw TransportError("connection closed mid-frame");
        }
        got += static_cast<std::size_t>(n);
    }
    return true;
}

void write_frame(int fd, std::mutex& mu, const Frame& f, TransportStats& stats) {
    std::uint8_t header[kHeaderBytes];
    encode_header(f, header);
    std::lock_guard lk(mu);
    write_all(fd, header, kHeaderBytes);
    if (!f.payload.empty()) write_all(fd, f.payload.data(), f.payload.size());
    stats.bytes_sent += f.wire_size();
    stats.messages_sent += 1;
}

bool read_frame(int fd, Frame& out, TransportStats& stats) {
    std::uint8_t header[kHeaderBytes];
    if (!read_all(fd, header, kHeaderBytes, /*eof_ok=*/true)) return false;
    auto h = decode_header(header);
    out.type = h.type;
    out.request_id = h.request_id;
    out.payload.resize(h.payload_len);
    if (h.payload_len > 0) read_all(fd, out.payload.data(), h.payload_len, false);
    stats.bytes_received += out.wire_size();
    stats.messages_received += 1;
    return true;
}

int dial(const std::string& host, std::uint16_t port, double timeout_s,
         PartitionId target) {
    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::duration<double>(timeout_s);
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0)
        throw TransportError("cannot resolve host " + host + " for partition " +
                             std::to_string(target));
    for (;;) {
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd >= 0 && ::connect(fd, res->ai_addr, res->ai_addrlen) == 0) {
            freeaddrinfo(res);
            int one = 1;
            setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            return fd;
        }
        if (fd >= 0) ::close(fd);
        if (std::chrono::steady_clock::now() > deadline) {
            freeaddrinfo(res);
            throw TransportError("connect timeout to partition " + std::to_string(target) +
                                 " at " + host + ":" + std::to_string(port));
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
}

} // namespace

std::vector<ClusterPeer> parse_cluster_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open cluster file: " + path);
    std::vector<ClusterPeer> peers;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        ClusterPeer p;
        unsigned port;
        if (!(ls >> p.partition >> p.host >> port))
            throw ParseError("cluster file: malformed line " + std::to_string(lineno));
        p.port = static_cast<std::uint16_t>(port);
        peers.push_back(p);
    }
    if (peers.empty()) throw ConfigError("cluster file lists no workers");
    for (PartitionId i = 0; i < peers.size(); ++i) {
        bool found = false;
        for (auto& p : peers) found |= (p.partition == i);
        if (!found)
            throw ConfigError("cluster file missing partition " + std::to_string(i));
    }
    return peers;
}

class SocketEndpoint final : public Endpoint {
  public:
    SocketEndpoint(PartitionId rank, std::vector<ClusterPeer> peers, double timeout_s)
        : me_(rank), peers_(std::move(peers)) {
        std::signal(SIGPIPE, SIG_IGN);
        n_ = static_cast<PartitionId>(peers_.size());
        if (me_ >= n_) throw ConfigError("rank beyond cluster size");
        for (PartitionId i = 0; i < n_; ++i) {
            links_.push_back(std::make_unique<Link>());
            inflight_.push_back(
                std::make_unique<std::counting_semaphore<>>(kMaxInflightFetches));
        }
        if (n_ == 1) return;
        start_listening();
        accept_thread_ = std::thread([this] { accept_loop(); });
        for (PartitionId j = 0; j < n_; ++j) {
            if (j == me_) continue;
            auto& peer = peers_[j];
            Link& link = *links_[j];
            link.fd = dial(peer.host, peer.port, timeout_s, j);
            Frame hello;
            hello.type = MsgType::Hello;
            hello.payload = encode_u64s({me_});
            write_frame(link.fd, link.write_mu, hello, stats_);
            link.reader = std::thread([this, j] { link_reader(j); });
        }
    }

    ~SocketEndpoint() override { shutdown(); }

    PartitionId my_partition() const override { return me_; }
    PartitionId num_partitions() const override { return n_; }

    void serve(const PartitionedGraph* graph) override {
        {
            std::lock_guard lk(serve_mu_);
            graph_ = graph;
        }
        serve_cv_.notify_all();
    }

    FetchResponse fetch_batch(PartitionId target,
                              const std::vector<VertexId>& ids) override {
        if (ids.empty()) return {};
        if (target == me_ || target >= n_)
            throw ProtocolError("bad fetch target " + std::to_string(target));
        inflight_[target]->acquire();
        struct Release {
            std::counting_semaphore<>* s;
            ~Release() { s->release(); }
        } release{inflight_[target].get()};

        Frame req;
        req.type = MsgType::FetchReq;
        req.request_id = next_request_id();
        req.payload = encode_fetch_request({me_, ids});
        Frame resp = roundtrip(target, req);
        if (resp.type == MsgType::Error)
            throw ProtocolError("responder " + std::to_string(target) + ": " +
                                decode_error(resp.payload));
        return decode_fetch_response(resp.payload);
    }

    void barrier() override {
        if (n_ == 1) return;
        if (me_ == 0) {
            std::unique_lock lk(coord_mu_);
            ++barrier_arrived_;
            maybe_release_barrier();
            std::uint64_t gen = barrier_gen_;
            if (!coord_cv_.wait_for(lk, kIoTimeout, [&] { return barrier_gen_ != gen; }))
                throw TransportError("barrier timeout on partition 0");
        } else {
            Frame f;
            f.type = MsgType::BarrierEnter;
            f.request_id = next_request_id();
            auto resp = roundtrip(0, f);
            if (resp.type != MsgType::BarrierRelease)
                throw ProtocolError("unexpected barrier reply");
        }
    }

    std::vector<std::uint64_t> reduce_sum(const std::vector<std::uint64_t>& vals) override {
        if (n_ == 1) return vals;
        if (me_ == 0) {
            std::unique_lock lk(coord_mu_);
            accumulate(vals);
            maybe_release_reduce();
            std::uint64_t gen = reduce_gen_;
            if (!coord_cv_.wait_for(lk, kIoTimeout, [&] { return reduce_gen_ != gen; }))
                throw TransportError("reduce timeout on partition 0");
            return reduce_result_;
        }
        Frame f;
        f.type = MsgType::ReducePart;
        f.request_id = next_request_id();
        f.payload = encode_u64s(vals);
        auto resp = roundtrip(0, f);
        if (resp.type != MsgType::ReduceResult)
            throw ProtocolError("unexpected reduce reply");
        return decode_u64s(resp.payload);
    }

    void shutdown() override {
        bool expected = false;
        if (!closing_.compare_exchange_strong(expected, true)) return;
        if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR), ::close(listen_fd_);
        for (auto& l : links_) {
            if (l->fd >= 0) ::shutdown(l->fd, SHUT_RDWR);
        }
        if (accept_thread_.joinable()) accept_thread_.join();
        for (auto& l : links_) {
            if (l->reader.joinable()) l->reader.join();
            if (l->fd >= 0) ::close(l->fd), l->fd = -1;
        }
        for (auto& t : service_threads_)
            if (t.joinable()) t.join();
    }

  private:
    struct Link {
        int fd = -1;
        std::mutex write_mu;
        std::thread reader;
        std::mutex resp_mu;
        std::condition_variable resp_cv;
        std::map<std::uint64_t, Frame> responses;
        bool down = false;
    };

    struct Conn {
        int fd = -1;
        PartitionId peer = 0;
        std::mutex write_mu;
    };

    std::uint64_t next_request_id() {
        return (static_cast<std::uint64_t>(me_) << 48) | next_seq_++;
    }

    void start_listening() {
        listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listen_fd_ < 0) throw TransportError("socket() failed");
        int one = 1;
        setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_ANY);
        addr.sin_port = htons(peers_[me_].port);
        if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
            throw TransportError("bind to port " + std::to_string(peers_[me_].port) +
                                 ": " + std::strerror(errno));
        if (::listen(listen_fd_, 16) != 0) throw TransportError("listen failed");
    }

    void accept_loop() {
        for (;;) {
            int fd = ::accept(listen_fd_, nullptr, nullptr);
            if (fd < 0) {
                if (closing_) return;
                if (errno == EINTR) continue;
                return;
            }
            int one = 1;
            setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            Frame hello;
            TransportStats scratch; // handshake not counted
            if (!read_frame(fd, hello, scratch) || hello.type != MsgType::Hello) {
                ::close(fd);
                continue;
            }
            auto peer = static_cast<PartitionId>(decode_u64s(hello.payload).at(0));
            auto conn = std::make_shared<Conn>();
            conn->fd = fd;
            conn->peer = peer;
            std::lock_guard lk(conns_mu_);
            service_threads_.emplace_back([this, conn] { service_loop(conn); });
        }
    }

    // one responder service loop per incoming peer connection
    void service_loop(std::shared_ptr<Conn> conn) {
        try {
            Frame in;
            while (read_frame(conn->fd, in, stats_)) {
                switch (in.type) {
                    case MsgType::FetchReq:
                        handle_fetch(*conn, in);
                        break;
                    case MsgType::BarrierEnter: {
                        std::lock_guard lk(coord_mu_);
                        barrier_waiters_.emplace_back(conn, in.request_id);
                        ++barrier_arrived_;
                        maybe_release_barrier();
                        break;
                    }
                    case MsgType::ReducePart: {
                        std::lock_guard lk(coord_mu_);
                        accumulate(decode_u64s(in.payload));
                        reduce_waiters_.emplace_back(conn, in.request_id);
                        maybe_release_reduce();
                        break;
                    }
                    default:
                        throw ProtocolError("unexpected frame type at responder");
                }
            }
        } catch (const std::exception&) {
            if (!closing_) {
                // peer died mid-run; requesters will time out and surface it
            }
        }
        ::close(conn->fd);
        conn->fd = -1;
    }

    void handle_fetch(Conn& conn, const Frame& in) {
        Frame out;
        out.request_id = in.request_id;
        try {
            auto req = decode_fetch_request(in.payload);
            const PartitionedGraph* g;
            {
                std::unique_lock lk(serve_mu_);
                if (!serve_cv_.wait_for(lk, kIoTimeout, [&] { return graph_ != nullptr; }))
                    throw ProtocolError("responder has no graph");
                g = graph_;
            }
            FetchResponse resp;
            resp.entries.reserve(req.ids.size());
            for (VertexId v : req.ids) {
                auto list = g->local_edge_list(v);
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
        write_frame(conn.fd, conn.write_mu, out, stats_);
    }

    void link_reader(PartitionId j) {
        Link& link = *links_[j];
        try {
            Frame f;
            while (read_frame(link.fd, f, stats_)) {
                std::lock_guard lk(link.resp_mu);
                link.responses.emplace(f.request_id, std::move(f));
                link.resp_cv.notify_all();
                f = Frame{};
            }
        } catch (const std::exception&) {
        }
        std::lock_guard lk(link.resp_mu);
        link.down = true;
        link.resp_cv.notify_all();
    }

    Frame roundtrip(PartitionId target, const Frame& req) {
        Link& link = *links_[target];
        write_frame(link.fd, link.write_mu, req, stats_);
        std::unique_lock lk(link.resp_mu);
        if (!link.resp_cv.wait_for(lk, kIoTimeout, [&] {
                return link.down || link.responses.count(req.request_id) != 0;
            }))
            throw TransportError("timeout waiting for partition " + std::to_string(target));
        if (!link.responses.count(req.request_id))
            throw TransportError("partition " + std::to_string(target) + " disconnected");
        auto node = link.responses.extract(req.request_id);
        return std::move(node.mapped());
    }

    // worker-0 coordination: gather, then answer every parked request
    void accumulate(const std::vector<std::uint64_t>& vals) {
        if (reduce_arrived_ == 0) {
            reduce_acc_ = vals;
        } else {
            if (reduce_acc_.size() != vals.size())
                throw ProtocolError("reduction size mismatch across workers");
            for (std::size_t i = 0; i < vals.size(); ++i) reduce_acc_[i] += vals[i];
        }
        ++reduce_arrived_;
    }

    void maybe_release_barrier() {
        if (barrier_arrived_ < n_) return;
        barrier_arrived_ = 0;
        ++barrier_gen_;
        for (auto& [conn, req_id] : barrier_waiters_) {
            Frame f;
            f.type = MsgType::BarrierRelease;
            f.request_id = req_id;
            write_frame(conn->fd, conn->write_mu, f, stats_);
        }
        barrier_waiters_.clear();
        coord_cv_.notify_all();
    }

    void maybe_release_reduce() {
        if (reduce_arrived_ < n_) return;
        reduce_arrived_ = 0;
        reduce_result_ = reduce_acc_;
        reduce_acc_.clear();
        ++reduce_gen_;
        for (auto& [conn, req_id] : reduce_waiters_) {
            Frame f;
            f.type = MsgType::ReduceResult;
            f.request_id = req_id;
            f.payload = encode_u64s(reduce_result_);
            write_frame(conn->fd, conn->write_mu, f, stats_);
        }
        reduce_waiters_.clear();
        coord_cv_.notify_all();
    }

    PartitionId me_, n_ = 1;
    std::vector<ClusterPeer> peers_;
    std::vector<std::unique_ptr<Link>> links_;
    std::vector<std::unique_ptr<std::counting_semaphore<>>> inflight_;
    int listen_fd_ = -1;
    std::thread accept_thread_;
    std::mutex conns_mu_;
    std::vector<std::thread> service_threads_;
    std::atomic<bool> closing_{false};
    std::atomic<std::uint64_t> next_seq_{1};

    std::mutex serve_mu_;
    std::condition_variable serve_cv_;
    const PartitionedGraph* graph_ = nullptr;

    // rank-0 barrier/reduce state
    std::mutex coord_mu_;
    std::condition_variable coord_cv_;
    PartitionId barrier_arrived_ = 0;
    std::uint64_t barrier_gen_ = 0;
    std::vector<std::pair<std::shared_ptr<Conn>, std::uint64_t>> barrier_waiters_;
    PartitionId reduce_arrived_ = 0;
    std::uint64_t reduce_gen_ = 0;
    std::vector<std::uint64_t> reduce_acc_, reduce_result_;
    std::vector<std::pair<std::shared_ptr<Conn>, std::uint64_t>> reduce_waiters_;
};

std::unique_ptr<Endpoint> make_socket_endpoint(PartitionId rank,
                                               const std::vector<ClusterPeer>& peers,
                                               double connect_timeout_s) {
    return std::make_unique<SocketEndpoint>(rank, peers, connect_timeout_s);
}

} // namespace gpm
