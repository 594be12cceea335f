#include "gpm/wire.hpp"

#include <cstring>

#include "gpm/error.hpp"

namespace gpm {

namespace {

inline void put16(std::uint8_t* p, std::uint16_t x) {
    p[0] = static_cast<std::uint8_t>(x);
    p[1] = static_cast<std::uint8_t>(x >> 8);
}
inline void put32(std::uint8_t* p, std::uint32_t x) {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(x >> (8 * i));
}
inline void put64(std::uint8_t* p, std::uint64_t x) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(x >> (8 * i));
}
inline std::uint16_t get16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t get32(const std::uint8_t* p) {
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return x;
}
inline std::uint64_t get64(const std::uint8_t* p) {
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return x;
}

struct Writer {
    std::vector<std::uint8_t> buf;
    void u64(std::uint64_t x) {
        std::uint8_t tmp[8];
        put64(tmp, x);
        buf.insert(buf.end(), tmp, tmp + 8);
    }
};

struct Reader {
    const std::vector<std::uint8_t>& buf;
    std::size_t at = 0;
    std::uint64_t u64() {
        if (at + 8 > buf.size()) throw ProtocolError("frame payload truncated");
        auto x = get64(buf.data() + at);
        at += 8;
        return x;
    }
};

} // namespace

void encode_header(const Frame& f, std::uint8_t out[kHeaderBytes]) {
    put32(out, kWireMagic);
    put16(out + 4, kWireVersion);
    put16(out + 6, static_cast<std::uint16_t>(f.type));
    put64(out + 8, f.request_id);
    put64(out + 16, f.payload.size());
}

FrameHeader decode_header(const std::uint8_t in[kHeaderBytes]) {
    if (get32(in) != kWireMagic) throw ProtocolError("bad frame magic");
    if (get16(in + 4) != kWireVersion) throw ProtocolError("bad frame version");
    FrameHeader h;
    h.type = static_cast<MsgType>(get16(in + 6));
    h.request_id = get64(in + 8);
    h.payload_len = get64(in + 16);
    return h;
}

std::vector<std::uint8_t> encode_fetch_request(const FetchRequest& r) {
    Writer w;
    w.u64(r.requester);
    w.u64(r.ids.size());
    for (auto v : r.ids) w.u64(v);
    return std::move(w.buf);
}

FetchRequest decode_fetch_request(const std::vector<std::uint8_t>& p) {
    Reader r{p};
    FetchRequest req;
    req.requester = static_cast<PartitionId>(r.u64());
    auto n = r.u64();
    req.ids.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) req.ids.push_back(r.u64());
    return req;
}

std::vector<std::uint8_t> encode_fetch_response(const FetchResponse& resp) {
    Writer w;
    w.u64(resp.entries.size());
    for (const auto& e : resp.entries) {
        w.u64(e.v);
        w.u64(e.neighbors.size());
        for (auto n : e.neighbors) w.u64(n);
    }
    return std::move(w.buf);
}

FetchResponse decode_fetch_response(const std::vector<std::uint8_t>& p) {
    Reader r{p};
    FetchResponse resp;
    auto n = r.u64();
    resp.entries.resize(n);
    for (auto& e : resp.entries) {
        e.v = r.u64();
        auto deg = r.u64();
        e.neighbors.reserve(deg);
        for (std::uint64_t i = 0; i < deg; ++i) e.neighbors.push_back(r.u64());
    }
    return resp;
}

std::vector<std::uint8_t> encode_u64s(const std::vector<std::uint64_t>& vals) {
    Writer w;
    w.u64(vals.size());
    for (auto v : vals) w.u64(v);
    return std::move(w.buf);
}

std::vector<std::uint64_t> decode_u64s(const std::vector<std::uint8_t>& p) {
    Reader r{p};
    auto n = r.u64();
    std::vector<std::uint64_t> vals;
    vals.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) vals.push_back(r.u64());
    return vals;
}

std::vector<std::uint8_t> encode_error(std::uint64_t code, const std::string& msg) {
    Writer w;
    w.u64(code);
    w.u64(msg.size());
    w.buf.insert(w.buf.end(), msg.begin(), msg.end());
    return std::move(w.buf);
}

std::string decode_error(const std::vector<std::uint8_t>& p) {
    Reader r{p};
    r.u64(); // code, unused for now
    auto len = r.u64();
    if (r.at + len > p.size()) throw ProtocolError("error frame truncated");
    return std::string(p.begin() + r.at, p.begin() + r.at + len);
}

} // namespace gpm
