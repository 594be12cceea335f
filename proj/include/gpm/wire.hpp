#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gpm/types.hpp"

namespace gpm {

// Little-endian length-prefixed frames. Header layout, byte offsets:
//   0  u32 magic "GPM1"
//   4  u16 version
//   6  u16 message type
//   8  u64 request id
//   16 u64 payload length
// Payload integers are fixed 8-byte little-endian unless noted.

enum class MsgType : std::uint16_t {
    Hello = 1,          // u64 partition id
    FetchReq = 2,       // u64 requester, u64 count, count * u64 vertex id
    FetchResp = 3,      // u64 count, count * (u64 id, u64 degree, degree * u64)
    BarrierEnter = 4,   // empty
    BarrierRelease = 5, // empty
    ReducePart = 6,     // u64 count, count * u64
    ReduceResult = 7,   // u64 count, count * u64
    Error = 8,          // u64 code, u64 len, len bytes of message
};

inline constexpr std::uint32_t kWireMagic = 0x314D5047u; // "GPM1"
inline constexpr std::uint16_t kWireVersion = 1;
inline constexpr std::size_t kHeaderBytes = 24;

struct FrameHeader {
    MsgType type;
    std::uint64_t request_id;
    std::uint64_t payload_len;
};

struct Frame {
    MsgType type;
    std::uint64_t request_id = 0;
    std::vector<std::uint8_t> payload;

    std::size_t wire_size() const { return kHeaderBytes + payload.size(); }
};

void encode_header(const Frame& f, std::uint8_t out[kHeaderBytes]);
// throws ProtocolError on bad magic/version
FrameHeader decode_header(const std::uint8_t in[kHeaderBytes]);

// payload builders
struct FetchRequest {
    PartitionId requester = 0;
    std::vector<VertexId> ids; // sorted; duplicates only from dropped demands
};
struct FetchEntry {
    VertexId v;
    std::vector<VertexId> neighbors;
};
struct FetchResponse {
    std::vector<FetchEntry> entries; // in request order
};

std::vector<std::uint8_t> encode_fetch_request(const FetchRequest& r);
FetchRequest decode_fetch_request(const std::vector<std::uint8_t>& p);
std::vector<std::uint8_t> encode_fetch_response(const FetchResponse& r);
FetchResponse decode_fetch_response(const std::vector<std::uint8_t>& p);
std::vector<std::uint8_t> encode_u64s(const std::vector<std::uint64_t>& vals);
std::vector<std::uint64_t> decode_u64s(const std::vector<std::uint8_t>& p);
std::vector<std::uint8_t> encode_error(std::uint64_t code, const std::string& msg);
std::string decode_error(const std::vector<std::uint8_t>& p);

} // namespace gpm
