#pragma once

#include <stdexcept>
#include <string>

namespace gpm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad input data (edge list syntax, label files, plan files).
struct ParseError : Error {
    using Error::Error;
};

// Bad run parameters (zero partitions, chunk too small, unknown app).
struct ConfigError : Error {
    using Error::Error;
};

// Asked a partition for a vertex it does not own.
struct OwnershipError : Error {
    using Error::Error;
};

// Embedding state machine violated (extend on non-ready, retire on non-zombie).
struct LifecycleError : Error {
    using Error::Error;
};

// Connection-level failure: peer unreachable, timeout, disconnect.
struct TransportError : Error {
    using Error::Error;
};

// Well-formed connection, malformed conversation (bad frame, ownership
// mismatch at the responder, plan mismatch between workers).
struct ProtocolError : Error {
    using Error::Error;
};

// Internal invariant broken; always fatal.
struct LogicError : std::logic_error {
    using std::logic_error::logic_error;
};

#define GPM_CHECK(cond, msg)                                                   \
    do {                                                                       \
        if (!(cond)) throw ::gpm::LogicError(std::string("invariant: ") + msg); \
    } while (0)

} // namespace gpm
