#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

namespace nicrep {

using ReplicaId = std::uint32_t;
using Key = std::uint64_t;
using Value = std::string;
using LogIndex = std::uint64_t;
using SimTime = std::uint64_t;  // nanoseconds
using SessionId = std::uint32_t;
using RequestId = std::uint64_t;

/// Per-write version tag. Ordered lexicographically by (version, origin), so
/// concurrent writes to one key from different replicas never tie.
struct Timestamp {
    std::uint64_t version = 0;
    ReplicaId origin = 0;

    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const Timestamp& ts) {
    return os << '(' << ts.version << ',' << ts.origin << ')';
}

struct VersionedValue {
    Value value;
    Timestamp ts;

    friend bool operator==(const VersionedValue&, const VersionedValue&) = default;
};

struct ClientRef {
    SessionId session = 0;
    RequestId request = 0;

    friend auto operator<=>(const ClientRef&, const ClientRef&) = default;
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A broken protocol or safety invariant; always a bug, never an expected outcome.
class ProtocolError : public Error {
public:
    using Error::Error;
};

}  // namespace nicrep
