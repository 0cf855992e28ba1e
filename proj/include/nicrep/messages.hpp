#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "nicrep/types.hpp"

namespace nicrep {

// Inter-replica protocol messages.

struct Inv {
    Key key = 0;
    Value value;
    Timestamp ts;
    LogIndex log_index = 0;
};

struct Ack {
    Key key = 0;
    Timestamp ts;
    ReplicaId from = 0;
};

struct Commit {
    Key key = 0;
    Timestamp ts;
};

using ProtocolMessage = std::variant<Inv, Ack, Commit>;

// NIC <-> host messages over the PCIe link.

struct BatchEntry {
    LogIndex index = 0;
    Key key = 0;
    Value value;
    Timestamp ts;
};

struct WriteBatch {
    std::vector<BatchEntry> entries;
};

struct DurableAck {
    LogIndex last_applied_log_index = 0;
    bool rejected = false;
};

struct FetchRequest {
    Key key = 0;
    ClientRef client;
};

struct FetchResponse {
    Key key = 0;
    ClientRef client;
    std::optional<VersionedValue> result;
};

using PcieMessage = std::variant<WriteBatch, DurableAck, FetchRequest, FetchResponse>;

// Timer tokens identify what a timer means to the replica that armed it.

struct ReplayToken {
    Key key = 0;
    Timestamp ts;

    friend auto operator<=>(const ReplayToken&, const ReplayToken&) = default;
};

struct FlushToken {
    friend auto operator<=>(const FlushToken&, const FlushToken&) = default;
};

using TimerToken = std::variant<ReplayToken, FlushToken>;

/// Modeled on-wire payload sizes. Headers are accounted separately by the link.
struct WireSizes {
    std::size_t key_bytes = 8;

    static constexpr std::size_t kTag = 1;
    static constexpr std::size_t kTimestamp = 12;  // 8-byte version + 4-byte origin
    static constexpr std::size_t kIndex = 8;
    static constexpr std::size_t kReplica = 4;
    static constexpr std::size_t kRequest = 8;

    std::size_t of(const ProtocolMessage& msg) const;
    std::size_t of(const PcieMessage& msg) const;
};

}  // namespace nicrep
