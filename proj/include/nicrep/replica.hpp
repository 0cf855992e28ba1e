#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <variant>
#include <vector>

#include "nicrep/log_manager.hpp"
#include "nicrep/messages.hpp"
#include "nicrep/nic_cache.hpp"
#include "nicrep/overlay.hpp"
#include "nicrep/types.hpp"

namespace nicrep {

struct ReplicaConfig {
    CacheConfig cache;
    SimTime replay_timeout_ns = 16'000;
    std::size_t max_value_bytes = 1024;
};

/// Uncommitted write known at a replica: the highest-timestamped one it has seen.
struct StagedWrite {
    Value value;
    Timestamp ts;
    ReplicaId coordinator = 0;
    LogIndex log_index = 0;
};

/// Exists only at the replica coordinating (or replaying) the staged write.
struct PendingWrite {
    Key key = 0;
    Value value;
    Timestamp ts;
    std::set<ReplicaId> acks_needed;
    std::optional<ClientRef> client;  // empty for replays of another replica's write
    SimTime issued_at = 0;
};

struct KeyRecord {
    Timestamp committed_ts;
    std::optional<StagedWrite> staged;
    std::optional<PendingWrite> pending;
    std::vector<ClientRef> blocked;  // reads waiting for the staged write to commit
};

enum class KeyState { Valid, Invalid, WritePending };

struct Outbound {
    ReplicaId to = 0;
    ProtocolMessage message;
};

enum class ReplyKind { WriteOk, WriteSuperseded, WriteError, ReadValue, ReadNotFound };
enum class ReadPath { None, Fast, Slow, Blocked };

struct ClientReply {
    ClientRef client;
    ReplyKind kind = ReplyKind::WriteOk;
    std::optional<Value> value;
    ReadPath path = ReadPath::None;
};

struct TimerRequest {
    TimerAction action = TimerAction::Arm;
    TimerToken token;
    SimTime delay = 0;
};

/// Everything a handler asks the outside world to do, in order.
struct Effects {
    std::vector<Outbound> messages;
    std::vector<ClientReply> replies;
    std::vector<TimerRequest> timers;
    std::vector<PcieMessage> to_host;
    std::vector<Key> evicted;

    bool empty() const {
        return messages.empty() && replies.empty() && timers.empty() && to_host.empty() && evicted.empty();
    }
};

struct ServeLocal {
    Value value;
    Timestamp ts;
};
struct Blocked {};
struct CacheMiss {};
using ReadOutcome = std::variant<ServeLocal, Blocked, CacheMiss>;

struct ReplicaStats {
    std::uint64_t writes_coordinated = 0;
    std::uint64_t commits_applied = 0;
    std::uint64_t superseded = 0;
    std::uint64_t stale_acks = 0;
    std::uint64_t stale_invs = 0;
    std::uint64_t replays = 0;
    std::uint64_t blocked_reads = 0;
    std::uint64_t log_entries_compacted = 0;
};

/// Consistency controller of one replica: leaderless two-phase writes
/// (Inv -> Ack from every live peer -> Commit), local reads that block on
/// uncommitted writes, and timeout-driven replay of stalled writes.
///
/// A pure state machine: every handler mutates local state and returns the
/// effects for the caller to carry out. A crashed replica ignores all input.
class Replica {
public:
    Replica(ReplicaId self, std::shared_ptr<const Overlay> overlay, ReplicaConfig config);

    ReplicaId id() const { return self_; }
    bool crashed() const { return crashed_; }
    void crash() { crashed_ = true; }

    Effects handle_client_write(Key key, Value value, ClientRef client, SimTime now);
    /// Blocked reads are queued here and answered from a later commit's effects.
    ReadOutcome handle_client_read(Key key, ClientRef client, SimTime now);

    Effects on_inv(const Inv& msg, ReplicaId from, SimTime now);
    Effects on_ack(const Ack& msg, SimTime now);
    Effects on_commit(const Commit& msg, SimTime now);
    /// `live_peers` is the failure detector's view when the timer fires.
    Effects on_replay_timeout(Key key, Timestamp ts, SimTime now, std::span<const ReplicaId> live_peers);

    Effects on_fetch_complete(const FetchResponse& response, SimTime now);
    Effects on_durable_ack(const DurableAck& ack);
    Effects on_flush_timer();
    /// Flushes any partially filled write buffer.
    Effects drain_write_buffer();

    /// Loads a durable entry (e.g. from the initial population) into the cache.
    void prewarm(Key key, Value value, Timestamp ts);

    KeyState key_state(Key key) const;
    const KeyRecord* record(Key key) const;
    Timestamp committed_ts(Key key) const;
    std::vector<ReplicaId> live_targets() const;

    const LogManager& log() const { return log_; }
    LogManager& log() { return log_; }
    const NicCache& cache() const { return cache_; }
    const ReplicaStats& stats() const { return stats_; }
    const ReplicaConfig& config() const { return config_; }

private:
    void stage(Key key, KeyRecord& rec, Value value, Timestamp ts, ReplicaId coordinator, Effects& fx);
    void apply_commit(Key key, KeyRecord& rec, SimTime now, Effects& fx);
    void finish_write(Key key, KeyRecord& rec, SimTime now, Effects& fx);
    void multicast_inv(Key key, const KeyRecord& rec, const std::vector<ReplicaId>& targets, Effects& fx) const;
    void absorb(CacheEffects&& cfx, Effects& fx) const;
    void arm_replay(Key key, Timestamp ts, Effects& fx) const;

    ReplicaId self_;
    std::shared_ptr<const Overlay> overlay_;
    ReplicaConfig config_;
    NicCache cache_;
    LogManager log_;
    std::unordered_map<Key, KeyRecord> records_;
    std::vector<bool> suspected_;
    bool crashed_ = false;
    ReplicaStats stats_;
};

}  // namespace nicrep
