#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <tuple>
#include <unordered_set>
#include <variant>
#include <vector>

#include "nicrep/messages.hpp"
#include "nicrep/types.hpp"

namespace nicrep {

class SimError : public Error {
public:
    using Error::Error;
};

enum class LinkKind { Network, Pcie };
enum class Side { Nic, Host };

struct Endpoint {
    ReplicaId replica = 0;
    Side side = Side::Nic;

    friend auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

/// Latency and overhead model of one class of link.
///
/// Network links: constant one-way latency plus seeded uniform jitter in
/// [0, jitter_ns]. PCIe links: the round trip is split evenly between the two
/// directions, so a request/response pair takes exactly `round_trip_ns`.
struct LinkModel {
    LinkKind kind = LinkKind::Network;
    SimTime one_way_latency_ns = 2000;  // Network
    SimTime round_trip_ns = 500;        // Pcie
    SimTime jitter_ns = 0;
    std::size_t header_bytes = 0;
    bool fifo = true;

    static LinkModel network(SimTime one_way_ns, SimTime jitter_ns = 0, std::size_t header_bytes = 0,
                             bool fifo = true);
    static LinkModel pcie(SimTime round_trip_ns = 500, std::size_t header_bytes = 32);

    SimTime base_latency(Side from) const;
    void validate() const;
};

struct LinkCounters {
    std::uint64_t sent = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;  // addressed to a crashed replica
    std::uint64_t bytes = 0;    // payload + headers
    std::uint64_t payload_bytes = 0;

    friend bool operator==(const LinkCounters&, const LinkCounters&) = default;
};

using Message = std::variant<ProtocolMessage, PcieMessage>;
using TimerId = std::uint64_t;

struct Delivery {
    LinkKind link = LinkKind::Network;
    Endpoint from;
    Endpoint to;
    Message message;
    std::size_t payload_bytes = 0;
};

struct TimerFire {
    ReplicaId target = 0;
    TimerId id = 0;
    TimerToken token;
};

struct ClientArrival {
    SessionId session = 0;
    ReplicaId replica = 0;
};

struct CrashNotice {
    ReplicaId replica = 0;
};

using EventPayload = std::variant<Delivery, TimerFire, ClientArrival, CrashNotice>;

struct SimEvent {
    SimTime fire_time = 0;
    std::uint64_t seq = 0;
    EventPayload payload;
};

struct RunReport {
    SimTime final_time = 0;
    std::uint64_t events_dispatched = 0;
    std::uint64_t deliveries = 0;
    std::uint64_t timers_fired = 0;
    std::uint64_t client_arrivals = 0;
    std::uint64_t crashes = 0;
    bool quiescent = true;
    LinkCounters network;
    LinkCounters pcie;

    friend bool operator==(const RunReport&, const RunReport&) = default;
};

struct SimOptions {
    std::uint64_t seed = 1;
    SimTime processing_delay_ns = 0;  // added to every send
    std::uint64_t event_cap = 200'000'000;
};

/// Deterministic discrete-event core. Events are dispatched strictly in
/// (fire_time, seq) order; seq is a global monotone counter assigned at
/// scheduling time. Single-threaded; distinct instances share nothing.
class SimNet {
public:
    using Handler = std::function<void(SimEvent&)>;

    SimNet(std::size_t replica_count, LinkModel network, LinkModel pcie, SimOptions options = {});

    SimTime now() const { return now_; }
    std::size_t replica_count() const { return replica_count_; }

    /// Network links join NICs of distinct replicas; PCIe links join a replica's NIC and host.
    void send(LinkKind link, Endpoint from, Endpoint to, Message message, std::size_t payload_bytes);

    TimerId set_timer(ReplicaId target, SimTime delay, TimerToken token);
    /// Exact: a cancelled timer never fires. Cancelling a fired or unknown timer is a no-op.
    void cancel_timer(TimerId id);

    void schedule_client(SessionId session, ReplicaId replica, SimTime at);

    /// Crash-stop at `at` (>= now). Duplicate crashes are no-ops.
    void crash(ReplicaId replica, SimTime at);
    bool crashed(ReplicaId replica) const { return crashed_.at(replica); }

    /// Dispatches until the queue is empty or the next event is later than `until`.
    RunReport run(const Handler& handler, std::optional<SimTime> until = std::nullopt);

    bool idle() const { return queue_.empty(); }
    const LinkCounters& counters(LinkKind link) const {
        return link == LinkKind::Network ? report_.network : report_.pcie;
    }
    const RunReport& report() const { return report_; }

private:
    void push(SimTime at, EventPayload payload);
    LinkCounters& counters_mut(LinkKind link) { return link == LinkKind::Network ? report_.network : report_.pcie; }

    std::size_t replica_count_;
    LinkModel network_;
    LinkModel pcie_;
    SimOptions options_;
    std::mt19937_64 rng_;
    SimTime now_ = 0;
    std::uint64_t next_seq_ = 0;
    TimerId next_timer_ = 1;
    std::vector<SimEvent> queue_;  // binary min-heap on (fire_time, seq)
    std::unordered_set<TimerId> live_timers_;
    std::vector<bool> crashed_;
    std::vector<bool> crash_scheduled_;
    std::map<std::tuple<LinkKind, Endpoint, Endpoint>, SimTime> last_delivery_;
    RunReport report_;
};

}  // namespace nicrep
