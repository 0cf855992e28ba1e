#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nicrep/datastore.hpp"
#include "nicrep/history.hpp"
#include "nicrep/metrics.hpp"
#include "nicrep/overlay.hpp"
#include "nicrep/replica.hpp"
#include "nicrep/simnet.hpp"
#include "nicrep/workload.hpp"

namespace nicrep {

struct ClusterConfig {
    OverlayKind overlay = OverlayKind::Mesh;
    SimTime net_latency_ns = 2000;
    SimTime net_jitter_ns = 0;
    std::size_t net_header_bytes = 0;
    bool net_fifo = true;
    SimTime pcie_rtt_ns = 500;
    std::size_t pcie_header_bytes = 32;
    CacheConfig cache;
    SimTime replay_timeout_ns = 0;  // 0: four network round trips
    std::size_t max_value_bytes = 1024;
    SimTime processing_delay_ns = 0;
    std::uint64_t event_cap = 200'000'000;
    bool prewarm_cache = true;
    bool final_reads = false;  // after quiescence, every live replica reads every touched key
    std::string backend = "memory";

    SimTime effective_replay_timeout() const;
    void validate() const;
};

struct CrashSpec {
    ReplicaId replica = 0;
    SimTime at = 0;
};

/// Parses "replica@time_ns", e.g. "2@150000".
CrashSpec parse_crash_spec(std::string_view text);

struct ExperimentResult {
    MetricsReport metrics;
    History history;
    RunReport run;
    /// Host-side (value, ts) of every key the workload touched, per live replica, after quiescence.
    std::map<ReplicaId, std::map<Key, VersionedValue>> final_state;
    std::vector<ReplicaId> crashed;
};

/// Wires replicas, host datastores and links onto one simulated timeline and
/// drives a closed-loop workload through them. Single use: construct, optionally
/// install hooks, call run() once.
class Cluster {
public:
    using EventHook = std::function<void(const Cluster&, const SimEvent&)>;
    using CompactionHook = std::function<void(ReplicaId, std::span<const LogEntry>, LogIndex durable_mark)>;

    Cluster(WorkloadConfig workload, ClusterConfig config, std::vector<CrashSpec> crashes = {});
    ~Cluster();
    Cluster(const Cluster&) = delete;
    Cluster& operator=(const Cluster&) = delete;

    void set_after_event(EventHook hook);
    void set_compaction_hook(CompactionHook hook);

    ExperimentResult run();

    std::size_t replica_count() const;
    const Replica& replica(ReplicaId r) const;
    const DatastoreInterface& host(ReplicaId r) const;
    const SimNet& net() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

ExperimentResult run_experiment(const WorkloadConfig& workload, const ClusterConfig& config,
                                const std::vector<CrashSpec>& crashes = {});

}  // namespace nicrep
