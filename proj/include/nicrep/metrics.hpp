#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "nicrep/types.hpp"

namespace nicrep {

/// Latency histogram with power-of-two nanosecond buckets: bucket b counts
/// samples in [2^(b-1), 2^b), bucket 0 counts zero.
struct LatencyHistogram {
    std::uint64_t count = 0;
    std::uint64_t sum_ns = 0;
    std::uint64_t min_ns = 0;
    std::uint64_t max_ns = 0;
    std::array<std::uint64_t, 65> buckets{};

    void add(std::uint64_t ns);
    void merge(const LatencyHistogram& other);
    std::uint64_t mean_ns() const { return count ? sum_ns / count : 0; }

    friend bool operator==(const LatencyHistogram&, const LatencyHistogram&) = default;
};

/// Counters for one replica (NIC + host). Handler invocations are bucketed by
/// the kind of work done: Protocol (consensus-unit handlers and replay timers),
/// Network (receiving and parsing inter-replica messages) and Rest (client
/// request intake, PCIe traffic, flush timers, crash notices).
struct ReplicaMetrics {
    std::uint64_t network_messages = 0;  // sent by this replica
    std::uint64_t network_bytes = 0;
    std::uint64_t pcie_messages = 0;     // both directions on this replica's link
    std::uint64_t pcie_bytes = 0;        // payload + per-packet headers
    std::uint64_t pcie_payload_bytes = 0;
    std::uint64_t pcie_batches = 0;
    std::uint64_t pcie_batch_entries = 0;
    std::uint64_t pcie_durable_acks = 0;
    std::uint64_t pcie_fetch_messages = 0;  // requests + responses

    std::uint64_t reads_completed = 0;
    std::uint64_t fast_reads = 0;
    std::uint64_t slow_reads = 0;
    std::uint64_t blocked_reads = 0;  // blocked, then answered by a commit
    std::uint64_t writes_ok = 0;
    std::uint64_t writes_superseded = 0;
    std::uint64_t writes_error = 0;

    std::uint64_t commits_applied = 0;
    std::uint64_t replays = 0;
    std::uint64_t stale_acks = 0;
    std::uint64_t cache_overflow = 0;
    std::uint64_t cache_evictions = 0;
    std::uint64_t log_entries_compacted = 0;

    std::uint64_t handler_protocol = 0;
    std::uint64_t handler_network = 0;
    std::uint64_t handler_rest = 0;

    LatencyHistogram read_fast;
    LatencyHistogram read_slow;
    LatencyHistogram read_blocked;
    LatencyHistogram write;

    void merge(const ReplicaMetrics& other);
    std::uint64_t handler_total() const { return handler_protocol + handler_network + handler_rest; }

    friend bool operator==(const ReplicaMetrics&, const ReplicaMetrics&) = default;
};

struct MetricsReport {
    std::vector<ReplicaMetrics> replicas;
    ReplicaMetrics aggregate;
    std::vector<ReplicaId> crashed;
    SimTime final_time_ns = 0;
    std::uint64_t events_dispatched = 0;
    std::uint64_t network_dropped = 0;
    std::uint64_t pcie_dropped = 0;

    void finalize();  // recomputes `aggregate`
};

enum class ReportFormat { Json, Csv };

ReportFormat parse_report_format(std::string_view name);

/// Stable field order; identical reports serialize to identical bytes.
void write_report(const MetricsReport& report, ReportFormat format, std::ostream& out);
void emit_report(const MetricsReport& report, ReportFormat format, const std::string& path);

}  // namespace nicrep
