#include "nicrep/metrics.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <functional>
#include <ostream>
#include <utility>

#include "json.hpp"

namespace nicrep {

using json = nlohmann::ordered_json;

void LatencyHistogram::add(std::uint64_t ns) {
    min_ns = count == 0 ? ns : std::min(min_ns, ns);
    max_ns = std::max(max_ns, ns);
    ++count;
    sum_ns += ns;
    ++buckets[static_cast<std::size_t>(std::bit_width(ns))];
}

void LatencyHistogram::merge(const LatencyHistogram& other) {
    if (other.count == 0) return;
    min_ns = count == 0 ? other.min_ns : std::min(min_ns, other.min_ns);
    max_ns = std::max(max_ns, other.max_ns);
    count += other.count;
    sum_ns += other.sum_ns;
    for (std::size_t i = 0; i < buckets.size(); ++i) buckets[i] += other.buckets[i];
}

namespace {

// Single list of counter fields drives merge, JSON and CSV so they never drift apart.
using Counter = std::uint64_t ReplicaMetrics::*;
const std::vector<std::pair<const char*, Counter>>& counter_fields() {
    static const std::vector<std::pair<const char*, Counter>> fields = {
        {"network_messages", &ReplicaMetrics::network_messages},
        {"network_bytes", &ReplicaMetrics::network_bytes},
        {"pcie_messages", &ReplicaMetrics::pcie_messages},
        {"pcie_bytes", &ReplicaMetrics::pcie_bytes},
        {"pcie_payload_bytes", &ReplicaMetrics::pcie_payload_bytes},
        {"pcie_batches", &ReplicaMetrics::pcie_batches},
        {"pcie_batch_entries", &ReplicaMetrics::pcie_batch_entries},
        {"pcie_durable_acks", &ReplicaMetrics::pcie_durable_acks},
        {"pcie_fetch_messages", &ReplicaMetrics::pcie_fetch_messages},
        {"reads_completed", &ReplicaMetrics::reads_completed},
        {"fast_reads", &ReplicaMetrics::fast_reads},
        {"slow_reads", &ReplicaMetrics::slow_reads},
        {"blocked_reads", &ReplicaMetrics::blocked_reads},
        {"writes_ok", &ReplicaMetrics::writes_ok},
        {"writes_superseded", &ReplicaMetrics::writes_superseded},
        {"writes_error", &ReplicaMetrics::writes_error},
        {"commits_applied", &ReplicaMetrics::commits_applied},
        {"replays", &ReplicaMetrics::replays},
        {"stale_acks", &ReplicaMetrics::stale_acks},
        {"cache_overflow", &ReplicaMetrics::cache_overflow},
        {"cache_evictions", &ReplicaMetrics::cache_evictions},
        {"log_entries_compacted", &ReplicaMetrics::log_entries_compacted},
        {"handler_protocol", &ReplicaMetrics::handler_protocol},
        {"handler_network", &ReplicaMetrics::handler_network},
        {"handler_rest", &ReplicaMetrics::handler_rest},
    };
    return fields;
}

using Histogram = LatencyHistogram ReplicaMetrics::*;
const std::vector<std::pair<const char*, Histogram>>& histogram_fields() {
    static const std::vector<std::pair<const char*, Histogram>> fields = {
        {"read_fast", &ReplicaMetrics::read_fast},
        {"read_slow", &ReplicaMetrics::read_slow},
        {"read_blocked", &ReplicaMetrics::read_blocked},
        {"write", &ReplicaMetrics::write},
    };
    return fields;
}

json histogram_json(const LatencyHistogram& h) {
    json j;
    j["count"] = h.count;
    j["sum_ns"] = h.sum_ns;
    j["min_ns"] = h.min_ns;
    j["max_ns"] = h.max_ns;
    j["mean_ns"] = h.mean_ns();
    json buckets = json::array();
    for (std::size_t b = 0; b < h.buckets.size(); ++b) {
        if (h.buckets[b] == 0) continue;
        const std::uint64_t upper = b == 0 ? 0 : (b >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << b) - 1);
        buckets.push_back(json::array({upper, h.buckets[b]}));
    }
    j["buckets_le_ns"] = std::move(buckets);
    return j;
}

json replica_json(const ReplicaMetrics& m) {
    json j;
    for (const auto& [name, field] : counter_fields()) j[name] = m.*field;
    j["handler_total"] = m.handler_total();
    json latency;
    for (const auto& [name, field] : histogram_fields()) latency[name] = histogram_json(m.*field);
    j["latency"] = std::move(latency);
    return j;
}

void write_csv_row(std::ostream& out, const std::string& scope, const ReplicaMetrics& m) {
    out << scope;
    for (const auto& [name, field] : counter_fields()) out << ',' << m.*field;
    out << ',' << m.handler_total();
    for (const auto& [name, field] : histogram_fields()) {
        const LatencyHistogram& h = m.*field;
        out << ',' << h.count << ',' << h.min_ns << ',' << h.mean_ns() << ',' << h.max_ns;
    }
    out << '\n';
}

}  // namespace

void ReplicaMetrics::merge(const ReplicaMetrics& other) {
    for (const auto& [name, field] : counter_fields()) this->*field += other.*field;
    for (const auto& [name, field] : histogram_fields()) (this->*field).merge(other.*field);
}

void MetricsReport::finalize() {
    aggregate = {};
    for (const auto& r : replicas) aggregate.merge(r);
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "json") return ReportFormat::Json;
    if (name == "csv") return ReportFormat::Csv;
    throw ConfigError("unknown report format '" + std::string(name) + "' (expected json|csv)");
}

void write_report(const MetricsReport& report, ReportFormat format, std::ostream& out) {
    if (format == ReportFormat::Json) {
        json j;
        j["final_time_ns"] = report.final_time_ns;
        j["events_dispatched"] = report.events_dispatched;
        j["network_dropped"] = report.network_dropped;
        j["pcie_dropped"] = report.pcie_dropped;
        j["crashed"] = report.crashed;
        j["aggregate"] = replica_json(report.aggregate);
        json replicas = json::array();
        for (std::size_t r = 0; r < report.replicas.size(); ++r) {
            json row;
            row["replica"] = r;
            row.update(replica_json(report.replicas[r]));
            replicas.push_back(std::move(row));
        }
        j["replicas"] = std::move(replicas);
        out << j.dump(2) << '\n';
        return;
    }

    out << "scope";
    for (const auto& [name, field] : counter_fields()) out << ',' << name;
    out << ",handler_total";
    for (const auto& [name, field] : histogram_fields())
        out << ',' << name << "_count," << name << "_min_ns," << name << "_mean_ns," << name << "_max_ns";
    out << '\n';
    for (std::size_t r = 0; r < report.replicas.size(); ++r)
        write_csv_row(out, "replica" + std::to_string(r), report.replicas[r]);
    write_csv_row(out, "aggregate", report.aggregate);
}

void emit_report(const MetricsReport& report, ReportFormat format, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open report '" + path + "' for writing");
    write_report(report, format, out);
    out.flush();
    if (!out) throw Error("write to report '" + path + "' failed");
}

}  // namespace nicrep
