#include <sstream>

#include "doctest.h"
#include "nicrep/checker.hpp"
#include "nicrep/cluster.hpp"

using namespace nicrep;

namespace {

WorkloadConfig small_workload(std::uint64_t seed = 1) {
    WorkloadConfig w;
    w.replicas = 3;
    w.key_count = 32;
    w.op_count = 1500;
    w.seed = seed;
    return w;
}

std::string history_text(const History& h) {
    std::ostringstream out;
    write_history_jsonl(h, out);
    return out.str();
}

// One write by a single session on replica 0, no reads.
WorkloadConfig one_write(std::size_t replicas) {
    WorkloadConfig w;
    w.replicas = replicas;
    w.sessions_per_replica = 1;
    w.key_count = 4;
    w.op_count = 1;
    w.write_ratio = 1.0;
    return w;
}

}  // namespace

TEST_SUITE("cluster") {

TEST_CASE("zero operations: empty history and all-zero counters") {
    WorkloadConfig w = small_workload();
    w.op_count = 0;
    const ExperimentResult r = run_experiment(w, {});
    CHECK(r.history.events.empty());
    CHECK(r.metrics.aggregate == ReplicaMetrics{});
    CHECK(r.metrics.events_dispatched == 0);
}

TEST_CASE("closed-form event count for one write on five replicas") {
    const WorkloadConfig w = one_write(5);
    ClusterConfig eager;
    eager.cache.batch_size = 1;
    eager.cache.flush_timer_ns = 0;
    // 1 client arrival + 4 Inv + 4 Ack + 4 Commit, then per replica one batch and one durable ack.
    const ExperimentResult a = run_experiment(w, eager);
    CHECK(a.run.events_dispatched == 13 + 2 * 5);
    CHECK(a.metrics.aggregate.network_messages == 12);
    CHECK(a.metrics.aggregate.pcie_messages == 10);
    REQUIRE(a.history.events.size() == 1);
    CHECK(a.history.events[0].result == OpResult::Ok);
    // Reply at ack completion: exactly one network round trip after the invoke.
    CHECK(a.history.events[0].response->time - a.history.events[0].invoke.time == 2 * 2000);

    ClusterConfig timed;
    timed.cache.batch_size = 16;
    timed.cache.flush_timer_ns = 10'000;
    // The same plus one flush-timer expiry per replica.
    const ExperimentResult b = run_experiment(w, timed);
    CHECK(b.run.events_dispatched == 13 + 3 * 5);
    CHECK(b.run.timers_fired == 5);
}

TEST_CASE("failure-free runs send 3(N-1) network messages per write and none for reads") {
    for (std::size_t n : {1, 2, 3, 5, 7}) {
        WorkloadConfig w = small_workload();
        w.replicas = n;
        ClusterConfig c;
        c.net_jitter_ns = 700;
        const ExperimentResult r = run_experiment(w, c);
        const auto& m = r.metrics.aggregate;
        CHECK(m.writes_ok > 0);
        CHECK(m.replays == 0);
        // A committed write costs Inv + Ack + Commit per peer; a superseded one costs Inv + Ack.
        CHECK(m.network_messages == 3 * (n - 1) * m.writes_ok + 2 * (n - 1) * m.writes_superseded);
    }
}

TEST_CASE("metric cross-checks hold on a mixed run") {
    ClusterConfig c;
    c.cache.capacity = 8;
    c.net_jitter_ns = 500;
    const ExperimentResult r = run_experiment(small_workload(3), c);
    const auto& m = r.metrics.aggregate;
    CHECK(m.fast_reads + m.slow_reads + m.blocked_reads == m.reads_completed);
    CHECK(m.pcie_bytes == m.pcie_payload_bytes + 32 * m.pcie_messages);
    CHECK(m.pcie_messages == m.pcie_batches + m.pcie_durable_acks + m.pcie_fetch_messages);
    CHECK(m.pcie_fetch_messages == 2 * m.slow_reads);
    CHECK(m.handler_total() == r.run.events_dispatched + r.run.network.delivered + r.run.client_arrivals);
    CHECK(m.slow_reads > 0);
    CHECK(m.read_slow.min_ns >= 500);
    CHECK(r.run.pcie.bytes == m.pcie_bytes);
    CHECK(r.run.network.sent == m.network_messages);
}

TEST_CASE("histories check out and replicas converge") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        ClusterConfig c;
        c.net_jitter_ns = 1000;
        c.final_reads = true;
        const ExperimentResult r = run_experiment(small_workload(seed), c);
        const HistoryVerdict v = check_history(r.history);
        CHECK_MESSAGE(v.ok(), "seed " << seed);
        REQUIRE(r.final_state.size() == 3);
        CHECK(r.final_state.at(0) == r.final_state.at(1));
        CHECK(r.final_state.at(0) == r.final_state.at(2));
    }
}

TEST_CASE("write-back safety holds after every event") {
    ClusterConfig c;
    c.cache.capacity = 6;
    c.cache.batch_size = 4;
    c.net_jitter_ns = 900;
    Cluster cluster(small_workload(8), c);
    std::size_t violations = 0, checks = 0;
    cluster.set_after_event([&](const Cluster& cl, const SimEvent&) {
        for (ReplicaId r = 0; r < cl.replica_count(); ++r) {
            const Replica& rep = cl.replica(r);
            for (Key k = 0; k < 32; ++k) {
                const CacheEntry* e = rep.cache().peek(k);
                if (!e) continue;
                ++checks;
                if (!e->durable) {
                    // Pinned entries must be newer than anything the NIC has seen acknowledged.
                    if (rep.cache().durable_mark() && e->latest_index <= *rep.cache().durable_mark()) ++violations;
                } else if (auto h = cl.host(r).fetch(k); !h || h->ts != e->ts || h->value != e->value) {
                    ++violations;  // a durable cache entry must match the host
                }
            }
        }
    });
    cluster.run();
    CHECK(checks > 0);
    CHECK(violations == 0);
}

TEST_CASE("compaction never removes proposed or non-durable entries") {
    ClusterConfig c;
    c.cache.batch_size = 2;
    c.net_jitter_ns = 1500;
    Cluster cluster(small_workload(4), c);
    std::size_t removed = 0, violations = 0;
    cluster.set_compaction_hook([&](ReplicaId, std::span<const LogEntry> entries, LogIndex mark) {
        for (const auto& e : entries) {
            ++removed;
            if (e.status == EntryStatus::Proposed || e.index > mark) ++violations;
        }
    });
    cluster.run();
    CHECK(removed > 0);
    CHECK(violations == 0);
}

TEST_CASE("a crashed coordinator's write is replayed by the survivors") {
    WorkloadConfig w = small_workload(2);
    ClusterConfig c;
    c.final_reads = true;
    // Crash replica 1 part-way through the run.
    const ExperimentResult r = run_experiment(w, c, {{1, 50'000}});
    CHECK(r.crashed == std::vector<ReplicaId>{1});
    REQUIRE(r.final_state.size() == 2);
    CHECK(r.final_state.at(0) == r.final_state.at(2));
    CHECK(check_history(r.history).ok());
}

TEST_CASE("runs are deterministic") {
    ClusterConfig c;
    c.net_jitter_ns = 1000;
    const ExperimentResult a = run_experiment(small_workload(9), c);
    const ExperimentResult b = run_experiment(small_workload(9), c);
    CHECK(history_text(a.history) == history_text(b.history));
    CHECK(a.metrics.aggregate == b.metrics.aggregate);
    CHECK(a.run == b.run);
}

TEST_CASE("configuration errors") {
    ClusterConfig c;
    c.overlay = OverlayKind::Chain;
    CHECK_THROWS_AS(run_experiment(small_workload(), c), ConfigError);
    CHECK_THROWS_AS(run_experiment(small_workload(), {}, {{9, 0}}), ConfigError);
    c = {};
    c.backend = "disk";
    CHECK_THROWS_AS(run_experiment(small_workload(), c), ConfigError);
    CHECK(parse_crash_spec("2@150").replica == 2);
    CHECK(parse_crash_spec("2@150").at == 150);
    CHECK_THROWS_AS(parse_crash_spec("2-150"), ConfigError);
    CHECK_THROWS_AS(parse_crash_spec("x@1"), ConfigError);
    Cluster once(small_workload(), {});
    once.run();
    CHECK_THROWS(once.run());
}

}
