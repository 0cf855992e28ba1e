#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "nicrep/metrics.hpp"

using namespace nicrep;

namespace {

MetricsReport sample() {
    MetricsReport r;
    r.replicas.resize(3);
    r.replicas[0].network_messages = 4;
    r.replicas[1].pcie_bytes = 100;
    r.replicas[2].fast_reads = 7;
    r.replicas[2].read_fast.add(0);
    r.replicas[2].read_fast.add(900);
    r.replicas[0].write.add(4000);
    r.crashed = {1};
    r.final_time_ns = 123;
    r.finalize();
    return r;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("histogram buckets by powers of two") {
    LatencyHistogram h;
    h.add(0);
    h.add(1);
    h.add(500);
    h.add(511);
    h.add(512);
    CHECK(h.count == 5);
    CHECK(h.min_ns == 0);
    CHECK(h.max_ns == 512);
    CHECK(h.buckets[0] == 1);
    CHECK(h.buckets[1] == 1);
    CHECK(h.buckets[9] == 2);   // [256, 512)
    CHECK(h.buckets[10] == 1);  // [512, 1024)
    CHECK(h.mean_ns() == (0 + 1 + 500 + 511 + 512) / 5);

    LatencyHistogram other;
    other.add(7);
    h.merge(other);
    CHECK(h.count == 6);
    LatencyHistogram empty;
    empty.merge(other);
    CHECK(empty.min_ns == 7);
}

TEST_CASE("aggregate sums every replica") {
    const MetricsReport r = sample();
    CHECK(r.aggregate.network_messages == 4);
    CHECK(r.aggregate.pcie_bytes == 100);
    CHECK(r.aggregate.fast_reads == 7);
    CHECK(r.aggregate.read_fast.count == 2);
    CHECK(r.aggregate.write.max_ns == 4000);
}

TEST_CASE("json report is parseable and complete") {
    std::ostringstream out;
    write_report(sample(), ReportFormat::Json, out);
    const auto j = nlohmann::json::parse(out.str());
    CHECK(j["final_time_ns"] == 123);
    CHECK(j["crashed"] == nlohmann::json::array({1}));
    CHECK(j["replicas"].size() == 3);
    for (const char* field : {"network_messages", "network_bytes", "pcie_messages", "pcie_bytes", "fast_reads",
                              "slow_reads", "blocked_reads", "replays", "cache_overflow", "handler_protocol",
                              "handler_network", "handler_rest", "handler_total"})
        CHECK(j["aggregate"].contains(field));
    for (const char* h : {"read_fast", "read_slow", "read_blocked", "write"})
        CHECK(j["aggregate"]["latency"].contains(h));
    CHECK(j["replicas"][2]["latency"]["read_fast"]["count"] == 2);
}

TEST_CASE("same report serializes to identical bytes") {
    for (ReportFormat f : {ReportFormat::Json, ReportFormat::Csv}) {
        std::ostringstream a, b;
        write_report(sample(), f, a);
        write_report(sample(), f, b);
        CHECK(a.str() == b.str());
    }
}

TEST_CASE("csv has a header, one row per replica and an aggregate row") {
    std::ostringstream out;
    write_report(sample(), ReportFormat::Csv, out);
    std::istringstream in(out.str());
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    REQUIRE(lines.size() == 5);
    CHECK(lines[0].rfind("scope,network_messages,", 0) == 0);
    CHECK(lines[1].rfind("replica0,4,", 0) == 0);
    CHECK(lines[4].rfind("aggregate,", 0) == 0);
    const auto columns = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
    for (const auto& l : lines) CHECK(columns(l) == columns(lines[0]));
}

TEST_CASE("emit_report surfaces the path on I/O failure") {
    try {
        emit_report(sample(), ReportFormat::Json, "/nonexistent-dir/x/report.json");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("/nonexistent-dir/x/report.json") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_report_format("xml"), ConfigError);
}

}
