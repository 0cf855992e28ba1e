#include <map>

#include "doctest.h"
#include "nicrep/workload.hpp"

using namespace nicrep;

TEST_SUITE("workload") {

TEST_CASE("write fraction follows the ratio") {
    WorkloadConfig c;
    c.op_count = 10'000;
    std::size_t writes = 0, total = 0;
    for (const auto& s : generate_trace(c))
        for (const auto& op : s.ops) {
            writes += op.is_write;
            ++total;
        }
    CHECK(total == 10'000);
    const double fraction = static_cast<double>(writes) / static_cast<double>(total);
    CHECK(fraction >= 0.18);
    CHECK(fraction <= 0.22);
}

TEST_CASE("zero write ratio yields no writes") {
    WorkloadConfig c;
    c.write_ratio = 0;
    c.op_count = 2000;
    for (const auto& s : generate_trace(c))
        for (const auto& op : s.ops) CHECK_FALSE(op.is_write);
}

TEST_CASE("traces are deterministic under the seed") {
    WorkloadConfig c;
    c.op_count = 500;
    auto flatten = [](const std::vector<SessionTrace>& t) {
        std::vector<std::tuple<SessionId, RequestId, bool, Key, Value, SimTime>> out;
        for (const auto& s : t)
            for (const auto& op : s.ops) out.emplace_back(s.session, op.request, op.is_write, op.key, op.value, op.planned_at);
        return out;
    };
    CHECK(flatten(generate_trace(c)) == flatten(generate_trace(c)));
    WorkloadConfig d = c;
    d.seed = 2;
    CHECK(flatten(generate_trace(c)) != flatten(generate_trace(d)));
}

TEST_CASE("sessions are pinned round-robin and requests are numbered per session") {
    WorkloadConfig c;
    c.replicas = 3;
    c.sessions_per_replica = 2;
    c.op_count = 600;
    const auto t = generate_trace(c);
    REQUIRE(t.size() == 6);
    for (const auto& s : t) {
        CHECK(s.home == s.session % 3);
        for (std::size_t i = 0; i < s.ops.size(); ++i) {
            CHECK(s.ops[i].request == i);
            if (i > 0) CHECK(s.ops[i].planned_at >= s.ops[i - 1].planned_at);
        }
    }
}

TEST_CASE("write values are unique and sized") {
    CHECK(make_write_value(0, 8) == "w0......");
    CHECK(make_write_value(255, 4) == "wff.");
    CHECK(make_write_value(0x12345, 2) == "w12345");
    WorkloadConfig c;
    c.op_count = 5000;
    c.write_ratio = 0.5;
    std::map<Value, int> seen;
    for (const auto& s : generate_trace(c))
        for (const auto& op : s.ops)
            if (op.is_write) {
                CHECK(op.value.size() == c.value_size);
                CHECK(++seen[op.value] == 1);
            }
}

TEST_CASE("zipf concentrates on low keys") {
    WorkloadConfig c;
    c.distribution = KeyDistribution::Zipf;
    c.key_count = 1000;
    c.op_count = 20'000;
    std::size_t hot = 0;
    for (const auto& s : generate_trace(c))
        for (const auto& op : s.ops) {
            CHECK(op.key < 1000);
            hot += op.key < 10;
        }
    // With theta 0.99 over 1000 keys the 10 hottest keys carry roughly 38% of accesses.
    CHECK(hot > 20'000 * 0.30);
}

TEST_CASE("invalid configs are rejected") {
    WorkloadConfig c;
    c.write_ratio = 1.5;
    CHECK_THROWS_AS(generate_trace(c), ConfigError);
    c = {};
    c.replicas = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(parse_distribution("pareto"), ConfigError);
}

}
