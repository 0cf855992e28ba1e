#include <vector>

#include "doctest.h"
#include "nicrep/simnet.hpp"

using namespace nicrep;

namespace {

Message commit_msg(Key k) {
    return ProtocolMessage{Commit{k, {1, 0}}};
}

Key key_of(const SimEvent& ev) {
    return std::get<Commit>(std::get<ProtocolMessage>(std::get<Delivery>(ev.payload).message)).key;
}

}  // namespace

TEST_SUITE("simnet") {

TEST_CASE("network delivery takes the one-way latency; PCIe splits its round trip") {
    SimNet net(2, LinkModel::network(2000), LinkModel::pcie(501));
    net.send(LinkKind::Network, {0, Side::Nic}, {1, Side::Nic}, commit_msg(1), 21);
    net.send(LinkKind::Pcie, {0, Side::Nic}, {0, Side::Host}, PcieMessage{DurableAck{1}}, 8);
    net.send(LinkKind::Pcie, {1, Side::Host}, {1, Side::Nic}, PcieMessage{DurableAck{1}}, 8);
    std::vector<SimTime> times;
    net.run([&](SimEvent& ev) { times.push_back(ev.fire_time); });
    CHECK(times == std::vector<SimTime>{250, 251, 2000});
    CHECK(net.counters(LinkKind::Network).bytes == 21);
    CHECK(net.counters(LinkKind::Pcie).bytes == 2 * (8 + 32));
    CHECK(net.counters(LinkKind::Pcie).payload_bytes == 16);
}

TEST_CASE("simultaneous events dispatch in scheduling order") {
    SimNet net(3, LinkModel::network(100), LinkModel::pcie());
    for (Key k = 0; k < 5; ++k) net.send(LinkKind::Network, {static_cast<ReplicaId>(k % 2), Side::Nic}, {2, Side::Nic}, commit_msg(k), 1);
    std::vector<Key> order;
    net.run([&](SimEvent& ev) { order.push_back(key_of(ev)); });
    CHECK(order == std::vector<Key>{0, 1, 2, 3, 4});
}

TEST_CASE("FIFO links never reorder under jitter") {
    SimNet net(2, LinkModel::network(100, 1000), LinkModel::pcie(), {.seed = 5});
    for (Key k = 0; k < 200; ++k) net.send(LinkKind::Network, {0, Side::Nic}, {1, Side::Nic}, commit_msg(k), 1);
    std::vector<Key> order;
    SimTime last = 0;
    net.run([&](SimEvent& ev) {
        CHECK(ev.fire_time >= last);
        CHECK(ev.fire_time >= 100);
        CHECK(ev.fire_time <= 1100);
        last = ev.fire_time;
        order.push_back(key_of(ev));
    });
    for (Key k = 0; k < order.size(); ++k) CHECK(order[k] == k);
}

TEST_CASE("non-FIFO links can reorder under jitter") {
    SimNet net(2, LinkModel::network(100, 1000, 0, false), LinkModel::pcie(), {.seed = 5});
    for (Key k = 0; k < 200; ++k) net.send(LinkKind::Network, {0, Side::Nic}, {1, Side::Nic}, commit_msg(k), 1);
    std::vector<Key> order;
    net.run([&](SimEvent& ev) { order.push_back(key_of(ev)); });
    CHECK_FALSE(std::is_sorted(order.begin(), order.end()));
}

TEST_CASE("same seed gives the same schedule") {
    auto trace = [](std::uint64_t seed) {
        SimNet net(3, LinkModel::network(100, 500), LinkModel::pcie(), {.seed = seed});
        for (Key k = 0; k < 50; ++k)
            net.send(LinkKind::Network, {static_cast<ReplicaId>(k % 3), Side::Nic},
                     {static_cast<ReplicaId>((k + 1) % 3), Side::Nic}, commit_msg(k), 1);
        std::vector<std::pair<SimTime, Key>> out;
        net.run([&](SimEvent& ev) { out.emplace_back(ev.fire_time, key_of(ev)); });
        return out;
    };
    CHECK(trace(4) == trace(4));
    CHECK(trace(4) != trace(5));
}

TEST_CASE("cancelled timers never fire") {
    SimNet net(1, LinkModel::network(100), LinkModel::pcie());
    const TimerId a = net.set_timer(0, 10, FlushToken{});
    net.set_timer(0, 20, ReplayToken{3, {1, 0}});
    net.cancel_timer(a);
    net.cancel_timer(999);
    std::vector<SimTime> fired;
    net.run([&](SimEvent& ev) {
        REQUIRE(std::holds_alternative<TimerFire>(ev.payload));
        fired.push_back(ev.fire_time);
    });
    CHECK(fired == std::vector<SimTime>{20});
    CHECK(net.report().timers_fired == 1);
    CHECK_THROWS_AS(net.set_timer(0, 0, FlushToken{}), SimError);
}

TEST_CASE("crash drops later deliveries, timers and client arrivals") {
    SimNet net(2, LinkModel::network(100), LinkModel::pcie());
    net.crash(1, 50);
    net.crash(1, 60);  // duplicate
    net.send(LinkKind::Network, {0, Side::Nic}, {1, Side::Nic}, commit_msg(1), 1);
    net.set_timer(1, 70, FlushToken{});
    net.schedule_client(0, 1, 80);
    net.schedule_client(1, 0, 80);
    int crashes = 0, arrivals = 0;
    net.run([&](SimEvent& ev) {
        if (std::holds_alternative<CrashNotice>(ev.payload)) ++crashes;
        if (std::holds_alternative<ClientArrival>(ev.payload)) ++arrivals;
        CHECK_FALSE(std::holds_alternative<Delivery>(ev.payload));
        CHECK_FALSE(std::holds_alternative<TimerFire>(ev.payload));
    });
    CHECK(crashes == 1);
    CHECK(arrivals == 1);
    CHECK(net.crashed(1));
    CHECK(net.counters(LinkKind::Network).dropped == 1);
    CHECK(net.counters(LinkKind::Network).delivered == 0);
}

TEST_CASE("invalid sends and configs are rejected") {
    SimNet net(2, LinkModel::network(100), LinkModel::pcie());
    CHECK_THROWS_AS(net.send(LinkKind::Network, {0, Side::Nic}, {0, Side::Nic}, commit_msg(1), 1), SimError);
    CHECK_THROWS_AS(net.send(LinkKind::Network, {0, Side::Nic}, {1, Side::Host}, commit_msg(1), 1), SimError);
    CHECK_THROWS_AS(net.send(LinkKind::Pcie, {0, Side::Nic}, {1, Side::Host}, commit_msg(1), 1), SimError);
    CHECK_THROWS_AS(net.send(LinkKind::Network, {0, Side::Nic}, {5, Side::Nic}, commit_msg(1), 1), SimError);
    CHECK_THROWS_AS(SimNet(0, LinkModel::network(1), LinkModel::pcie()), ConfigError);
    CHECK_THROWS_AS(SimNet(1, LinkModel::network(0), LinkModel::pcie()), ConfigError);
}

TEST_CASE("processing delay is added to every send") {
    SimNet net(2, LinkModel::network(100), LinkModel::pcie(), {.processing_delay_ns = 7});
    net.send(LinkKind::Network, {0, Side::Nic}, {1, Side::Nic}, commit_msg(1), 1);
    SimTime at = 0;
    net.run([&](SimEvent& ev) { at = ev.fire_time; });
    CHECK(at == 107);
}

TEST_CASE("run stops at the horizon and the event cap aborts a livelock") {
    SimNet net(1, LinkModel::network(100), LinkModel::pcie(), {.event_cap = 10});
    net.set_timer(0, 5, FlushToken{});
    const RunReport partial = net.run([](SimEvent&) {}, 1);
    CHECK_FALSE(partial.quiescent);
    CHECK(net.run([](SimEvent&) {}).quiescent);
    CHECK(net.idle());

    net.set_timer(0, 1, FlushToken{});
    CHECK_THROWS_AS(net.run([&](SimEvent&) { net.set_timer(0, 1, FlushToken{}); }), SimError);
}

}
