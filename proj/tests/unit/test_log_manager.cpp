#include <random>

#include "doctest.h"
#include "nicrep/log_manager.hpp"

using namespace nicrep;

TEST_SUITE("log_manager") {

TEST_CASE("append, commit and compact") {
    LogManager log;
    const Timestamp t1{1, 0};
    CHECK(log.append(7, "a", t1) == 0);
    CHECK(log.uncommitted_entries().size() == 1);

    const auto rec = log.mark_committed(7, t1);
    REQUIRE(rec);
    CHECK(*rec == 1);
    CHECK(log.find(0)->status == EntryStatus::Committed);
    CHECK(log.find(1)->kind == EntryKind::CommitRecord);
    CHECK(log.uncommitted_entries().empty());
    CHECK_FALSE(log.mark_committed(7, t1));  // already committed

    log.set_durable_mark(1);
    CHECK(log.compact(1) == 2);
    CHECK(log.floor() == 2);
    CHECK(log.size() == 0);
    CHECK(log.next_index() == 2);
}

TEST_CASE("compaction never passes the durable mark or a proposed entry") {
    LogManager log;
    CHECK_THROWS_AS(log.compact(0), LogError);  // no durable mark yet
    log.append(1, "a", {1, 0});
    log.append(2, "b", {1, 1});
    log.mark_committed(2, {1, 1});  // index 2
    log.set_durable_mark(2);
    CHECK_THROWS_AS(log.compact(1), LogError);  // index 0 is still Proposed
    CHECK(log.size() == 3);
    CHECK(log.compact_to_durable() == 0);
    CHECK_THROWS_AS(log.compact(3), LogError);

    log.mark_committed(1, {1, 0});  // index 3
    CHECK(log.compact_to_durable() == 3);
    CHECK(log.floor() == 3);
}

TEST_CASE("newer proposal obsoletes the older one on the same key") {
    LogManager log;
    log.append(5, "old", {1, 0});
    log.append(5, "new", {1, 1});
    CHECK(log.find(0)->status == EntryStatus::Obsolete);
    CHECK_THROWS_AS(log.mark_committed(5, {1, 0}), LogError);
    CHECK(log.uncommitted_entries().size() == 1);
    CHECK(log.uncommitted_entries()[0].value == "new");
}

TEST_CASE("durable mark cannot regress") {
    LogManager log;
    log.set_durable_mark(4);
    log.set_durable_mark(4);
    CHECK_THROWS_AS(log.set_durable_mark(3), LogError);
}

TEST_CASE("unknown proposal cannot be committed") {
    LogManager log;
    CHECK_THROWS_AS(log.mark_committed(1, {1, 0}), LogError);
}

TEST_CASE("property: randomized operations keep the compaction invariants") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        LogManager log;
        std::uint64_t version = 0;
        std::map<Key, Timestamp> staged;
        LogIndex highest_record = 0;
        bool any_record = false;
        std::size_t violations = 0;
        log.set_compaction_observer([&](std::span<const LogEntry> removed, LogIndex mark) {
            for (const LogEntry& e : removed)
                if (e.status == EntryStatus::Proposed || e.index > mark) ++violations;
        });
        for (int step = 0; step < 300; ++step) {
            const Key k = rng() % 6;
            switch (rng() % 3) {
                case 0: {
                    const Timestamp ts{++version, 0};
                    log.append(k, "v", ts);
                    staged[k] = ts;
                    break;
                }
                case 1:
                    if (auto it = staged.find(k); it != staged.end()) {
                        highest_record = *log.mark_committed(k, it->second);
                        any_record = true;
                        staged.erase(it);
                    }
                    break;
                default:
                    if (any_record) {
                        log.set_durable_mark(std::max(highest_record, log.durable_mark().value_or(0)));
                        log.compact_to_durable();
                    }
            }
            // Every staged proposal survives compaction.
            CHECK(log.uncommitted_entries().size() == staged.size());
            CHECK(log.next_index() == log.floor() + log.size());
        }
        CHECK(violations == 0);
    }
}

}
