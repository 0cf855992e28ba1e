#include <sstream>

#include "doctest.h"
#include "history_builder.hpp"

using namespace nicrep;
using namespace testing_support;

TEST_SUITE("history") {

TEST_CASE("JSON lines round-trip") {
    History h;
    h.initial[1] = "init";
    h.initial[2] = std::nullopt;
    h.events.push_back(write(0, 0, 1, "a", 10, 20));
    h.events.push_back(read(1, 0, 1, "a", 25, 26));
    h.events.push_back(read(1, 1, 2, std::nullopt, 30, 31));
    h.events.push_back(write(0, 1, 2, "b", 40, std::nullopt));
    h.events.push_back(write(2, 0, 2, "c", 41, 90, OpResult::Superseded));

    std::stringstream buf;
    write_history_jsonl(h, buf);
    const History back = read_history_jsonl(buf);
    CHECK(back.initial == h.initial);
    REQUIRE(back.events.size() == h.events.size());
    for (std::size_t i = 0; i < h.events.size(); ++i) {
        const auto& a = h.events[i];
        const auto& b = back.events[i];
        CHECK(a.session == b.session);
        CHECK(a.request == b.request);
        CHECK(a.op == b.op);
        CHECK(a.key == b.key);
        CHECK(a.value == b.value);
        CHECK(a.invoke == b.invoke);
        CHECK(a.response == b.response);
        CHECK(a.result == b.result);
    }
    std::stringstream again;
    write_history_jsonl(back, again);
    std::stringstream first;
    write_history_jsonl(h, first);
    CHECK(again.str() == first.str());
}

TEST_CASE("malformed lines report their line number") {
    std::stringstream in("{\"type\":\"init\",\"key\":1,\"value\":\"x\"}\n{\"type\":\"op\",\"op\":\"jump\"}\n");
    try {
        read_history_jsonl(in);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("by_key groups operations") {
    History h;
    h.events.push_back(write(0, 0, 1, "a", 10, 20));
    h.events.push_back(write(0, 1, 2, "b", 30, 40));
    h.events.push_back(read(0, 2, 1, "a", 50, 60));
    const auto groups = h.by_key();
    CHECK(groups.at(1).size() == 2);
    CHECK(groups.at(2).size() == 1);
}

TEST_CASE("result names round-trip") {
    for (OpResult r : {OpResult::Ok, OpResult::Value, OpResult::NotFound, OpResult::Superseded, OpResult::Error,
                       OpResult::Pending})
        CHECK(parse_op_result(to_string(r)) == r);
    CHECK_THROWS(parse_op_result("maybe"));
}

}
