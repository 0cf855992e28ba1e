#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nicrep/types.hpp"

namespace nicrep {

enum class OpKind { Read, Write };

/// Outcome of a client operation. `Pending` means no response was ever seen
/// (e.g. the session's home replica crashed).
enum class OpResult { Ok, Value, NotFound, Superseded, Error, Pending };

std::string_view to_string(OpResult result);
OpResult parse_op_result(std::string_view text);

/// A point on the simulated timeline. `seq` orders points that share a nanosecond.
struct HistoryPoint {
    SimTime time = 0;
    std::uint64_t seq = 0;

    friend auto operator<=>(const HistoryPoint&, const HistoryPoint&) = default;
};

struct HistoryEvent {
    SessionId session = 0;
    RequestId request = 0;
    OpKind op = OpKind::Read;
    Key key = 0;
    std::optional<Value> value;  // write argument, or the value a read returned
    HistoryPoint invoke;
    std::optional<HistoryPoint> response;
    OpResult result = OpResult::Pending;
};

struct History {
    std::map<Key, std::optional<Value>> initial;  // keys absent here start not-found
    std::vector<HistoryEvent> events;             // in invoke order

    std::optional<Value> initial_value(Key key) const;
    std::map<Key, std::vector<HistoryEvent>> by_key() const;
};

/// JSON lines: one {"type":"init",...} line per key with a known initial
/// value, then one {"type":"op",...} line per operation.
void write_history_jsonl(const History& history, std::ostream& out);
History read_history_jsonl(std::istream& in);
void save_history(const History& history, const std::string& path);
History load_history(const std::string& path);

}  // namespace nicrep
