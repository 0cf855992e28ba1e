#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nicrep/history.hpp"

namespace nicrep {

enum class VerdictStatus { Ok, Violation, Unchecked };

struct OpRef {
    SessionId session = 0;
    RequestId request = 0;

    friend auto operator<=>(const OpRef&, const OpRef&) = default;
};

/// The smallest conflicting set found: usually a pair of operations that
/// cannot both hold their observed results in any real-time-respecting order.
struct Witness {
    OpRef first;
    std::optional<OpRef> second;
    std::string reason;
};

struct Verdict {
    VerdictStatus status = VerdictStatus::Ok;
    std::optional<Witness> witness;
    std::vector<OpRef> linearization;  // on Ok: one valid order of the effective ops
    std::string detail;

    bool ok() const { return status == VerdictStatus::Ok; }
};

struct CheckerOptions {
    std::size_t max_ops_per_key = 200;
    std::size_t max_states = 2'000'000;
};

/// Per-key linearizability by exhaustive search with memoization over
/// (linearized set, current value). Writes that never got a definite answer
/// (superseded or pending) may take effect at any point after their invocation,
/// or not at all. Failed writes and unanswered reads are ignored.
Verdict check_key_linearizable(std::span<const HistoryEvent> ops, const std::optional<Value>& initial,
                               const CheckerOptions& options = {});

/// Read-your-writes within each session.
Verdict check_session_order(const History& history);

struct HistoryVerdict {
    std::map<Key, Verdict> per_key;
    Verdict session;
    std::size_t violations = 0;
    std::size_t unchecked = 0;

    bool ok() const { return violations == 0 && unchecked == 0 && session.ok(); }
};

HistoryVerdict check_history(const History& history, const CheckerOptions& options = {});

std::string describe(const Verdict& verdict);

}  // namespace nicrep
