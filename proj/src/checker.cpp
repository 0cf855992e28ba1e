#include "nicrep/checker.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace nicrep {

namespace {

constexpr HistoryPoint kNever{std::numeric_limits<SimTime>::max(), std::numeric_limits<std::uint64_t>::max()};

struct Op {
    OpRef ref;
    OpKind kind = OpKind::Read;
    int value = 0;  // 0 = not found
    HistoryPoint invoke;
    HistoryPoint response;
    bool required = true;
};

class ValueIds {
public:
    int id(const std::optional<Value>& v) {
        if (!v) return 0;
        auto [it, inserted] = ids_.try_emplace(*v, static_cast<int>(ids_.size()) + 1);
        return it->second;
    }

private:
    std::unordered_map<Value, int> ids_;
};

OpRef ref_of(const HistoryEvent& e) {
    return {e.session, e.request};
}

std::string ref_str(const OpRef& r) {
    std::ostringstream os;
    os << "s" << r.session << "/r" << r.request;
    return os.str();
}

class Search {
public:
    Search(std::vector<Op> ops, int initial, std::size_t max_states)
        : ops_(std::move(ops)), words_((ops_.size() + 63) / 64), initial_(initial), max_states_(max_states) {
        for (const Op& op : ops_)
            if (op.required) ++required_;
    }

    // Returns true if a linearization exists; `exhausted` set when the state budget ran out.
    bool run() {
        std::vector<std::uint64_t> done(words_, 0);
        return dfs(done, initial_, 0);
    }

    bool exhausted() const { return exhausted_; }
    const std::vector<std::size_t>& order() const { return path_; }

private:
    bool is_done(const std::vector<std::uint64_t>& done, std::size_t i) const {
        return (done[i / 64] >> (i % 64)) & 1U;
    }

    bool dfs(std::vector<std::uint64_t>& done, int value, std::size_t required_done) {
        if (required_done == required_) return true;
        if (exhausted_) return false;

        std::string memo_key(reinterpret_cast<const char*>(done.data()), done.size() * sizeof(std::uint64_t));
        memo_key.append(reinterpret_cast<const char*>(&value), sizeof(value));
        if (!seen_.insert(std::move(memo_key)).second) return false;
        if (seen_.size() > max_states_) {
            exhausted_ = true;
            return false;
        }

        HistoryPoint horizon = kNever;
        for (std::size_t i = 0; i < ops_.size(); ++i)
            if (!is_done(done, i) && ops_[i].required) horizon = std::min(horizon, ops_[i].response);

        // A legal read can always be taken first: it keeps the value and only widens the horizon.
        for (std::size_t i = 0; i < ops_.size() && ops_[i].invoke < horizon; ++i) {
            if (is_done(done, i) || ops_[i].kind != OpKind::Read || ops_[i].value != value) continue;
            return step(done, i, value, required_done);
        }
        for (std::size_t i = 0; i < ops_.size() && ops_[i].invoke < horizon; ++i) {
            if (is_done(done, i) || ops_[i].kind != OpKind::Write) continue;
            if (step(done, i, ops_[i].value, required_done)) return true;
        }
        return false;
    }

    bool step(std::vector<std::uint64_t>& done, std::size_t i, int value, std::size_t required_done) {
        done[i / 64] |= (std::uint64_t{1} << (i % 64));
        path_.push_back(i);
        if (dfs(done, value, required_done + (ops_[i].required ? 1 : 0))) return true;
        path_.pop_back();
        done[i / 64] &= ~(std::uint64_t{1} << (i % 64));
        return false;
    }

    std::vector<Op> ops_;
    std::size_t words_;
    int initial_;
    std::size_t max_states_;
    std::size_t required_ = 0;
    std::unordered_set<std::string> seen_;
    std::vector<std::size_t> path_;
    bool exhausted_ = false;
};

bool precedes(const Op& a, const Op& b) {
    return a.response < b.invoke;
}

// Looks for a small conflicting pair explaining why no linearization exists.
Witness find_witness(const std::vector<Op>& ops, int initial) {
    std::unordered_map<int, std::vector<const Op*>> writers;
    for (const Op& op : ops)
        if (op.kind == OpKind::Write) writers[op.value].push_back(&op);

    // value -> every write producing it completed before `later` started (or it is the initial value)
    auto fully_before = [&](int value, const Op& later) {
        if (value == initial && !writers.count(value)) return true;
        auto it = writers.find(value);
        if (it == writers.end()) return false;
        return std::all_of(it->second.begin(), it->second.end(), [&](const Op* w) { return precedes(*w, later); });
    };

    for (const Op& r : ops) {
        if (r.kind != OpKind::Read) continue;
        auto it = writers.find(r.value);
        if (it == writers.end() && r.value != initial)
            return {r.ref, std::nullopt, "read returned a value no write produced"};
        if (it != writers.end() && r.value != initial &&
            std::all_of(it->second.begin(), it->second.end(), [&](const Op* w) { return precedes(r, *w); }))
            return {r.ref, it->second.front()->ref, "read returned a value written only after it completed"};
        for (const Op& w : ops) {
            if (w.kind != OpKind::Write || !w.required || w.value == r.value) continue;
            if (precedes(w, r) && fully_before(r.value, w))
                return {w.ref, r.ref, "stale read: a later completed write precedes the read"};
        }
    }
    for (const Op& r1 : ops) {
        if (r1.kind != OpKind::Read) continue;
        for (const Op& r2 : ops) {
            if (r2.kind != OpKind::Read || r1.value == r2.value || !precedes(r1, r2)) continue;
            auto w1 = writers.find(r1.value);
            if (w1 == writers.end()) continue;
            if (std::all_of(w1->second.begin(), w1->second.end(),
                            [&](const Op* w) { return fully_before(r2.value, *w); }))
                return {r1.ref, r2.ref, "new-old inversion between two reads"};
        }
    }
    return {ops.empty() ? OpRef{} : ops.front().ref, std::nullopt, "no linearization exists"};
}

}  // namespace

Verdict check_key_linearizable(std::span<const HistoryEvent> events, const std::optional<Value>& initial,
                               const CheckerOptions& options) {
    ValueIds ids;
    const int initial_id = ids.id(initial);
    std::vector<Op> ops;
    ops.reserve(events.size());
    for (const HistoryEvent& e : events) {
        Op op;
        op.ref = ref_of(e);
        op.kind = e.op;
        op.invoke = e.invoke;
        if (e.op == OpKind::Read) {
            if (e.result == OpResult::Pending || e.result == OpResult::Error) continue;
            if (e.result == OpResult::Value && !e.value) {
                Verdict v;
                v.status = VerdictStatus::Violation;
                v.witness = Witness{op.ref, std::nullopt, "read result carries no value"};
                return v;
            }
            op.value = e.result == OpResult::Value ? ids.id(e.value) : 0;
            op.response = e.response.value_or(kNever);
        } else {
            if (e.result == OpResult::Error) continue;
            op.value = ids.id(e.value);
            op.required = e.result == OpResult::Ok && e.response.has_value();
            op.response = op.required ? *e.response : kNever;
        }
        if (op.required && !(op.invoke < op.response)) {
            Verdict v;
            v.status = VerdictStatus::Violation;
            v.witness = Witness{op.ref, std::nullopt, "response precedes invocation"};
            return v;
        }
        ops.push_back(op);
    }

    Verdict verdict;
    if (ops.size() > options.max_ops_per_key) {
        verdict.status = VerdictStatus::Unchecked;
        verdict.detail = std::to_string(ops.size()) + " ops exceed the cap of " +
                         std::to_string(options.max_ops_per_key);
        return verdict;
    }
    std::stable_sort(ops.begin(), ops.end(), [](const Op& a, const Op& b) { return a.invoke < b.invoke; });

    Search search(ops, initial_id, options.max_states);
    if (search.run()) {
        for (std::size_t i : search.order()) verdict.linearization.push_back(ops[i].ref);
        return verdict;
    }
    if (search.exhausted()) {
        verdict.status = VerdictStatus::Unchecked;
        verdict.detail = "search exceeded " + std::to_string(options.max_states) + " states";
        return verdict;
    }
    verdict.status = VerdictStatus::Violation;
    verdict.witness = find_witness(ops, initial_id);
    return verdict;
}

Verdict check_session_order(const History& history) {
    std::map<Key, std::map<std::optional<Value>, std::vector<const HistoryEvent*>>> writers;
    for (const auto& e : history.events)
        if (e.op == OpKind::Write && e.result != OpResult::Error) writers[e.key][e.value].push_back(&e);

    std::map<SessionId, std::vector<const HistoryEvent*>> sessions;
    for (const auto& e : history.events) sessions[e.session].push_back(&e);

    for (auto& [session, ops] : sessions) {
        std::stable_sort(ops.begin(), ops.end(),
                         [](const HistoryEvent* a, const HistoryEvent* b) { return a->invoke < b->invoke; });
        std::map<Key, const HistoryEvent*> own_write;
        for (const HistoryEvent* e : ops) {
            if (e->op == OpKind::Write) {
                if (e->result == OpResult::Ok) own_write[e->key] = e;
                continue;
            }
            if (e->result != OpResult::Value && e->result != OpResult::NotFound) continue;
            auto w = own_write.find(e->key);
            if (w == own_write.end()) continue;
            const std::optional<Value> seen = e->result == OpResult::Value ? e->value : std::nullopt;
            if (seen == w->second->value) continue;

            const auto& producers = writers[e->key][seen];
            const bool newer_possible = std::any_of(producers.begin(), producers.end(), [&](const HistoryEvent* p) {
                return p->session != session && !(p->response && *p->response < w->second->invoke);
            });
            if (!newer_possible) {
                Verdict v;
                v.status = VerdictStatus::Violation;
                v.witness = Witness{ref_of(*w->second), ref_of(*e), "read does not reflect the session's own write"};
                return v;
            }
        }
    }
    return {};
}

HistoryVerdict check_history(const History& history, const CheckerOptions& options) {
    HistoryVerdict out;
    for (const auto& [key, ops] : history.by_key()) {
        Verdict v = check_key_linearizable(ops, history.initial_value(key), options);
        if (v.status == VerdictStatus::Violation) ++out.violations;
        if (v.status == VerdictStatus::Unchecked) ++out.unchecked;
        out.per_key.emplace(key, std::move(v));
    }
    out.session = check_session_order(history);
    return out;
}

std::string describe(const Verdict& verdict) {
    std::ostringstream os;
    switch (verdict.status) {
        case VerdictStatus::Ok: os << "ok"; break;
        case VerdictStatus::Violation: os << "VIOLATION"; break;
        case VerdictStatus::Unchecked: os << "UNCHECKED"; break;
    }
    if (verdict.witness) {
        os << ": " << verdict.witness->reason << " [" << ref_str(verdict.witness->first);
        if (verdict.witness->second) os << ", " << ref_str(*verdict.witness->second);
        os << "]";
    }
    if (!verdict.detail.empty()) os << " (" << verdict.detail << ")";
    return os.str();
}

}  // namespace nicrep
