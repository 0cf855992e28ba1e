#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "nicrep/types.hpp"

namespace nicrep {

class LogError : public ProtocolError {
public:
    using ProtocolError::ProtocolError;
};

enum class EntryKind { Proposal, CommitRecord };

/// Proposals move Proposed -> Committed, or Proposed -> Obsolete when a newer
/// proposal for the same key is appended. Commit records are born Committed.
enum class EntryStatus { Proposed, Committed, Obsolete };

struct LogEntry {
    LogIndex index = 0;
    EntryKind kind = EntryKind::Proposal;
    Key key = 0;
    Value value;
    Timestamp ts;
    EntryStatus status = EntryStatus::Proposed;
};

/// Append-only per-replica update log with a compaction floor.
///
/// Indices are contiguous from `floor()`. Every local commit appends a commit
/// record, so commit-record indices are monotone in commit order; those are the
/// indices that flow through the write buffer and come back as durable acks.
/// At most one proposal per key is Proposed at any time.
class LogManager {
public:
    /// Called with the entries about to be removed and the durable mark in force.
    using CompactionObserver = std::function<void(std::span<const LogEntry>, LogIndex durable_mark)>;

    LogIndex append(Key key, Value value, Timestamp ts);

    /// Flips the (key, ts) proposal to Committed and appends a commit record,
    /// returning the record's index. Returns nullopt if already committed.
    /// Throws LogError if no such proposal is retained or it is Obsolete.
    std::optional<LogIndex> mark_committed(Key key, Timestamp ts);

    /// Durable high-water mark from the host; must not regress.
    void set_durable_mark(LogIndex index);
    std::optional<LogIndex> durable_mark() const { return durable_; }

    /// Removes entries with index <= up_to. Throws LogError (leaving the log
    /// untouched) past the durable mark or across a Proposed entry.
    std::size_t compact(LogIndex up_to);

    /// Compacts as far as is safe: the durable mark, stopping before the first Proposed entry.
    std::size_t compact_to_durable();

    std::vector<LogEntry> uncommitted_entries() const;

    LogIndex floor() const { return floor_; }
    LogIndex next_index() const { return floor_ + entries_.size(); }
    std::size_t size() const { return entries_.size(); }
    const std::deque<LogEntry>& entries() const { return entries_; }
    const LogEntry* find(LogIndex index) const;

    void set_compaction_observer(CompactionObserver observer) { observer_ = std::move(observer); }

private:
    LogEntry& at(LogIndex index) { return entries_[index - floor_]; }

    std::deque<LogEntry> entries_;
    LogIndex floor_ = 0;
    std::optional<LogIndex> durable_;
    std::map<std::pair<Key, Timestamp>, LogIndex> proposals_;  // retained proposals
    std::map<Key, LogIndex> open_by_key_;                      // the Proposed one, per key
    std::set<LogIndex> open_;                                  // all Proposed indices
    CompactionObserver observer_;
};

}  // namespace nicrep
