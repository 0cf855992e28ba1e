#include "nicrep/log_manager.hpp"

#include <sstream>

namespace nicrep {

LogIndex LogManager::append(Key key, Value value, Timestamp ts) {
    const LogIndex index = next_index();
    if (auto it = open_by_key_.find(key); it != open_by_key_.end()) {
        at(it->second).status = EntryStatus::Obsolete;
        open_.erase(it->second);
        open_by_key_.erase(it);
    }
    entries_.push_back(LogEntry{index, EntryKind::Proposal, key, std::move(value), ts, EntryStatus::Proposed});
    proposals_[{key, ts}] = index;
    open_by_key_[key] = index;
    open_.insert(index);
    return index;
}

std::optional<LogIndex> LogManager::mark_committed(Key key, Timestamp ts) {
    auto it = proposals_.find({key, ts});
    if (it == proposals_.end()) {
        std::ostringstream os;
        os << "mark_committed: no proposal for key " << key << " ts " << ts;
        throw LogError(os.str());
    }
    LogEntry& proposal = at(it->second);
    if (proposal.status == EntryStatus::Committed) return std::nullopt;
    if (proposal.status == EntryStatus::Obsolete) {
        std::ostringstream os;
        os << "mark_committed: proposal for key " << key << " ts " << ts << " is obsolete";
        throw LogError(os.str());
    }
    proposal.status = EntryStatus::Committed;
    open_.erase(proposal.index);
    open_by_key_.erase(key);

    const LogIndex index = next_index();
    entries_.push_back(LogEntry{index, EntryKind::CommitRecord, key, proposal.value, ts, EntryStatus::Committed});
    return index;
}

void LogManager::set_durable_mark(LogIndex index) {
    if (durable_ && index < *durable_)
        throw LogError("durable mark regressed from " + std::to_string(*durable_) + " to " + std::to_string(index));
    durable_ = index;
}

std::size_t LogManager::compact(LogIndex up_to) {
    if (!durable_ || up_to > *durable_)
        throw LogError("compact(" + std::to_string(up_to) + ") beyond durable mark");
    if (up_to < floor_) return 0;
    if (!open_.empty() && *open_.begin() <= up_to)
        throw LogError("compact(" + std::to_string(up_to) + ") would remove Proposed entry " +
                       std::to_string(*open_.begin()));

    const std::size_t count = static_cast<std::size_t>(up_to - floor_ + 1);
    if (observer_) {
        const std::vector<LogEntry> removed(entries_.begin(), entries_.begin() + static_cast<std::ptrdiff_t>(count));
        observer_(removed, *durable_);
    }
    for (std::size_t i = 0; i < count; ++i) {
        const LogEntry& e = entries_.front();
        if (e.kind == EntryKind::Proposal) proposals_.erase({e.key, e.ts});
        entries_.pop_front();
    }
    floor_ = up_to + 1;
    return count;
}

std::size_t LogManager::compact_to_durable() {
    if (!durable_) return 0;
    LogIndex target = *durable_;
    if (!open_.empty() && *open_.begin() <= target) {
        if (*open_.begin() == 0) return 0;
        target = *open_.begin() - 1;
    }
    if (target < floor_) return 0;
    return compact(target);
}

std::vector<LogEntry> LogManager::uncommitted_entries() const {
    std::vector<LogEntry> out;
    out.reserve(open_.size());
    for (LogIndex index : open_) out.push_back(entries_[index - floor_]);
    return out;
}

const LogEntry* LogManager::find(LogIndex index) const {
    if (index < floor_ || index >= next_index()) return nullptr;
    return &entries_[index - floor_];
}

}  // namespace nicrep
