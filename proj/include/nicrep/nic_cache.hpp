#pragma once

#include <cstddef>
#include <list>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "nicrep/messages.hpp"
#include "nicrep/types.hpp"

namespace nicrep {

struct CacheConfig {
    std::size_t capacity = 65536;  // entries
    std::size_t batch_size = 16;   // write-buffer entries per PCIe batch
    SimTime flush_timer_ns = 10'000;  // 0 disables the timer

    void validate() const;
};

struct CacheEntry {
    Key key = 0;
    Value value;
    Timestamp ts;
    bool durable = true;
    SimTime last_touch = 0;
    LogIndex latest_index = 0;  // commit-record index of the newest write; meaningful when !durable
};

enum class TimerAction { None, Arm, Cancel };

/// Side effects of a cache operation the owner has to carry out.
struct CacheEffects {
    std::optional<WriteBatch> batch;  // send to host over PCIe
    TimerAction flush_timer = TimerAction::None;
    std::vector<Key> evicted;
};

struct CacheHit {
    Value value;
    Timestamp ts;
};

/// SmartNIC-resident cache with an LRU over unpinned entries and a write-back
/// buffer to the host. Entries that are not yet durable at the host are pinned.
class NicCache {
public:
    explicit NicCache(CacheConfig config);

    /// Inserts a committed write (pinned) and appends it to the write buffer.
    CacheEffects cache_commit(Key key, Value value, Timestamp ts, LogIndex log_index, SimTime now);

    std::optional<CacheHit> cache_lookup(Key key, SimTime now);

    /// Inserts a durable entry fetched from the host. Discarded (returns false)
    /// if the cache already holds a newer timestamp for the key.
    bool cache_fill(Key key, Value value, Timestamp ts, SimTime now, CacheEffects* effects = nullptr);

    /// Unpins entries whose newest write has index <= up_to. Throws ProtocolError on regression.
    CacheEffects mark_durable(LogIndex up_to);

    /// Drains the write buffer into one batch (empty optional if nothing buffered).
    CacheEffects flush();

    std::vector<Key> evict_if_needed();

    /// Read-only inspection; does not touch LRU state.
    const CacheEntry* peek(Key key) const;

    std::size_t size() const { return index_.size(); }
    std::size_t pinned() const { return pinned_.size(); }
    std::size_t buffered() const { return buffer_.size(); }
    bool flush_timer_armed() const { return timer_armed_; }
    std::size_t overflow_count() const { return overflow_count_; }
    std::size_t eviction_count() const { return eviction_count_; }
    std::optional<LogIndex> durable_mark() const { return durable_mark_; }
    const CacheConfig& config() const { return config_; }

private:
    struct Slot {
        CacheEntry entry;
        std::list<Key>::iterator lru;
    };

    void touch(Slot& slot, SimTime now);
    Slot& upsert(Key key, SimTime now);

    CacheConfig config_;
    std::unordered_map<Key, Slot> index_;
    std::list<Key> lru_;  // front = most recently touched
    std::vector<BatchEntry> buffer_;
    bool timer_armed_ = false;
    std::map<LogIndex, Key> pinned_;  // latest write index -> key, for non-durable entries
    std::size_t overflow_count_ = 0;
    std::size_t eviction_count_ = 0;
    std::optional<LogIndex> durable_mark_;
};

}  // namespace nicrep
