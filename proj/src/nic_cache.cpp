#include "nicrep/nic_cache.hpp"

#include <string>

namespace nicrep {

void CacheConfig::validate() const {
    if (capacity == 0) throw ConfigError("cache capacity must be >= 1 entry");
    if (batch_size == 0) throw ConfigError("batch size must be >= 1");
}

NicCache::NicCache(CacheConfig config) : config_(config) {
    config_.validate();
}

void NicCache::touch(Slot& slot, SimTime now) {
    slot.entry.last_touch = now;
    lru_.splice(lru_.begin(), lru_, slot.lru);
}

NicCache::Slot& NicCache::upsert(Key key, SimTime now) {
    auto [it, inserted] = index_.try_emplace(key);
    Slot& slot = it->second;
    if (inserted) {
        lru_.push_front(key);
        slot.lru = lru_.begin();
        slot.entry.key = key;
        slot.entry.last_touch = now;
    } else {
        touch(slot, now);
    }
    return slot;
}

CacheEffects NicCache::cache_commit(Key key, Value value, Timestamp ts, LogIndex log_index, SimTime now) {
    CacheEffects fx;
    Slot& slot = upsert(key, now);
    if (!slot.entry.durable) pinned_.erase(slot.entry.latest_index);
    pinned_.emplace(log_index, key);
    slot.entry.value = value;
    slot.entry.ts = ts;
    slot.entry.durable = false;
    slot.entry.latest_index = log_index;

    buffer_.push_back(BatchEntry{log_index, key, std::move(value), ts});
    if (buffer_.size() >= config_.batch_size) {
        fx = flush();
    } else if (config_.flush_timer_ns > 0 && !timer_armed_) {
        timer_armed_ = true;
        fx.flush_timer = TimerAction::Arm;
    }
    fx.evicted = evict_if_needed();
    return fx;
}

std::optional<CacheHit> NicCache::cache_lookup(Key key, SimTime now) {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    touch(it->second, now);
    return CacheHit{it->second.entry.value, it->second.entry.ts};
}

bool NicCache::cache_fill(Key key, Value value, Timestamp ts, SimTime now, CacheEffects* effects) {
    if (auto it = index_.find(key); it != index_.end()) {
        if (it->second.entry.ts >= ts) {
            touch(it->second, now);
            return false;
        }
        if (!it->second.entry.durable) return false;  // unreachable for a newer ts; keep the pin
    }
    Slot& slot = upsert(key, now);
    slot.entry.value = std::move(value);
    slot.entry.ts = ts;
    slot.entry.durable = true;
    auto evicted = evict_if_needed();
    if (effects) effects->evicted = std::move(evicted);
    return true;
}

CacheEffects NicCache::mark_durable(LogIndex up_to) {
    if (durable_mark_ && up_to < *durable_mark_)
        throw ProtocolError("durable ack regressed from " + std::to_string(*durable_mark_) + " to " +
                            std::to_string(up_to));
    CacheEffects fx;
    if (durable_mark_ == up_to) return fx;
    durable_mark_ = up_to;
    auto end = pinned_.upper_bound(up_to);
    for (auto it = pinned_.begin(); it != end; ++it) index_.at(it->second).entry.durable = true;
    pinned_.erase(pinned_.begin(), end);
    fx.evicted = evict_if_needed();
    return fx;
}

CacheEffects NicCache::flush() {
    CacheEffects fx;
    if (timer_armed_) {
        timer_armed_ = false;
        fx.flush_timer = TimerAction::Cancel;
    }
    if (buffer_.empty()) return fx;
    fx.batch = WriteBatch{std::move(buffer_)};
    buffer_.clear();
    return fx;
}

std::vector<Key> NicCache::evict_if_needed() {
    std::vector<Key> evicted;
    if (index_.size() <= config_.capacity) return evicted;
    auto it = lru_.end();
    while (index_.size() > config_.capacity && it != lru_.begin()) {
        --it;
        auto slot = index_.find(*it);
        if (!slot->second.entry.durable) continue;
        evicted.push_back(*it);
        index_.erase(slot);
        it = lru_.erase(it);
        ++eviction_count_;
    }
    if (index_.size() > config_.capacity) ++overflow_count_;
    return evicted;
}

const CacheEntry* NicCache::peek(Key key) const {
    auto it = index_.find(key);
    return it == index_.end() ? nullptr : &it->second.entry;
}

}  // namespace nicrep
