#include "nicrep/replica.hpp"

#include <algorithm>
#include <sstream>

namespace nicrep {

Replica::Replica(ReplicaId self, std::shared_ptr<const Overlay> overlay, ReplicaConfig config)
    : self_(self),
      overlay_(std::move(overlay)),
      config_(config),
      cache_(config.cache),
      suspected_(overlay_ ? overlay_->node_count() : 0, false) {
    if (!overlay_) throw ConfigError("replica needs an overlay");
    if (self_ >= overlay_->node_count()) throw ConfigError("replica id outside the overlay");
    if (config_.replay_timeout_ns == 0) throw ConfigError("replay timeout must be > 0");
}

std::vector<ReplicaId> Replica::live_targets() const {
    std::vector<ReplicaId> out;
    for (ReplicaId r : overlay_->multicast_targets(self_))
        if (!suspected_[r]) out.push_back(r);
    return out;
}

void Replica::absorb(CacheEffects&& cfx, Effects& fx) const {
    if (cfx.batch) fx.to_host.emplace_back(std::move(*cfx.batch));
    if (cfx.flush_timer == TimerAction::Arm)
        fx.timers.push_back({TimerAction::Arm, FlushToken{}, config_.cache.flush_timer_ns});
    else if (cfx.flush_timer == TimerAction::Cancel)
        fx.timers.push_back({TimerAction::Cancel, FlushToken{}, 0});
    fx.evicted.insert(fx.evicted.end(), cfx.evicted.begin(), cfx.evicted.end());
}

void Replica::arm_replay(Key key, Timestamp ts, Effects& fx) const {
    fx.timers.push_back({TimerAction::Arm, ReplayToken{key, ts}, config_.replay_timeout_ns});
}

void Replica::stage(Key key, KeyRecord& rec, Value value, Timestamp ts, ReplicaId coordinator, Effects& fx) {
    if (rec.pending) {
        // Our own write was overtaken by a higher timestamp before it committed.
        if (rec.pending->client)
            fx.replies.push_back({*rec.pending->client, ReplyKind::WriteSuperseded, std::nullopt, ReadPath::None});
        ++stats_.superseded;
        rec.pending.reset();
    }
    if (rec.staged) fx.timers.push_back({TimerAction::Cancel, ReplayToken{key, rec.staged->ts}, 0});
    const LogIndex index = log_.append(key, value, ts);
    rec.staged = StagedWrite{std::move(value), ts, coordinator, index};
}

void Replica::apply_commit(Key key, KeyRecord& rec, SimTime now, Effects& fx) {
    StagedWrite staged = std::move(*rec.staged);
    rec.staged.reset();
    const auto commit_index = log_.mark_committed(key, staged.ts);
    if (!commit_index) {
        std::ostringstream os;
        os << "replica " << self_ << " applied key " << key << " ts " << staged.ts << " twice";
        throw ProtocolError(os.str());
    }
    rec.committed_ts = staged.ts;
    fx.timers.push_back({TimerAction::Cancel, ReplayToken{key, staged.ts}, 0});
    for (const ClientRef& reader : rec.blocked)
        fx.replies.push_back({reader, ReplyKind::ReadValue, staged.value, ReadPath::Blocked});
    rec.blocked.clear();
    absorb(cache_.cache_commit(key, std::move(staged.value), staged.ts, *commit_index, now), fx);
    ++stats_.commits_applied;
}

void Replica::finish_write(Key key, KeyRecord& rec, SimTime now, Effects& fx) {
    const Timestamp ts = rec.pending->ts;
    const std::optional<ClientRef> client = rec.pending->client;
    rec.pending.reset();
    if (!rec.staged || rec.staged->ts != ts) throw ProtocolError("pending write without matching staged write");
    apply_commit(key, rec, now, fx);
    for (ReplicaId to : live_targets()) fx.messages.push_back({to, Commit{key, ts}});
    if (client) fx.replies.push_back({*client, ReplyKind::WriteOk, std::nullopt, ReadPath::None});
}

void Replica::multicast_inv(Key key, const KeyRecord& rec, const std::vector<ReplicaId>& targets,
                            Effects& fx) const {
    for (ReplicaId to : targets)
        fx.messages.push_back({to, Inv{key, rec.staged->value, rec.staged->ts, rec.staged->log_index}});
}

Effects Replica::handle_client_write(Key key, Value value, ClientRef client, SimTime now) {
    Effects fx;
    if (crashed_) return fx;
    if (value.size() > config_.max_value_bytes) {
        fx.replies.push_back({client, ReplyKind::WriteError, std::nullopt, ReadPath::None});
        return fx;
    }
    KeyRecord& rec = records_[key];
    const std::uint64_t known = std::max(rec.committed_ts.version, rec.staged ? rec.staged->ts.version : 0);
    const Timestamp ts{known + 1, self_};

    stage(key, rec, value, ts, self_, fx);
    const std::vector<ReplicaId> targets = live_targets();
    rec.pending = PendingWrite{key, std::move(value), ts, {targets.begin(), targets.end()}, client, now};
    ++stats_.writes_coordinated;

    if (targets.empty()) {
        finish_write(key, rec, now, fx);
        return fx;
    }
    multicast_inv(key, rec, targets, fx);
    arm_replay(key, ts, fx);
    return fx;
}

ReadOutcome Replica::handle_client_read(Key key, ClientRef client, SimTime now) {
    if (crashed_) return Blocked{};
    if (auto it = records_.find(key); it != records_.end() && it->second.staged) {
        it->second.blocked.push_back(client);
        ++stats_.blocked_reads;
        return Blocked{};
    }
    if (auto hit = cache_.cache_lookup(key, now)) return ServeLocal{std::move(hit->value), hit->ts};
    return CacheMiss{};
}

Effects Replica::on_inv(const Inv& msg, ReplicaId from, SimTime) {
    Effects fx;
    if (crashed_) return fx;
    KeyRecord& rec = records_[msg.key];
    const Timestamp known = rec.staged ? std::max(rec.committed_ts, rec.staged->ts) : rec.committed_ts;
    if (msg.ts > known) {
        stage(msg.key, rec, msg.value, msg.ts, from, fx);
        arm_replay(msg.key, msg.ts, fx);
    } else {
        ++stats_.stale_invs;
    }
    fx.messages.push_back({from, Ack{msg.key, msg.ts, self_}});
    return fx;
}

Effects Replica::on_ack(const Ack& msg, SimTime now) {
    Effects fx;
    if (crashed_) return fx;
    auto it = records_.find(msg.key);
    if (it == records_.end() || !it->second.pending || it->second.pending->ts != msg.ts ||
        it->second.pending->acks_needed.erase(msg.from) == 0) {
        ++stats_.stale_acks;
        return fx;
    }
    if (it->second.pending->acks_needed.empty()) finish_write(msg.key, it->second, now, fx);
    return fx;
}

Effects Replica::on_commit(const Commit& msg, SimTime now) {
    Effects fx;
    if (crashed_) return fx;
    auto it = records_.find(msg.key);
    if (it == records_.end() || !it->second.staged || it->second.staged->ts != msg.ts) return fx;
    KeyRecord& rec = it->second;
    if (rec.pending) {
        // Another replica finished replaying the write we were coordinating.
        if (rec.pending->client)
            fx.replies.push_back({*rec.pending->client, ReplyKind::WriteOk, std::nullopt, ReadPath::None});
        rec.pending.reset();
    }
    apply_commit(msg.key, rec, now, fx);
    return fx;
}

Effects Replica::on_replay_timeout(Key key, Timestamp ts, SimTime now, std::span<const ReplicaId> live_peers) {
    Effects fx;
    if (crashed_) return fx;
    for (ReplicaId r = 0; r < suspected_.size(); ++r)
        if (r != self_ && std::find(live_peers.begin(), live_peers.end(), r) == live_peers.end())
            suspected_[r] = true;

    auto it = records_.find(key);
    if (it == records_.end() || !it->second.staged || it->second.staged->ts != ts) return fx;
    KeyRecord& rec = it->second;
    ++stats_.replays;

    const std::vector<ReplicaId> targets = live_targets();
    std::optional<ClientRef> client = rec.pending ? rec.pending->client : std::nullopt;
    rec.pending = PendingWrite{key, rec.staged->value, ts, {targets.begin(), targets.end()}, client, now};
    if (targets.empty()) {
        finish_write(key, rec, now, fx);
        return fx;
    }
    multicast_inv(key, rec, targets, fx);
    arm_replay(key, ts, fx);
    return fx;
}

Effects Replica::on_fetch_complete(const FetchResponse& response, SimTime now) {
    Effects fx;
    if (crashed_) return fx;
    if (response.result) {
        if (response.result->ts >= committed_ts(response.key)) {
            CacheEffects cfx;
            cache_.cache_fill(response.key, response.result->value, response.result->ts, now, &cfx);
            absorb(std::move(cfx), fx);
        }
        fx.replies.push_back({response.client, ReplyKind::ReadValue, response.result->value, ReadPath::Slow});
    } else {
        fx.replies.push_back({response.client, ReplyKind::ReadNotFound, std::nullopt, ReadPath::Slow});
    }
    return fx;
}

Effects Replica::on_durable_ack(const DurableAck& ack) {
    Effects fx;
    if (crashed_) return fx;
    if (ack.rejected) throw ProtocolError("host rejected a write batch (out-of-order PCIe delivery)");
    absorb(cache_.mark_durable(ack.last_applied_log_index), fx);
    log_.set_durable_mark(ack.last_applied_log_index);
    stats_.log_entries_compacted += log_.compact_to_durable();
    return fx;
}

Effects Replica::on_flush_timer() {
    Effects fx;
    if (crashed_) return fx;
    absorb(cache_.flush(), fx);
    return fx;
}

Effects Replica::drain_write_buffer() {
    return on_flush_timer();
}

void Replica::prewarm(Key key, Value value, Timestamp ts) {
    cache_.cache_fill(key, std::move(value), ts, 0);
}

KeyState Replica::key_state(Key key) const {
    const KeyRecord* rec = record(key);
    if (!rec) return KeyState::Valid;
    if (rec->pending) return KeyState::WritePending;
    if (rec->staged) return KeyState::Invalid;
    return KeyState::Valid;
}

const KeyRecord* Replica::record(Key key) const {
    auto it = records_.find(key);
    return it == records_.end() ? nullptr : &it->second;
}

Timestamp Replica::committed_ts(Key key) const {
    const KeyRecord* rec = record(key);
    return rec ? rec->committed_ts : Timestamp{};
}

}  // namespace nicrep
