#include "nicrep/simnet.hpp"

#include <algorithm>
#include <string>

namespace nicrep {

namespace {

struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
        return std::tie(a.fire_time, a.seq) > std::tie(b.fire_time, b.seq);
    }
};

}  // namespace

LinkModel LinkModel::network(SimTime one_way_ns, SimTime jitter_ns, std::size_t header_bytes, bool fifo) {
    LinkModel m;
    m.kind = LinkKind::Network;
    m.one_way_latency_ns = one_way_ns;
    m.jitter_ns = jitter_ns;
    m.header_bytes = header_bytes;
    m.fifo = fifo;
    return m;
}

LinkModel LinkModel::pcie(SimTime round_trip_ns, std::size_t header_bytes) {
    LinkModel m;
    m.kind = LinkKind::Pcie;
    m.round_trip_ns = round_trip_ns;
    m.header_bytes = header_bytes;
    m.fifo = true;
    return m;
}

SimTime LinkModel::base_latency(Side from) const {
    if (kind == LinkKind::Network) return one_way_latency_ns;
    const SimTime down = round_trip_ns / 2;
    return from == Side::Nic ? down : round_trip_ns - down;
}

void LinkModel::validate() const {
    if (kind == LinkKind::Network && one_way_latency_ns == 0)
        throw ConfigError("network latency must be > 0 ns");
    if (kind == LinkKind::Pcie && round_trip_ns < 2) throw ConfigError("PCIe round trip must be >= 2 ns");
}

SimNet::SimNet(std::size_t replica_count, LinkModel network, LinkModel pcie, SimOptions options)
    : replica_count_(replica_count),
      network_(network),
      pcie_(pcie),
      options_(options),
      rng_(options.seed),
      crashed_(replica_count, false),
      crash_scheduled_(replica_count, false) {
    if (replica_count_ == 0) throw ConfigError("simulation needs at least one replica");
    if (network_.kind != LinkKind::Network || pcie_.kind != LinkKind::Pcie)
        throw ConfigError("link models passed in the wrong slots");
    network_.validate();
    pcie_.validate();
}

void SimNet::push(SimTime at, EventPayload payload) {
    queue_.push_back(SimEvent{at, next_seq_++, std::move(payload)});
    std::push_heap(queue_.begin(), queue_.end(), Later{});
}

void SimNet::send(LinkKind link, Endpoint from, Endpoint to, Message message, std::size_t payload_bytes) {
    if (from.replica >= replica_count_ || to.replica >= replica_count_)
        throw SimError("send: unknown endpoint");
    const LinkModel& model = link == LinkKind::Network ? network_ : pcie_;
    if (link == LinkKind::Network) {
        if (from.side != Side::Nic || to.side != Side::Nic || from.replica == to.replica)
            throw SimError("send: network links join NICs of distinct replicas");
    } else if (from.replica != to.replica || from.side == to.side) {
        throw SimError("send: PCIe links join one replica's NIC and host");
    }

    SimTime latency = model.base_latency(from.side);
    if (model.jitter_ns > 0) latency += std::uniform_int_distribution<SimTime>(0, model.jitter_ns)(rng_);
    SimTime at = now_ + options_.processing_delay_ns + latency;
    if (model.fifo) {
        SimTime& last = last_delivery_[{link, from, to}];
        at = std::max(at, last);
        last = at;
    }

    LinkCounters& c = counters_mut(link);
    ++c.sent;
    c.payload_bytes += payload_bytes;
    c.bytes += payload_bytes + model.header_bytes;
    push(at, Delivery{link, from, to, std::move(message), payload_bytes});
}

TimerId SimNet::set_timer(ReplicaId target, SimTime delay, TimerToken token) {
    if (target >= replica_count_) throw SimError("set_timer: unknown replica");
    if (delay == 0) throw SimError("set_timer: delay must be > 0");
    const TimerId id = next_timer_++;
    live_timers_.insert(id);
    push(now_ + delay, TimerFire{target, id, token});
    return id;
}

void SimNet::cancel_timer(TimerId id) {
    live_timers_.erase(id);
}

void SimNet::schedule_client(SessionId session, ReplicaId replica, SimTime at) {
    if (replica >= replica_count_) throw SimError("schedule_client: unknown replica");
    push(std::max(at, now_), ClientArrival{session, replica});
}

void SimNet::crash(ReplicaId replica, SimTime at) {
    if (replica >= replica_count_) throw SimError("crash: unknown replica");
    if (at < now_) throw SimError("crash: time " + std::to_string(at) + " is in the past");
    if (crash_scheduled_[replica]) return;
    crash_scheduled_[replica] = true;
    push(at, CrashNotice{replica});
}

RunReport SimNet::run(const Handler& handler, std::optional<SimTime> until) {
    while (!queue_.empty()) {
        if (until && queue_.front().fire_time > *until) {
            report_.quiescent = false;
            report_.final_time = now_;
            return report_;
        }
        std::pop_heap(queue_.begin(), queue_.end(), Later{});
        SimEvent ev = std::move(queue_.back());
        queue_.pop_back();
        now_ = ev.fire_time;

        bool dispatch = true;
        if (auto* d = std::get_if<Delivery>(&ev.payload)) {
            LinkCounters& c = counters_mut(d->link);
            if (crashed_[d->to.replica]) {
                ++c.dropped;
                dispatch = false;
            } else {
                ++c.delivered;
                ++report_.deliveries;
            }
        } else if (auto* t = std::get_if<TimerFire>(&ev.payload)) {
            dispatch = live_timers_.erase(t->id) > 0 && !crashed_[t->target];
            if (dispatch) ++report_.timers_fired;
        } else if (auto* a = std::get_if<ClientArrival>(&ev.payload)) {
            dispatch = !crashed_[a->replica];
            if (dispatch) ++report_.client_arrivals;
        } else if (auto* c = std::get_if<CrashNotice>(&ev.payload)) {
            crashed_[c->replica] = true;
            ++report_.crashes;
        }
        if (!dispatch) continue;

        if (++report_.events_dispatched > options_.event_cap)
            throw SimError("event cap of " + std::to_string(options_.event_cap) + " exceeded (livelock?)");
        handler(ev);
    }
    report_.quiescent = true;
    report_.final_time = now_;
    return report_;
}

}  // namespace nicrep
