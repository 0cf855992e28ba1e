#include "nicrep/cluster.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "nicrep/detail/overloaded.hpp"

namespace nicrep {

SimTime ClusterConfig::effective_replay_timeout() const {
    return replay_timeout_ns != 0 ? replay_timeout_ns : 8 * net_latency_ns;
}

void ClusterConfig::validate() const {
    cache.validate();
    LinkModel::network(net_latency_ns, net_jitter_ns, net_header_bytes, net_fifo).validate();
    LinkModel::pcie(pcie_rtt_ns, pcie_header_bytes).validate();
    if (effective_replay_timeout() == 0) throw ConfigError("replay timeout must be > 0");
    if (max_value_bytes == 0) throw ConfigError("max value size must be >= 1 byte");
}

CrashSpec parse_crash_spec(std::string_view text) {
    const auto at = text.find('@');
    auto number = [&](std::string_view part, auto& out) {
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
        if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size())
            throw ConfigError("bad crash spec '" + std::string(text) + "' (expected replica@time_ns)");
    };
    if (at == std::string_view::npos) throw ConfigError("bad crash spec '" + std::string(text) + "' (missing '@')");
    CrashSpec spec;
    number(text.substr(0, at), spec.replica);
    number(text.substr(at + 1), spec.at);
    return spec;
}

namespace {

struct Session {
    SessionTrace trace;
    std::size_t next = 0;                 // index of the op to issue next
    std::optional<std::size_t> outstanding;  // position in history.events
    std::optional<std::size_t> outstanding_op;
};

}  // namespace

struct Cluster::Impl {
    WorkloadConfig workload;
    ClusterConfig config;
    std::vector<CrashSpec> crash_schedule;
    WireSizes sizes;

    std::shared_ptr<const Overlay> overlay;
    std::shared_ptr<const InitialPopulation> population;
    std::vector<std::unique_ptr<Replica>> replicas;
    std::vector<std::unique_ptr<DatastoreInterface>> hosts;
    std::unique_ptr<SimNet> net;

    std::vector<Session> sessions;
    std::map<std::pair<ReplicaId, TimerToken>, TimerId> timers;
    std::vector<ReplicaMetrics> metrics;
    History history;
    std::uint64_t history_seq = 0;
    std::set<Key> touched;
    std::vector<ReplicaId> crashed;

    EventHook after_event;
    CompactionHook on_compaction;
    const Cluster* owner = nullptr;
    bool ran = false;

    Impl(WorkloadConfig w, ClusterConfig c, std::vector<CrashSpec> crashes)
        : workload(std::move(w)), config(std::move(c)), crash_schedule(std::move(crashes)) {
        workload.validate();
        config.validate();
        sizes.key_bytes = workload.key_size;
        const std::size_t n = workload.replicas;
        overlay = std::make_shared<const Overlay>(make_overlay(config.overlay, n));
        if (!overlay->complete())
            throw ConfigError("the replication engine needs every replica to reach every other one; overlay '" +
                              std::string(to_string(config.overlay)) + "' is not complete");
        for (const CrashSpec& c : crash_schedule)
            if (c.replica >= n) throw ConfigError("crash spec names replica " + std::to_string(c.replica) +
                                                  " but there are only " + std::to_string(n));

        population = std::make_shared<const InitialPopulation>(workload.key_count, workload.value_size, workload.seed);
        ReplicaConfig rc{config.cache, config.effective_replay_timeout(), config.max_value_bytes};
        for (ReplicaId r = 0; r < n; ++r) {
            replicas.push_back(std::make_unique<Replica>(r, overlay, rc));
            hosts.push_back(std::make_unique<DatastoreInterface>(make_backend(config.backend, population)));
            replicas.back()->log().set_compaction_observer([this, r](std::span<const LogEntry> removed, LogIndex mark) {
                if (on_compaction) on_compaction(r, removed, mark);
            });
        }
        if (config.prewarm_cache) {
            const std::size_t warm = std::min(config.cache.capacity, workload.key_count);
            for (auto& rep : replicas)
                for (Key k = 0; k < warm; ++k)
                    rep->prewarm(k, Value(*population->value(k)), Timestamp{});
        }
        net = std::make_unique<SimNet>(
            n, LinkModel::network(config.net_latency_ns, config.net_jitter_ns, config.net_header_bytes, config.net_fifo),
            LinkModel::pcie(config.pcie_rtt_ns, config.pcie_header_bytes),
            SimOptions{workload.seed, config.processing_delay_ns, config.event_cap});
        metrics.resize(n);
    }

    // --- outbound traffic -------------------------------------------------

    void send_network(ReplicaId from, ReplicaId to, ProtocolMessage msg) {
        const std::size_t payload = sizes.of(msg);
        ReplicaMetrics& m = metrics[from];
        ++m.network_messages;
        m.network_bytes += payload + config.net_header_bytes;
        net->send(LinkKind::Network, {from, Side::Nic}, {to, Side::Nic}, Message{std::move(msg)}, payload);
    }

    void send_pcie(ReplicaId r, Side from, PcieMessage msg) {
        const std::size_t payload = sizes.of(msg);
        ReplicaMetrics& m = metrics[r];
        ++m.pcie_messages;
        m.pcie_payload_bytes += payload;
        m.pcie_bytes += payload + config.pcie_header_bytes;
        std::visit(detail::overloaded{
                       [&](const WriteBatch& b) {
                           ++m.pcie_batches;
                           m.pcie_batch_entries += b.entries.size();
                       },
                       [&](const DurableAck&) { ++m.pcie_durable_acks; },
                       [&](const FetchRequest&) { ++m.pcie_fetch_messages; },
                       [&](const FetchResponse&) { ++m.pcie_fetch_messages; },
                   },
                   msg);
        const Side to = from == Side::Nic ? Side::Host : Side::Nic;
        net->send(LinkKind::Pcie, {r, from}, {r, to}, Message{std::move(msg)}, payload);
    }

    void apply(ReplicaId r, Effects&& fx) {
        for (Outbound& out : fx.messages) send_network(r, out.to, std::move(out.message));
        for (PcieMessage& msg : fx.to_host) send_pcie(r, Side::Nic, std::move(msg));
        for (TimerRequest& t : fx.timers) {
            auto key = std::make_pair(r, t.token);
            if (auto it = timers.find(key); it != timers.end()) {
                net->cancel_timer(it->second);
                timers.erase(it);
            }
            if (t.action == TimerAction::Arm) timers.emplace(key, net->set_timer(r, t.delay, t.token));
        }
        for (ClientReply& reply : fx.replies) complete(r, reply);
    }

    // --- clients ------------------------------------------------------------

    HistoryPoint point() { return {net->now(), history_seq++}; }

    void schedule_next(SessionId s) {
        Session& session = sessions[s];
        if (session.next >= session.trace.ops.size()) return;
        const SimTime at = std::max(session.trace.ops[session.next].planned_at, net->now());
        net->schedule_client(s, session.trace.home, at);
    }

    void arrive(SessionId s, ReplicaId r) {
        Session& session = sessions.at(s);
        if (session.outstanding || session.next >= session.trace.ops.size())
            throw ProtocolError("client arrival for a session with nothing to issue");
        const std::size_t op_index = session.next++;
        const ClientOp& op = session.trace.ops[op_index];
        HistoryEvent ev;
        ev.session = s;
        ev.request = op.request;
        ev.op = op.is_write ? OpKind::Write : OpKind::Read;
        ev.key = op.key;
        if (op.is_write) ev.value = op.value;
        ev.invoke = point();
        session.outstanding = history.events.size();
        session.outstanding_op = op_index;
        history.events.push_back(std::move(ev));

        Replica& rep = *replicas[r];
        const ClientRef client{s, op.request};
        if (op.is_write) {
            apply(r, rep.handle_client_write(op.key, op.value, client, net->now()));
            return;
        }
        ReadOutcome outcome = rep.handle_client_read(op.key, client, net->now());
        std::visit(detail::overloaded{
                       [&](ServeLocal& hit) {
                           ClientReply reply{client, ReplyKind::ReadValue, std::move(hit.value), ReadPath::Fast};
                           complete(r, reply);
                       },
                       [&](Blocked&) {},
                       [&](CacheMiss&) { send_pcie(r, Side::Nic, FetchRequest{op.key, client}); },
                   },
                   outcome);
    }

    void complete(ReplicaId r, ClientReply& reply) {
        Session& session = sessions.at(reply.client.session);
        if (!session.outstanding || session.trace.ops[*session.outstanding_op].request != reply.client.request) {
            std::ostringstream os;
            os << "replica " << r << " answered s" << reply.client.session << "/r" << reply.client.request
               << " which is not outstanding";
            throw ProtocolError(os.str());
        }
        HistoryEvent& ev = history.events[*session.outstanding];
        ev.response = point();
        const SimTime latency = ev.response->time - ev.invoke.time;
        ReplicaMetrics& m = metrics[r];
        switch (reply.kind) {
            case ReplyKind::WriteOk:
                ev.result = OpResult::Ok;
                ++m.writes_ok;
                m.write.add(latency);
                break;
            case ReplyKind::WriteSuperseded:
                ev.result = OpResult::Superseded;
                ++m.writes_superseded;
                break;
            case ReplyKind::WriteError:
                ev.result = OpResult::Error;
                ++m.writes_error;
                break;
            case ReplyKind::ReadValue:
            case ReplyKind::ReadNotFound:
                ev.result = reply.kind == ReplyKind::ReadValue ? OpResult::Value : OpResult::NotFound;
                ev.value = std::move(reply.value);
                ++m.reads_completed;
                switch (reply.path) {
                    case ReadPath::Fast: ++m.fast_reads; m.read_fast.add(latency); break;
                    case ReadPath::Slow: ++m.slow_reads; m.read_slow.add(latency); break;
                    case ReadPath::Blocked: ++m.blocked_reads; m.read_blocked.add(latency); break;
                    case ReadPath::None: throw ProtocolError("read reply without a path");
                }
                break;
        }
        session.outstanding.reset();
        session.outstanding_op.reset();
        schedule_next(reply.client.session);
    }

    // --- event dispatch -------------------------------------------------------

    std::vector<ReplicaId> live_peers(ReplicaId self) const {
        std::vector<ReplicaId> out;
        for (ReplicaId p = 0; p < replicas.size(); ++p)
            if (p != self && !net->crashed(p)) out.push_back(p);
        return out;
    }

    void on_network(const Delivery& d) {
        const ReplicaId r = d.to.replica;
        Replica& rep = *replicas[r];
        ReplicaMetrics& m = metrics[r];
        ++m.handler_network;
        ++m.handler_protocol;
        const SimTime now = net->now();
        const auto& msg = std::get<ProtocolMessage>(d.message);
        apply(r, std::visit(detail::overloaded{
                                [&](const Inv& inv) { return rep.on_inv(inv, d.from.replica, now); },
                                [&](const Ack& ack) { return rep.on_ack(ack, now); },
                                [&](const Commit& c) { return rep.on_commit(c, now); },
                            },
                            msg));
    }

    void on_pcie(const Delivery& d) {
        const ReplicaId r = d.to.replica;
        ++metrics[r].handler_rest;
        const auto& msg = std::get<PcieMessage>(d.message);
        if (d.to.side == Side::Host) {
            DatastoreInterface& host = *hosts[r];
            std::visit(detail::overloaded{
                           [&](const WriteBatch& b) { send_pcie(r, Side::Host, host.apply_batch(b)); },
                           [&](const FetchRequest& f) {
                               send_pcie(r, Side::Host, FetchResponse{f.key, f.client, host.fetch(f.key)});
                           },
                           [&](const auto&) { throw ProtocolError("host received a NIC-bound PCIe message"); },
                       },
                       msg);
            return;
        }
        Replica& rep = *replicas[r];
        std::visit(detail::overloaded{
                       [&](const DurableAck& a) { apply(r, rep.on_durable_ack(a)); },
                       [&](const FetchResponse& f) { apply(r, rep.on_fetch_complete(f, net->now())); },
                       [&](const auto&) { throw ProtocolError("NIC received a host-bound PCIe message"); },
                   },
                   msg);
    }

    void on_timer(const TimerFire& t) {
        auto key = std::make_pair(t.target, t.token);
        if (auto it = timers.find(key); it != timers.end() && it->second == t.id) timers.erase(it);
        Replica& rep = *replicas[t.target];
        std::visit(detail::overloaded{
                       [&](const ReplayToken& tok) {
                           ++metrics[t.target].handler_protocol;
                           const auto peers = live_peers(t.target);
                           apply(t.target, rep.on_replay_timeout(tok.key, tok.ts, net->now(), peers));
                       },
                       [&](const FlushToken&) {
                           ++metrics[t.target].handler_rest;
                           apply(t.target, rep.on_flush_timer());
                       },
                   },
                   t.token);
    }

    void dispatch(SimEvent& ev) {
        std::visit(detail::overloaded{
                       [&](const Delivery& d) { d.link == LinkKind::Network ? on_network(d) : on_pcie(d); },
                       [&](const TimerFire& t) { on_timer(t); },
                       [&](const ClientArrival& c) {
                           ++metrics[c.replica].handler_rest;
                           ++metrics[c.replica].handler_protocol;
                           arrive(c.session, c.replica);
                       },
                       [&](const CrashNotice& c) {
                           ++metrics[c.replica].handler_rest;
                           replicas[c.replica]->crash();
                           crashed.push_back(c.replica);
                       },
                   },
                   ev.payload);
        if (after_event) after_event(*owner, ev);
    }

    void run_to_quiescence() {
        net->run([this](SimEvent& ev) { dispatch(ev); });
    }

    // Flushes partial write buffers until every committed write is durable.
    void drain() {
        for (;;) {
            bool sent = false;
            for (ReplicaId r = 0; r < replicas.size(); ++r) {
                if (replicas[r]->crashed() || replicas[r]->cache().buffered() == 0) continue;
                apply(r, replicas[r]->drain_write_buffer());
                sent = true;
            }
            if (!sent) return;
            run_to_quiescence();
        }
    }

    void start_final_reads() {
        if (touched.empty()) return;
        for (ReplicaId r = 0; r < replicas.size(); ++r) {
            if (replicas[r]->crashed()) continue;
            Session audit;
            audit.trace.session = static_cast<SessionId>(sessions.size());
            audit.trace.home = r;
            for (Key k : touched) {
                ClientOp op;
                op.request = audit.trace.ops.size();
                op.key = k;
                op.planned_at = net->now();
                audit.trace.ops.push_back(std::move(op));
            }
            sessions.push_back(std::move(audit));
            schedule_next(static_cast<SessionId>(sessions.size() - 1));
        }
    }

    ExperimentResult run() {
        if (ran) throw Error("a cluster can only run once");
        ran = true;

        for (SessionTrace& t : generate_trace(workload)) {
            for (const ClientOp& op : t.ops) touched.insert(op.key);
            Session session;
            session.trace = std::move(t);
            sessions.push_back(std::move(session));
        }
        for (Key k : touched) {
            const auto v = population->value(k);
            history.initial.emplace(k, v ? std::optional<Value>(Value(*v)) : std::nullopt);
        }
        for (const CrashSpec& c : crash_schedule) net->crash(c.replica, c.at);
        for (SessionId s = 0; s < sessions.size(); ++s) schedule_next(s);

        run_to_quiescence();
        drain();
        if (config.final_reads) {
            start_final_reads();
            run_to_quiescence();
            drain();
        }

        ExperimentResult result;
        for (ReplicaId r = 0; r < replicas.size(); ++r) {
            const ReplicaStats& st = replicas[r]->stats();
            ReplicaMetrics& m = metrics[r];
            m.commits_applied = st.commits_applied;
            m.replays = st.replays;
            m.stale_acks = st.stale_acks;
            m.cache_overflow = replicas[r]->cache().overflow_count();
            m.cache_evictions = replicas[r]->cache().eviction_count();
            m.log_entries_compacted = st.log_entries_compacted;
            if (replicas[r]->crashed()) continue;
            auto& state = result.final_state[r];
            for (Key k : touched)
                if (auto v = hosts[r]->fetch(k)) state.emplace(k, std::move(*v));
        }
        result.run = net->report();
        result.metrics.replicas = metrics;
        result.metrics.finalize();
        result.metrics.crashed = crashed;
        result.metrics.final_time_ns = result.run.final_time;
        result.metrics.events_dispatched = result.run.events_dispatched;
        result.metrics.network_dropped = result.run.network.dropped;
        result.metrics.pcie_dropped = result.run.pcie.dropped;
        result.crashed = crashed;
        result.history = std::move(history);
        return result;
    }
};

Cluster::Cluster(WorkloadConfig workload, ClusterConfig config, std::vector<CrashSpec> crashes)
    : impl_(std::make_unique<Impl>(std::move(workload), std::move(config), std::move(crashes))) {
    impl_->owner = this;
}

Cluster::~Cluster() = default;

void Cluster::set_after_event(EventHook hook) { impl_->after_event = std::move(hook); }
void Cluster::set_compaction_hook(CompactionHook hook) { impl_->on_compaction = std::move(hook); }
ExperimentResult Cluster::run() { return impl_->run(); }
std::size_t Cluster::replica_count() const { return impl_->replicas.size(); }
const Replica& Cluster::replica(ReplicaId r) const { return *impl_->replicas.at(r); }
const DatastoreInterface& Cluster::host(ReplicaId r) const { return *impl_->hosts.at(r); }
const SimNet& Cluster::net() const { return *impl_->net; }

ExperimentResult run_experiment(const WorkloadConfig& workload, const ClusterConfig& config,
                                const std::vector<CrashSpec>& crashes) {
    Cluster cluster(workload, config, crashes);
    return cluster.run();
}

}  // namespace nicrep
