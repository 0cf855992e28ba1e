#include "nicrep/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "nicrep/checker.hpp"
#include "nicrep/cluster.hpp"

namespace nicrep {

namespace {

struct RunFlags {
    WorkloadConfig workload;
    ClusterConfig cluster;
    std::string distribution = "uniform";
    std::string overlay = "mesh";
    std::vector<std::string> crashes;
    std::size_t max_ops_per_key = CheckerOptions{}.max_ops_per_key;

    void finalize() {
        workload.distribution = parse_distribution(distribution);
        cluster.overlay = parse_overlay_kind(overlay);
    }
    std::vector<CrashSpec> crash_specs() const {
        std::vector<CrashSpec> out;
        for (const auto& c : crashes) out.push_back(parse_crash_spec(c));
        return out;
    }
};

void add_run_flags(CLI::App& app, RunFlags& f) {
    app.add_option("--replicas", f.workload.replicas, "Replication degree")->capture_default_str();
    app.add_option("--keys", f.workload.key_count, "Pre-populated key count")->capture_default_str();
    app.add_option("--key-size", f.workload.key_size, "Key size in bytes")->capture_default_str();
    app.add_option("--value-size", f.workload.value_size, "Value size in bytes")->capture_default_str();
    app.add_option("--write-ratio", f.workload.write_ratio, "Fraction of writes")->capture_default_str();
    app.add_option("--distribution", f.distribution, "Key distribution: uniform|zipf")->capture_default_str();
    app.add_option("--zipf-theta", f.workload.zipf_theta, "Zipf skew")->capture_default_str();
    app.add_option("--ops", f.workload.op_count, "Client operations")->capture_default_str();
    app.add_option("--sessions", f.workload.sessions_per_replica, "Client sessions per replica")
        ->capture_default_str();
    app.add_option("--think-time-ns", f.workload.think_time_ns, "Mean gap between a session's requests")
        ->capture_default_str();
    app.add_option("--cache-capacity", f.cluster.cache.capacity, "NIC cache entries")->capture_default_str();
    app.add_option("--batch-size", f.cluster.cache.batch_size, "Write-back batch size")->capture_default_str();
    app.add_option("--flush-timer-ns", f.cluster.cache.flush_timer_ns, "Write-back flush timer (0 disables)")
        ->capture_default_str();
    app.add_option("--net-latency-ns", f.cluster.net_latency_ns, "One-way network latency")->capture_default_str();
    app.add_option("--net-jitter-ns", f.cluster.net_jitter_ns, "Uniform network jitter bound")
        ->capture_default_str();
    app.add_option("--pcie-rtt-ns", f.cluster.pcie_rtt_ns, "PCIe round trip")->capture_default_str();
    app.add_option("--replay-timeout-ns", f.cluster.replay_timeout_ns, "Replay timeout (0: 8x one-way latency)")
        ->capture_default_str();
    app.add_option("--processing-delay-ns", f.cluster.processing_delay_ns, "Delay added to every send")
        ->capture_default_str();
    app.add_option("--overlay", f.overlay, "Multicast overlay: mesh|chain|star")->capture_default_str();
    app.add_option("--backend", f.cluster.backend, "Host datastore backend")->capture_default_str();
    app.add_option("--crash", f.crashes, "Crash replica at a time, replica@time_ns (repeatable)");
    app.add_flag("--final-reads", f.cluster.final_reads, "Read every touched key at every live replica at the end");
    app.add_option("--max-ops-per-key", f.max_ops_per_key, "Checker cap per key")->capture_default_str();
}

int verdict_exit(const HistoryVerdict& v) {
    if (v.violations > 0 || v.session.status == VerdictStatus::Violation) return kExitViolation;
    if (v.unchecked > 0) return kExitUnchecked;
    return kExitOk;
}

void print_verdict(const HistoryVerdict& v, std::ostream& out) {
    for (const auto& [key, verdict] : v.per_key)
        if (verdict.status != VerdictStatus::Ok) out << "key " << key << ": " << describe(verdict) << '\n';
    out << "session order: " << describe(v.session) << '\n';
    out << v.per_key.size() << " keys checked, " << v.violations << " violations, " << v.unchecked
        << " unchecked\n";
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
    const auto dots = text.find("..");
    auto number = [&](std::string_view part) {
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size())
            throw ConfigError("bad seed range '" + text + "' (expected a..b)");
        return v;
    };
    const std::string_view sv(text);
    if (dots == std::string::npos) {
        const auto v = number(sv);
        return {v, v};
    }
    const auto lo = number(sv.substr(0, dots));
    const auto hi = number(sv.substr(dots + 2));
    if (hi < lo) throw ConfigError("empty seed range '" + text + "'");
    return {lo, hi};
}

int do_run(const RunFlags& f, const std::string& out, const std::string& format, const std::string& history_path,
           bool check) {
    const ReportFormat fmt = parse_report_format(format);
    ExperimentResult result = run_experiment(f.workload, f.cluster, f.crash_specs());
    if (out.empty() || out == "-")
        write_report(result.metrics, fmt, std::cout);
    else
        emit_report(result.metrics, fmt, out);
    if (!history_path.empty()) save_history(result.history, history_path);
    if (!check) return kExitOk;
    const HistoryVerdict v = check_history(result.history, CheckerOptions{f.max_ops_per_key});
    print_verdict(v, std::cerr);
    return verdict_exit(v);
}

int do_check(const std::string& path, std::size_t max_ops) {
    const History history = load_history(path);
    const HistoryVerdict v = check_history(history, CheckerOptions{max_ops});
    print_verdict(v, std::cout);
    return verdict_exit(v);
}

int do_sweep(RunFlags f, const std::string& seeds, unsigned jobs) {
    const auto [lo, hi] = parse_seed_range(seeds);
    const std::size_t count = hi - lo + 1;
    const auto crashes = f.crash_specs();
    std::vector<int> codes(count, kExitOk);
    std::vector<std::string> lines(count);
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::string first_error;

    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            WorkloadConfig w = f.workload;
            w.seed = lo + i;
            std::ostringstream line;
            line << "seed " << w.seed << ": ";
            try {
                const ExperimentResult result = run_experiment(w, f.cluster, crashes);
                const HistoryVerdict v = check_history(result.history, CheckerOptions{f.max_ops_per_key});
                codes[i] = verdict_exit(v);
                line << (codes[i] == kExitOk ? "ok" : codes[i] == kExitViolation ? "VIOLATION" : "UNCHECKED") << " ("
                     << result.history.events.size() << " ops, " << v.violations << " violations, " << v.unchecked
                     << " unchecked)";
            } catch (const std::exception& e) {
                codes[i] = kExitRuntime;
                line << "error: " << e.what();
                std::lock_guard lock(error_mutex);
                if (first_error.empty()) first_error = e.what();
            }
            lines[i] = line.str();
        }
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::size_t passed = 0;
    for (std::size_t i = 0; i < count; ++i) {
        std::cout << lines[i] << '\n';
        if (codes[i] == kExitOk) ++passed;
    }
    std::cout << passed << "/" << count << " seeds passed\n";
    if (std::find(codes.begin(), codes.end(), kExitRuntime) != codes.end()) return kExitRuntime;
    if (std::find(codes.begin(), codes.end(), kExitViolation) != codes.end()) return kExitViolation;
    if (std::find(codes.begin(), codes.end(), kExitUnchecked) != codes.end()) return kExitUnchecked;
    return kExitOk;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"nicrep: simulator for NIC-offloaded leaderless replication"};
    app.require_subcommand(1);

    RunFlags run_flags;
    std::string out, format = "json", history_path;
    bool check = false;
    auto* run = app.add_subcommand("run", "Run one experiment and emit a metrics report");
    add_run_flags(*run, run_flags);
    run->add_option("--seed", run_flags.workload.seed, "Workload and jitter seed")->capture_default_str();
    run->add_option("--out", out, "Report path ('-' or empty for stdout)");
    run->add_option("--format", format, "Report format: json|csv")->capture_default_str();
    run->add_option("--history", history_path, "Write the client history as JSON lines");
    run->add_flag("--check", check, "Check the history; exit 3 on violation, 4 if unchecked");

    std::string check_path;
    std::size_t check_cap = CheckerOptions{}.max_ops_per_key;
    auto* chk = app.add_subcommand("check", "Check a recorded history for per-key linearizability");
    chk->add_option("--history", check_path, "History file (JSON lines)")->required();
    chk->add_option("--max-ops-per-key", check_cap, "Checker cap per key")->capture_default_str();

    RunFlags sweep_flags;
    std::string seeds;
    unsigned jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "Run and check a range of seeds");
    add_run_flags(*sweep, sweep_flags);
    sweep->add_option("--seeds", seeds, "Seed range a..b")->required();
    sweep->add_option("--jobs", jobs, "Seeds simulated in parallel")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed()) {
            run_flags.finalize();
            return do_run(run_flags, out, format, history_path, check);
        }
        if (chk->parsed()) return do_check(check_path, check_cap);
        sweep_flags.finalize();
        return do_sweep(sweep_flags, seeds, jobs);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

}  // namespace nicrep
