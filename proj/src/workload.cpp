#include "nicrep/workload.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>

namespace nicrep {

KeyDistribution parse_distribution(std::string_view name) {
    if (name == "uniform") return KeyDistribution::Uniform;
    if (name == "zipf") return KeyDistribution::Zipf;
    throw ConfigError("unknown distribution '" + std::string(name) + "' (expected uniform|zipf)");
}

std::string_view to_string(KeyDistribution d) {
    return d == KeyDistribution::Uniform ? "uniform" : "zipf";
}

void WorkloadConfig::validate() const {
    if (replicas == 0) throw ConfigError("replicas must be >= 1");
    if (!(write_ratio >= 0.0 && write_ratio <= 1.0)) throw ConfigError("write ratio must lie in [0, 1]");
    if (key_count == 0) throw ConfigError("key count must be >= 1");
    if (key_size == 0) throw ConfigError("key size must be >= 1 byte");
    if (value_size == 0) throw ConfigError("value size must be >= 1 byte");
    if (sessions_per_replica == 0) throw ConfigError("sessions per replica must be >= 1");
    if (distribution == KeyDistribution::Zipf && !(zipf_theta > 0.0 && std::isfinite(zipf_theta)))
        throw ConfigError("zipf theta must be > 0");
}

Value make_write_value(std::uint64_t write_id, std::size_t size) {
    static constexpr char kHex[] = "0123456789abcdef";
    Value v = "w";
    std::string digits;
    do {
        digits.push_back(kHex[write_id & 0xF]);
        write_id >>= 4;
    } while (write_id != 0);
    v.append(digits.rbegin(), digits.rend());
    if (v.size() < size) v.append(size - v.size(), '.');
    return v;
}

namespace {

class ZipfSampler {
public:
    ZipfSampler(std::size_t n, double theta) : cdf_(n) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            total += 1.0 / std::pow(static_cast<double>(i + 1), theta);
            cdf_[i] = total;
        }
    }

    template <class Rng>
    Key operator()(Rng& rng) const {
        const double u = std::uniform_real_distribution<double>(0.0, cdf_.back())(rng);
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return static_cast<Key>(std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1));
    }

private:
    std::vector<double> cdf_;
};

}  // namespace

std::vector<SessionTrace> generate_trace(const WorkloadConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    std::vector<SessionTrace> sessions(config.session_count());
    for (std::size_t s = 0; s < sessions.size(); ++s) {
        sessions[s].session = static_cast<SessionId>(s);
        sessions[s].home = static_cast<ReplicaId>(s % config.replicas);
    }

    std::uniform_int_distribution<std::size_t> pick_session(0, sessions.size() - 1);
    std::uniform_int_distribution<Key> uniform_key(0, config.key_count - 1);
    std::bernoulli_distribution is_write(config.write_ratio);
    std::uniform_int_distribution<SimTime> think(0, 2 * config.think_time_ns);
    std::optional<ZipfSampler> zipf;
    if (config.distribution == KeyDistribution::Zipf) zipf.emplace(config.key_count, config.zipf_theta);

    std::vector<SimTime> clock(sessions.size(), 0);
    std::uint64_t writes = 0;
    for (std::size_t i = 0; i < config.op_count; ++i) {
        const std::size_t s = pick_session(rng);
        ClientOp op;
        op.request = sessions[s].ops.size();
        op.is_write = is_write(rng);
        op.key = zipf ? (*zipf)(rng) : uniform_key(rng);
        if (op.is_write) op.value = make_write_value(writes++, config.value_size);
        clock[s] += think(rng);
        op.planned_at = clock[s];
        sessions[s].ops.push_back(std::move(op));
    }
    return sessions;
}

}  // namespace nicrep
