#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "nicrep/types.hpp"

namespace nicrep {

enum class KeyDistribution { Uniform, Zipf };

KeyDistribution parse_distribution(std::string_view name);
std::string_view to_string(KeyDistribution d);

struct WorkloadConfig {
    std::size_t replicas = 5;
    std::size_t key_count = 10'000;
    std::size_t key_size = 8;
    std::size_t value_size = 32;
    double write_ratio = 0.20;
    KeyDistribution distribution = KeyDistribution::Uniform;
    double zipf_theta = 0.99;
    std::size_t op_count = 100'000;
    std::size_t sessions_per_replica = 2;
    SimTime think_time_ns = 1'000;  // mean gap between a session's planned issue times
    std::uint64_t seed = 1;

    void validate() const;
    std::size_t session_count() const { return replicas * sessions_per_replica; }
};

struct ClientOp {
    RequestId request = 0;
    bool is_write = false;
    Key key = 0;
    Value value;  // writes only; unique per write
    SimTime planned_at = 0;  // earliest issue time; sessions stay closed-loop
};

struct SessionTrace {
    SessionId session = 0;
    ReplicaId home = 0;
    std::vector<ClientOp> ops;
};

/// Deterministic under `config.seed`. Sessions are pinned round-robin to home
/// replicas; each op goes to a uniformly chosen session.
std::vector<SessionTrace> generate_trace(const WorkloadConfig& config);

/// Unique printable value for the n-th write, padded to `size` bytes when it fits.
Value make_write_value(std::uint64_t write_id, std::size_t size);

}  // namespace nicrep
