#pragma once

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include "nicrep/types.hpp"

namespace nicrep {

enum class OverlayKind { Mesh, Chain, Star };

OverlayKind parse_overlay_kind(std::string_view name);
std::string_view to_string(OverlayKind kind);

/// Directed multicast graph over replicas 0..n-1. Immutable once built.
class Overlay {
public:
    using Edge = std::pair<ReplicaId, ReplicaId>;

    Overlay(std::size_t node_count, std::vector<Edge> edges);

    std::size_t node_count() const { return node_count_; }
    const std::vector<Edge>& edges() const { return edges_; }  // sorted

    /// Successors of `origin`, ascending by id. Throws ConfigError on an unknown origin.
    const std::vector<ReplicaId>& multicast_targets(ReplicaId origin) const;

    /// True when every node reaches every other node along directed edges.
    bool strongly_connected() const;
    /// True when every ordered pair of distinct nodes is an edge.
    bool complete() const;

private:
    std::size_t node_count_;
    std::vector<Edge> edges_;
    std::vector<std::vector<ReplicaId>> successors_;
};

Overlay full_mesh(std::size_t n);
Overlay chain(std::size_t n);
Overlay star(ReplicaId center, std::size_t n);
Overlay make_overlay(OverlayKind kind, std::size_t n);

}  // namespace nicrep
