#include "nicrep/overlay.hpp"

#include <algorithm>
#include <string>

namespace nicrep {

OverlayKind parse_overlay_kind(std::string_view name) {
    if (name == "mesh") return OverlayKind::Mesh;
    if (name == "chain") return OverlayKind::Chain;
    if (name == "star") return OverlayKind::Star;
    throw ConfigError("unknown overlay '" + std::string(name) + "' (expected mesh|chain|star)");
}

std::string_view to_string(OverlayKind kind) {
    switch (kind) {
        case OverlayKind::Mesh: return "mesh";
        case OverlayKind::Chain: return "chain";
        case OverlayKind::Star: return "star";
    }
    return "?";
}

Overlay::Overlay(std::size_t node_count, std::vector<Edge> edges)
    : node_count_(node_count), edges_(std::move(edges)), successors_(node_count) {
    if (node_count_ == 0) throw ConfigError("overlay needs at least one node");
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    for (const auto& [from, to] : edges_) {
        if (from >= node_count_ || to >= node_count_)
            throw ConfigError("overlay edge references unknown node");
        if (from == to) throw ConfigError("overlay self-edge on node " + std::to_string(from));
        successors_[from].push_back(to);
    }
}

const std::vector<ReplicaId>& Overlay::multicast_targets(ReplicaId origin) const {
    if (origin >= node_count_)
        throw ConfigError("unknown overlay origin " + std::to_string(origin));
    return successors_[origin];
}

bool Overlay::strongly_connected() const {
    for (ReplicaId start = 0; start < node_count_; ++start) {
        std::vector<bool> seen(node_count_, false);
        std::vector<ReplicaId> stack{start};
        seen[start] = true;
        std::size_t reached = 1;
        while (!stack.empty()) {
            const ReplicaId at = stack.back();
            stack.pop_back();
            for (ReplicaId next : successors_[at]) {
                if (!seen[next]) {
                    seen[next] = true;
                    ++reached;
                    stack.push_back(next);
                }
            }
        }
        if (reached != node_count_) return false;
    }
    return true;
}

bool Overlay::complete() const {
    return edges_.size() == node_count_ * (node_count_ - 1);
}

Overlay full_mesh(std::size_t n) {
    if (n == 0) throw ConfigError("full_mesh requires n >= 1");
    std::vector<Overlay::Edge> edges;
    edges.reserve(n * (n - 1));
    for (ReplicaId a = 0; a < n; ++a)
        for (ReplicaId b = 0; b < n; ++b)
            if (a != b) edges.emplace_back(a, b);
    return Overlay(n, std::move(edges));
}

Overlay chain(std::size_t n) {
    if (n == 0) throw ConfigError("chain requires n >= 1");
    std::vector<Overlay::Edge> edges;
    for (ReplicaId i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return Overlay(n, std::move(edges));
}

Overlay star(ReplicaId center, std::size_t n) {
    if (n == 0) throw ConfigError("star requires n >= 1");
    if (center >= n) throw ConfigError("star center " + std::to_string(center) + " is not a node");
    std::vector<Overlay::Edge> edges;
    for (ReplicaId x = 0; x < n; ++x) {
        if (x == center) continue;
        edges.emplace_back(center, x);
        edges.emplace_back(x, center);
    }
    return Overlay(n, std::move(edges));
}

Overlay make_overlay(OverlayKind kind, std::size_t n) {
    switch (kind) {
        case OverlayKind::Mesh: return full_mesh(n);
        case OverlayKind::Chain: return chain(n);
        case OverlayKind::Star: return star(0, n);
    }
    throw ConfigError("unknown overlay kind");
}

}  // namespace nicrep
