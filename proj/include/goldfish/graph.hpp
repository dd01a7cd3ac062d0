#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rng.hpp"

namespace goldfish {

using NodeId = std::uint32_t;

enum class EdgeRole { exploit, explore };

struct Position {
    double x = 0.0;
    double y = 0.0;
};

// Propagation-latency model: either node coordinates on a plane (1 coordinate
// unit = 1 ms of propagation) or a measured ms delay matrix.
class LatencyModel {
public:
    enum class Kind { planar2d, measured };

    static LatencyModel planar(std::vector<Position> positions, double node_delay_ms) {
        LatencyModel m;
        m.kind_ = Kind::planar2d;
        m.positions_ = std::move(positions);
        m.n_ = m.positions_.size();
        m.node_delay_ms_ = node_delay_ms;
        m.validate();
        return m;
    }

    static LatencyModel measured(std::size_t n, std::vector<double> matrix_ms, double node_delay_ms) {
        LatencyModel m;
        m.kind_ = Kind::measured;
        m.n_ = n;
        m.matrix_ = std::move(matrix_ms);
        m.node_delay_ms_ = node_delay_ms;
        if (m.matrix_.size() != n * n)
            throw std::invalid_argument("LatencyModel: matrix size does not match node count");
        m.validate();
        return m;
    }

    Kind kind() const { return kind_; }
    std::size_t size() const { return n_; }
    double node_delay_ms() const { return node_delay_ms_; }

    double propagation(NodeId u, NodeId v) const {
        if (kind_ == Kind::planar2d) {
            const Position& a = positions_[u];
            const Position& b = positions_[v];
            return std::hypot(a.x - b.x, a.y - b.y);
        }
        return matrix_[static_cast<std::size_t>(u) * n_ + v];
    }

    const Position& position(NodeId u) const { return positions_[u]; }
    const std::vector<Position>& positions() const { return positions_; }
    const std::vector<double>& matrix() const { return matrix_; }

private:
    void validate() const {
        if (node_delay_ms_ < 0.0)
            throw std::invalid_argument("LatencyModel: node delay must be non-negative");
        if (kind_ == Kind::measured) {
            for (std::size_t i = 0; i < n_; ++i) {
                if (matrix_[i * n_ + i] != 0.0)
                    throw std::invalid_argument("LatencyModel: diagonal must be zero");
                for (std::size_t j = 0; j < n_; ++j)
                    if (matrix_[i * n_ + j] < 0.0)
                        throw std::invalid_argument("LatencyModel: delays must be non-negative");
            }
        }
    }

    Kind kind_ = Kind::planar2d;
    std::size_t n_ = 0;
    std::vector<Position> positions_;
    std::vector<double> matrix_;
    double node_delay_ms_ = 20.0;
};

struct OutEdge {
    NodeId peer;
    EdgeRole role;
};

// Directed overlay with per-node out/in degree caps. The in/out adjacency
// views are kept consistent by construction; every mutation re-checks the
// caps. Connections relay traffic in both directions (see shortest_paths).
class NetworkGraph {
public:
    NetworkGraph(std::size_t n, std::size_t max_out, std::size_t max_in, LatencyModel latency)
        : n_(n), max_out_(max_out), max_in_(max_in), latency_(std::move(latency)),
          out_(n), in_(n) {
        if (latency_.size() != n)
            throw std::invalid_argument("NetworkGraph: latency model size mismatch");
    }

    std::size_t n_nodes() const { return n_; }
    std::size_t max_out() const { return max_out_; }
    std::size_t max_in() const { return max_in_; }
    const LatencyModel& latency() const { return latency_; }

    const std::vector<OutEdge>& out_edges(NodeId u) const { return out_[u]; }
    const std::vector<NodeId>& in_edges(NodeId u) const { return in_[u]; }
    std::size_t out_degree(NodeId u) const { return out_[u].size(); }
    std::size_t in_degree(NodeId u) const { return in_[u].size(); }

    bool has_out_edge(NodeId u, NodeId v) const {
        for (const OutEdge& e : out_[u])
            if (e.peer == v) return true;
        return false;
    }

    bool can_connect(NodeId u, NodeId v) const {
        return u != v && out_[u].size() < max_out_ && in_[v].size() < max_in_ && !has_out_edge(u, v);
    }

    // Adds u->v; returns false when rejected (saturation, duplicate, self).
    bool connect(NodeId u, NodeId v, EdgeRole role) {
        if (!can_connect(u, v)) return false;
        out_[u].push_back({v, role});
        in_[v].push_back(u);
        return true;
    }

    void disconnect(NodeId u, NodeId v) {
        auto it = std::find_if(out_[u].begin(), out_[u].end(),
                               [v](const OutEdge& e) { return e.peer == v; });
        if (it == out_[u].end())
            throw std::invalid_argument("NetworkGraph::disconnect: edge not present");
        out_[u].erase(it);
        auto jt = std::find(in_[v].begin(), in_[v].end(), u);
        in_[v].erase(jt);
    }

    void set_role(NodeId u, NodeId v, EdgeRole role) {
        for (OutEdge& e : out_[u])
            if (e.peer == v) {
                e.role = role;
                return;
            }
        throw std::invalid_argument("NetworkGraph::set_role: edge not present");
    }

    // All neighbors over both edge directions, sorted and deduplicated.
    std::vector<NodeId> neighbors(NodeId u) const {
        std::vector<NodeId> ns;
        ns.reserve(out_[u].size() + in_[u].size());
        for (const OutEdge& e : out_[u]) ns.push_back(e.peer);
        for (NodeId v : in_[u]) ns.push_back(v);
        std::sort(ns.begin(), ns.end());
        ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
        return ns;
    }

private:
    std::size_t n_;
    std::size_t max_out_;
    std::size_t max_in_;
    LatencyModel latency_;
    std::vector<std::vector<OutEdge>> out_;
    std::vector<std::vector<NodeId>> in_;
};

// One-hop delivery delay u -> v: fixed node (processing + transmission) delay
// plus propagation. Requires u != v.
inline double edge_delay(const NetworkGraph& g, NodeId u, NodeId v) {
    if (u == v)
        throw std::invalid_argument("edge_delay: u and v must differ");
    return g.latency().node_delay_ms() + g.latency().propagation(u, v);
}

enum class EdgeFilter { all, exploit_only };

// Flattened undirected adjacency for a fixed edge filter. Building it once
// per epoch amortizes the cost across the many Dijkstra runs of that epoch.
class UndirectedView {
public:
    UndirectedView(const NetworkGraph& g, EdgeFilter filter) : adj_(g.n_nodes()) {
        const std::size_t n = g.n_nodes();
        for (NodeId u = 0; u < n; ++u) {
            for (const OutEdge& e : g.out_edges(u)) {
                if (filter == EdgeFilter::exploit_only && e.role != EdgeRole::exploit)
                    continue;
                adj_[u].emplace_back(e.peer, edge_delay(g, u, e.peer));
                adj_[e.peer].emplace_back(u, edge_delay(g, e.peer, u));
            }
        }
        for (auto& list : adj_)
            std::sort(list.begin(), list.end());
    }

    std::size_t n_nodes() const { return adj_.size(); }

    const std::vector<std::pair<NodeId, double>>& adjacent(NodeId u) const { return adj_[u]; }

    std::vector<double> shortest_from(NodeId src) const {
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> dist(adj_.size(), inf);
        using Item = std::pair<double, NodeId>;
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
        dist[src] = 0.0;
        heap.emplace(0.0, src);
        while (!heap.empty()) {
            auto [d, u] = heap.top();
            heap.pop();
            if (d > dist[u]) continue;
            for (const auto& [v, w] : adj_[u]) {
                double nd = d + w;
                if (nd < dist[v]) {
                    dist[v] = nd;
                    heap.emplace(nd, v);
                }
            }
        }
        return dist;
    }

private:
    std::vector<std::vector<std::pair<NodeId, double>>> adj_;
};

// Dijkstra distances from src over the undirected relay graph. filter=all is
// how messages actually spread; filter=exploit_only restricts to exploitation
// out-edges and is the metric used for latency evaluation. Unreachable nodes
// get +infinity.
inline std::vector<double> shortest_paths(const NetworkGraph& g, NodeId src, EdgeFilter filter) {
    if (src >= g.n_nodes())
        throw std::invalid_argument("shortest_paths: src out of range");
    return UndirectedView(g, filter).shortest_from(src);
}

// Uniform random out-edge assignment under the degree caps. Each node draws
// targets uniformly among nodes with spare in-capacity; infeasible partial
// assignments trigger a full restart, up to max_attempts.
inline void assign_random_edges(NetworkGraph& g, Rng& rng, std::size_t max_attempts = 100) {
    const std::size_t n = g.n_nodes();
    if (n < g.max_out() + 1)
        throw std::invalid_argument("assign_random_edges: need n >= max_out + 1");
    if (g.max_out() > g.max_in())
        throw std::invalid_argument("assign_random_edges: total in-capacity below total out-degree");
    for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
        // wipe any previous attempt
        for (NodeId u = 0; u < n; ++u) {
            while (!g.out_edges(u).empty())
                g.disconnect(u, g.out_edges(u).back().peer);
        }
        bool ok = true;
        std::vector<NodeId> candidates;
        for (NodeId u = 0; u < n && ok; ++u) {
            while (g.out_degree(u) < g.max_out()) {
                candidates.clear();
                for (NodeId v = 0; v < n; ++v)
                    if (g.can_connect(u, v)) candidates.push_back(v);
                if (candidates.empty()) {
                    ok = false;
                    break;
                }
                NodeId v = candidates[rng.below(candidates.size())];
                g.connect(u, v, EdgeRole::exploit);
            }
        }
        if (ok) return;
    }
    throw std::runtime_error("assign_random_edges: could not satisfy degree constraints (n=" +
                             std::to_string(n) + ", max_out=" + std::to_string(g.max_out()) +
                             ", max_in=" + std::to_string(g.max_in()) + ") after " +
                             std::to_string(max_attempts) + " attempts");
}

// Random overlay on a plane: positions uniform on [0, plane_size]^2, then
// random edges. Deterministic for a fixed seed.
inline NetworkGraph generate_random_graph(std::size_t n, std::size_t max_out, std::size_t max_in,
                                          double plane_size, double node_delay_ms,
                                          std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Position> pos(n);
    for (auto& p : pos) {
        p.x = rng.unit() * plane_size;
        p.y = rng.unit() * plane_size;
    }
    NetworkGraph g(n, max_out, max_in, LatencyModel::planar(std::move(pos), node_delay_ms));
    assign_random_edges(g, rng);
    return g;
}

// Random overlay on a pre-built latency model (e.g. a measured matrix).
inline NetworkGraph generate_random_graph(LatencyModel latency, std::size_t max_out,
                                          std::size_t max_in, std::uint64_t seed) {
    Rng rng(seed);
    NetworkGraph g(latency.size(), max_out, max_in, std::move(latency));
    assign_random_edges(g, rng);
    return g;
}

// Measured-latency CSV: first line `# nodes=<N>`, then N rows of N comma
// separated one-way delays in ms with a zero diagonal. Asymmetric pairs are
// averaged (connections relay both ways over one link) with a warning.
inline std::pair<std::size_t, std::vector<double>> load_latency_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error("latency csv: empty file");
    const std::string prefix = "# nodes=";
    if (line.rfind(prefix, 0) != 0)
        throw std::runtime_error("latency csv: first line must be '# nodes=<N>'");
    std::size_t n = 0;
    try {
        n = static_cast<std::size_t>(std::stoull(line.substr(prefix.size())));
    } catch (const std::exception&) {
        throw std::runtime_error("latency csv: could not parse node count");
    }
    if (n == 0)
        throw std::runtime_error("latency csv: node count must be positive");
    std::vector<double> m(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(is, line))
            throw std::runtime_error("latency csv: expected " + std::to_string(n) + " rows, got " +
                                     std::to_string(i));
        std::stringstream ss(line);
        std::string cell;
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::getline(ss, cell, ','))
                throw std::runtime_error("latency csv: row " + std::to_string(i) + " has fewer than " +
                                         std::to_string(n) + " columns");
            m[i * n + j] = std::stod(cell);
            if (m[i * n + j] < 0.0)
                throw std::runtime_error("latency csv: negative delay at (" + std::to_string(i) +
                                         "," + std::to_string(j) + ")");
        }
        if (std::getline(ss, cell, ','))
            throw std::runtime_error("latency csv: row " + std::to_string(i) + " has more than " +
                                     std::to_string(n) + " columns");
        if (m[i * n + i] != 0.0)
            throw std::runtime_error("latency csv: nonzero diagonal at row " + std::to_string(i));
    }
    std::size_t asymmetric = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (m[i * n + j] != m[j * n + i]) {
                double avg = 0.5 * (m[i * n + j] + m[j * n + i]);
                m[i * n + j] = avg;
                m[j * n + i] = avg;
                ++asymmetric;
            }
        }
    }
    if (asymmetric > 0)
        std::cerr << "latency csv: averaged " << asymmetric << " asymmetric pair(s)\n";
    return {n, std::move(m)};
}

inline std::pair<std::size_t, std::vector<double>> load_latency_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("latency csv: cannot open " + path);
    return load_latency_csv(f);
}

// Restricts a measured matrix to a node subset (row/column selection).
inline std::vector<double> subset_latency_matrix(const std::vector<double>& m, std::size_t n,
                                                 const std::vector<std::size_t>& keep) {
    std::vector<double> out(keep.size() * keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i)
        for (std::size_t j = 0; j < keep.size(); ++j)
            out[i * keep.size() + j] = m[keep[i] * n + keep[j]];
    return out;
}

} // namespace goldfish
