#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "graph.hpp"
#include "rng.hpp"

namespace goldfish {

enum class Strategy { static_node, goldfish, perigee };

struct NodeRole {
    bool is_publisher = false;
    double publish_prob = 0.0;
    bool is_adaptive = false;
    Strategy strategy = Strategy::static_node;
};

// One peer's delivery of one block, measured relative to the earliest peer
// delivery of that block at the observing node. A symbolic record means the
// peer never sent the block because it got its first copy from us.
struct DeliveryRecord {
    NodeId peer = 0;
    std::uint64_t block = 0;
    double rel_time_ms = 0.0; // meaningful only when !symbolic
    bool symbolic = false;

    friend bool operator==(const DeliveryRecord&, const DeliveryRecord&) = default;
};

struct BlockObservation {
    std::uint64_t block = 0;
    std::vector<DeliveryRecord> records;

    friend bool operator==(const BlockObservation&, const BlockObservation&) = default;
};

// One node's observations over a contiguous span of rounds with a fixed
// connection set. Blocks are consecutive rounds; peer_set is the snapshot of
// all neighbors (both edge directions) at epoch start.
struct EpochBatch {
    std::uint64_t epoch_id = 0;
    std::vector<NodeId> peer_set; // sorted, unique
    std::vector<BlockObservation> blocks;

    std::size_t n_blocks() const { return blocks.size(); }

    friend bool operator==(const EpochBatch&, const EpochBatch&) = default;
};

enum class PublishDist { exponential, uniform, fixed_set };

namespace detail {

// Fraction of exponential mass exp(-beta*rank) held by the top m of n ranks.
inline double top_mass(double beta, std::size_t m, std::size_t n) {
    double top = 0.0, total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double w = std::exp(-beta * static_cast<double>(r));
        total += w;
        if (r < m) top += w;
    }
    return top / total;
}

// beta such that the top 20% of ranks hold 80% of the mass, found by
// bisection (the mass fraction is increasing in beta).
inline double calibrate_exponential_beta(std::size_t n_pub) {
    std::size_t m = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(n_pub)));
    if (m == 0) m = 1;
    if (m >= n_pub) return 0.0;
    const double target = 0.8;
    if (top_mass(0.0, m, n_pub) >= target) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (top_mass(hi, m, n_pub) < target) {
        hi *= 2.0;
        if (hi > 1e6) break;
    }
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (top_mass(mid, m, n_pub) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

// Per-node publishing probabilities. `publishers` designates the publishing
// subset; exponential assigns exp(-beta*rank) over a seeded shuffle of it,
// with beta calibrated so the top 20% of publishers hold 80% of the mass.
inline std::vector<double> sample_publishers(std::size_t n_nodes, PublishDist dist,
                                             const std::vector<NodeId>& publishers,
                                             std::uint64_t seed) {
    if (publishers.empty())
        throw std::invalid_argument("sample_publishers: empty publisher set");
    for (NodeId p : publishers)
        if (p >= n_nodes)
            throw std::invalid_argument("sample_publishers: publisher id out of range");
    std::vector<double> prob(n_nodes, 0.0);
    if (dist == PublishDist::exponential) {
        std::vector<NodeId> ranked = publishers;
        Rng rng(derive_seed(seed, 0xb10c5));
        rng.shuffle(ranked);
        double beta = detail::calibrate_exponential_beta(ranked.size());
        double total = 0.0;
        for (std::size_t r = 0; r < ranked.size(); ++r) {
            double w = std::exp(-beta * static_cast<double>(r));
            prob[ranked[r]] = w;
            total += w;
        }
        for (NodeId p : ranked) prob[p] /= total;
    } else {
        double share = 1.0 / static_cast<double>(publishers.size());
        for (NodeId p : publishers) prob[p] = share;
    }
    return prob;
}

// Relative-time records from absolute peer arrival times. The earliest
// arriving peer defines time zero; shifting every arrival by a constant
// leaves the records unchanged.
inline std::vector<DeliveryRecord> relative_records(
    std::uint64_t block, const std::vector<std::pair<NodeId, double>>& arrivals,
    const std::vector<NodeId>& symbolic_peers) {
    std::vector<DeliveryRecord> out;
    out.reserve(arrivals.size() + symbolic_peers.size());
    double zero = std::numeric_limits<double>::infinity();
    for (const auto& [peer, t] : arrivals) zero = std::min(zero, t);
    for (const auto& [peer, t] : arrivals)
        out.push_back({peer, block, t - zero, false});
    for (NodeId peer : symbolic_peers)
        out.push_back({peer, block, 0.0, true});
    std::sort(out.begin(), out.end(),
              [](const DeliveryRecord& a, const DeliveryRecord& b) { return a.peer < b.peer; });
    return out;
}

// One node's records for one flooded block. `dist` holds first-arrival times
// from the publisher over all connections. A neighbor v is symbolic when its
// first copy arrives strictly via the observer: the observer's arrival plus
// the (observer,v) hop beats v's earliest delivery from anyone else.
inline std::vector<DeliveryRecord> observe_round(const NetworkGraph& g,
                                                 const std::vector<double>& dist, NodeId publisher,
                                                 NodeId observer, std::uint64_t block) {
    const double inf = std::numeric_limits<double>::infinity();
    if (observer != publisher && !(dist[observer] < inf))
        return {}; // block never reached the observer
    std::vector<std::pair<NodeId, double>> arrivals;
    std::vector<NodeId> symbolic;
    for (NodeId v : g.neighbors(observer)) {
        if (v == publisher) {
            arrivals.emplace_back(v, dist[v] + edge_delay(g, v, observer));
            continue;
        }
        double best_other = inf;
        for (NodeId x : g.neighbors(v)) {
            if (x == observer) continue;
            if (dist[x] < inf)
                best_other = std::min(best_other, dist[x] + edge_delay(g, x, v));
        }
        double via_observer = dist[observer] + edge_delay(g, observer, v);
        if (via_observer < best_other) {
            symbolic.push_back(v); // v's first copy came from us; it never sends back
        } else if (dist[v] < inf) {
            arrivals.emplace_back(v, dist[v] + edge_delay(g, v, observer));
        }
    }
    return relative_records(block, arrivals, symbolic);
}

// Floods one block from `publisher` and collects every node's records.
inline std::vector<std::vector<DeliveryRecord>> run_round(const NetworkGraph& g, std::uint64_t block,
                                                          NodeId publisher) {
    UndirectedView view(g, EdgeFilter::all);
    std::vector<double> dist = view.shortest_from(publisher);
    std::vector<std::vector<DeliveryRecord>> records(g.n_nodes());
    for (NodeId u = 0; u < g.n_nodes(); ++u)
        records[u] = observe_round(g, dist, publisher, u, block);
    return records;
}

struct EpochResult {
    std::vector<std::pair<NodeId, EpochBatch>> batches; // adaptive nodes, ascending id
    std::vector<NodeId> publishers;                     // per-round draw
};

// Runs n_rounds flooding rounds. One publisher is drawn per round from the
// roles' publish probabilities (seeded, inverse CDF); observations accumulate
// per adaptive node against the epoch-start peer set.
inline EpochResult run_epoch(const NetworkGraph& g, const std::vector<NodeRole>& roles,
                             std::size_t n_rounds, std::uint64_t seed,
                             std::uint64_t first_block = 0, std::uint64_t epoch_id = 0) {
    if (n_rounds == 0)
        throw std::invalid_argument("run_epoch: need at least one round");
    if (roles.size() != g.n_nodes())
        throw std::invalid_argument("run_epoch: role table size mismatch");

    std::vector<double> cum;
    cum.reserve(g.n_nodes());
    double acc = 0.0;
    for (const NodeRole& r : roles) {
        acc += r.publish_prob;
        cum.push_back(acc);
    }
    if (std::abs(acc - 1.0) > 1e-9)
        throw std::invalid_argument("run_epoch: publish probabilities must sum to 1");

    EpochResult result;
    std::vector<NodeId> observers;
    for (NodeId u = 0; u < g.n_nodes(); ++u)
        if (roles[u].is_adaptive) observers.push_back(u);
    for (NodeId u : observers) {
        EpochBatch batch;
        batch.epoch_id = epoch_id;
        batch.peer_set = g.neighbors(u);
        batch.blocks.reserve(n_rounds);
        result.batches.emplace_back(u, std::move(batch));
    }

    UndirectedView view(g, EdgeFilter::all);
    std::map<NodeId, std::vector<double>> dist_cache;
    Rng rng(seed);
    for (std::size_t round = 0; round < n_rounds; ++round) {
        double r = rng.unit() * acc;
        auto it = std::upper_bound(cum.begin(), cum.end(), r);
        NodeId publisher = static_cast<NodeId>(std::min<std::size_t>(
            static_cast<std::size_t>(it - cum.begin()), g.n_nodes() - 1));
        result.publishers.push_back(publisher);
        auto [cache_it, inserted] = dist_cache.try_emplace(publisher);
        if (inserted) cache_it->second = view.shortest_from(publisher);
        const std::vector<double>& dist = cache_it->second;
        std::uint64_t block = first_block + round;
        for (std::size_t i = 0; i < observers.size(); ++i) {
            BlockObservation obs;
            obs.block = block;
            obs.records = observe_round(g, dist, publisher, observers[i], block);
            result.batches[i].second.blocks.push_back(std::move(obs));
        }
    }
    return result;
}

// Debug serialization: `epoch,block,peer,rel_time|S` per record.
inline std::string batch_to_csv(const EpochBatch& batch) {
    std::ostringstream out;
    for (const BlockObservation& obs : batch.blocks) {
        for (const DeliveryRecord& rec : obs.records) {
            out << batch.epoch_id << ',' << obs.block << ',' << rec.peer << ',';
            if (rec.symbolic)
                out << 'S';
            else
                out << rec.rel_time_ms;
            out << '\n';
        }
    }
    return out.str();
}

} // namespace goldfish
