#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "selection.hpp"
#include "simulation.hpp"

namespace goldfish {

enum class PerigeeAggregate { p90, sum };

struct SubsetScore {
    std::vector<NodeId> subset; // ascending peer ids
    double score = 0.0;
};

namespace detail {

// Nearest-rank percentile of a sorted sample.
inline double percentile_nearest_rank(std::vector<double> xs, double pct) {
    std::sort(xs.begin(), xs.end());
    std::size_t rank = static_cast<std::size_t>(std::ceil(pct * static_cast<double>(xs.size())));
    if (rank == 0) rank = 1;
    return xs[std::min(rank, xs.size()) - 1];
}

} // namespace detail

// Scores every C(|peer_set|, n_exploit) exploitation subset of one epoch.
// Per block the cost is the fastest subset member's relative time; symbolic
// records count as the block's worst observed time plus 1 ms, and blocks with
// no numeric record at all are skipped. Subsets in lexicographic order.
inline std::vector<SubsetScore> perigee_subset_scores(const EpochBatch& batch,
                                                      std::size_t n_exploit,
                                                      PerigeeAggregate agg = PerigeeAggregate::p90) {
    const std::vector<NodeId>& peers = batch.peer_set;
    if (peers.size() < n_exploit)
        throw std::runtime_error("perigee: peer set smaller than the exploitation budget");

    const double inf = std::numeric_limits<double>::infinity();
    // per block, per peer-index value with the symbolic penalty applied
    std::vector<std::vector<double>> block_values;
    for (const BlockObservation& obs : batch.blocks) {
        double worst = -inf;
        for (const DeliveryRecord& rec : obs.records)
            if (!rec.symbolic) worst = std::max(worst, rec.rel_time_ms);
        if (worst == -inf) continue; // all-symbolic block carries no ranking signal
        std::vector<double> vals(peers.size(), inf);
        for (const DeliveryRecord& rec : obs.records) {
            auto it = std::lower_bound(peers.begin(), peers.end(), rec.peer);
            if (it == peers.end() || *it != rec.peer) continue;
            std::size_t idx = static_cast<std::size_t>(it - peers.begin());
            vals[idx] = rec.symbolic ? worst + 1.0 : rec.rel_time_ms;
        }
        block_values.push_back(std::move(vals));
    }

    std::vector<SubsetScore> out;
    std::vector<std::size_t> idx(n_exploit);
    for (std::size_t i = 0; i < n_exploit; ++i) idx[i] = i;
    while (true) {
        SubsetScore s;
        for (std::size_t i : idx) s.subset.push_back(peers[i]);
        std::vector<double> costs;
        costs.reserve(block_values.size());
        for (const auto& vals : block_values) {
            double best = inf;
            for (std::size_t i : idx) best = std::min(best, vals[i]);
            costs.push_back(best);
        }
        if (costs.empty())
            s.score = 0.0;
        else if (agg == PerigeeAggregate::p90)
            s.score = detail::percentile_nearest_rank(costs, 0.9);
        else {
            s.score = 0.0;
            for (double c : costs) s.score += c;
        }
        out.push_back(std::move(s));

        // next combination in lexicographic order
        std::size_t i = n_exploit;
        while (i > 0) {
            --i;
            if (idx[i] != i + peers.size() - n_exploit) break;
            if (i == 0) return out;
        }
        ++idx[i];
        for (std::size_t j = i + 1; j < n_exploit; ++j) idx[j] = idx[j - 1] + 1;
    }
}

// Perigee subset selection: the best-scoring exploitation subset of the
// current peers (ties already resolved by lexicographic enumeration order),
// plus exploration from the same depleting-pool mechanism Goldfish uses.
// Depends on the single given epoch only.
inline SelectorDecision perigee_select(const EpochBatch& batch, std::size_t n_exploit,
                                       DepletingPool& pool, Rng& rng, NodeId self,
                                       const std::function<std::vector<NodeId>()>& universe_fn,
                                       std::size_t n_explore = 1,
                                       PerigeeAggregate agg = PerigeeAggregate::p90) {
    std::vector<SubsetScore> scored = perigee_subset_scores(batch, n_exploit, agg);
    const SubsetScore* best = &scored.front();
    for (const SubsetScore& s : scored)
        if (s.score < best->score) best = &s;

    SelectorDecision d;
    d.exploit = best->subset;
    // per-peer fallback ranking for apply_decision: lone-peer aggregate,
    // negated so that higher is better
    for (const SubsetScore& s : perigee_subset_scores(batch, 1, agg))
        d.scores.emplace_back(s.subset.front(), -s.score);

    std::vector<NodeId> exclude = d.exploit;
    exclude.push_back(self);
    for (std::size_t k = 0; k < n_explore; ++k) {
        std::optional<NodeId> pick = pool.draw(rng, exclude);
        if (!pick) {
            pool.refill(universe_fn());
            pick = pool.draw(rng, exclude);
        }
        if (!pick)
            throw std::runtime_error("perigee_select: network too small to draw exploration peer");
        d.explore.push_back(*pick);
        exclude.push_back(*pick);
    }
    return d;
}

} // namespace goldfish
