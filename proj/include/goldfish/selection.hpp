#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "completion.hpp"
#include "graph.hpp"
#include "rng.hpp"

namespace goldfish {

// Exploration candidates drawn without replacement; refilled from a freshly
// computed universe once nothing is drawable. Guarantees every member of a
// universe is visited once per cycle.
class DepletingPool {
public:
    void refill(std::vector<NodeId> universe) {
        std::sort(universe.begin(), universe.end());
        universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
        remaining_ = std::move(universe);
    }

    bool empty() const { return remaining_.empty(); }
    const std::vector<NodeId>& remaining() const { return remaining_; }

    // Uniform draw among remaining \ exclude; removes and returns the drawn
    // peer. Excluded members stay in the pool for later cycles. nullopt when
    // nothing is drawable (caller refills and retries).
    std::optional<NodeId> draw(Rng& rng, std::span<const NodeId> exclude) {
        std::vector<std::size_t> eligible;
        eligible.reserve(remaining_.size());
        for (std::size_t i = 0; i < remaining_.size(); ++i)
            if (std::find(exclude.begin(), exclude.end(), remaining_[i]) == exclude.end())
                eligible.push_back(i);
        if (eligible.empty()) return std::nullopt;
        std::size_t pick = eligible[rng.below(eligible.size())];
        NodeId peer = remaining_[pick];
        remaining_.erase(remaining_.begin() + static_cast<std::ptrdiff_t>(pick));
        return peer;
    }

private:
    std::vector<NodeId> remaining_;
};

struct SelectorDecision {
    std::vector<NodeId> exploit;
    std::vector<NodeId> explore;
    std::vector<std::pair<NodeId, double>> scores; // per candidate peer, ascending id
};

// Learning cadence: a matrix is built over `window` trailing epochs and a
// learn-and-select runs every `cadence` epochs once enough history exists;
// all other epochs only rotate the exploration slot.
struct Schedule {
    std::size_t window = 3;
    std::size_t cadence = 2;
    std::size_t pure_explore_position = 1; // middle of the default window

    void validate() const {
        if (window < 1 || cadence < 1)
            throw std::invalid_argument("Schedule: window and cadence must be >= 1");
        if (pure_explore_position >= window)
            throw std::invalid_argument("Schedule: pure_explore_position must be < window");
    }
};

enum class ScheduleAction { learn_and_select, explore_only };

inline ScheduleAction step_schedule(const Schedule& s, std::uint64_t epoch) {
    if ((epoch + 1) % s.cadence == 0 && epoch + 1 >= s.window)
        return ScheduleAction::learn_and_select;
    return ScheduleAction::explore_only;
}

// Altruistic exploitation scores. Contributing peers are those observed
// delivering a block first at least once in the window (relative time zero);
// estimated cells alone never qualify a peer, which keeps spurious negative
// estimates from crediting peers that were never seen to be fast. Each block
// row credits its fastest defined contributing column (ties to the lowest
// peer id) with one baseline point plus one point per peer the local node
// served first (symbolic cell) in that row. A column's total is then divided
// by the number of window epochs its peer was connected, so a peer explored
// for a single epoch competes on equal footing with incumbents that had the
// whole window to accumulate wins. Returns a score for every column,
// ascending peer id.
inline std::vector<std::pair<NodeId, double>> score_peers(const CompletedMatrix& M,
                                                          const ObservationMatrix& T) {
    std::vector<bool> contributor(T.q, false);
    for (std::size_t i = 0; i < T.p; ++i)
        for (std::size_t j = 0; j < T.q; ++j)
            if (T.observed(i, j) && T.value_at(i, j) == 0.0) contributor[j] = true;

    std::vector<double> score(T.q, 0.0);
    for (std::size_t i = 0; i < T.p; ++i) {
        std::size_t best = T.q;
        for (std::size_t j = 0; j < T.q; ++j) {
            if (!M.defined_at(i, j) || !contributor[j]) continue;
            if (best == T.q || M.value_at(i, j) < M.value_at(i, best) ||
                (M.value_at(i, j) == M.value_at(i, best) && T.col_peer[j] < T.col_peer[best]))
                best = j;
        }
        if (best == T.q) continue; // row with no eligible defined values
        double bonus = 1.0;
        for (std::size_t j = 0; j < T.q; ++j)
            if (T.class_at(i, j) == CellClass::SymbolicallyKnown) bonus += 1.0;
        score[best] += bonus;
    }
    std::vector<std::pair<NodeId, double>> out;
    out.reserve(T.q);
    for (std::size_t j = 0; j < T.q; ++j) {
        double active = T.col_active_epochs.empty()
                            ? 1.0
                            : static_cast<double>(std::max<std::uint32_t>(T.col_active_epochs[j], 1));
        out.emplace_back(T.col_peer[j], score[j] / active);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// Candidates ranked by descending score, ties to the lower id.
inline std::vector<NodeId> rank_candidates(const std::vector<std::pair<NodeId, double>>& scores) {
    std::vector<std::pair<NodeId, double>> sorted = scores;
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<NodeId> out;
    out.reserve(sorted.size());
    for (const auto& [peer, s] : sorted) out.push_back(peer);
    return out;
}

// Top-n_exploit scored peers plus n_explore depleting-pool draws, excluding
// self and the chosen exploit peers. The pool refills through universe_fn
// when drained.
inline SelectorDecision select_peers(const std::vector<std::pair<NodeId, double>>& scores,
                                     DepletingPool& pool, std::size_t n_exploit,
                                     std::size_t n_explore, Rng& rng, NodeId self,
                                     const std::function<std::vector<NodeId>()>& universe_fn) {
    if (scores.size() < n_exploit)
        throw std::runtime_error("select_peers: only " + std::to_string(scores.size()) +
                                 " scored candidates for " + std::to_string(n_exploit) +
                                 " exploitation slots");
    SelectorDecision d;
    d.scores = scores;
    std::vector<NodeId> ranked = rank_candidates(scores);
    d.exploit.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n_exploit));

    std::vector<NodeId> exclude = d.exploit;
    exclude.push_back(self);
    for (std::size_t k = 0; k < n_explore; ++k) {
        std::optional<NodeId> pick = pool.draw(rng, exclude);
        if (!pick) {
            pool.refill(universe_fn());
            pick = pool.draw(rng, exclude);
        }
        if (!pick)
            throw std::runtime_error("select_peers: network too small to draw exploration peer");
        d.explore.push_back(*pick);
        exclude.push_back(*pick);
    }
    return d;
}

inline std::vector<NodeId> self_and_current(const NetworkGraph& g, NodeId u) {
    std::vector<NodeId> v{u};
    for (const OutEdge& e : g.out_edges(u)) v.push_back(e.peer);
    return v;
}

// Replaces u's out-edges with the decision. In-saturated exploitation targets
// fall back to the next best scored candidate, exploration targets to further
// pool draws; when nothing is placeable the previous edge is kept.
inline void apply_decision(NetworkGraph& g, NodeId u, const SelectorDecision& d,
                           DepletingPool& pool, Rng& rng,
                           const std::function<std::vector<NodeId>()>& universe_fn) {
    std::vector<OutEdge> previous = g.out_edges(u);
    while (!g.out_edges(u).empty())
        g.disconnect(u, g.out_edges(u).back().peer);

    auto keep_previous = [&](EdgeRole role) {
        for (const OutEdge& e : previous) {
            if (!g.has_out_edge(u, e.peer) && g.connect(u, e.peer, role)) {
                std::cerr << "apply_decision: node " << u << " kept previous peer " << e.peer
                          << " (no placeable replacement)\n";
                return;
            }
        }
        std::cerr << "apply_decision: node " << u << " left an out-slot unfilled\n";
    };

    std::vector<NodeId> ranked = rank_candidates(d.scores);
    for (NodeId target : d.exploit) {
        if (g.connect(u, target, EdgeRole::exploit)) continue;
        bool placed = false;
        for (NodeId alt : ranked) {
            if (g.connect(u, alt, EdgeRole::exploit)) {
                placed = true;
                break;
            }
        }
        if (!placed) keep_previous(EdgeRole::exploit);
    }

    for (NodeId target : d.explore) {
        if (g.connect(u, target, EdgeRole::explore)) continue;
        bool placed = false;
        // one full pool cycle bounds the retries
        std::size_t budget = g.n_nodes() + 1;
        while (budget-- > 0) {
            std::vector<NodeId> exclude = self_and_current(g, u);
            std::optional<NodeId> pick = pool.draw(rng, exclude);
            if (!pick) {
                pool.refill(universe_fn());
                pick = pool.draw(rng, exclude);
                if (!pick) break;
            }
            if (g.connect(u, *pick, EdgeRole::explore)) {
                placed = true;
                break;
            }
        }
        if (!placed) keep_previous(EdgeRole::explore);
    }
}

} // namespace goldfish
