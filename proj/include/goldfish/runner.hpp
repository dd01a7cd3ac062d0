#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "completion.hpp"
#include "graph.hpp"
#include "observation.hpp"
#include "perigee.hpp"
#include "selection.hpp"
#include "simulation.hpp"

namespace goldfish {

struct RunnerConfig {
    std::size_t rounds_per_epoch = 40;
    std::size_t k_neighbors = 2;
    double temperature = 0.0; // <= 0: per-cell adaptive softmax temperature
    double reg_weight = 1e-4;
    std::size_t max_steps = 2000;
    double step_size = 0.05;
    bool line_search = true;
    ResidualNorm norm = ResidualNorm::squared_l2;
    std::size_t n_exploit = 3;
    std::size_t n_explore = 1;
    Schedule schedule;
    PerigeeAggregate perigee_aggregate = PerigeeAggregate::p90;
};

struct DecisionLogEntry {
    std::uint64_t epoch = 0;
    NodeId node = 0;
    std::vector<NodeId> exploit;
    std::vector<NodeId> explore;
};

// Snapshot of one adaptive node's completion, for offline inspection.
struct CompletionTrace {
    std::uint64_t epoch = 0;
    NodeId node = 0;
    ObservationMatrix matrix;
    NeighborAssignment assignment;
    CompletedMatrix completed;
};

// Drives one simulated network: per epoch it floods the rounds, feeds each
// adaptive node's observations to its strategy, and applies the decisions to
// the shared graph in ascending node order.
class StrategyRunner {
public:
    StrategyRunner(NetworkGraph graph, std::vector<NodeRole> roles, RunnerConfig cfg,
                   std::uint64_t seed)
        : g_(std::move(graph)), roles_(std::move(roles)), cfg_(cfg), seed_(seed) {
        cfg_.schedule.validate();
        if (roles_.size() != g_.n_nodes())
            throw std::invalid_argument("StrategyRunner: role table size mismatch");
        for (NodeId u = 0; u < g_.n_nodes(); ++u) {
            if (!roles_[u].is_adaptive) continue;
            if (g_.n_nodes() < cfg_.n_exploit + cfg_.n_explore + 1)
                throw std::invalid_argument("StrategyRunner: network smaller than the connection budget");
            Agent a;
            a.id = u;
            a.strategy = roles_[u].strategy;
            a.rng = Rng(derive_seed(seed_, 0xa9e47u + u));
            agents_.push_back(std::move(a));
        }
        // adaptive nodes split their initial out-edges into exploitation and
        // exploration roles; static nodes keep everything as exploitation
        for (Agent& a : agents_) {
            const auto& edges = g_.out_edges(a.id);
            std::vector<std::pair<NodeId, EdgeRole>> wanted;
            for (std::size_t i = 0; i < edges.size(); ++i)
                wanted.emplace_back(edges[i].peer,
                                    i < cfg_.n_exploit ? EdgeRole::exploit : EdgeRole::explore);
            for (const auto& [peer, role] : wanted) g_.set_role(a.id, peer, role);
            a.pool.refill(exploration_universe(a.id));
        }
    }

    const NetworkGraph& graph() const { return g_; }
    const std::vector<NodeRole>& roles() const { return roles_; }
    std::uint64_t epoch() const { return epoch_; }
    const std::vector<DecisionLogEntry>& decisions() const { return decisions_; }
    const std::vector<CompletionTrace>& completion_traces() const { return traces_; }
    void set_trace_completions(bool on) { trace_completions_ = on; }

    std::vector<NodeId> adapters() const {
        std::vector<NodeId> ids;
        for (const Agent& a : agents_) ids.push_back(a.id);
        return ids;
    }

    // Digest of everything the adaptation loop starts from; paired runs of
    // different strategies must agree on it.
    std::uint64_t pre_adaptation_digest() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto mix = [&h](std::uint64_t x) {
            for (int i = 0; i < 8; ++i) {
                h ^= (x >> (8 * i)) & 0xff;
                h *= 0x100000001b3ULL;
            }
        };
        auto mixd = [&](double d) {
            std::uint64_t bits;
            static_assert(sizeof(bits) == sizeof(d));
            __builtin_memcpy(&bits, &d, sizeof(bits));
            mix(bits);
        };
        mix(g_.n_nodes());
        mix(g_.max_out());
        mix(g_.max_in());
        mixd(g_.latency().node_delay_ms());
        if (g_.latency().kind() == LatencyModel::Kind::planar2d) {
            for (const Position& p : g_.latency().positions()) {
                mixd(p.x);
                mixd(p.y);
            }
        } else {
            for (double d : g_.latency().matrix()) mixd(d);
        }
        for (NodeId u = 0; u < g_.n_nodes(); ++u)
            for (const OutEdge& e : g_.out_edges(u)) {
                mix(u);
                mix(e.peer);
                mix(e.role == EdgeRole::exploit ? 1 : 2);
            }
        for (const NodeRole& r : roles_) {
            mix(r.is_publisher ? 1 : 0);
            mixd(r.publish_prob);
            mix(r.is_adaptive ? 1 : 0);
        }
        mix(seed_);
        return h;
    }

    // One epoch: flood rounds, accumulate observations, let every adaptive
    // node act, advance the clock.
    void step_epoch() {
        EpochResult res = run_epoch(g_, roles_, cfg_.rounds_per_epoch,
                                    derive_seed(seed_, 0xe70c4u + epoch_),
                                    epoch_ * cfg_.rounds_per_epoch, epoch_);
        std::size_t bi = 0;
        for (Agent& a : agents_) {
            a.history.push_back(std::move(res.batches[bi++].second));
            std::size_t keep = a.strategy == Strategy::goldfish ? cfg_.schedule.window : 1;
            while (a.history.size() > keep) a.history.pop_front();
        }
        for (Agent& a : agents_) {
            if (a.strategy == Strategy::goldfish)
                step_goldfish(a);
            else
                step_perigee(a);
            DecisionLogEntry entry;
            entry.epoch = epoch_;
            entry.node = a.id;
            for (const OutEdge& e : g_.out_edges(a.id))
                (e.role == EdgeRole::exploit ? entry.exploit : entry.explore).push_back(e.peer);
            decisions_.push_back(std::move(entry));
        }
        ++epoch_;
    }

private:
    struct Agent {
        NodeId id = 0;
        Strategy strategy = Strategy::goldfish;
        DepletingPool pool;
        Rng rng{0};
        std::deque<EpochBatch> history;
    };

    // Everyone except the node itself and its current exploitation peers.
    std::vector<NodeId> exploration_universe(NodeId u) const {
        std::vector<NodeId> universe;
        universe.reserve(g_.n_nodes());
        for (NodeId v = 0; v < g_.n_nodes(); ++v) {
            if (v == u) continue;
            bool is_exploit_peer = false;
            for (const OutEdge& e : g_.out_edges(u))
                if (e.peer == v && e.role == EdgeRole::exploit) is_exploit_peer = true;
            if (!is_exploit_peer) universe.push_back(v);
        }
        return universe;
    }

    void step_goldfish(Agent& a) {
        auto universe_fn = [this, &a] { return exploration_universe(a.id); };
        if (step_schedule(cfg_.schedule, epoch_) == ScheduleAction::learn_and_select &&
            a.history.size() >= cfg_.schedule.window) {
            std::vector<EpochBatch> window(a.history.begin(), a.history.end());
            ObservationMatrix T = build_matrix(window);
            classify_missing(T, cfg_.k_neighbors);
            CompletionProblem prob;
            prob.T = &T;
            prob.assignment = assign_neighbors(T, cfg_.k_neighbors, cfg_.temperature);
            prob.reg_weight = cfg_.reg_weight;
            prob.max_steps = cfg_.max_steps;
            prob.step_size = cfg_.step_size;
            prob.line_search = cfg_.line_search;
            prob.norm = cfg_.norm;
            CompletedMatrix done = solve(prob);
            std::vector<std::pair<NodeId, double>> scores = score_peers(done, T);
            SelectorDecision d = select_peers(scores, a.pool, cfg_.n_exploit, cfg_.n_explore,
                                              a.rng, a.id, universe_fn);
            apply_decision(g_, a.id, d, a.pool, a.rng, universe_fn);
            if (trace_completions_)
                traces_.push_back(
                    {epoch_, a.id, std::move(T), std::move(prob.assignment), std::move(done)});
        } else {
            rotate_exploration(a);
        }
    }

    void step_perigee(Agent& a) {
        auto universe_fn = [this, &a] { return exploration_universe(a.id); };
        SelectorDecision d = perigee_select(a.history.back(), cfg_.n_exploit, a.pool, a.rng, a.id,
                                            universe_fn, cfg_.n_explore, cfg_.perigee_aggregate);
        apply_decision(g_, a.id, d, a.pool, a.rng, universe_fn);
    }

    // Swap each exploration edge for a fresh pool draw; exploitation edges
    // stay put. Undrawable or unplaceable replacements keep the old edge.
    void rotate_exploration(Agent& a) {
        std::vector<NodeId> old_targets;
        for (const OutEdge& e : g_.out_edges(a.id))
            if (e.role == EdgeRole::explore) old_targets.push_back(e.peer);
        for (NodeId old_target : old_targets) {
            std::size_t budget = g_.n_nodes() + 1;
            while (budget-- > 0) {
                std::vector<NodeId> exclude = self_and_current(g_, a.id);
                std::optional<NodeId> pick = a.pool.draw(a.rng, exclude);
                if (!pick) {
                    a.pool.refill(exploration_universe(a.id));
                    pick = a.pool.draw(a.rng, exclude);
                    if (!pick) break;
                }
                if (g_.in_degree(*pick) < g_.max_in()) {
                    g_.disconnect(a.id, old_target);
                    g_.connect(a.id, *pick, EdgeRole::explore);
                    break;
                }
                // saturated target: consume the draw and try the next one
            }
        }
    }

    NetworkGraph g_;
    std::vector<NodeRole> roles_;
    RunnerConfig cfg_;
    std::uint64_t seed_;
    std::uint64_t epoch_ = 0;
    std::vector<Agent> agents_;
    std::vector<DecisionLogEntry> decisions_;
    std::vector<CompletionTrace> traces_;
    bool trace_completions_ = false;
};

} // namespace goldfish
