#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "runner.hpp"

namespace goldfish {

struct ExperimentConfig {
    enum class Topology { random2d, measured };

    Topology topology = Topology::random2d;
    std::string latency_file;      // measured topology source
    std::size_t measured_n = 0;    // preloaded measured matrix (optional)
    std::vector<double> measured_matrix;

    std::size_t n_nodes = 100;
    std::size_t n_publishers = 3;
    PublishDist pub_dist = PublishDist::uniform;
    std::size_t n_adapters = 1;
    Strategy strategy = Strategy::goldfish;
    std::size_t epochs = 300;
    std::size_t rounds_per_epoch = 40;
    std::size_t k_neighbors = 2;
    std::size_t max_steps = 2000;
    double reg_weight = 1e-4;
    double temperature = 0.0;
    std::vector<std::uint64_t> seeds = {1};
    double plane_size = 500.0;
    double node_delay_ms = 20.0;
    std::size_t max_out = 4;
    std::size_t max_in = 8;
    std::size_t n_exploit = 3;
    std::size_t n_explore = 1;
    std::size_t window = 3;
    std::size_t cadence = 2;
    bool trace_completions = false;

    RunnerConfig runner_config() const {
        RunnerConfig rc;
        rc.rounds_per_epoch = rounds_per_epoch;
        rc.k_neighbors = k_neighbors;
        rc.temperature = temperature;
        rc.reg_weight = reg_weight;
        rc.max_steps = max_steps;
        rc.n_exploit = n_exploit;
        rc.n_explore = n_explore;
        rc.schedule.window = window;
        rc.schedule.cadence = cadence;
        rc.schedule.pure_explore_position = window / 2;
        return rc;
    }
};

namespace detail {

// Round-half-even; ms values are reported with one decimal.
inline double round_ms(double v) {
    if (!std::isfinite(v)) return v;
    return std::nearbyint(v * 10.0) / 10.0;
}

inline double round_ratio(double v) {
    if (!std::isfinite(v)) return v;
    return std::nearbyint(v * 1000.0) / 1000.0;
}

inline double percentile_linear(std::vector<double> xs, double p) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    double h = (static_cast<double>(xs.size()) - 1.0) * p;
    std::size_t lo = static_cast<std::size_t>(h);
    double frac = h - static_cast<double>(lo);
    if (lo + 1 >= xs.size()) return xs.back();
    return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

inline double mean(const std::vector<double>& xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline std::size_t worker_count(std::size_t jobs) {
    std::size_t cap = std::thread::hardware_concurrency();
    if (cap == 0) cap = 1;
    if (const char* env = std::getenv("GOLDFISH_THREADS")) {
        char* end = nullptr;
        unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && v > 0) cap = static_cast<std::size_t>(v);
    }
    return std::min(jobs, cap);
}

// Runs fn(0..jobs-1) across worker threads; results must go into
// pre-allocated per-job slots so thread count never affects output.
template <typename Fn>
inline void parallel_for(std::size_t jobs, Fn&& fn) {
    std::size_t workers = worker_count(jobs);
    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= jobs) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// k distinct draws from `candidates` (partial Fisher-Yates).
inline std::vector<NodeId> sample_distinct(std::vector<NodeId> candidates, std::size_t k, Rng& rng) {
    if (k > candidates.size())
        throw std::invalid_argument("sample_distinct: not enough candidates");
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(candidates.size() - i));
        std::swap(candidates[i], candidates[j]);
    }
    candidates.resize(k);
    return candidates;
}

} // namespace detail

// Smallest distance whose cumulative probability mass reaches `target`;
// +infinity when the reachable mass falls short.
inline double coverage_distance(std::vector<std::pair<double, double>> dist_mass, double target) {
    std::sort(dist_mass.begin(), dist_mass.end());
    double cum = 0.0;
    for (const auto& [d, mass] : dist_mass) {
        if (!std::isfinite(d)) break;
        cum += mass;
        if (cum >= target - 1e-12) return d;
    }
    return std::numeric_limits<double>::infinity();
}

// Broadcast wasted latency of `node`: the exploitation-edge shortest-path
// distance covering 90% of the publishing probability mass, minus the same
// coverage distance under hypothetical direct connections to every publisher.
inline double wasted_latency(const UndirectedView& exploit_view, const NetworkGraph& g, NodeId node,
                             const std::vector<double>& publish_prob) {
    std::vector<double> dist = exploit_view.shortest_from(node);
    std::vector<std::pair<double, double>> topo, direct;
    for (NodeId p = 0; p < g.n_nodes(); ++p) {
        if (publish_prob[p] <= 0.0) continue;
        topo.emplace_back(dist[p], publish_prob[p]);
        direct.emplace_back(p == node ? 0.0 : edge_delay(g, node, p), publish_prob[p]);
    }
    double topo_cov = coverage_distance(std::move(topo), 0.9);
    if (!std::isfinite(topo_cov))
        std::cerr << "wasted_latency: node " << node
                  << " cannot reach 90% of the publishing mass over exploitation edges\n";
    double direct_cov = coverage_distance(std::move(direct), 0.9);
    return topo_cov - direct_cov;
}

inline double wasted_latency(const NetworkGraph& g, NodeId node,
                             const std::vector<double>& publish_prob) {
    double total = 0.0;
    for (double p : publish_prob) total += p;
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("wasted_latency: publish probabilities must sum to 1");
    UndirectedView view(g, EdgeFilter::exploit_only);
    return wasted_latency(view, g, node, publish_prob);
}

struct RunSetup {
    NetworkGraph graph;
    std::vector<NodeRole> roles;
    std::vector<double> publish_prob;
    std::vector<NodeId> publishers;
    std::vector<NodeId> adapters;
};

// Deterministic per-seed initial state: topology, publisher set and
// probabilities, adapter set. Strategy only affects how adapters act later,
// so paired runs share everything constructed here.
inline RunSetup make_run_setup(const ExperimentConfig& cfg, Strategy strategy, std::uint64_t seed) {
    NetworkGraph graph = [&] {
        if (cfg.topology == ExperimentConfig::Topology::random2d)
            return generate_random_graph(cfg.n_nodes, cfg.max_out, cfg.max_in, cfg.plane_size,
                                         cfg.node_delay_ms, derive_seed(seed, 0x70904));
        if (cfg.measured_n == 0)
            throw std::invalid_argument("make_run_setup: measured topology without a loaded matrix");
        if (cfg.n_nodes > cfg.measured_n)
            throw std::invalid_argument("make_run_setup: more nodes than latency-matrix rows");
        Rng rng(derive_seed(seed, 0xc171e5));
        std::vector<NodeId> all(cfg.measured_n);
        for (std::size_t i = 0; i < cfg.measured_n; ++i) all[i] = static_cast<NodeId>(i);
        std::vector<NodeId> keep = detail::sample_distinct(all, cfg.n_nodes, rng);
        std::vector<std::size_t> idx(keep.begin(), keep.end());
        LatencyModel model = LatencyModel::measured(
            cfg.n_nodes, subset_latency_matrix(cfg.measured_matrix, cfg.measured_n, idx),
            cfg.node_delay_ms);
        return generate_random_graph(std::move(model), cfg.max_out, cfg.max_in,
                                     derive_seed(seed, 0x70904));
    }();

    std::vector<NodeId> everyone(cfg.n_nodes);
    for (std::size_t i = 0; i < cfg.n_nodes; ++i) everyone[i] = static_cast<NodeId>(i);

    Rng pub_rng(derive_seed(seed, 0x9b15));
    std::vector<NodeId> publishers = detail::sample_distinct(everyone, cfg.n_publishers, pub_rng);
    std::sort(publishers.begin(), publishers.end());
    std::vector<double> prob =
        sample_publishers(cfg.n_nodes, cfg.pub_dist, publishers, derive_seed(seed, 0xd157));

    std::vector<NodeId> adapter_candidates;
    for (NodeId u : everyone)
        if (std::find(publishers.begin(), publishers.end(), u) == publishers.end())
            adapter_candidates.push_back(u);
    if (adapter_candidates.size() < cfg.n_adapters) adapter_candidates = everyone;
    Rng adapt_rng(derive_seed(seed, 0xada7));
    std::vector<NodeId> adapters =
        detail::sample_distinct(adapter_candidates, cfg.n_adapters, adapt_rng);
    std::sort(adapters.begin(), adapters.end());

    std::vector<NodeRole> roles(cfg.n_nodes);
    for (NodeId p : publishers) roles[p].is_publisher = true;
    for (std::size_t u = 0; u < cfg.n_nodes; ++u) roles[u].publish_prob = prob[u];
    for (NodeId a : adapters) {
        roles[a].is_adaptive = true;
        roles[a].strategy = strategy;
    }
    return {std::move(graph), std::move(roles), std::move(prob), std::move(publishers),
            std::move(adapters)};
}

inline void config_to_json(const ExperimentConfig& cfg, nlohmann::json& j) {
    j["topology"] = cfg.topology == ExperimentConfig::Topology::random2d ? "random2d" : "measured";
    if (!cfg.latency_file.empty()) j["latency_file"] = cfg.latency_file;
    j["n_nodes"] = cfg.n_nodes;
    j["n_publishers"] = cfg.n_publishers;
    j["pub_dist"] = cfg.pub_dist == PublishDist::exponential ? "exp"
                    : cfg.pub_dist == PublishDist::uniform   ? "unif"
                                                             : "fixed";
    j["n_adapters"] = cfg.n_adapters;
    j["epochs"] = cfg.epochs;
    j["rounds_per_epoch"] = cfg.rounds_per_epoch;
    j["k"] = cfg.k_neighbors;
    j["max_steps"] = cfg.max_steps;
    j["reg_weight"] = cfg.reg_weight;
    j["seeds"] = cfg.seeds;
    j["plane_size"] = cfg.plane_size;
    j["node_delay_ms"] = cfg.node_delay_ms;
    j["max_out"] = cfg.max_out;
    j["max_in"] = cfg.max_in;
    j["n_exploit"] = cfg.n_exploit;
    j["n_explore"] = cfg.n_explore;
    j["window"] = cfg.window;
    j["cadence"] = cfg.cadence;
}

// ---------------------------------------------------------------------------
// Global-optimal study: one adaptive node, publishers within the exploitation
// budget, success = holding direct connections to every publisher.
// ---------------------------------------------------------------------------

struct OptimalGraphOutcome {
    std::size_t non_optimal_epochs = 0; // epochs where exploit set != publisher set
    std::size_t far_epochs = 0;         // epochs with lambda(e)/lambda(0) > 0.05
    bool retained_within_budget = false;
    bool far_ok = false;
    std::vector<std::uint64_t> non_optimal_at; // epoch indices, for the histogram tail
    std::vector<DecisionLogEntry> decisions;
};

struct OptimalStudyResult {
    std::vector<OptimalGraphOutcome> graphs;
    std::size_t discovery_budget = 0; // epochs to explore every peer once
    double fraction_retained = 0.0;
    double fraction_far_ok = 0.0;
    std::string summary_json;
};

// Sum over publishers of (exploitation-edge Dijkstra distance - direct-edge
// latency) from the adapter.
inline double optimality_gap(const NetworkGraph& g, NodeId adapter,
                             const std::vector<NodeId>& publishers) {
    UndirectedView view(g, EdgeFilter::exploit_only);
    std::vector<double> dist = view.shortest_from(adapter);
    double gap = 0.0;
    for (NodeId p : publishers) gap += dist[p] - edge_delay(g, adapter, p);
    return gap;
}

// The unique optimum is direct connections to every publisher; with fewer
// publishers than exploitation slots the spare slots are unconstrained.
inline bool exploit_set_optimal(const NetworkGraph& g, NodeId adapter,
                                const std::vector<NodeId>& publishers) {
    std::vector<NodeId> exploit;
    for (const OutEdge& e : g.out_edges(adapter))
        if (e.role == EdgeRole::exploit) exploit.push_back(e.peer);
    for (NodeId p : publishers)
        if (std::find(exploit.begin(), exploit.end(), p) == exploit.end()) return false;
    return true;
}

inline OptimalStudyResult run_global_optimal_study(const ExperimentConfig& cfg,
                                                   std::size_t n_graphs,
                                                   const std::string& out_dir = "") {
    if (cfg.n_publishers > cfg.n_exploit)
        throw std::invalid_argument(
            "run_global_optimal_study: needs n_publishers <= n_exploit for a unique optimum");
    OptimalStudyResult result;
    result.graphs.resize(n_graphs);
    result.discovery_budget = cfg.n_nodes - 1 - cfg.n_exploit;
    const std::size_t far_deadline = result.discovery_budget / 2;
    const std::uint64_t master_seed = cfg.seeds.empty() ? 1 : cfg.seeds[0];

    detail::parallel_for(n_graphs, [&](std::size_t gi) {
        std::uint64_t seed = derive_seed(master_seed, 0x6a0000 + gi);
        RunSetup setup = make_run_setup(cfg, cfg.strategy, seed);
        NodeId adapter = setup.adapters.at(0);
        StrategyRunner runner(std::move(setup.graph), std::move(setup.roles),
                              cfg.runner_config(), seed);
        OptimalGraphOutcome& out = result.graphs[gi];
        double gap0 = 0.0;
        bool far_violation = false;
        std::uint64_t last_non_optimal = 0;
        bool any_non_optimal = false;
        for (std::size_t e = 0; e < cfg.epochs; ++e) {
            bool optimal = exploit_set_optimal(runner.graph(), adapter, setup.publishers);
            double gap = optimality_gap(runner.graph(), adapter, setup.publishers);
            if (e == 0) gap0 = gap;
            if (!optimal) {
                ++out.non_optimal_epochs;
                out.non_optimal_at.push_back(e);
                any_non_optimal = true;
                last_non_optimal = e;
            }
            bool far = gap > 0.05 * gap0 + 1e-9;
            if (far) {
                ++out.far_epochs;
                if (e >= far_deadline) far_violation = true;
            }
            runner.step_epoch();
        }
        out.retained_within_budget = !any_non_optimal || last_non_optimal < result.discovery_budget;
        out.far_ok = !far_violation;
        out.decisions = runner.decisions();
    });

    std::size_t retained = 0, far_ok = 0;
    for (const OptimalGraphOutcome& g : result.graphs) {
        if (g.retained_within_budget) ++retained;
        if (g.far_ok) ++far_ok;
    }
    result.fraction_retained = static_cast<double>(retained) / static_cast<double>(n_graphs);
    result.fraction_far_ok = static_cast<double>(far_ok) / static_cast<double>(n_graphs);

    nlohmann::json j;
    config_to_json(cfg, j["config"]);
    j["n_graphs"] = n_graphs;
    j["discovery_budget_epochs"] = result.discovery_budget;
    j["far_deadline_epoch"] = far_deadline;
    j["fraction_retained_within_budget"] = detail::round_ratio(result.fraction_retained);
    j["fraction_far_ok"] = detail::round_ratio(result.fraction_far_ok);
    nlohmann::json per_graph = nlohmann::json::array();
    for (std::size_t gi = 0; gi < n_graphs; ++gi) {
        const OptimalGraphOutcome& g = result.graphs[gi];
        per_graph.push_back({{"graph", gi},
                             {"non_optimal_epochs", g.non_optimal_epochs},
                             {"far_epochs", g.far_epochs},
                             {"retained_within_budget", g.retained_within_budget},
                             {"far_ok", g.far_ok}});
    }
    j["per_graph"] = std::move(per_graph);
    result.summary_json = j.dump(2) + "\n";

    if (!out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        std::ofstream(fs::path(out_dir) / "summary.json") << result.summary_json;

        auto write_histogram = [&](const std::string& name, auto getter) {
            std::map<std::size_t, std::size_t> hist;
            for (const OptimalGraphOutcome& g : result.graphs) ++hist[getter(g)];
            std::ofstream f(fs::path(out_dir) / name);
            f << "bucket,count\n";
            for (const auto& [bucket, count] : hist) f << bucket << ',' << count << '\n';
        };
        write_histogram("histogram.csv",
                        [](const OptimalGraphOutcome& g) { return g.non_optimal_epochs; });
        write_histogram("histogram_far.csv",
                        [](const OptimalGraphOutcome& g) { return g.far_epochs; });

        std::ofstream dec(fs::path(out_dir) / "decisions.csv");
        dec << "graph,epoch,node";
        for (std::size_t i = 1; i <= cfg.n_exploit; ++i) dec << ",exploit" << i;
        dec << ",explore\n";
        for (std::size_t gi = 0; gi < n_graphs; ++gi) {
            for (const DecisionLogEntry& d : result.graphs[gi].decisions) {
                dec << gi << ',' << d.epoch << ',' << d.node;
                for (std::size_t i = 0; i < cfg.n_exploit; ++i)
                    dec << ',' << (i < d.exploit.size() ? std::to_string(d.exploit[i]) : "");
                dec << ',';
                for (std::size_t i = 0; i < d.explore.size(); ++i)
                    dec << (i ? ";" : "") << d.explore[i];
                dec << '\n';
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Comparison study: paired Goldfish and Perigee runs on identical seeds,
// graphs and publisher draws; wasted latency percentiles per epoch.
// ---------------------------------------------------------------------------

struct ArmStats {
    // [seed][epoch][adapter]
    std::vector<std::vector<std::vector<double>>> wasted;
    std::vector<std::uint64_t> digests; // per seed
    std::vector<std::vector<DecisionLogEntry>> decisions;
};

struct ComparisonStudyResult {
    ArmStats goldfish;
    ArmStats perigee;
    std::vector<std::vector<NodeId>> adapters; // per seed; identical across arms
    double goldfish_final_mean = 0.0;
    double perigee_final_mean = 0.0;
    double goldfish_epoch0_mean = 0.0;
    double ratio_mean = 0.0;
    std::string summary_json;
};

inline ComparisonStudyResult run_comparison_study(const ExperimentConfig& cfg,
                                                  const std::string& out_dir = "") {
    ComparisonStudyResult result;
    const std::size_t n_seeds = cfg.seeds.size();
    for (ArmStats* arm : {&result.goldfish, &result.perigee}) {
        arm->wasted.resize(n_seeds);
        arm->digests.resize(n_seeds);
        arm->decisions.resize(n_seeds);
    }
    result.adapters.resize(n_seeds);

    detail::parallel_for(n_seeds * 2, [&](std::size_t job) {
        const std::size_t si = job / 2;
        const Strategy strategy = (job % 2 == 0) ? Strategy::goldfish : Strategy::perigee;
        ArmStats& arm = (job % 2 == 0) ? result.goldfish : result.perigee;
        const std::uint64_t seed = cfg.seeds[si];
        RunSetup setup = make_run_setup(cfg, strategy, seed);
        std::vector<double> prob = setup.publish_prob;
        std::vector<NodeId> adapters = setup.adapters;
        StrategyRunner runner(std::move(setup.graph), std::move(setup.roles),
                              cfg.runner_config(), seed);
        arm.digests[si] = runner.pre_adaptation_digest();
        arm.wasted[si].resize(cfg.epochs);
        for (std::size_t e = 0; e < cfg.epochs; ++e) {
            UndirectedView view(runner.graph(), EdgeFilter::exploit_only);
            std::vector<double>& row = arm.wasted[si][e];
            row.reserve(adapters.size());
            for (NodeId a : adapters)
                row.push_back(wasted_latency(view, runner.graph(), a, prob));
            runner.step_epoch();
        }
        arm.decisions[si] = runner.decisions();
        if (strategy == Strategy::goldfish) result.adapters[si] = adapters;
    });

    auto pooled = [&](const ArmStats& arm, std::size_t epoch) {
        std::vector<double> xs;
        for (std::size_t si = 0; si < n_seeds; ++si)
            xs.insert(xs.end(), arm.wasted[si][epoch].begin(), arm.wasted[si][epoch].end());
        return xs;
    };

    nlohmann::json j;
    config_to_json(cfg, j["config"]);
    nlohmann::json digests;
    for (std::size_t si = 0; si < n_seeds; ++si) {
        digests["goldfish"].push_back(detail::hex64(result.goldfish.digests[si]));
        digests["perigee"].push_back(detail::hex64(result.perigee.digests[si]));
    }
    j["digests"] = std::move(digests);

    nlohmann::json per_epoch = nlohmann::json::array();
    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        nlohmann::json row;
        row["epoch"] = e;
        for (const auto& [name, arm] :
             {std::pair<const char*, const ArmStats*>{"goldfish", &result.goldfish},
              std::pair<const char*, const ArmStats*>{"perigee", &result.perigee}}) {
            std::vector<double> xs = pooled(*arm, e);
            row[name] = {{"p25", detail::round_ms(detail::percentile_linear(xs, 0.25))},
                         {"p50", detail::round_ms(detail::percentile_linear(xs, 0.50))},
                         {"p75", detail::round_ms(detail::percentile_linear(xs, 0.75))},
                         {"mean", detail::round_ms(detail::mean(xs))}};
        }
        per_epoch.push_back(std::move(row));
    }
    j["per_epoch"] = std::move(per_epoch);

    const std::size_t last = cfg.epochs - 1;
    result.goldfish_final_mean = detail::mean(pooled(result.goldfish, last));
    result.perigee_final_mean = detail::mean(pooled(result.perigee, last));
    result.goldfish_epoch0_mean = detail::mean(pooled(result.goldfish, 0));
    result.ratio_mean = result.goldfish_final_mean / result.perigee_final_mean;
    j["final"] = {{"goldfish_mean", detail::round_ms(result.goldfish_final_mean)},
                  {"perigee_mean", detail::round_ms(result.perigee_final_mean)},
                  {"goldfish_epoch0_mean", detail::round_ms(result.goldfish_epoch0_mean)},
                  {"ratio_mean", detail::round_ratio(result.ratio_mean)}};
    result.summary_json = j.dump(2) + "\n";

    if (!out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        std::ofstream(fs::path(out_dir) / "summary.json") << result.summary_json;
        for (const auto& [name, arm] :
             {std::pair<const char*, const ArmStats*>{"goldfish", &result.goldfish},
              std::pair<const char*, const ArmStats*>{"perigee", &result.perigee}}) {
            fs::create_directories(fs::path(out_dir) / name);
            std::ofstream w(fs::path(out_dir) / name / "wasted.csv");
            w << "seed,epoch,node,wasted_ms\n";
            char buf[64];
            for (std::size_t si = 0; si < n_seeds; ++si) {
                for (std::size_t e = 0; e < cfg.epochs; ++e) {
                    const auto& row = arm->wasted[si][e];
                    for (std::size_t ai = 0; ai < row.size(); ++ai) {
                        std::snprintf(buf, sizeof(buf), "%.1f", row[ai]);
                        w << cfg.seeds[si] << ',' << e << ',' << result.adapters[si][ai] << ','
                          << buf << '\n';
                    }
                }
            }
            std::ofstream dec(fs::path(out_dir) / name / "decisions.csv");
            dec << "seed,epoch,node";
            for (std::size_t i = 1; i <= cfg.n_exploit; ++i) dec << ",exploit" << i;
            dec << ",explore\n";
            for (std::size_t si = 0; si < n_seeds; ++si) {
                for (const DecisionLogEntry& d : arm->decisions[si]) {
                    dec << cfg.seeds[si] << ',' << d.epoch << ',' << d.node;
                    for (std::size_t i = 0; i < cfg.n_exploit; ++i)
                        dec << ',' << (i < d.exploit.size() ? std::to_string(d.exploit[i]) : "");
                    dec << ',';
                    for (std::size_t i = 0; i < d.explore.size(); ++i)
                        dec << (i ? ";" : "") << d.explore[i];
                    dec << '\n';
                }
            }
        }
    }
    return result;
}

} // namespace goldfish
