#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>

#include "goldfish/graph.hpp"
#include "oracles.hpp"

using namespace goldfish;

namespace {

NetworkGraph planar_graph(std::vector<Position> pos, std::size_t max_out, std::size_t max_in,
                          double node_delay = 20.0) {
    std::size_t n = pos.size();
    return NetworkGraph(n, max_out, max_in, LatencyModel::planar(std::move(pos), node_delay));
}

std::vector<std::pair<NodeId, NodeId>> edge_list(const NetworkGraph& g) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId u = 0; u < g.n_nodes(); ++u)
        for (const OutEdge& e : g.out_edges(u)) edges.emplace_back(u, e.peer);
    return edges;
}

} // namespace

TEST_CASE("random graph respects degree constraints and is deterministic", "[graph]") {
    NetworkGraph g = generate_random_graph(100, 4, 8, 500.0, 20.0, 7);
    for (NodeId u = 0; u < 100; ++u) {
        REQUIRE(g.out_degree(u) == 4);
        REQUIRE(g.in_degree(u) <= 8);
        std::set<NodeId> targets;
        for (const OutEdge& e : g.out_edges(u)) {
            REQUIRE(e.peer != u);
            targets.insert(e.peer);
        }
        REQUIRE(targets.size() == 4); // no duplicate out-edges
    }
    // in/out views agree
    for (NodeId u = 0; u < 100; ++u)
        for (const OutEdge& e : g.out_edges(u)) {
            const auto& ins = g.in_edges(e.peer);
            REQUIRE(std::count(ins.begin(), ins.end(), u) == 1);
        }

    NetworkGraph g2 = generate_random_graph(100, 4, 8, 500.0, 20.0, 7);
    REQUIRE(edge_list(g) == edge_list(g2));
    for (NodeId u = 0; u < 100; ++u) {
        REQUIRE(g.latency().position(u).x == g2.latency().position(u).x);
        REQUIRE(g.latency().position(u).y == g2.latency().position(u).y);
    }

    NetworkGraph g3 = generate_random_graph(100, 4, 8, 500.0, 20.0, 8);
    REQUIRE(edge_list(g) != edge_list(g3));
}

TEST_CASE("five nodes with full degree budget force the complete digraph", "[graph]") {
    NetworkGraph g = generate_random_graph(5, 4, 4, 500.0, 20.0, 1);
    for (NodeId u = 0; u < 5; ++u) {
        REQUIRE(g.out_degree(u) == 4);
        for (NodeId v = 0; v < 5; ++v)
            if (u != v) REQUIRE(g.has_out_edge(u, v));
    }
}

TEST_CASE("infeasible generation parameters are rejected", "[graph]") {
    REQUIRE_THROWS_AS(generate_random_graph(4, 4, 8, 500.0, 20.0, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(generate_random_graph(10, 4, 3, 500.0, 20.0, 1), std::invalid_argument);
}

TEST_CASE("edge delay is node delay plus propagation", "[graph]") {
    NetworkGraph g = planar_graph({{0, 0}, {3, 4}, {0, 0}}, 2, 2);
    REQUIRE(edge_delay(g, 0, 1) == Catch::Approx(25.0)); // 3-4-5 triangle + 20
    REQUIRE(edge_delay(g, 0, 2) == 20.0);                // co-located nodes
    REQUIRE_THROWS_AS(edge_delay(g, 1, 1), std::invalid_argument);

    NetworkGraph m(2, 1, 1, LatencyModel::measured(2, {0.0, 37.0, 37.0, 0.0}, 20.0));
    REQUIRE(edge_delay(m, 0, 1) == 57.0);
}

TEST_CASE("shortest paths over a two-hop line", "[graph]") {
    // distances chosen so edge delays are 25 and 30
    NetworkGraph g = planar_graph({{0, 0}, {5, 0}, {15, 0}}, 2, 2);
    REQUIRE(g.connect(0, 1, EdgeRole::exploit));
    REQUIRE(g.connect(1, 2, EdgeRole::exploit));
    std::vector<double> d = shortest_paths(g, 0, EdgeFilter::all);
    REQUIRE(d[0] == 0.0);
    REQUIRE(d[1] == 25.0);
    REQUIRE(d[2] == 55.0);
}

TEST_CASE("unreachable nodes get infinite distance", "[graph]") {
    NetworkGraph g = planar_graph({{0, 0}, {5, 0}, {15, 0}}, 2, 2);
    REQUIRE(g.connect(0, 1, EdgeRole::exploit));
    std::vector<double> d = shortest_paths(g, 0, EdgeFilter::all);
    REQUIRE(std::isinf(d[2]));
}

TEST_CASE("Dijkstra matches exhaustive simple-path enumeration", "[graph][oracle]") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        Rng rng(derive_seed(99, seed));
        std::size_t n = 5 + rng.below(6); // 5..10 nodes
        std::size_t max_out = 2 + rng.below(2);
        NetworkGraph g = generate_random_graph(n, max_out, 2 * max_out, 300.0, 20.0,
                                               derive_seed(7, seed));
        // mark a few edges as exploration so both filters get exercised
        for (NodeId u = 0; u < n; ++u)
            if (rng.below(3) == 0) g.set_role(u, g.out_edges(u).back().peer, EdgeRole::explore);
        for (NodeId src = 0; src < n; ++src) {
            for (EdgeFilter f : {EdgeFilter::all, EdgeFilter::exploit_only}) {
                std::vector<double> fast = shortest_paths(g, src, f);
                std::vector<double> slow = oracle::exhaustive_shortest_paths(g, src, f);
                for (std::size_t v = 0; v < n; ++v) {
                    if (std::isinf(slow[v]))
                        REQUIRE(std::isinf(fast[v]));
                    else
                        REQUIRE(fast[v] == slow[v]); // exact: same left-to-right hop sums
                }
            }
        }
    }
}

TEST_CASE("shortest path properties on random graphs", "[graph][property]") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        NetworkGraph g = generate_random_graph(40, 3, 6, 500.0, 20.0, derive_seed(11, seed));
        Rng rng(seed);
        for (NodeId u = 0; u < 40; ++u)
            if (rng.below(2) == 0) g.set_role(u, g.out_edges(u).back().peer, EdgeRole::explore);

        NodeId src = static_cast<NodeId>(rng.below(40));
        std::vector<double> all = shortest_paths(g, src, EdgeFilter::all);
        std::vector<double> exploit = shortest_paths(g, src, EdgeFilter::exploit_only);
        REQUIRE(all[src] == 0.0);

        // fewer edges cannot shorten paths
        for (std::size_t v = 0; v < 40; ++v) REQUIRE(exploit[v] >= all[v]);

        // triangle property over the filtered edge set
        for (NodeId u = 0; u < 40; ++u)
            for (const OutEdge& e : g.out_edges(u)) {
                double w = edge_delay(g, u, e.peer);
                REQUIRE(all[e.peer] <= all[u] + w + 1e-9);
                REQUIRE(all[u] <= all[e.peer] + w + 1e-9);
            }

        // determinism
        REQUIRE(shortest_paths(g, src, EdgeFilter::all) == all);
    }
}

TEST_CASE("degree caps hold through connect/disconnect storms", "[graph][property]") {
    NetworkGraph g = generate_random_graph(20, 3, 6, 500.0, 20.0, 5);
    Rng rng(17);
    for (int step = 0; step < 2000; ++step) {
        NodeId u = static_cast<NodeId>(rng.below(20));
        NodeId v = static_cast<NodeId>(rng.below(20));
        if (rng.below(2) == 0) {
            g.connect(u, v, EdgeRole::exploit); // rejected silently when not allowed
        } else if (g.has_out_edge(u, v)) {
            g.disconnect(u, v);
        }
        for (NodeId w = 0; w < 20; ++w) {
            REQUIRE(g.out_degree(w) <= 3);
            REQUIRE(g.in_degree(w) <= 6);
        }
    }
}

TEST_CASE("latency csv loads and validates", "[graph][io]") {
    std::istringstream good("# nodes=3\n0,10,20\n10,0,30\n20,30,0\n");
    auto [n, m] = load_latency_csv(good);
    REQUIRE(n == 3);
    REQUIRE(m[0 * 3 + 1] == 10.0);
    REQUIRE(m[1 * 3 + 2] == 30.0);

    SECTION("asymmetric entries are averaged") {
        std::istringstream asym("# nodes=2\n0,10\n30,0\n");
        auto [n2, m2] = load_latency_csv(asym);
        REQUIRE(m2[1] == 20.0);
        REQUIRE(m2[2] == 20.0);
    }
    SECTION("bad inputs throw") {
        std::istringstream no_header("0,10\n10,0\n");
        REQUIRE_THROWS_AS(load_latency_csv(no_header), std::runtime_error);
        std::istringstream short_row("# nodes=2\n0,10\n10\n");
        REQUIRE_THROWS_AS(load_latency_csv(short_row), std::runtime_error);
        std::istringstream missing_row("# nodes=3\n0,1,2\n1,0,3\n");
        REQUIRE_THROWS_AS(load_latency_csv(missing_row), std::runtime_error);
        std::istringstream negative("# nodes=2\n0,-1\n-1,0\n");
        REQUIRE_THROWS_AS(load_latency_csv(negative), std::runtime_error);
        std::istringstream diag("# nodes=2\n1,2\n2,0\n");
        REQUIRE_THROWS_AS(load_latency_csv(diag), std::runtime_error);
    }
}

TEST_CASE("latency matrix subsetting", "[graph][io]") {
    std::vector<double> m = {0, 1, 2, 1, 0, 3, 2, 3, 0};
    std::vector<double> sub = subset_latency_matrix(m, 3, {2, 0});
    REQUIRE(sub == std::vector<double>{0, 2, 2, 0});
}
