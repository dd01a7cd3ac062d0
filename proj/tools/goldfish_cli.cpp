// Command-line driver: the two simulation studies plus a standalone matrix
// completer for dumped observation matrices.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "goldfish/goldfish.hpp"

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) seeds.push_back(std::stoull(tok));
    if (seeds.empty()) throw CLI::ValidationError("--seeds", "expected a comma-separated list");
    return seeds;
}

void load_measured(goldfish::ExperimentConfig& cfg) {
    if (cfg.topology != goldfish::ExperimentConfig::Topology::measured) return;
    if (cfg.latency_file.empty())
        throw CLI::ValidationError("--latency-file", "required for --topology measured");
    auto [n, matrix] = goldfish::load_latency_csv(cfg.latency_file);
    cfg.measured_n = n;
    cfg.measured_matrix = std::move(matrix);
}

std::string dump_completed(const goldfish::CompletedMatrix& M,
                           const goldfish::ObservationMatrix& T) {
    std::ostringstream out;
    for (std::size_t i = 0; i < T.p; ++i) {
        for (std::size_t j = 0; j < T.q; ++j) {
            if (j > 0) out << ' ';
            switch (T.class_at(i, j)) {
            case goldfish::CellClass::Observed:
                out << "t=" << goldfish::detail::format_double(M.value_at(i, j));
                break;
            case goldfish::CellClass::Estimable:
            case goldfish::CellClass::Ambiguous:
                out << "a=" << goldfish::detail::format_double(M.value_at(i, j));
                break;
            case goldfish::CellClass::SymbolicallyKnown: out << 'S'; break;
            default: out << 'X'; break;
            }
        }
        out << '\n';
    }
    return out.str();
}

nlohmann::json completion_json(const goldfish::NeighborAssignment& a,
                               const goldfish::CompletedMatrix& M) {
    nlohmann::json j;
    j["loss"] = M.final_loss;
    j["steps"] = M.steps_used;
    j["ambiguous_cells"] = M.ambiguous_count;
    j["A"] = M.estimates;
    j["C"] = M.offsets;
    nlohmann::json cells = nlohmann::json::array();
    for (std::size_t v = 0; v < a.size(); ++v)
        cells.push_back({{"row", a.cell_row[v]},
                         {"col", a.cell_col[v]},
                         {"neighbors", a.neighbors[v]},
                         {"weights", a.weights[v]}});
    j["cells"] = std::move(cells);
    return j;
}

int run_complete(const std::string& matrix_file, std::size_t k, std::size_t max_steps,
                 double reg_weight, double temperature, const std::string& residual_norm,
                 const std::string& json_out) {
    std::ifstream f(matrix_file);
    if (!f) {
        std::cerr << "cannot open " << matrix_file << "\n";
        return 1;
    }
    goldfish::ObservationMatrix T = goldfish::parse_matrix_dump(f);
    goldfish::reset_missing(T);
    goldfish::classify_missing(T, k);

    goldfish::CompletionProblem prob;
    prob.T = &T;
    prob.assignment = goldfish::assign_neighbors(T, k, temperature);
    prob.reg_weight = reg_weight;
    prob.max_steps = max_steps;
    if (residual_norm == "l2") {
        prob.norm = goldfish::ResidualNorm::l2;
        prob.line_search = false;
    }
    goldfish::CompletedMatrix M = goldfish::solve(prob);

    std::cout << "matrix: " << T.p << "x" << T.q << "\n"
              << "observed: " << T.count(goldfish::CellClass::Observed)
              << "  symbolic: " << T.count(goldfish::CellClass::SymbolicallyKnown)
              << "  estimable: " << T.count(goldfish::CellClass::Estimable)
              << "  ambiguous: " << T.count(goldfish::CellClass::Ambiguous)
              << "  infeasible: " << T.count(goldfish::CellClass::Infeasible) << "\n"
              << "loss: " << M.final_loss << "  steps: " << M.steps_used << "\n"
              << "completed matrix (common reference frame):\n"
              << dump_completed(M, T);
    if (!json_out.empty()) {
        std::ofstream out(json_out);
        out << completion_json(prob.assignment, M).dump(2) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Goldfish peer-selection simulator"};
    app.require_subcommand(1);

    goldfish::ExperimentConfig cfg;
    std::string out_dir = "out";

    // --- optimal ---
    auto* optimal = app.add_subcommand("optimal", "Global-optimal study: one adaptive node, "
                                                  "publishers within the exploitation budget");
    std::size_t n_graphs = 200;
    std::uint64_t seed = 1;
    optimal->add_option("--graphs", n_graphs, "number of random graphs");
    optimal->add_option("--nodes", cfg.n_nodes, "network size");
    optimal->add_option("--publishers", cfg.n_publishers, "publisher count");
    optimal->add_option("--epochs", cfg.epochs, "epochs per graph");
    optimal->add_option("--seed", seed, "master seed");
    optimal->add_option("--out", out_dir, "output directory");
    optimal->add_option("--rounds", cfg.rounds_per_epoch, "rounds per epoch");
    optimal->add_option("--k", cfg.k_neighbors, "nearest neighbors");
    optimal->add_option("--max-steps", cfg.max_steps, "optimization step cap");
    optimal->add_option("--reg-weight", cfg.reg_weight, "regularization weight");

    // --- compare ---
    auto* compare = app.add_subcommand("compare", "Paired Goldfish vs Perigee wasted-latency study");
    std::string topology = "random2d";
    std::string pub_dist = "exp";
    std::string seeds_csv = "1,2,3,4,5,6,7,8,9,10";
    compare->add_option("--topology", topology, "random2d|measured")
        ->check(CLI::IsMember({"random2d", "measured"}));
    compare->add_option("--latency-file", cfg.latency_file, "measured latency csv");
    compare->add_option("--nodes", cfg.n_nodes, "network size");
    compare->add_option("--pub-dist", pub_dist, "exp|unif")->check(CLI::IsMember({"exp", "unif"}));
    compare->add_option("--publishers", cfg.n_publishers, "publisher count");
    compare->add_option("--adapters", cfg.n_adapters, "adaptive node count");
    compare->add_option("--epochs", cfg.epochs, "epochs per run");
    compare->add_option("--seeds", seeds_csv, "comma-separated seed list");
    compare->add_option("--out", out_dir, "output directory");
    compare->add_option("--rounds", cfg.rounds_per_epoch, "rounds per epoch");
    compare->add_option("--k", cfg.k_neighbors, "nearest neighbors");
    compare->add_option("--max-steps", cfg.max_steps, "optimization step cap");
    compare->add_option("--reg-weight", cfg.reg_weight, "regularization weight");

    // --- complete ---
    auto* complete = app.add_subcommand("complete", "Run the matrix completer on a dumped matrix");
    std::string matrix_file;
    std::string residual_norm = "l2sq";
    std::string json_out;
    std::size_t k = 2;
    std::size_t max_steps = 2000;
    double reg_weight = 1e-4;
    double temperature = 0.0;
    complete->add_option("--matrix-file", matrix_file, "matrix dump file")->required();
    complete->add_option("--k", k, "nearest neighbors");
    complete->add_option("--max-steps", max_steps, "optimization step cap");
    complete->add_option("--reg-weight", reg_weight, "regularization weight");
    complete->add_option("--temperature", temperature, "softmax temperature (<=0: adaptive)");
    complete->add_option("--residual-norm", residual_norm, "l2sq (default) or the literal l2")
        ->check(CLI::IsMember({"l2sq", "l2"}));
    complete->add_option("--json-out", json_out, "write assignment/A/C/loss JSON here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(optimal)) {
            cfg.seeds = {seed};
            cfg.pub_dist = goldfish::PublishDist::uniform;
            cfg.n_adapters = 1;
            cfg.strategy = goldfish::Strategy::goldfish;
            goldfish::OptimalStudyResult res =
                goldfish::run_global_optimal_study(cfg, n_graphs, out_dir);
            std::cout << "graphs: " << n_graphs
                      << "\nretained optimum within " << res.discovery_budget
                      << " epochs: " << res.fraction_retained * 100.0 << "%"
                      << "\nnear-optimal from epoch " << res.discovery_budget / 2
                      << " on: " << res.fraction_far_ok * 100.0 << "%"
                      << "\nwrote " << out_dir << "/summary.json\n";
        } else if (app.got_subcommand(compare)) {
            cfg.topology = topology == "measured" ? goldfish::ExperimentConfig::Topology::measured
                                                  : goldfish::ExperimentConfig::Topology::random2d;
            cfg.pub_dist = pub_dist == "exp" ? goldfish::PublishDist::exponential
                                             : goldfish::PublishDist::uniform;
            cfg.seeds = parse_seed_list(seeds_csv);
            load_measured(cfg);
            goldfish::ComparisonStudyResult res = goldfish::run_comparison_study(cfg, out_dir);
            std::cout << "final-epoch mean wasted latency: goldfish "
                      << goldfish::detail::round_ms(res.goldfish_final_mean) << " ms, perigee "
                      << goldfish::detail::round_ms(res.perigee_final_mean) << " ms, ratio "
                      << goldfish::detail::round_ratio(res.ratio_mean) << "\nwrote " << out_dir
                      << "/summary.json\n";
        } else if (app.got_subcommand(complete)) {
            return run_complete(matrix_file, k, max_steps, reg_weight, temperature, residual_norm,
                                json_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
