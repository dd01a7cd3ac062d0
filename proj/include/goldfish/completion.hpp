#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "observation.hpp"

namespace goldfish {

// Unbiased variance of the element-wise difference of two block rows over
// their commonly observed columns. Zero for rows that differ by a constant
// shift; nullopt when fewer than 2 common observations exist.
inline std::optional<double> differential_variance(const ObservationMatrix& T, std::size_t r,
                                                   std::size_t i) {
    if (r == i)
        throw std::invalid_argument("differential_variance: rows must differ");
    double sum = 0.0, sumsq = 0.0;
    std::size_t n = 0;
    for (std::size_t j = 0; j < T.q; ++j) {
        if (!T.observed(r, j) || !T.observed(i, j)) continue;
        double d = T.value_at(r, j) - T.value_at(i, j);
        sum += d;
        sumsq += d * d;
        ++n;
    }
    if (n < 2) return std::nullopt;
    double mean = sum / static_cast<double>(n);
    double var = (sumsq - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1);
    return std::max(var, 0.0);
}

// K-NN structure for the estimable and ambiguous cells: per cell, its row and
// column, the chosen neighbor rows and their softmax weights (sum 1).
struct NeighborAssignment {
    std::vector<std::uint32_t> cell_row;
    std::vector<std::uint32_t> cell_col;
    std::vector<CellClass> cell_class;
    std::vector<std::vector<std::uint32_t>> neighbors;
    std::vector<std::vector<double>> weights;

    std::size_t size() const { return cell_row.size(); }
};

// Picks the up-to-K qualifying rows with smallest differential variance for
// every estimable/ambiguous cell. Weights are softmax(-variance / tau); with
// temperature <= 0 each cell uses tau = max(mean of its variances, 1e-6).
inline NeighborAssignment assign_neighbors(const ObservationMatrix& T, std::size_t K,
                                           double temperature = 0.0) {
    NeighborAssignment a;
    for (std::size_t r = 0; r < T.p; ++r) {
        for (std::size_t u = 0; u < T.q; ++u) {
            CellClass c = T.class_at(r, u);
            if (c != CellClass::Estimable && c != CellClass::Ambiguous) continue;

            // qualifying rows: observe column u and share >= 2 observed peers
            std::vector<std::pair<double, std::uint32_t>> ranked;
            for (std::size_t i = 0; i < T.p; ++i) {
                if (i == r || !T.observed(i, u)) continue;
                std::optional<double> g = differential_variance(T, r, i);
                if (g) ranked.emplace_back(*g, static_cast<std::uint32_t>(i));
            }
            std::sort(ranked.begin(), ranked.end());
            if (ranked.size() > K) ranked.resize(K);
            if (ranked.empty())
                throw std::logic_error("assign_neighbors: estimable cell with no qualifying row");

            double tau = temperature;
            if (tau <= 0.0) {
                double mean = 0.0;
                for (const auto& [g, i] : ranked) mean += g;
                mean /= static_cast<double>(ranked.size());
                tau = std::max(mean, 1e-6);
            }
            std::vector<std::uint32_t> ns;
            std::vector<double> ws;
            double total = 0.0;
            for (const auto& [g, i] : ranked) {
                ns.push_back(i);
                double w = std::exp(-g / tau);
                ws.push_back(w);
                total += w;
            }
            for (double& w : ws) w /= total;

            a.cell_row.push_back(static_cast<std::uint32_t>(r));
            a.cell_col.push_back(static_cast<std::uint32_t>(u));
            a.cell_class.push_back(c);
            a.neighbors.push_back(std::move(ns));
            a.weights.push_back(std::move(ws));
        }
    }
    return a;
}

enum class ResidualNorm { squared_l2, l2 };

// Completion problem over variables A (per-cell estimates in the common
// reference frame) and C (per-row offsets). The loss compares each cell's row
// against its neighbor rows on their shared observed columns plus the cell's
// own column, after lifting both rows by their offsets.
struct CompletionProblem {
    const ObservationMatrix* T = nullptr;
    NeighborAssignment assignment;
    double reg_weight = 1e-4;
    std::size_t max_steps = 2000;
    double step_size = 0.05;
    bool line_search = true; // exact line search on the quadratic; false = fixed step + halving
    ResidualNorm norm = ResidualNorm::squared_l2;
};

inline double loss(const CompletionProblem& prob, const std::vector<double>& A,
                   const std::vector<double>& C) {
    const ObservationMatrix& T = *prob.T;
    double total = 0.0;
    for (std::size_t v = 0; v < prob.assignment.size(); ++v) {
        std::size_t r = prob.assignment.cell_row[v];
        std::size_t col = prob.assignment.cell_col[v];
        const auto& ns = prob.assignment.neighbors[v];
        const auto& ws = prob.assignment.weights[v];
        for (std::size_t k = 0; k < ns.size(); ++k) {
            std::size_t o = ns[k];
            double sq = 0.0;
            for (std::size_t j = 0; j < T.q; ++j) {
                if (!T.observed(o, j) || !T.observed(r, j)) continue;
                double th = (T.value_at(o, j) + C[o]) - (T.value_at(r, j) + C[r]);
                sq += th * th;
            }
            // the cell's own column: row r contributes only the estimate, and
            // the row offset cancels out of this component
            double thc = T.value_at(o, col) + C[o] - A[v];
            sq += thc * thc;
            total += ws[k] * (prob.norm == ResidualNorm::squared_l2 ? sq : std::sqrt(sq));
        }
    }
    double reg = 0.0;
    for (double a : A) reg += a * a;
    for (double c : C) reg += c * c;
    return total + prob.reg_weight * reg;
}

// Analytic gradient of the loss with respect to (A, C). For the literal l2
// norm the subgradient at a zero residual block is taken as 0.
inline std::pair<std::vector<double>, std::vector<double>> gradient(const CompletionProblem& prob,
                                                                    const std::vector<double>& A,
                                                                    const std::vector<double>& C) {
    const ObservationMatrix& T = *prob.T;
    std::vector<double> gA(A.size(), 0.0), gC(C.size(), 0.0);
    std::vector<double> th_buf;
    std::vector<std::size_t> col_buf;
    for (std::size_t v = 0; v < prob.assignment.size(); ++v) {
        std::size_t r = prob.assignment.cell_row[v];
        std::size_t col = prob.assignment.cell_col[v];
        const auto& ns = prob.assignment.neighbors[v];
        const auto& ws = prob.assignment.weights[v];
        for (std::size_t k = 0; k < ns.size(); ++k) {
            std::size_t o = ns[k];
            th_buf.clear();
            col_buf.clear();
            double sq = 0.0;
            for (std::size_t j = 0; j < T.q; ++j) {
                if (!T.observed(o, j) || !T.observed(r, j)) continue;
                double th = (T.value_at(o, j) + C[o]) - (T.value_at(r, j) + C[r]);
                th_buf.push_back(th);
                col_buf.push_back(j);
                sq += th * th;
            }
            double thc = T.value_at(o, col) + C[o] - A[v];
            sq += thc * thc;

            double scale;
            if (prob.norm == ResidualNorm::squared_l2) {
                scale = 2.0 * ws[k];
            } else {
                double nrm = std::sqrt(sq);
                if (nrm == 0.0) continue;
                scale = ws[k] / nrm;
            }
            for (double th : th_buf) {
                gC[o] += scale * th;
                gC[r] -= scale * th;
            }
            gC[o] += scale * thc;
            gA[v] -= scale * thc;
        }
    }
    for (std::size_t v = 0; v < A.size(); ++v) gA[v] += 2.0 * prob.reg_weight * A[v];
    for (std::size_t i = 0; i < C.size(); ++i) gC[i] += 2.0 * prob.reg_weight * C[i];
    return {std::move(gA), std::move(gC)};
}

// Completed matrix in the common reference frame: observed cells lifted by
// their row offset, estimated cells straight from A. Symbolic and infeasible
// cells stay undefined.
struct CompletedMatrix {
    std::size_t p = 0, q = 0;
    std::vector<double> values;
    std::vector<std::uint8_t> defined;
    std::vector<double> offsets;   // final C
    std::vector<double> estimates; // final A, aligned with the assignment
    double final_loss = 0.0;
    std::size_t steps_used = 0;
    std::size_t ambiguous_count = 0;

    double value_at(std::size_t i, std::size_t j) const { return values[i * q + j]; }
    bool defined_at(std::size_t i, std::size_t j) const { return defined[i * q + j] != 0; }

    // Estimate for assignment cell v translated back to its row's raw frame.
    double raw_estimate(const NeighborAssignment& a, std::size_t v) const {
        return estimates[v] - offsets[a.cell_row[v]];
    }
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Flattened residual structure of a completion problem. Same loss and
// gradient as the public functions, with the observed-column scan done once
// up front instead of on every evaluation.
struct CompiledTerms {
    struct Term {
        std::uint32_t cell;   // index into A
        std::uint32_t row;    // row(v)
        std::uint32_t nbr;    // neighbor row o
        double weight;
        double col_value;     // T[o][col(v)]
        std::vector<double> diffs; // T[o][j] - T[r][j] over common observed j
    };
    std::vector<Term> terms;
    double reg_weight = 0.0;
    std::size_t n_cells = 0;
    std::size_t n_rows = 0;

    explicit CompiledTerms(const CompletionProblem& prob) {
        const ObservationMatrix& T = *prob.T;
        reg_weight = prob.reg_weight;
        n_cells = prob.assignment.size();
        n_rows = T.p;
        for (std::size_t v = 0; v < n_cells; ++v) {
            std::size_t r = prob.assignment.cell_row[v];
            std::size_t col = prob.assignment.cell_col[v];
            const auto& ns = prob.assignment.neighbors[v];
            const auto& ws = prob.assignment.weights[v];
            for (std::size_t k = 0; k < ns.size(); ++k) {
                Term t;
                t.cell = static_cast<std::uint32_t>(v);
                t.row = static_cast<std::uint32_t>(r);
                t.nbr = ns[k];
                t.weight = ws[k];
                t.col_value = T.value_at(ns[k], col);
                for (std::size_t j = 0; j < T.q; ++j)
                    if (T.observed(ns[k], j) && T.observed(r, j))
                        t.diffs.push_back(T.value_at(ns[k], j) - T.value_at(r, j));
                terms.push_back(std::move(t));
            }
        }
    }

    double loss(const std::vector<double>& A, const std::vector<double>& C, ResidualNorm norm) const {
        double total = 0.0;
        for (const Term& t : terms) {
            double delta = C[t.nbr] - C[t.row];
            double sq = 0.0;
            for (double d : t.diffs) {
                double th = d + delta;
                sq += th * th;
            }
            double thc = t.col_value + C[t.nbr] - A[t.cell];
            sq += thc * thc;
            total += t.weight * (norm == ResidualNorm::squared_l2 ? sq : std::sqrt(sq));
        }
        double reg = 0.0;
        for (double a : A) reg += a * a;
        for (double c : C) reg += c * c;
        return total + reg_weight * reg;
    }

    void gradient(const std::vector<double>& A, const std::vector<double>& C, ResidualNorm norm,
                  std::vector<double>& gA, std::vector<double>& gC) const {
        gA.assign(A.size(), 0.0);
        gC.assign(C.size(), 0.0);
        for (const Term& t : terms) {
            double delta = C[t.nbr] - C[t.row];
            double thc = t.col_value + C[t.nbr] - A[t.cell];
            double scale;
            double diff_sum = 0.0;
            if (norm == ResidualNorm::squared_l2) {
                scale = 2.0 * t.weight;
                for (double d : t.diffs) diff_sum += d + delta;
            } else {
                double sq = thc * thc;
                for (double d : t.diffs) {
                    double th = d + delta;
                    sq += th * th;
                    diff_sum += th;
                }
                double nrm = std::sqrt(sq);
                if (nrm == 0.0) continue;
                scale = t.weight / nrm;
            }
            gC[t.nbr] += scale * (diff_sum + thc);
            gC[t.row] -= scale * diff_sum;
            gA[t.cell] -= scale * thc;
        }
        for (std::size_t v = 0; v < A.size(); ++v) gA[v] += 2.0 * reg_weight * A[v];
        for (std::size_t i = 0; i < C.size(); ++i) gC[i] += 2.0 * reg_weight * C[i];
    }
};

} // namespace detail

// Gradient descent from A = C = 0. With line_search (default, quadratic loss
// only) the step along -g is the exact 1-D minimizer, computed via one extra
// gradient evaluation. The fixed-step schedule halves the step and restarts
// after 10 consecutive loss increases; five halvings exhaust into an error.
inline CompletedMatrix solve(const CompletionProblem& prob) {
    const ObservationMatrix& T = *prob.T;
    const std::size_t s = prob.assignment.size();

    CompletedMatrix M;
    M.p = T.p;
    M.q = T.q;
    M.values.assign(T.p * T.q, 0.0);
    M.defined.assign(T.p * T.q, 0);
    for (CellClass c : prob.assignment.cell_class)
        if (c == CellClass::Ambiguous) ++M.ambiguous_count;

    std::vector<double> A(s, 0.0), C(T.p, 0.0);
    const bool exact_ls = prob.line_search && prob.norm == ResidualNorm::squared_l2;

    if (s > 0) {
        detail::CompiledTerms compiled(prob);
        std::vector<double> gA, gC, hA, hC, A2, C2;
        double step = prob.step_size;
        int halvings = 0;
        while (true) {
            std::fill(A.begin(), A.end(), 0.0);
            std::fill(C.begin(), C.end(), 0.0);
            double prev = compiled.loss(A, C, prob.norm);
            int consecutive_up = 0;
            bool diverged = false;
            std::size_t steps = 0;
            while (steps < prob.max_steps) {
                compiled.gradient(A, C, prob.norm, gA, gC);
                double t = step;
                if (exact_ls) {
                    // H*g for a quadratic equals grad(x+g) - grad(x)
                    A2 = A;
                    C2 = C;
                    for (std::size_t i = 0; i < A2.size(); ++i) A2[i] += gA[i];
                    for (std::size_t i = 0; i < C2.size(); ++i) C2[i] += gC[i];
                    compiled.gradient(A2, C2, prob.norm, hA, hC);
                    for (std::size_t i = 0; i < hA.size(); ++i) hA[i] -= gA[i];
                    for (std::size_t i = 0; i < hC.size(); ++i) hC[i] -= gC[i];
                    double gg = detail::dot(gA, gA) + detail::dot(gC, gC);
                    double gHg = detail::dot(gA, hA) + detail::dot(gC, hC);
                    if (gg == 0.0 || gHg <= 0.0) break; // stationary (or numeric floor)
                    t = gg / gHg;
                }
                for (std::size_t i = 0; i < A.size(); ++i) A[i] -= t * gA[i];
                for (std::size_t i = 0; i < C.size(); ++i) C[i] -= t * gC[i];
                ++steps;
                double cur = compiled.loss(A, C, prob.norm);
                if (!std::isfinite(cur)) {
                    diverged = true;
                    break;
                }
                if (cur > prev) {
                    if (exact_ls) break; // numeric floor reached
                    if (++consecutive_up >= 10) {
                        diverged = true;
                        break;
                    }
                } else {
                    consecutive_up = 0;
                    if (prev - cur <= 1e-8 * prev) {
                        prev = cur;
                        break;
                    }
                }
                prev = cur;
            }
            M.steps_used = steps;
            if (!diverged) break;
            if (++halvings > 5)
                throw std::runtime_error(
                    "solve: gradient descent diverged after 5 step halvings (final step " +
                    std::to_string(step) + ")");
            step *= 0.5;
        }
    }

    M.offsets = C;
    M.estimates = A;
    M.final_loss = loss(prob, A, C);
    for (std::size_t i = 0; i < T.p; ++i) {
        for (std::size_t j = 0; j < T.q; ++j) {
            if (T.observed(i, j)) {
                M.values[i * T.q + j] = T.value_at(i, j) + C[i];
                M.defined[i * T.q + j] = 1;
            }
        }
    }
    for (std::size_t v = 0; v < s; ++v) {
        std::size_t i = prob.assignment.cell_row[v];
        std::size_t j = prob.assignment.cell_col[v];
        M.values[i * T.q + j] = A[v];
        M.defined[i * T.q + j] = 1;
    }
    return M;
}

} // namespace goldfish
