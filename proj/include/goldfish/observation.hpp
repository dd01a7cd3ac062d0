#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "simulation.hpp"

namespace goldfish {

// Missing is the pre-classification state; classify_missing refines every
// Missing cell into Estimable, Ambiguous or Infeasible.
enum class CellClass : std::uint8_t {
    Missing,
    Observed,
    SymbolicallyKnown,
    Estimable,
    Ambiguous,
    Infeasible,
};

// Partially observed block x peer matrix. Rows concatenate epochs along the
// block axis; columns are the union of the epochs' peer sets in first-seen
// order. Values are meaningful only where the class is Observed.
struct ObservationMatrix {
    std::size_t p = 0; // rows (blocks)
    std::size_t q = 0; // columns (peers)
    std::vector<double> values;
    std::vector<CellClass> classes;
    std::vector<std::uint64_t> row_epoch;
    std::vector<std::uint64_t> row_block;
    std::vector<NodeId> col_peer;
    // number of merged epochs whose peer set contained the column's peer;
    // newly explored peers carry fewer active epochs than incumbents
    std::vector<std::uint32_t> col_active_epochs;

    ObservationMatrix() = default;
    ObservationMatrix(std::size_t rows, std::size_t cols)
        : p(rows), q(cols), values(rows * cols, 0.0), classes(rows * cols, CellClass::Missing),
          row_epoch(rows, 0), row_block(rows, 0), col_peer(cols, 0), col_active_epochs(cols, 1) {}

    double& value_at(std::size_t i, std::size_t j) { return values[i * q + j]; }
    double value_at(std::size_t i, std::size_t j) const { return values[i * q + j]; }
    CellClass& class_at(std::size_t i, std::size_t j) { return classes[i * q + j]; }
    CellClass class_at(std::size_t i, std::size_t j) const { return classes[i * q + j]; }
    bool observed(std::size_t i, std::size_t j) const {
        return classes[i * q + j] == CellClass::Observed;
    }

    // Column index of a peer, or q when the peer has no column.
    std::size_t col_index(NodeId peer) const {
        for (std::size_t j = 0; j < q; ++j)
            if (col_peer[j] == peer) return j;
        return q;
    }

    std::size_t count(CellClass c) const {
        return static_cast<std::size_t>(std::count(classes.begin(), classes.end(), c));
    }
};

// Merges consecutive epoch batches into one matrix. Cells covered by a
// record become Observed (numeric) or SymbolicallyKnown; everything else in
// the row stays Missing, including columns for peers that were not connected
// during that row's epoch.
inline ObservationMatrix build_matrix(const std::vector<EpochBatch>& batches) {
    if (batches.empty())
        throw std::invalid_argument("build_matrix: need at least one batch");

    std::vector<NodeId> columns;
    for (const EpochBatch& b : batches) {
        std::vector<NodeId> fresh;
        for (NodeId peer : b.peer_set)
            if (std::find(columns.begin(), columns.end(), peer) == columns.end())
                fresh.push_back(peer);
        std::sort(fresh.begin(), fresh.end());
        columns.insert(columns.end(), fresh.begin(), fresh.end());
    }

    std::size_t rows = 0;
    for (const EpochBatch& b : batches) rows += b.n_blocks();

    ObservationMatrix T(rows, columns.size());
    T.col_peer = columns;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        std::uint32_t active = 0;
        for (const EpochBatch& b : batches)
            if (std::find(b.peer_set.begin(), b.peer_set.end(), columns[j]) != b.peer_set.end())
                ++active;
        T.col_active_epochs[j] = active;
    }

    std::size_t r = 0;
    for (const EpochBatch& b : batches) {
        for (const BlockObservation& obs : b.blocks) {
            T.row_epoch[r] = b.epoch_id;
            T.row_block[r] = obs.block;
            for (const DeliveryRecord& rec : obs.records) {
                std::size_t j = T.col_index(rec.peer);
                if (j == T.q)
                    throw std::invalid_argument("build_matrix: record peer missing from peer sets");
                if (rec.symbolic) {
                    T.class_at(r, j) = CellClass::SymbolicallyKnown;
                } else {
                    T.class_at(r, j) = CellClass::Observed;
                    T.value_at(r, j) = rec.rel_time_ms;
                }
            }
            ++r;
        }
    }
    return T;
}

// Refines Missing cells. A missing cell (r,u) is estimable when at least K
// other rows observe peer u and share >= 2 observed peers with row r;
// ambiguous when at least one but fewer than K such rows exist; infeasible
// when none exists or row r itself has fewer than 2 observations. Symbolic
// cells never count as observations here. Idempotent.
inline void classify_missing(ObservationMatrix& T, std::size_t K) {
    if (K == 0)
        throw std::invalid_argument("classify_missing: K must be >= 1");
    std::vector<std::size_t> obs_count(T.p, 0);
    for (std::size_t i = 0; i < T.p; ++i)
        for (std::size_t j = 0; j < T.q; ++j)
            if (T.observed(i, j)) ++obs_count[i];

    auto common_observed = [&](std::size_t a, std::size_t b) {
        std::size_t c = 0;
        for (std::size_t j = 0; j < T.q; ++j)
            if (T.observed(a, j) && T.observed(b, j)) ++c;
        return c;
    };

    for (std::size_t r = 0; r < T.p; ++r) {
        for (std::size_t u = 0; u < T.q; ++u) {
            CellClass& c = T.class_at(r, u);
            if (c == CellClass::Observed || c == CellClass::SymbolicallyKnown) continue;
            if (obs_count[r] < 2) {
                c = CellClass::Infeasible;
                continue;
            }
            std::size_t qualifying = 0;
            for (std::size_t i = 0; i < T.p; ++i) {
                if (i == r || !T.observed(i, u)) continue;
                if (common_observed(i, r) >= 2) ++qualifying;
            }
            if (qualifying >= K)
                c = CellClass::Estimable;
            else if (qualifying >= 1)
                c = CellClass::Ambiguous;
            else
                c = CellClass::Infeasible;
        }
    }
}

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace detail

// Debug dump mirroring the synthesized-matrix notation: one line per row,
// cells as `t=<ms>` (observed), `S` (symbolic), `E`/`A`/`X` (estimable /
// ambiguous / infeasible) or `*` (unclassified missing).
inline std::string dump_matrix(const ObservationMatrix& T) {
    std::ostringstream out;
    for (std::size_t i = 0; i < T.p; ++i) {
        for (std::size_t j = 0; j < T.q; ++j) {
            if (j > 0) out << ' ';
            switch (T.class_at(i, j)) {
            case CellClass::Observed: out << "t=" << detail::format_double(T.value_at(i, j)); break;
            case CellClass::SymbolicallyKnown: out << 'S'; break;
            case CellClass::Estimable: out << 'E'; break;
            case CellClass::Ambiguous: out << 'A'; break;
            case CellClass::Infeasible: out << 'X'; break;
            case CellClass::Missing: out << '*'; break;
            }
        }
        out << '\n';
    }
    return out.str();
}

// Parses the dump format back. Column peers are numbered 0..q-1 and epoch
// ids are lost; good enough for the standalone completer tool.
inline ObservationMatrix parse_matrix_dump(std::istream& is) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        std::stringstream ss(line);
        std::vector<std::string> cells;
        std::string tok;
        while (ss >> tok) cells.push_back(tok);
        if (!cells.empty()) rows.push_back(std::move(cells));
    }
    if (rows.empty())
        throw std::runtime_error("matrix dump: no rows");
    std::size_t q = rows[0].size();
    for (const auto& r : rows)
        if (r.size() != q)
            throw std::runtime_error("matrix dump: ragged rows");
    ObservationMatrix T(rows.size(), q);
    for (std::size_t j = 0; j < q; ++j) T.col_peer[j] = static_cast<NodeId>(j);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < q; ++j) {
            const std::string& tok = rows[i][j];
            if (tok.rfind("t=", 0) == 0) {
                T.class_at(i, j) = CellClass::Observed;
                T.value_at(i, j) = std::stod(tok.substr(2));
            } else if (tok == "S") {
                T.class_at(i, j) = CellClass::SymbolicallyKnown;
            } else if (tok == "E") {
                T.class_at(i, j) = CellClass::Estimable;
            } else if (tok == "A") {
                T.class_at(i, j) = CellClass::Ambiguous;
            } else if (tok == "X") {
                T.class_at(i, j) = CellClass::Infeasible;
            } else if (tok == "*") {
                T.class_at(i, j) = CellClass::Missing;
            } else {
                throw std::runtime_error("matrix dump: bad token '" + tok + "'");
            }
        }
    }
    return T;
}

inline ObservationMatrix parse_matrix_dump(const std::string& text) {
    std::istringstream ss(text);
    return parse_matrix_dump(ss);
}

// Resets any refined missing classes back to Missing (used before
// reclassifying a parsed dump with a different K).
inline void reset_missing(ObservationMatrix& T) {
    for (CellClass& c : T.classes)
        if (c == CellClass::Estimable || c == CellClass::Ambiguous || c == CellClass::Infeasible)
            c = CellClass::Missing;
}

} // namespace goldfish
