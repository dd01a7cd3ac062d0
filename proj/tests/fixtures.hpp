// Shared test fixtures.
#pragma once

#include <vector>

#include "goldfish/observation.hpp"
#include "goldfish/rng.hpp"
#include "goldfish/simulation.hpp"

namespace fixtures {

using goldfish::DeliveryRecord;
using goldfish::EpochBatch;
using goldfish::NodeId;

inline DeliveryRecord obs(NodeId peer, std::uint64_t block, double rel) {
    return {peer, block, rel, false};
}

inline DeliveryRecord sym(NodeId peer, std::uint64_t block) { return {peer, block, 0.0, true}; }

// The two-epoch synthesized-matrix pattern: epoch 0 connects peers {1,2,4},
// epoch 1 connects peers {1,2,3}, four blocks each. Values are chosen so that
// rows 3, 5 and 6 differ by constant shifts on their common columns (their
// differential variance is exactly zero).
inline std::vector<EpochBatch> two_epoch_pattern() {
    EpochBatch e1;
    e1.epoch_id = 0;
    e1.peer_set = {1, 2, 4};
    e1.blocks = {
        {0, {obs(1, 0, 0.0), obs(2, 0, 5.0), obs(4, 0, 8.0)}},
        {1, {sym(1, 1), obs(2, 1, 0.0), sym(4, 1)}},
        {2, {obs(1, 2, 0.0), obs(2, 2, 6.0), obs(4, 2, 9.0)}},
        {3, {obs(1, 3, 4.0), obs(2, 3, 7.0), obs(4, 3, 0.0)}},
    };
    EpochBatch e2;
    e2.epoch_id = 1;
    e2.peer_set = {1, 2, 3};
    e2.blocks = {
        {4, {sym(1, 4), obs(2, 4, 0.0), sym(3, 4)}},
        {5, {obs(1, 5, 0.0), obs(2, 5, 3.0), obs(3, 5, 10.0)}},
        {6, {obs(1, 6, 0.0), obs(2, 6, 3.0), obs(3, 6, 10.0)}},
        {7, {sym(1, 7), obs(2, 7, 0.0), obs(3, 7, 2.0)}},
    };
    return {e1, e2};
}

// Noiseless shifted-row instance: observed cells satisfy
// value(i, j) = base[j] + shift[i], so every removed cell has a unique
// consistent raw value. Cells are removed only while all missing cells stay
// estimable at K=2.
struct RecoveryInstance {
    goldfish::ObservationMatrix matrix;
    std::vector<double> base;  // per column
    std::vector<double> shift; // per row

    double truth(std::size_t r, std::size_t u) const { return base[u] + shift[r]; }
};

inline RecoveryInstance make_recovery_instance(std::size_t p, std::size_t q, double remove_frac,
                                               std::uint64_t seed) {
    goldfish::Rng rng(seed);
    RecoveryInstance inst;
    inst.base.resize(q);
    inst.shift.resize(p);
    for (double& b : inst.base) b = rng.unit() * 300.0;
    for (double& s : inst.shift) s = (rng.unit() - 0.5) * 100.0;

    goldfish::ObservationMatrix T(p, q);
    for (std::size_t j = 0; j < q; ++j) T.col_peer[j] = static_cast<goldfish::NodeId>(j);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < q; ++j) {
            T.class_at(i, j) = goldfish::CellClass::Observed;
            T.value_at(i, j) = inst.truth(i, j);
        }

    std::vector<std::size_t> order(p * q);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::size_t budget = static_cast<std::size_t>(remove_frac * static_cast<double>(p * q));
    std::size_t removed = 0;
    auto all_estimable = [](goldfish::ObservationMatrix probe) {
        goldfish::classify_missing(probe, 2);
        return probe.count(goldfish::CellClass::Ambiguous) == 0 &&
               probe.count(goldfish::CellClass::Infeasible) == 0;
    };
    for (std::size_t idx : order) {
        if (removed >= budget) break;
        goldfish::CellClass saved = T.classes[idx];
        if (saved != goldfish::CellClass::Observed) continue;
        T.classes[idx] = goldfish::CellClass::Missing;
        if (all_estimable(T))
            ++removed;
        else
            T.classes[idx] = saved;
    }
    goldfish::classify_missing(T, 2);
    inst.matrix = std::move(T);
    return inst;
}

// Two fully observed rows plus one row with a single missing cell whose only
// qualifying neighbor is the first row; the rows differ by a constant shift
// of 2, so the missing raw value is 11.
inline goldfish::ObservationMatrix shifted_pair_matrix() {
    goldfish::ObservationMatrix T(2, 3);
    T.col_peer = {0, 1, 2};
    const double row0[3] = {0.0, 5.0, 9.0};
    const double row1[3] = {2.0, 7.0, 0.0};
    for (std::size_t j = 0; j < 3; ++j) {
        T.class_at(0, j) = goldfish::CellClass::Observed;
        T.value_at(0, j) = row0[j];
    }
    for (std::size_t j = 0; j < 2; ++j) {
        T.class_at(1, j) = goldfish::CellClass::Observed;
        T.value_at(1, j) = row1[j];
    }
    return T;
}

} // namespace fixtures
