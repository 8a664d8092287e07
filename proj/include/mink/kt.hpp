// Satisfiability over the class of all temporal frames (K_t), the consistency
// notion behind maximal consistent sets.
//
// The decision procedure is a graph-shaped tableau: enumerate every
// propositionally saturated sign vector over the closure (an "atom"), then
// eliminate atoms whose F/P demands no coherent neighbour can fulfil, to a
// fixpoint. A goal is satisfiable iff some surviving atom contains it.

#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mink/formula.hpp"

namespace mink {

struct BudgetExceeded : std::runtime_error {
    BudgetExceeded() : std::runtime_error("resource budget exceeded") {}
};

// Counts engine work units (node expansions, candidate checks). Deterministic
// by construction; wall-clock is never consulted.
struct Budget {
    std::uint64_t limit;
    std::atomic<std::uint64_t> used{0};

    explicit Budget(std::uint64_t lim = UINT64_MAX) : limit(lim) {}
    void tick(std::uint64_t n = 1) {
        if (used.fetch_add(n, std::memory_order_relaxed) + n > limit) throw BudgetExceeded{};
    }
};

// A finite set of signed closure entries, read conjunctively.
using Goal = std::vector<int>;

// An atom: one sign per subformula, bit i = positive sign of subformula i.
using SignVector = std::uint64_t;

inline bool atom_contains_entry(SignVector a, int entry) {
    bool bit = (a >> ClosureTable::entry_sub(entry)) & 1u;
    return bit == ClosureTable::entry_positive(entry);
}

// All propositionally saturated sign vectors over the closure, in increasing
// numeric order.
std::vector<SignVector> enumerate_atoms(const ClosureTable& ct);

// The atoms satisfiable at a point of some temporal frame, i.e. the survivors
// of defect elimination. In increasing numeric order.
std::vector<SignVector> kt_satisfiable_atoms(const ClosureTable& ct, Budget& budget);

bool kt_sat(const ClosureTable& ct, const Goal& goal, Budget& budget);

// Test-only brute force: satisfiable in some temporal model with at most k
// worlds (all relations and valuations enumerated).
bool kt_sat_bounded_oracle(const ClosureTable& ct, const Goal& goal, int k, Budget& budget);

}  // namespace mink
