// Satisfiability and validity over the two-dimensional ordered plane, via the
// four-quadrant assembly around a center point: the formula holds at the
// center iff each quadrant's boundary is fabricated with the axis traces and
// the center as the pinned corner.

#pragma once

#include "mink/fabrication.hpp"

namespace mink {

enum class Answer { Sat, Unsat, Valid, NotValid, Budget };

const char* answer_name(Answer a);

// Satisfying-point witness: the center MCS, the four axis bi-traces, and the
// four fabricated quadrant biboundaries with their derivations.
struct Witness {
    McsId center = -1;
    BiTrace north, east, south, west;
    Biboundary ne, nw, se, sw;
    Derivation ne_d, nw_d, se_d, sw_d;
};

struct Verdict {
    Answer answer = Answer::Budget;
    std::optional<Witness> witness;
    std::uint64_t budget_used = 0;
    int mcs_count = 0;
    int cluster_count = 0;
    int trace_count = 0;
};

// reflexive = true decides over the reflexive order by rewriting the formula;
// the witness then refers to the rewritten formula's closure.
Verdict decide_sat_minkowski(const FormulaPtr& phi, bool reflexive, EngineKind engine,
                             Budget& budget, unsigned seed = 0, int threads = 1);
// Valid iff the negation is unsatisfiable.
Verdict decide_valid_minkowski(const FormulaPtr& phi, bool reflexive, EngineKind engine,
                               Budget& budget, unsigned seed = 0, int threads = 1);

// Rebuilds the four quadrants' membership and re-checks their derivations
// against a fresh context for the formula; used by certificate checking.
bool check_witness_minkowski(const ClosureContext& ctx, const Witness& w, Budget& budget,
                             std::string* why = nullptr);

}  // namespace mink
