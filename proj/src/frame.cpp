#include "mink/frame.hpp"

#include <bit>
#include <functional>
#include <map>
#include <tuple>

namespace mink {

namespace {

enum Quad { QNE = 0, QNW = 1, QSE = 2, QSW = 3 };

// Per quadrant: which MCS can sit at the pinned corner given the two axis
// traces (keyed by trace index), plus one representative biboundary for
// witness extraction.
struct Tables {
    std::map<std::pair<int, int>, std::uint64_t> mask[4];
    std::map<std::tuple<int, int, McsId>, Biboundary> rep[4];

    std::uint64_t get(int q, int a, int b) const {
        auto it = mask[q].find({a, b});
        return it == mask[q].end() ? 0 : it->second;
    }
    void put(int q, int a, int b, McsId m, const Biboundary& d) {
        mask[q][{a, b}] |= std::uint64_t{1} << m;
        rep[q].emplace(std::make_tuple(a, b, m), d);
    }
};

// The quadrant roles of a fabricated biboundary. NE pins (W=north axis,
// S=east axis, b=center); NW pins (S=west, E=north, r); SE pins (W=south,
// N=east, l); SW pins (N=west, E=south, t). The minus/plus bindings of the
// assembly follow from validity condition B3, so membership alone suffices.
void classify(const Biboundary& d, const std::map<BiTrace, int>& idx, Tables& t) {
    auto ix = [&](const BiTrace& tr) { return idx.at(tr); };
    if (d.s && d.w && d.b) t.put(QNE, ix(*d.w), ix(*d.s), *d.b, d);
    if (d.s && d.e && d.r) t.put(QNW, ix(*d.s), ix(*d.e), *d.r, d);
    if (d.n && d.w && d.l) t.put(QSE, ix(*d.w), ix(*d.n), *d.l, d);
    if (d.n && d.e && d.t) t.put(QSW, ix(*d.n), ix(*d.e), *d.t, d);
}

void fill_top_down(const ClosureContext& ctx, Fabricator& top, const std::vector<BiTrace>& traces,
                   const std::map<BiTrace, int>& idx, std::uint64_t phi_mask, Tables& t,
                   Budget& budget) {
    std::vector<std::optional<BiTrace>> any{std::nullopt};
    for (const auto& tr : traces) any.emplace_back(tr);
    int nt = static_cast<int>(traces.size());

    auto consider = [&](const Biboundary& d) {
        std::optional<McsId> pins[4] = {
            (d.s && d.w) ? d.b : std::nullopt, (d.s && d.e) ? d.r : std::nullopt,
            (d.n && d.w) ? d.l : std::nullopt, (d.n && d.e) ? d.t : std::nullopt};
        bool useful = false;
        for (auto& p : pins)
            if (p && (phi_mask >> *p) & 1) useful = true;
        if (!useful || !top.is_fabricated(d)) return;
        classify(d, idx, t);
    };

    for (int i = 0; i < nt; ++i) {
        for (int j = 0; j < nt; ++j) {
            budget.tick();
            // NE: W = traces[i] (north axis), S = traces[j] (east axis)
            if (traces[i].initial_upper() == traces[j].initial_upper()) {
                ClusterId minus = traces[i].initial_upper();
                for (ClusterId plus = 0; plus < ctx.cluster_count(); ++plus)
                    for (const auto& d : enumerate_with_edges(ctx, minus, plus, any, {traces[j]},
                                                              any, {traces[i]}, budget))
                        consider(d);
            }
            // NW: S = traces[i] (west axis), E = traces[j] (north axis)
            {
                ClusterId minus = traces[i].initial_upper();
                ClusterId plus = traces[j].final_lower();
                for (const auto& d : enumerate_with_edges(ctx, minus, plus, any, {traces[i]},
                                                          {traces[j]}, any, budget))
                    consider(d);
            }
            // SE: W = traces[i] (south axis), N = traces[j] (east axis)
            {
                ClusterId minus = traces[i].initial_upper();
                ClusterId plus = traces[j].final_lower();
                for (const auto& d : enumerate_with_edges(ctx, minus, plus, {traces[j]}, any, any,
                                                          {traces[i]}, budget))
                    consider(d);
            }
            // SW: N = traces[i] (west axis), E = traces[j] (south axis)
            if (traces[i].final_lower() == traces[j].final_lower()) {
                ClusterId plus = traces[i].final_lower();
                for (ClusterId minus = 0; minus < ctx.cluster_count(); ++minus)
                    for (const auto& d : enumerate_with_edges(ctx, minus, plus, {traces[i]}, any,
                                                              {traces[j]}, any, budget))
                        consider(d);
            }
        }
    }
}

std::optional<Witness> search(const std::vector<BiTrace>& traces, const Tables& t,
                              std::uint64_t phi_mask, Budget& budget) {
    int nt = static_cast<int>(traces.size());
    for (int in_ = 0; in_ < nt; ++in_)
        for (int ie = 0; ie < nt; ++ie) {
            std::uint64_t ne = t.get(QNE, in_, ie) & phi_mask;
            if (!ne) continue;
            for (int is_ = 0; is_ < nt; ++is_) {
                std::uint64_t se = ne & t.get(QSE, is_, ie);
                if (!se) continue;
                for (int iw = 0; iw < nt; ++iw) {
                    budget.tick();
                    std::uint64_t all =
                        se & t.get(QNW, iw, in_) & t.get(QSW, iw, is_);
                    if (!all) continue;
                    McsId m = std::countr_zero(all);
                    Witness w;
                    w.center = m;
                    w.north = traces[in_];
                    w.east = traces[ie];
                    w.south = traces[is_];
                    w.west = traces[iw];
                    w.ne = t.rep[QNE].at({in_, ie, m});
                    w.nw = t.rep[QNW].at({iw, in_, m});
                    w.se = t.rep[QSE].at({is_, ie, m});
                    w.sw = t.rep[QSW].at({iw, is_, m});
                    return w;
                }
            }
        }
    return std::nullopt;
}

Verdict decide_sat_core(const FormulaPtr& phi, EngineKind engine, Budget& budget, unsigned seed,
                        int threads) {
    Verdict v;
    try {
        ClosureContext ctx(phi, budget);
        const auto& traces = ctx.all_bitraces(budget);
        v.mcs_count = ctx.mcs_count();
        v.cluster_count = ctx.cluster_count();
        v.trace_count = static_cast<int>(traces.size());
        std::map<BiTrace, int> idx;
        for (int i = 0; i < v.trace_count; ++i) idx.emplace(traces[i], i);
        std::uint64_t phi_mask = 0;
        for (McsId m = 0; m < ctx.mcs_count(); ++m)
            if (ctx.mcs_contains(m, ctx.root_entry())) phi_mask |= std::uint64_t{1} << m;

        Tables t;
        std::function<std::optional<Derivation>(const Biboundary&)> deriv;
        std::optional<FabricatedSet> fab;
        std::optional<Fabricator> top;
        if (engine == EngineKind::BottomUp) {
            fab = saturate(ctx, budget, seed, threads);
            if (!fab->complete) throw BudgetExceeded{};
            for (const auto& d : fab->members()) classify(d, idx, t);
            deriv = [&](const Biboundary& d) { return std::optional<Derivation>(fab->derivation(d)); };
        } else {
            top.emplace(ctx, engine, budget);
            fill_top_down(ctx, *top, traces, idx, phi_mask, t, budget);
            deriv = [&](const Biboundary& d) { return top->derivation(d); };
        }

        auto w = phi_mask ? search(traces, t, phi_mask, budget) : std::nullopt;
        if (w) {
            w->ne_d = *deriv(w->ne);
            w->nw_d = *deriv(w->nw);
            w->se_d = *deriv(w->se);
            w->sw_d = *deriv(w->sw);
            v.witness = std::move(w);
            v.answer = Answer::Sat;
        } else {
            v.answer = Answer::Unsat;
        }
    } catch (const BudgetExceeded&) {
        v.answer = Answer::Budget;
        v.witness.reset();
    }
    v.budget_used = budget.used.load();
    return v;
}

}  // namespace

const char* answer_name(Answer a) {
    switch (a) {
        case Answer::Sat: return "SAT";
        case Answer::Unsat: return "UNSAT";
        case Answer::Valid: return "VALID";
        case Answer::NotValid: return "NOT-VALID";
        case Answer::Budget: return "BUDGET";
    }
    return "?";
}

Verdict decide_sat_minkowski(const FormulaPtr& phi, bool reflexive, EngineKind engine,
                             Budget& budget, unsigned seed, int threads) {
    FormulaPtr q = reflexive ? reflexive_rewrite(phi) : phi;
    return decide_sat_core(q, engine, budget, seed, threads);
}

Verdict decide_valid_minkowski(const FormulaPtr& phi, bool reflexive, EngineKind engine,
                               Budget& budget, unsigned seed, int threads) {
    FormulaPtr q = mk_not(reflexive ? reflexive_rewrite(phi) : phi);
    Verdict v = decide_sat_core(q, engine, budget, seed, threads);
    if (v.answer == Answer::Sat)
        v.answer = Answer::NotValid;  // the witness is a counterexample point
    else if (v.answer == Answer::Unsat)
        v.answer = Answer::Valid;
    return v;
}

bool check_witness_minkowski(const ClosureContext& ctx, const Witness& w, Budget& budget,
                             std::string* why) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (w.center < 0 || w.center >= ctx.mcs_count()) return fail("center out of range");
    if (!ctx.mcs_contains(w.center, ctx.root_entry()))
        return fail("center does not contain the formula");
    for (const BiTrace* t : {&w.north, &w.east, &w.south, &w.west})
        if (!ctx.validate_bitrace(*t)) return fail("invalid axis bi-trace");

    auto pin = [&](const char* name, const std::optional<BiTrace>& edge, const BiTrace& want) {
        return edge && *edge == want;
    };
    if (!pin("NE.W", w.ne.w, w.north) || !pin("NE.S", w.ne.s, w.east) ||
        w.ne.b != std::optional<McsId>(w.center))
        return fail("NE quadrant does not pin the axes and center");
    if (!pin("NW.S", w.nw.s, w.west) || !pin("NW.E", w.nw.e, w.north) ||
        w.nw.r != std::optional<McsId>(w.center))
        return fail("NW quadrant does not pin the axes and center");
    if (!pin("SE.W", w.se.w, w.south) || !pin("SE.N", w.se.n, w.east) ||
        w.se.l != std::optional<McsId>(w.center))
        return fail("SE quadrant does not pin the axes and center");
    if (!pin("SW.N", w.sw.n, w.west) || !pin("SW.E", w.sw.e, w.south) ||
        w.sw.t != std::optional<McsId>(w.center))
        return fail("SW quadrant does not pin the axes and center");

    struct Item {
        const char* name;
        const Biboundary* d;
        const Derivation* der;
    };
    for (const Item& it : {Item{"NE", &w.ne, &w.ne_d}, Item{"NW", &w.nw, &w.nw_d},
                           Item{"SE", &w.se, &w.se_d}, Item{"SW", &w.sw, &w.sw_d}}) {
        if (!(it.der->conclusion == *it.d))
            return fail(std::string(it.name) + " derivation concludes a different biboundary");
        std::string path;
        if (!check_derivation(ctx, *it.der, budget, &path))
            return fail(std::string(it.name) + " derivation rejected at " + path);
    }
    return true;
}

}  // namespace mink
