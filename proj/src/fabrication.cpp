#include "mink/fabrication.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <random>
#include <thread>

namespace mink {

namespace {

bool all_lower_equal(const BiTrace& t, ClusterId c) {
    return std::all_of(t.lower.begin(), t.lower.end(), [c](ClusterId x) { return x == c; });
}
bool all_upper_equal(const BiTrace& t, ClusterId c) {
    return std::all_of(t.upper.begin(), t.upper.end(), [c](ClusterId x) { return x == c; });
}

BiTrace final_pair_of(const BiTrace& t) { return pair_trace(t.final_lower(), t.final_upper()); }
BiTrace initial_pair_of(const BiTrace& t) {
    return pair_trace(t.initial_lower(), t.initial_upper());
}

// All (t1, a, t2) with concat(t1, a, t2) == t: one per transition value, plus
// one per (pair position, interpolant member) for the merge form.
struct Split {
    BiTrace left;
    McsId junction;
    BiTrace right;
};

std::vector<Split> concat_splits(const ClosureContext& ctx, const BiTrace& t) {
    std::vector<Split> out;
    auto slice = [&](std::size_t lo_begin, std::size_t lo_end, std::size_t tr_begin,
                     std::size_t tr_end) {
        BiTrace s;
        s.lower.assign(t.lower.begin() + lo_begin, t.lower.begin() + lo_end);
        s.upper.assign(t.upper.begin() + lo_begin, t.upper.begin() + lo_end);
        s.trans.assign(t.trans.begin() + tr_begin, t.trans.begin() + tr_end);
        return s;
    };
    std::size_t np = t.lower.size();
    for (std::size_t j = 0; j < t.trans.size(); ++j)
        out.push_back({slice(0, j + 1, 0, j), t.trans[j], slice(j + 1, np, j + 1, t.trans.size())});
    for (std::size_t j = 0; j < np; ++j) {
        BiTrace left = slice(0, j + 1, 0, j);
        BiTrace right = slice(j, np, j, t.trans.size());
        for (McsId a : ctx.interpolant(t.lower[j], t.upper[j])) out.push_back({left, a, right});
    }
    return out;
}

// All (d1, d2) with vjoin(d1, d2) == g, premises validated.
std::vector<std::pair<Biboundary, Biboundary>> vjoin_decomps(const ClosureContext& ctx,
                                                             const Biboundary& g,
                                                             Budget& budget) {
    std::vector<std::pair<Biboundary, Biboundary>> out;
    std::vector<Split> w_splits, e_splits;
    if (g.w) w_splits = concat_splits(ctx, *g.w);
    if (g.e) e_splits = concat_splits(ctx, *g.e);
    for (const BiTrace& u : ctx.all_bitraces(budget)) {
        Biboundary d1;
        d1.minus = g.minus;
        d1.plus = u.final_lower();
        d1.n = u;
        d1.s = g.s;
        d1.b = g.b;
        d1.r = g.r;
        Biboundary d2;
        d2.minus = u.initial_upper();
        d2.plus = g.plus;
        d2.s = u;
        d2.n = g.n;
        d2.l = g.l;
        d2.t = g.t;
        std::size_t nw = g.w ? w_splits.size() : 1;
        std::size_t ne = g.e ? e_splits.size() : 1;
        for (std::size_t wi = 0; wi < nw; ++wi) {
            Biboundary a = d1, b = d2;
            if (g.w) {
                a.w = w_splits[wi].left;
                a.l = w_splits[wi].junction;
                b.w = w_splits[wi].right;
                b.b = w_splits[wi].junction;
            }
            for (std::size_t ei = 0; ei < ne; ++ei) {
                budget.tick();
                Biboundary a2 = a, b2 = b;
                if (g.e) {
                    a2.e = e_splits[ei].left;
                    a2.t = e_splits[ei].junction;
                    b2.e = e_splits[ei].right;
                    b2.r = e_splits[ei].junction;
                }
                if (!validate_biboundary(ctx, a2) || !validate_biboundary(ctx, b2)) continue;
                auto j = vjoin(ctx, a2, b2);
                if (j && *j == g) out.emplace_back(std::move(a2), std::move(b2));
            }
        }
    }
    return out;
}

bool s3_fits(const ClosureContext& ctx, const Biboundary& d, ClusterId lo, ClusterId up) {
    if (!d.closed()) return false;
    if (!ctx.mcs_le_cluster(*d.t, up)) return false;
    for (DefectSub f : ctx.future_defects(*d.t))
        if (!ctx.passed_up_cluster(f, up)) return false;
    if (!all_upper_equal(*d.n, up) || !all_upper_equal(*d.e, up)) return false;
    if (!ctx.cluster_le_mcs(lo, *d.b)) return false;
    for (DefectSub p : ctx.past_defects(*d.b))
        if (!ctx.passed_down_cluster(p, lo)) return false;
    if (!all_lower_equal(*d.s, lo) || !all_lower_equal(*d.w, lo)) return false;
    return true;
}

bool s4_fits(const ClosureContext& ctx, McsId m, ClusterId lo, ClusterId up) {
    if (!ctx.mcs_le_cluster(m, up) || !ctx.cluster_le_mcs(lo, m)) return false;
    for (DefectSub f : ctx.future_defects(m))
        if (!ctx.passed_up_cluster(f, up)) return false;
    for (DefectSub p : ctx.past_defects(m))
        if (!ctx.passed_down_cluster(p, lo)) return false;
    return true;
}

bool delta_covers_future(const ClosureContext& ctx, const Biboundary& d, DefectSub f) {
    if (ctx.passed_up_mcs(f, *d.b) || ctx.passed_up_mcs(f, *d.l) || ctx.passed_up_mcs(f, *d.r))
        return true;
    for (const BiTrace* tr : {&*d.w, &*d.s}) {
        for (std::size_t j = 0; j < tr->lower.size(); ++j)
            if (ctx.passed_up(f, ctx.interpolant(tr->lower[j], tr->upper[j]))) return true;
        for (McsId v : tr->trans)
            if (ctx.passed_up_mcs(f, v)) return true;
    }
    return false;
}

bool delta_covers_past(const ClosureContext& ctx, const Biboundary& d, DefectSub p) {
    if (ctx.passed_down_mcs(p, *d.t) || ctx.passed_down_mcs(p, *d.l) ||
        ctx.passed_down_mcs(p, *d.r))
        return true;
    for (const BiTrace* tr : {&*d.n, &*d.e}) {
        for (std::size_t j = 0; j < tr->lower.size(); ++j)
            if (ctx.passed_down(p, ctx.interpolant(tr->lower[j], tr->upper[j]))) return true;
        for (McsId v : tr->trans)
            if (ctx.passed_down_mcs(p, v)) return true;
    }
    return false;
}

// Witness subsets for a shuffle over (lo, up): one M member to make M
// nonempty, plus per-defect outlets drawn from the maximal sets. Sizes stay
// within the |phi| cap because a closure has fewer than |phi| modal
// subformulas.
std::optional<std::pair<std::vector<Biboundary>, std::vector<McsId>>> shuffle_witness(
    const ClosureContext& ctx, ClusterId lo, ClusterId up,
    const std::vector<Biboundary>& delta_max, const std::vector<McsId>& m_max) {
    if (m_max.empty()) return std::nullopt;
    std::vector<Biboundary> delta;
    std::vector<McsId> m{m_max.front()};
    auto cover = [&](DefectSub d, bool future) {
        for (McsId x : m_max)
            if (future ? ctx.passed_up_mcs(d, x) : ctx.passed_down_mcs(d, x)) {
                if (std::find(m.begin(), m.end(), x) == m.end()) m.push_back(x);
                return true;
            }
        for (const Biboundary& b : delta_max)
            if (future ? delta_covers_future(ctx, b, d) : delta_covers_past(ctx, b, d)) {
                if (std::find(delta.begin(), delta.end(), b) == delta.end()) delta.push_back(b);
                return true;
            }
        return false;
    };
    for (DefectSub f : ctx.future_defects_cluster(lo))
        if (!cover(f, true)) return std::nullopt;
    for (DefectSub p : ctx.past_defects_cluster(up))
        if (!cover(p, false)) return std::nullopt;
    return std::make_pair(std::move(delta), std::move(m));
}

// The dp family a successful shuffle over (lo, up) generates: edges under the
// S1 constancy constraints, corners under validity.
std::vector<Biboundary> shuffle_family(const ClosureContext& ctx, ClusterId lo, ClusterId up,
                                       Budget& budget) {
    BiTraceFilter up_const, lo_const;
    up_const.constant_upper = lo;
    lo_const.constant_lower = up;
    std::vector<std::optional<BiTrace>> ws{std::nullopt}, ns{std::nullopt};
    for (auto& t : ctx.enumerate_bitraces(up_const, budget)) ws.emplace_back(std::move(t));
    for (auto& t : ctx.enumerate_bitraces(lo_const, budget)) ns.emplace_back(std::move(t));
    return enumerate_with_edges(ctx, lo, up, ns, ws, ns, ws, budget);
}

std::vector<McsId> m_max_for(const ClosureContext& ctx, ClusterId lo, ClusterId up) {
    std::vector<McsId> out;
    for (McsId m = 0; m < ctx.mcs_count(); ++m)
        if (s4_fits(ctx, m, lo, up)) out.push_back(m);
    return out;
}

}  // namespace

const char* rule_name(Rule r) {
    switch (r) {
        case Rule::Ground: return "ground";
        case Rule::VJoin: return "vjoin";
        case Rule::HJoin: return "hjoin";
        case Rule::SeLimit: return "se-limit";
        case Rule::NwLimit: return "nw-limit";
        case Rule::Shuffle: return "shuffle";
    }
    return "?";
}

std::optional<Rule> rule_from_name(const std::string& s) {
    for (Rule r : {Rule::Ground, Rule::VJoin, Rule::HJoin, Rule::SeLimit, Rule::NwLimit,
                   Rule::Shuffle})
        if (s == rule_name(r)) return r;
    return std::nullopt;
}

bool check_derivation(const ClosureContext& ctx, const Derivation& cert, Budget& budget,
                      std::string* fail_path) {
    auto fail = [&](const std::string& path) {
        if (fail_path) *fail_path = path.empty() ? "/" : path;
        return false;
    };
    std::function<bool(const Derivation&, const std::string&)> check =
        [&](const Derivation& node, const std::string& path) {
            budget.tick();
            if (!validate_biboundary(ctx, node.conclusion)) return fail(path);
            std::vector<Biboundary> prem;
            for (std::size_t i = 0; i < node.premises.size(); ++i) {
                if (!check(node.premises[i], path + "/premises[" + std::to_string(i) + "]"))
                    return false;
                prem.push_back(node.premises[i].conclusion);
            }
            int n = ctx.formula_size();
            switch (node.rule) {
                case Rule::Ground:
                    if (!prem.empty() || !node.aux.empty()) return fail(path);
                    if (!is_ground(ctx, node.conclusion)) return fail(path);
                    return true;
                case Rule::VJoin: {
                    if (prem.size() != 2 || !node.aux.empty()) return fail(path);
                    auto j = vjoin(ctx, prem[0], prem[1]);
                    if (!j || !(*j == node.conclusion)) return fail(path);
                    return true;
                }
                case Rule::HJoin: {
                    if (prem.size() != 2 || !node.aux.empty()) return fail(path);
                    auto j = hjoin(ctx, prem[0], prem[1]);
                    if (!j || !(*j == node.conclusion)) return fail(path);
                    return true;
                }
                case Rule::SeLimit:
                case Rule::NwLimit: {
                    if (prem.size() != 4 || !node.aux.empty()) return fail(path);
                    auto dir = node.rule == Rule::SeLimit ? LimitDir::SE : LimitDir::NW;
                    auto set =
                        limit_completions(ctx, prem[0], prem[1], prem[2], prem[3], dir, budget);
                    if (std::find(set.begin(), set.end(), node.conclusion) == set.end())
                        return fail(path);
                    return true;
                }
                case Rule::Shuffle: {
                    if (node.aux.empty() || static_cast<int>(node.aux.size()) > n ||
                        static_cast<int>(prem.size()) > n)
                        return fail(path);
                    for (McsId m : node.aux)
                        if (m < 0 || m >= ctx.mcs_count()) return fail(path);
                    if (!check_shuffle(ctx, node.conclusion, prem, node.aux)) return fail(path);
                    return true;
                }
            }
            return fail(path);
        };
    return check(cert, "");
}

std::vector<Biboundary> FabricatedSet::members() const {
    std::vector<Biboundary> out;
    out.reserve(steps.size());
    for (const auto& [d, s] : steps) out.push_back(d);
    std::sort(out.begin(), out.end());
    return out;
}

Derivation FabricatedSet::derivation(const Biboundary& d) const {
    const FabStep& step = steps.at(d);
    Derivation node;
    node.rule = step.rule;
    node.conclusion = d;
    node.aux = step.aux;
    for (const Biboundary& p : step.premises) node.premises.push_back(derivation(p));
    return node;
}

namespace {

struct Saturator {
    const ClosureContext& ctx;
    Budget& budget;
    std::mt19937 rng;
    int threads;

    FabricatedSet fab;
    std::vector<Biboundary> order;  // insertion order; joins processed by index
    std::size_t join_frontier = 0;
    using PairList = std::vector<std::pair<Biboundary, Biboundary>>;
    std::unordered_map<Biboundary, PairList, BiboundaryHash> vpairs, hpairs;
    std::unordered_set<Biboundary, BiboundaryHash> limit_done_se, limit_done_nw;
    std::vector<std::vector<char>> shuffle_done;  // [lo][up]

    Saturator(const ClosureContext& c, Budget& b, unsigned seed, int th)
        : ctx(c), budget(b), rng(seed), threads(std::max(1, th)) {
        shuffle_done.assign(ctx.cluster_count(),
                            std::vector<char>(ctx.cluster_count(), 0));
    }

    bool add(Biboundary d, FabStep step) {
        if (fab.steps.count(d)) return false;
        order.push_back(d);
        fab.steps.emplace(std::move(d), std::move(step));
        return true;
    }

    void seed_ground() {
        for (ClusterId c = 0; c < ctx.cluster_count(); ++c) {
            BiTraceFilter lo_c, up_c;
            lo_c.constant_lower = c;
            up_c.constant_upper = c;
            std::vector<std::optional<BiTrace>> ne{std::nullopt}, sw{std::nullopt};
            for (auto& t : ctx.enumerate_bitraces(lo_c, budget)) ne.emplace_back(std::move(t));
            for (auto& t : ctx.enumerate_bitraces(up_c, budget)) sw.emplace_back(std::move(t));
            for (auto& d : enumerate_with_edges(ctx, c, c, ne, sw, ne, sw, budget))
                if (is_ground(ctx, d)) add(std::move(d), FabStep{Rule::Ground, {}, {}});
        }
    }

    // Processes every ordered pair with at least one member beyond the
    // frontier, recording successful joins and their premise pairs.
    bool join_round() {
        std::size_t start = join_frontier, end = order.size();
        join_frontier = end;
        std::vector<std::pair<std::size_t, std::size_t>> tasks;
        for (std::size_t i = start; i < end; ++i) {
            for (std::size_t j = 0; j < end; ++j) {
                tasks.emplace_back(i, j);
                if (j < start) tasks.emplace_back(j, i);
            }
        }
        std::shuffle(tasks.begin(), tasks.end(), rng);

        struct Hit {
            bool vertical;
            std::size_t i, j;
            Biboundary concl;
        };
        auto work = [&](std::size_t lo, std::size_t hi, std::vector<Hit>& out) {
            for (std::size_t k = lo; k < hi; ++k) {
                auto [i, j] = tasks[k];
                budget.tick();
                if (auto v = vjoin(ctx, order[i], order[j]))
                    out.push_back({true, i, j, std::move(*v)});
                if (auto h = hjoin(ctx, order[i], order[j]))
                    out.push_back({false, i, j, std::move(*h)});
            }
        };
        std::vector<Hit> hits;
        if (threads == 1 || tasks.size() < 64) {
            work(0, tasks.size(), hits);
        } else {
            std::vector<std::vector<Hit>> parts(threads);
            std::vector<std::thread> pool;
            std::vector<std::exception_ptr> errs(threads);
            std::size_t chunk = (tasks.size() + threads - 1) / threads;
            for (int t = 0; t < threads; ++t)
                pool.emplace_back([&, t] {
                    try {
                        work(t * chunk, std::min(tasks.size(), (t + 1) * chunk), parts[t]);
                    } catch (...) {
                        errs[t] = std::current_exception();
                    }
                });
            for (auto& th : pool) th.join();
            for (auto& e : errs)
                if (e) std::rethrow_exception(e);
            for (auto& p : parts)
                for (auto& h : p) hits.push_back(std::move(h));
        }

        bool changed = false;
        for (auto& h : hits) {
            auto& pairs = (h.vertical ? vpairs : hpairs)[h.concl];
            pairs.emplace_back(order[h.i], order[h.j]);
            Rule r = h.vertical ? Rule::VJoin : Rule::HJoin;
            if (add(h.concl, FabStep{r, {order[h.i], order[h.j]}, {}})) changed = true;
        }
        return changed;
    }

    bool limit_round() {
        bool changed = false;
        // Snapshot: additions participate in joins (and hence new pair map
        // entries) only from the next round.
        std::vector<const Biboundary*> keys;
        for (const auto& [d0, pairs] : vpairs) keys.push_back(&d0);
        std::shuffle(keys.begin(), keys.end(), rng);
        for (const Biboundary* d0p : keys) {
            const Biboundary& d0 = *d0p;
            const PairList& pairs = vpairs.at(d0);
            for (LimitDir dir : {LimitDir::SE, LimitDir::NW}) {
                auto& done = dir == LimitDir::SE ? limit_done_se : limit_done_nw;
                if (done.count(d0)) continue;
                std::optional<std::array<Biboundary, 4>> tuple;
                for (const auto& [bot, top] : pairs) {
                    if (tuple) break;
                    budget.tick();
                    if (dir == LimitDir::SE) {
                        // top = hjoin(d0, d1), bot = hjoin(d2, d3)
                        auto ti = hpairs.find(top);
                        auto bi = hpairs.find(bot);
                        if (ti == hpairs.end() || bi == hpairs.end()) continue;
                        for (const auto& [l1, d1] : ti->second) {
                            if (tuple) break;
                            if (!(l1 == d0)) continue;
                            if (!d1.e || !all_lower_equal(*d1.e, d0.plus)) continue;
                            for (const auto& [d2, d3] : bi->second) {
                                if (!d2.s || !all_upper_equal(*d2.s, d0.minus)) continue;
                                tuple = {d0, d1, d2, d3};
                                break;
                            }
                        }
                    } else {
                        // bot = hjoin(d1, d0), top = hjoin(d3, d2)
                        auto bi = hpairs.find(bot);
                        auto ti = hpairs.find(top);
                        if (ti == hpairs.end() || bi == hpairs.end()) continue;
                        for (const auto& [d1, r0] : bi->second) {
                            if (tuple) break;
                            if (!(r0 == d0)) continue;
                            if (!d1.w || !all_upper_equal(*d1.w, d0.minus)) continue;
                            for (const auto& [d3, d2] : ti->second) {
                                if (!d2.n || !all_lower_equal(*d2.n, d0.plus)) continue;
                                tuple = {d0, d1, d2, d3};
                                break;
                            }
                        }
                    }
                }
                if (!tuple) continue;
                auto comps = limit_completions(ctx, (*tuple)[0], (*tuple)[1], (*tuple)[2],
                                               (*tuple)[3], dir, budget);
                done.insert(d0);
                Rule r = dir == LimitDir::SE ? Rule::SeLimit : Rule::NwLimit;
                FabStep step{r, {(*tuple)[0], (*tuple)[1], (*tuple)[2], (*tuple)[3]}, {}};
                for (auto& c : comps)
                    if (add(std::move(c), step)) changed = true;
            }
        }
        return changed;
    }

    bool shuffle_round() {
        bool changed = false;
        for (ClusterId lo = 0; lo < ctx.cluster_count(); ++lo) {
            for (ClusterId up = 0; up < ctx.cluster_count(); ++up) {
                if (shuffle_done[lo][up]) continue;
                budget.tick();
                std::vector<McsId> m_max = m_max_for(ctx, lo, up);
                if (m_max.empty()) continue;
                std::vector<Biboundary> delta_max;
                for (const auto& [d, s] : fab.steps)
                    if (s3_fits(ctx, d, lo, up)) delta_max.push_back(d);
                auto wit = shuffle_witness(ctx, lo, up, delta_max, m_max);
                if (!wit) continue;
                shuffle_done[lo][up] = 1;
                FabStep step{Rule::Shuffle, wit->first, wit->second};
                for (auto& d : shuffle_family(ctx, lo, up, budget))
                    if (add(std::move(d), step)) changed = true;
            }
        }
        return changed;
    }

    void run() {
        // Warm the context caches so worker threads only read them.
        for (ClusterId c = 0; c < ctx.cluster_count(); ++c)
            for (ClusterId d = 0; d < ctx.cluster_count(); ++d) ctx.interpolant(c, d);
        ctx.all_bitraces(budget);
        seed_ground();
        bool changed = true;
        while (changed) {
            changed = false;
            if (join_round()) changed = true;
            if (limit_round()) changed = true;
            if (shuffle_round()) changed = true;
        }
    }
};

}  // namespace

FabricatedSet saturate(const ClosureContext& ctx, Budget& budget, unsigned seed, int threads) {
    Saturator s(ctx, budget, seed, threads);
    try {
        s.run();
    } catch (const BudgetExceeded&) {
        s.fab.complete = false;
    }
    return std::move(s.fab);
}

Fabricator::Fabricator(const ClosureContext& ctx, EngineKind kind, Budget& budget)
    : ctx_(ctx), kind_(kind), budget_(budget) {}

const FabricatedSet* Fabricator::saturated() {
    if (kind_ != EngineKind::BottomUp) return nullptr;
    if (!saturated_) saturated_ = saturate(ctx_, budget_);
    return &*saturated_;
}

bool Fabricator::is_fabricated(const Biboundary& d) {
    if (kind_ == EngineKind::BottomUp) {
        const FabricatedSet* s = saturated();
        if (s->contains(d)) return true;
        if (!s->complete) throw BudgetExceeded{};
        return false;
    }
    bool cut = false;
    return solve(d, cut);
}

std::optional<Derivation> Fabricator::derivation(const Biboundary& d) {
    if (kind_ == EngineKind::BottomUp) {
        const FabricatedSet* s = saturated();
        if (!s->contains(d)) return std::nullopt;
        return s->derivation(d);
    }
    auto it = steps_.find(d);
    if (it == steps_.end()) return std::nullopt;
    std::function<Derivation(const Biboundary&)> unfold = [&](const Biboundary& b) {
        const FabStep& step = steps_.at(b);
        Derivation node;
        node.rule = step.rule;
        node.conclusion = b;
        node.aux = step.aux;
        for (const Biboundary& p : step.premises) node.premises.push_back(unfold(p));
        return node;
    };
    return unfold(d);
}

bool Fabricator::solve(const Biboundary& d, bool& cut_seen) {
    budget_.tick();
    auto it = memo_.find(d);
    if (it != memo_.end()) return it->second;
    if (on_path_.count(d)) {
        cut_seen = true;
        return false;
    }
    if (!validate_biboundary(ctx_, d)) {
        memo_.emplace(d, false);
        return false;
    }
    on_path_.insert(d);
    bool cut = false;
    bool ok = false;
    try {
        ok = try_ground(d) || try_joins(d, cut) || try_shuffle(d, cut) || try_limits(d, cut);
    } catch (...) {
        on_path_.erase(d);
        throw;
    }
    on_path_.erase(d);
    if (ok)
        memo_.emplace(d, true);
    else if (!cut)
        memo_.emplace(d, false);
    else
        cut_seen = true;
    return ok;
}

bool Fabricator::try_ground(const Biboundary& d) {
    if (!is_ground(ctx_, d)) return false;
    steps_.emplace(d, FabStep{Rule::Ground, {}, {}});
    return true;
}

bool Fabricator::try_joins(const Biboundary& d, bool& cut_seen) {
    for (auto& [a, b] : vjoin_decomps(ctx_, d, budget_)) {
        if (solve(a, cut_seen) && solve(b, cut_seen)) {
            steps_.emplace(d, FabStep{Rule::VJoin, {a, b}, {}});
            return true;
        }
    }
    for (auto& [da, db] : vjoin_decomps(ctx_, diagonal_dual(d), budget_)) {
        Biboundary a = diagonal_dual(da), b = diagonal_dual(db);
        auto h = hjoin(ctx_, a, b);
        if (!h || !(*h == d)) continue;
        if (solve(a, cut_seen) && solve(b, cut_seen)) {
            steps_.emplace(d, FabStep{Rule::HJoin, {a, b}, {}});
            return true;
        }
    }
    return false;
}

bool Fabricator::try_shuffle(const Biboundary& d, bool& cut_seen) {
    ClusterId lo = d.minus, up = d.plus;
    // S1 on the goal's own edges
    if (d.w && !all_upper_equal(*d.w, lo)) return false;
    if (d.s && !all_upper_equal(*d.s, lo)) return false;
    if (d.e && !all_lower_equal(*d.e, up)) return false;
    if (d.n && !all_lower_equal(*d.n, up)) return false;
    std::vector<McsId> m_max = m_max_for(ctx_, lo, up);
    if (m_max.empty()) return false;

    // Delta members are only needed for defects M cannot absorb; outlets are
    // independent per defect, so a greedy per-defect search is complete.
    auto& cands = shuffle_cands_[(static_cast<long long>(lo) << 32) | up];
    bool cands_ready = !cands.empty();
    auto candidates = [&]() -> const std::vector<Biboundary>& {
        if (!cands_ready) {
            cands_ready = true;
            BiTraceFilter up_c, lo_c;
            up_c.constant_upper = up;   // N, E edges per S3
            lo_c.constant_lower = lo;   // S, W edges per S3
            std::vector<std::optional<BiTrace>> ne, sw;
            for (auto& t : ctx_.enumerate_bitraces(up_c, budget_)) ne.emplace_back(std::move(t));
            for (auto& t : ctx_.enumerate_bitraces(lo_c, budget_)) sw.emplace_back(std::move(t));
            if (ne.empty() || sw.empty()) return cands;
            for (ClusterId l2 = 0; l2 < ctx_.cluster_count(); ++l2)
                for (ClusterId u2 = 0; u2 < ctx_.cluster_count(); ++u2)
                    for (auto& c : enumerate_with_edges(ctx_, l2, u2, ne, sw, ne, sw, budget_))
                        if (s3_fits(ctx_, c, lo, up)) cands.push_back(std::move(c));
        }
        return cands;
    };

    std::vector<Biboundary> delta;
    std::vector<McsId> m{m_max.front()};
    auto cover = [&](DefectSub def, bool future) {
        for (McsId x : m_max)
            if (future ? ctx_.passed_up_mcs(def, x) : ctx_.passed_down_mcs(def, x)) {
                if (std::find(m.begin(), m.end(), x) == m.end()) m.push_back(x);
                return true;
            }
        for (const Biboundary& c : candidates()) {
            budget_.tick();
            bool covers = future ? delta_covers_future(ctx_, c, def)
                                 : delta_covers_past(ctx_, c, def);
            if (covers && solve(c, cut_seen)) {
                if (std::find(delta.begin(), delta.end(), c) == delta.end()) delta.push_back(c);
                return true;
            }
        }
        return false;
    };
    for (DefectSub f : ctx_.future_defects_cluster(lo))
        if (!cover(f, true)) return false;
    for (DefectSub p : ctx_.past_defects_cluster(up))
        if (!cover(p, false)) return false;
    if (!check_shuffle(ctx_, d, delta, m)) return false;
    steps_.emplace(d, FabStep{Rule::Shuffle, std::move(delta), std::move(m)});
    return true;
}

bool Fabricator::try_limits(const Biboundary& d, bool& cut_seen) {
    const auto& traces = ctx_.all_bitraces(budget_);
    // candidate edges for d0, prefiltered by their B3 anchor
    std::vector<std::optional<BiTrace>> s_cands, e_cands, n_cands, w_cands;
    for (const auto& t : traces) {
        if (t.initial_upper() == d.minus) {
            s_cands.emplace_back(t);
            w_cands.emplace_back(t);
        }
        if (t.final_lower() == d.plus) {
            e_cands.emplace_back(t);
            n_cands.emplace_back(t);
        }
    }

    for (LimitDir dir : {LimitDir::SE, LimitDir::NW}) {
        if (dir == LimitDir::SE) {
            if (d.s && !all_upper_equal(*d.s, d.minus)) continue;
            if (d.e && !all_lower_equal(*d.e, d.plus)) continue;
        } else {
            if (d.n && !all_lower_equal(*d.n, d.plus)) continue;
            if (d.w && !all_upper_equal(*d.w, d.minus)) continue;
        }
        // Candidate d0: agrees with d on the preserved keys, with the two
        // consumed edges defined.
        std::vector<Biboundary> d0s =
            dir == LimitDir::SE
                ? enumerate_with_edges(ctx_, d.minus, d.plus, {d.n}, s_cands, e_cands, {d.w},
                                       budget_)
                : enumerate_with_edges(ctx_, d.minus, d.plus, n_cands, {d.s}, {d.e}, w_cands,
                                       budget_);
        for (const Biboundary& d0 : d0s) {
            if (dir == LimitDir::SE ? d0.l != d.l : d0.r != d.r) continue;
            auto step = limit_premises(d0, dir, cut_seen);
            if (!step) continue;
            // The conclusion must be among the completions of the tuple.
            auto comps = limit_completions(ctx_, step->premises[0], step->premises[1],
                                           step->premises[2], step->premises[3], dir, budget_);
            if (std::find(comps.begin(), comps.end(), d) == comps.end()) continue;
            steps_.emplace(d, std::move(*step));
            return true;
        }
    }
    return false;
}

std::optional<FabStep> Fabricator::limit_premises(const Biboundary& d0, LimitDir dir,
                                                  bool& cut_seen) {
    auto& memo = dir == LimitDir::SE ? limit_memo_se_ : limit_memo_nw_;
    auto it = memo.find(d0);
    if (it != memo.end()) return it->second;
    bool cut = false;
    std::optional<FabStep> result;
    const auto& traces = ctx_.all_bitraces(budget_);
    Rule rule = dir == LimitDir::SE ? Rule::SeLimit : Rule::NwLimit;

    // d0 is itself a premise; nothing to search if it is not fabricated. The
    // self-similar edges of the join equation also force merge-form concats,
    // whose junction corners must lie in the edge's end-pair interpolant.
    auto in_interpolant = [&](const std::optional<McsId>& m, ClusterId lo, ClusterId up) {
        if (!m) return false;
        const auto& ip = ctx_.interpolant(lo, up);
        return std::find(ip.begin(), ip.end(), *m) != ip.end();
    };
    bool feasible = true;
    if (dir == LimitDir::SE) {
        if (d0.n && !in_interpolant(d0.t, d0.n->final_lower(), d0.n->final_upper()))
            feasible = false;
        if (d0.w && !in_interpolant(d0.b, d0.w->initial_lower(), d0.w->initial_upper()))
            feasible = false;
    } else {
        if (d0.s && !in_interpolant(d0.b, d0.s->initial_lower(), d0.s->initial_upper()))
            feasible = false;
        if (d0.e && !in_interpolant(d0.t, d0.e->final_lower(), d0.e->final_upper()))
            feasible = false;
    }
    if (feasible && !solve(d0, cut)) feasible = false;

    auto attempt = [&](const Biboundary& d1, const Biboundary& d2, const Biboundary& d3,
                       const Biboundary& bot, const Biboundary& top) {
        auto whole = vjoin(ctx_, bot, top);
        if (!whole || !(*whole == d0)) return false;
        if (!solve(d1, cut) || !solve(d2, cut) || !solve(d3, cut)) return false;
        result = FabStep{rule, {d0, d1, d2, d3}, {}};
        return true;
    };

    if (!feasible) {
        // fall through to memoization with no result
    } else if (dir == LimitDir::SE && d0.s && d0.e) {
        // d0 == vjoin(hjoin(d2, d3), hjoin(d0, d1)): the S edge splits into
        // d2.s | d3.s, the E edge into d3.e | d1.e, and hjoin(d0, d1).s
        // (= concat(d0.s, d0.r, d1.s)) splits into d2.n | d3.n. The remaining
        // freedom is d1.s and the middle edge d2.e == d3.w.
        auto s_splits = concat_splits(ctx_, *d0.s);
        for (const Split& es : concat_splits(ctx_, *d0.e)) {
            if (result) break;
            if (!all_lower_equal(es.right, d0.plus)) continue;
            Biboundary d1;
            d1.minus = d0.e->initial_upper();
            d1.plus = d0.plus;
            d1.w = d0.e;
            d1.e = es.right;
            if (d0.n) d1.n = final_pair_of(*d0.n);
            d1.t = d0.t;
            d1.l = d0.t;
            d1.b = d0.r;
            d1.r = es.junction;
            for (const BiTrace& d1s : traces) {
                if (result) break;
                budget_.tick();
                if (d1s.initial_upper() != d1.minus) continue;
                d1.s = d1s;
                if (!validate_biboundary(ctx_, d1)) continue;
                auto top = hjoin(ctx_, d0, d1);
                if (!top || !top->s) continue;
                for (const Split& ns : concat_splits(ctx_, *top->s)) {
                    if (result) break;
                    for (const Split& ss : s_splits) {
                        if (result) break;
                        if (!all_upper_equal(ss.left, d0.minus)) continue;
                        for (const BiTrace& me : traces) {
                            budget_.tick();
                            Biboundary d2;
                            d2.minus = d0.minus;
                            d2.plus = ns.left.final_lower();
                            d2.n = ns.left;
                            d2.s = ss.left;
                            d2.e = me;
                            if (d0.w) {
                                d2.w = initial_pair_of(*d0.w);
                                d2.b = d0.b;
                                d2.l = d0.b;
                            }
                            d2.t = ns.junction;
                            d2.r = ss.junction;
                            Biboundary d3;
                            d3.minus = me.initial_upper();
                            d3.plus = ns.right.final_lower();
                            d3.n = ns.right;
                            d3.s = ss.right;
                            d3.e = es.left;
                            d3.w = me;
                            d3.b = ss.junction;
                            d3.l = ns.junction;
                            d3.t = es.junction;
                            d3.r = d0.r;
                            if (!validate_biboundary(ctx_, d2) || !validate_biboundary(ctx_, d3))
                                continue;
                            auto bot = hjoin(ctx_, d2, d3);
                            if (!bot) continue;
                            if (attempt(d1, d2, d3, *bot, *top)) break;
                        }
                    }
                }
            }
        }
    } else if (dir == LimitDir::NW && d0.n && d0.w) {
        // d0 == vjoin(hjoin(d1, d0), hjoin(d3, d2)): the W edge splits into
        // d1.w | d3.w, the N edge into d3.n | d2.n, and hjoin(d1, d0).n
        // (= concat(d1.n, d0.l, d0.n)) splits into d3.s | d2.s. The remaining
        // freedom is d1.n and the middle edge d3.e == d2.w.
        auto n_splits = concat_splits(ctx_, *d0.n);
        for (const Split& ws : concat_splits(ctx_, *d0.w)) {
            if (result) break;
            if (!all_upper_equal(ws.left, d0.minus)) continue;
            Biboundary d1;
            d1.minus = d0.minus;
            d1.w = ws.left;
            d1.e = d0.w;
            if (d0.s) {
                d1.s = initial_pair_of(*d0.s);
                d1.b = d0.b;
                d1.r = d0.b;
            }
            d1.l = ws.junction;
            d1.t = d0.l;
            for (const BiTrace& d1n : traces) {
                if (result) break;
                budget_.tick();
                d1.n = d1n;
                d1.plus = d1n.final_lower();
                if (!validate_biboundary(ctx_, d1)) continue;
                auto bot = hjoin(ctx_, d1, d0);
                if (!bot || !bot->n) continue;
                for (const Split& ns : n_splits) {
                    if (result) break;
                    if (!all_lower_equal(ns.right, d0.plus)) continue;
                    for (const Split& ss : concat_splits(ctx_, *bot->n)) {
                        if (result) break;
                        for (const BiTrace& me : traces) {
                            budget_.tick();
                            Biboundary d2;
                            d2.minus = me.initial_upper();
                            d2.plus = d0.plus;
                            d2.n = ns.right;
                            d2.s = ss.right;
                            d2.w = me;
                            if (d0.e) {
                                d2.e = final_pair_of(*d0.e);
                                d2.t = d0.t;
                                d2.r = d0.t;
                            }
                            d2.b = ss.junction;
                            d2.l = ns.junction;
                            Biboundary d3;
                            d3.minus = ws.right.initial_upper();
                            d3.plus = ns.left.final_lower();
                            d3.n = ns.left;
                            d3.s = ss.left;
                            d3.e = me;
                            d3.w = ws.right;
                            d3.b = ws.junction;
                            d3.l = d0.l;
                            d3.t = ns.junction;
                            d3.r = ss.junction;
                            if (!validate_biboundary(ctx_, d2) || !validate_biboundary(ctx_, d3))
                                continue;
                            auto top = hjoin(ctx_, d3, d2);
                            if (!top) continue;
                            if (attempt(d1, d2, d3, *bot, *top)) break;
                        }
                    }
                }
            }
        }
    }

    if (result || !cut) memo.emplace(d0, result);
    if (cut) cut_seen = true;
    return result;
}

}  // namespace mink
