#include "mink/biboundary.hpp"

#include <algorithm>
#include <sstream>

namespace mink {

namespace {

std::size_t hash_mix(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
}

std::size_t hash_trace(const std::optional<BiTrace>& t) {
    if (!t) return 0x5bd1e995u;
    std::size_t h = 1;
    for (ClusterId c : t->lower) h = hash_mix(h, static_cast<std::size_t>(c) + 1);
    for (ClusterId c : t->upper) h = hash_mix(h, static_cast<std::size_t>(c) + 0x101);
    for (McsId m : t->trans) h = hash_mix(h, static_cast<std::size_t>(m) + 0x10001);
    return h;
}

bool all_lower_equal(const BiTrace& t, ClusterId c) {
    return std::all_of(t.lower.begin(), t.lower.end(), [c](ClusterId x) { return x == c; });
}
bool all_upper_equal(const BiTrace& t, ClusterId c) {
    return std::all_of(t.upper.begin(), t.upper.end(), [c](ClusterId x) { return x == c; });
}

}  // namespace

std::size_t BiboundaryHash::operator()(const Biboundary& d) const {
    std::size_t h = hash_mix(static_cast<std::size_t>(d.minus), static_cast<std::size_t>(d.plus));
    h = hash_mix(h, hash_trace(d.n));
    h = hash_mix(h, hash_trace(d.s));
    h = hash_mix(h, hash_trace(d.e));
    h = hash_mix(h, hash_trace(d.w));
    auto corner = [](const std::optional<McsId>& m) {
        return m ? static_cast<std::size_t>(*m) + 2 : std::size_t{1};
    };
    h = hash_mix(h, corner(d.b));
    h = hash_mix(h, corner(d.t));
    h = hash_mix(h, corner(d.l));
    h = hash_mix(h, corner(d.r));
    return h;
}

std::string to_string(const Biboundary& d) {
    std::ostringstream os;
    auto trace = [&](const char* key, const std::optional<BiTrace>& t) {
        if (!t) return;
        os << "," << key << ":(";
        for (std::size_t i = 0; i < t->lower.size(); ++i) {
            if (i) os << ",m" << t->trans[i - 1] << ",";
            os << "c" << t->lower[i] << "/c" << t->upper[i];
        }
        os << ")";
    };
    auto corner = [&](const char* key, const std::optional<McsId>& m) {
        if (m) os << "," << key << ":m" << *m;
    };
    os << "{-:c" << d.minus << ",+:c" << d.plus;
    trace("N", d.n);
    trace("S", d.s);
    trace("E", d.e);
    trace("W", d.w);
    corner("b", d.b);
    corner("t", d.t);
    corner("l", d.l);
    corner("r", d.r);
    os << "}";
    return os.str();
}

bool corners_consistent(const Biboundary& d) {
    if (d.b.has_value() != (d.s.has_value() && d.w.has_value())) return false;
    if (d.t.has_value() != (d.n.has_value() && d.e.has_value())) return false;
    if (d.l.has_value() != (d.n.has_value() && d.w.has_value())) return false;
    if (d.r.has_value() != (d.s.has_value() && d.e.has_value())) return false;
    return true;
}

bool validate_biboundary(const ClosureContext& ctx, const Biboundary& d,
                         std::vector<std::string>* diagnostics) {
    bool ok = true;
    auto fail = [&](const char* which) {
        ok = false;
        if (diagnostics) diagnostics->push_back(which);
        return diagnostics != nullptr;  // keep going only when collecting
    };

    if (d.minus < 0 || d.minus >= ctx.cluster_count() || d.plus < 0 ||
        d.plus >= ctx.cluster_count())
        return fail("cluster-range") && false;
    for (const auto* tr : {&d.n, &d.s, &d.e, &d.w})
        if (*tr && !ctx.validate_bitrace(**tr)) return fail("edge-bitrace") && false;
    for (const auto* c : {&d.b, &d.t, &d.l, &d.r})
        if (*c && (**c < 0 || **c >= ctx.mcs_count())) return fail("corner-range") && false;
    if (!corners_consistent(d)) {
        if (!fail("definedness")) return false;
    }

    const auto& minus_members = ctx.cluster_members(d.minus);
    const auto& plus_members = ctx.cluster_members(d.plus);

    // B1: b <= minus, future defects of b passed up to minus.
    if (d.b) {
        if (!ctx.mcs_le_cluster(*d.b, d.minus) && !fail("B1")) return false;
        for (DefectSub f : ctx.future_defects(*d.b))
            if (!ctx.passed_up(f, minus_members) && !fail("B1")) return false;
    }
    // B2 (temporal dual): plus <= t, past defects of t passed down to plus.
    if (d.t) {
        if (!ctx.cluster_le_mcs(d.plus, *d.t) && !fail("B2")) return false;
        for (DefectSub p : ctx.past_defects(*d.t))
            if (!ctx.passed_down(p, plus_members) && !fail("B2")) return false;
    }
    // B3 (anchoring): W/S start at minus, E/N end at plus.
    if (d.w && d.w->initial_upper() != d.minus && !fail("B3")) return false;
    if (d.s && d.s->initial_upper() != d.minus && !fail("B3")) return false;
    if (d.e && d.e->final_lower() != d.plus && !fail("B3")) return false;
    if (d.n && d.n->final_lower() != d.plus && !fail("B3")) return false;
    // B4: l against N above and W below.
    if (d.l) {
        ClusterId cn = d.n->initial_upper();
        if (!ctx.mcs_le_cluster(*d.l, cn) && !fail("B4")) return false;
        for (DefectSub f : ctx.future_defects(*d.l))
            if (!ctx.passed_up_cluster(f, cn) && !fail("B4")) return false;
        ClusterId cw = d.w->final_lower();
        if (!ctx.cluster_le_mcs(cw, *d.l) && !fail("B4")) return false;
        for (DefectSub p : ctx.past_defects(*d.l))
            if (!ctx.passed_down_cluster(p, cw) && !fail("B4")) return false;
    }
    // B5 (diagonal dual): r against E above and S below.
    if (d.r) {
        ClusterId ce = d.e->initial_upper();
        if (!ctx.mcs_le_cluster(*d.r, ce) && !fail("B5")) return false;
        for (DefectSub f : ctx.future_defects(*d.r))
            if (!ctx.passed_up_cluster(f, ce) && !fail("B5")) return false;
        ClusterId cs = d.s->final_lower();
        if (!ctx.cluster_le_mcs(cs, *d.r) && !fail("B5")) return false;
        for (DefectSub p : ctx.past_defects(*d.r))
            if (!ctx.passed_down_cluster(p, cs) && !fail("B5")) return false;
    }
    // B6: future cluster defects of plus route through N, E, or t.
    for (DefectSub f : ctx.future_defects_cluster(d.plus)) {
        bool covered = false;
        if (d.n) covered = ctx.passed_up(f, ctx.interpolant(d.n->final_lower(), d.n->final_upper()));
        if (!covered && d.e)
            covered = ctx.passed_up(f, ctx.interpolant(d.e->final_lower(), d.e->final_upper()));
        if (!covered && d.t) covered = ctx.passed_up_mcs(f, *d.t);
        if (!covered && !fail("B6")) return false;
    }
    // B7 (temporal dual): past cluster defects of minus route through S, W, or b.
    for (DefectSub p : ctx.past_defects_cluster(d.minus)) {
        bool covered = false;
        if (d.s)
            covered = ctx.passed_down(p, ctx.interpolant(d.s->initial_lower(), d.s->initial_upper()));
        if (!covered && d.w)
            covered = ctx.passed_down(p, ctx.interpolant(d.w->initial_lower(), d.w->initial_upper()));
        if (!covered && d.b) covered = ctx.passed_down_mcs(p, *d.b);
        if (!covered && !fail("B7")) return false;
    }
    return ok;
}

bool is_ground(const ClosureContext& ctx, const Biboundary& d) {
    (void)ctx;
    if (d.minus != d.plus) return false;
    if (d.n && !all_lower_equal(*d.n, d.plus)) return false;
    if (d.e && !all_lower_equal(*d.e, d.plus)) return false;
    if (d.s && !all_upper_equal(*d.s, d.minus)) return false;
    if (d.w && !all_upper_equal(*d.w, d.minus)) return false;
    return true;
}

std::optional<Biboundary> vjoin(const ClosureContext& ctx, const Biboundary& d1,
                                const Biboundary& d2) {
    if (!d1.n || !d2.s || !(*d1.n == *d2.s)) return std::nullopt;
    Biboundary out;
    out.minus = d1.minus;
    out.plus = d2.plus;
    out.b = d1.b;
    out.s = d1.s;
    out.r = d1.r;
    out.l = d2.l;
    out.n = d2.n;
    out.t = d2.t;
    if (d1.w && d2.w) {
        if (!d1.l || !d2.b || *d1.l != *d2.b) return std::nullopt;
        auto cw = ctx.concat(*d1.w, *d1.l, *d2.w);
        if (!cw) return std::nullopt;
        out.w = std::move(cw);
    } else if (d1.w || d2.w) {
        return std::nullopt;
    }
    if (d1.e && d2.e) {
        if (!d1.t || !d2.r || *d1.t != *d2.r) return std::nullopt;
        auto ce = ctx.concat(*d1.e, *d1.t, *d2.e);
        if (!ce) return std::nullopt;
        out.e = std::move(ce);
    } else if (d1.e || d2.e) {
        return std::nullopt;
    }
    if (!corners_consistent(out)) return std::nullopt;
    if (!validate_biboundary(ctx, out)) return std::nullopt;
    return out;
}

std::optional<Biboundary> hjoin(const ClosureContext& ctx, const Biboundary& d1,
                                const Biboundary& d2) {
    if (!d1.e || !d2.w || !(*d1.e == *d2.w)) return std::nullopt;
    Biboundary out;
    out.minus = d1.minus;
    out.plus = d2.plus;
    out.b = d1.b;
    out.w = d1.w;
    out.l = d1.l;
    out.r = d2.r;
    out.e = d2.e;
    out.t = d2.t;
    if (d1.s && d2.s) {
        if (!d1.r || !d2.b || *d1.r != *d2.b) return std::nullopt;
        auto cs = ctx.concat(*d1.s, *d1.r, *d2.s);
        if (!cs) return std::nullopt;
        out.s = std::move(cs);
    } else if (d1.s || d2.s) {
        return std::nullopt;
    }
    if (d1.n && d2.n) {
        if (!d1.t || !d2.l || *d1.t != *d2.l) return std::nullopt;
        auto cn = ctx.concat(*d1.n, *d1.t, *d2.n);
        if (!cn) return std::nullopt;
        out.n = std::move(cn);
    } else if (d1.n || d2.n) {
        return std::nullopt;
    }
    if (!corners_consistent(out)) return std::nullopt;
    if (!validate_biboundary(ctx, out)) return std::nullopt;
    return out;
}

std::vector<Biboundary> enumerate_with_edges(
    const ClosureContext& ctx, ClusterId minus, ClusterId plus,
    const std::vector<std::optional<BiTrace>>& n_opts,
    const std::vector<std::optional<BiTrace>>& s_opts,
    const std::vector<std::optional<BiTrace>>& e_opts,
    const std::vector<std::optional<BiTrace>>& w_opts, Budget& budget) {
    std::vector<Biboundary> out;
    // Corner prefilters keep the MCS loops tight; the final validation is
    // still the authority.
    auto b_candidates = [&]() {
        std::vector<McsId> cs;
        for (McsId m = 0; m < ctx.mcs_count(); ++m) {
            if (!ctx.mcs_le_cluster(m, minus)) continue;
            bool ok = true;
            for (DefectSub f : ctx.future_defects(m))
                if (!ctx.passed_up_cluster(f, minus)) { ok = false; break; }
            if (ok) cs.push_back(m);
        }
        return cs;
    };
    auto t_candidates = [&]() {
        std::vector<McsId> cs;
        for (McsId m = 0; m < ctx.mcs_count(); ++m) {
            if (!ctx.cluster_le_mcs(plus, m)) continue;
            bool ok = true;
            for (DefectSub p : ctx.past_defects(m))
                if (!ctx.passed_down_cluster(p, plus)) { ok = false; break; }
            if (ok) cs.push_back(m);
        }
        return cs;
    };
    auto nw_corner_candidates = [&](const BiTrace& above, const BiTrace& below) {
        // above = N for l (or E for r), below = W for l (or S for r)
        std::vector<McsId> cs;
        ClusterId up = above.initial_upper();
        ClusterId lo = below.final_lower();
        for (McsId m = 0; m < ctx.mcs_count(); ++m) {
            if (!ctx.mcs_le_cluster(m, up) || !ctx.cluster_le_mcs(lo, m)) continue;
            bool ok = true;
            for (DefectSub f : ctx.future_defects(m))
                if (!ctx.passed_up_cluster(f, up)) { ok = false; break; }
            if (ok)
                for (DefectSub p : ctx.past_defects(m))
                    if (!ctx.passed_down_cluster(p, lo)) { ok = false; break; }
            if (ok) cs.push_back(m);
        }
        return cs;
    };

    std::vector<McsId> bs = b_candidates();
    std::vector<McsId> ts = t_candidates();
    static const std::vector<std::optional<McsId>> kAbsent{std::nullopt};

    for (const auto& n : n_opts)
        for (const auto& s : s_opts)
            for (const auto& e : e_opts)
                for (const auto& w : w_opts) {
                    Biboundary base;
                    base.minus = minus;
                    base.plus = plus;
                    base.n = n;
                    base.s = s;
                    base.e = e;
                    base.w = w;
                    auto wrap = [](const std::vector<McsId>& v) {
                        std::vector<std::optional<McsId>> o;
                        for (McsId m : v) o.emplace_back(m);
                        return o;
                    };
                    std::vector<std::optional<McsId>> b_opts =
                        (s && w) ? wrap(bs) : kAbsent;
                    std::vector<std::optional<McsId>> t_opts =
                        (n && e) ? wrap(ts) : kAbsent;
                    std::vector<std::optional<McsId>> l_opts =
                        (n && w) ? wrap(nw_corner_candidates(*n, *w)) : kAbsent;
                    std::vector<std::optional<McsId>> r_opts =
                        (s && e) ? wrap(nw_corner_candidates(*e, *s)) : kAbsent;
                    for (const auto& b : b_opts)
                        for (const auto& t : t_opts)
                            for (const auto& l : l_opts)
                                for (const auto& r : r_opts) {
                                    budget.tick();
                                    Biboundary d = base;
                                    d.b = b;
                                    d.t = t;
                                    d.l = l;
                                    d.r = r;
                                    if (validate_biboundary(ctx, d)) out.push_back(std::move(d));
                                }
                }
    return out;
}

std::vector<Biboundary> limit_completions(const ClosureContext& ctx, const Biboundary& d0,
                                          const Biboundary& d1, const Biboundary& d2,
                                          const Biboundary& d3, LimitDir dir, Budget& budget) {
    std::vector<Biboundary> out;
    if (dir == LimitDir::SE) {
        auto top = hjoin(ctx, d0, d1);
        auto bottom = hjoin(ctx, d2, d3);
        if (!top || !bottom) return out;
        auto whole = vjoin(ctx, *bottom, *top);
        if (!whole || !(*whole == d0)) return out;
        if (!d1.e || !all_lower_equal(*d1.e, d0.plus)) return out;
        if (!d2.s || !all_upper_equal(*d2.s, d0.minus)) return out;

        BiTraceFilter sf, ef;
        sf.constant_upper = d0.minus;
        ef.constant_lower = d0.plus;
        std::vector<std::optional<BiTrace>> s_opts{std::nullopt}, e_opts{std::nullopt};
        for (auto& t : ctx.enumerate_bitraces(sf, budget)) s_opts.emplace_back(std::move(t));
        for (auto& t : ctx.enumerate_bitraces(ef, budget)) e_opts.emplace_back(std::move(t));
        auto all = enumerate_with_edges(ctx, d0.minus, d0.plus, {d0.n}, s_opts, e_opts, {d0.w},
                                        budget);
        for (auto& d : all)
            if (d.l == d0.l) out.push_back(std::move(d));  // agreement over {-, +, l, W, N}
    } else {
        auto bottom = hjoin(ctx, d1, d0);
        auto top = hjoin(ctx, d3, d2);
        if (!top || !bottom) return out;
        auto whole = vjoin(ctx, *bottom, *top);
        if (!whole || !(*whole == d0)) return out;
        if (!d1.w || !all_upper_equal(*d1.w, d0.minus)) return out;
        if (!d2.n || !all_lower_equal(*d2.n, d0.plus)) return out;

        BiTraceFilter nf, wf;
        nf.constant_lower = d0.plus;
        wf.constant_upper = d0.minus;
        std::vector<std::optional<BiTrace>> n_opts{std::nullopt}, w_opts{std::nullopt};
        for (auto& t : ctx.enumerate_bitraces(nf, budget)) n_opts.emplace_back(std::move(t));
        for (auto& t : ctx.enumerate_bitraces(wf, budget)) w_opts.emplace_back(std::move(t));
        auto all = enumerate_with_edges(ctx, d0.minus, d0.plus, n_opts, {d0.s}, {d0.e}, w_opts,
                                        budget);
        for (auto& d : all)
            if (d.r == d0.r) out.push_back(std::move(d));  // agreement over {-, +, r, E, S}
    }
    return out;
}

bool check_shuffle(const ClosureContext& ctx, const Biboundary& dp,
                   const std::vector<Biboundary>& delta, const std::vector<McsId>& m) {
    if (m.empty()) return false;
    for (const Biboundary& d : delta)
        if (!d.closed()) return false;

    // S1: edge clusters on the boundary side are constant.
    if (dp.w && !all_upper_equal(*dp.w, dp.minus)) return false;
    if (dp.s && !all_upper_equal(*dp.s, dp.minus)) return false;
    if (dp.e && !all_lower_equal(*dp.e, dp.plus)) return false;
    if (dp.n && !all_lower_equal(*dp.n, dp.plus)) return false;

    // S3: each member of delta fits strictly between minus and plus.
    for (const Biboundary& d : delta) {
        if (!ctx.mcs_le_cluster(*d.t, dp.plus)) return false;
        for (DefectSub f : ctx.future_defects(*d.t))
            if (!ctx.passed_up_cluster(f, dp.plus)) return false;
        if (!all_upper_equal(*d.n, dp.plus) || !all_upper_equal(*d.e, dp.plus)) return false;
        if (!ctx.cluster_le_mcs(dp.minus, *d.b)) return false;
        for (DefectSub p : ctx.past_defects(*d.b))
            if (!ctx.passed_down_cluster(p, dp.minus)) return false;
        if (!all_lower_equal(*d.s, dp.minus) || !all_lower_equal(*d.w, dp.minus)) return false;
    }
    // S4: each auxiliary MCS fits between minus and plus.
    for (McsId x : m) {
        if (!ctx.mcs_le_cluster(x, dp.plus) || !ctx.cluster_le_mcs(dp.minus, x)) return false;
        for (DefectSub f : ctx.future_defects(x))
            if (!ctx.passed_up_cluster(f, dp.plus)) return false;
        for (DefectSub p : ctx.past_defects(x))
            if (!ctx.passed_down_cluster(p, dp.minus)) return false;
    }
    // S2: every cluster defect of minus (future) / plus (past) is absorbed.
    for (DefectSub f : ctx.future_defects_cluster(dp.minus)) {
        bool covered = false;
        for (McsId x : m)
            if (ctx.passed_up_mcs(f, x)) { covered = true; break; }
        for (std::size_t i = 0; i < delta.size() && !covered; ++i) {
            const Biboundary& d = delta[i];
            covered = ctx.passed_up_mcs(f, *d.b) || ctx.passed_up_mcs(f, *d.l) ||
                      ctx.passed_up_mcs(f, *d.r);
            for (const BiTrace* tr : {&*d.w, &*d.s}) {
                if (covered) break;
                for (std::size_t j = 0; j < tr->lower.size() && !covered; ++j)
                    covered = ctx.passed_up(f, ctx.interpolant(tr->lower[j], tr->upper[j]));
                for (McsId v : tr->trans) {
                    if (covered) break;
                    covered = ctx.passed_up_mcs(f, v);
                }
            }
        }
        if (!covered) return false;
    }
    for (DefectSub p : ctx.past_defects_cluster(dp.plus)) {
        bool covered = false;
        for (McsId x : m)
            if (ctx.passed_down_mcs(p, x)) { covered = true; break; }
        for (std::size_t i = 0; i < delta.size() && !covered; ++i) {
            const Biboundary& d = delta[i];
            covered = ctx.passed_down_mcs(p, *d.t) || ctx.passed_down_mcs(p, *d.l) ||
                      ctx.passed_down_mcs(p, *d.r);
            for (const BiTrace* tr : {&*d.n, &*d.e}) {
                if (covered) break;
                for (std::size_t j = 0; j < tr->lower.size() && !covered; ++j)
                    covered = ctx.passed_down(p, ctx.interpolant(tr->lower[j], tr->upper[j]));
                for (McsId v : tr->trans) {
                    if (covered) break;
                    covered = ctx.passed_down_mcs(p, v);
                }
            }
        }
        if (!covered) return false;
    }
    return true;
}

std::vector<Biboundary> enumerate_shuffles(const ClosureContext& ctx,
                                           const std::vector<Biboundary>& delta,
                                           const std::vector<McsId>& m, Budget& budget) {
    std::vector<Biboundary> out;
    if (m.empty()) return out;
    for (ClusterId lo = 0; lo < ctx.cluster_count(); ++lo) {
        for (ClusterId up = 0; up < ctx.cluster_count(); ++up) {
            Biboundary probe;
            probe.minus = lo;
            probe.plus = up;
            // S2-S4 do not involve the edges of the candidate, so the bare
            // probe decides them once per cluster pair.
            if (!check_shuffle(ctx, probe, delta, m)) continue;
            BiTraceFilter up_const, lo_const;
            up_const.constant_upper = lo;
            lo_const.constant_lower = up;
            std::vector<std::optional<BiTrace>> ws{std::nullopt}, ns{std::nullopt};
            for (auto& t : ctx.enumerate_bitraces(up_const, budget)) ws.emplace_back(std::move(t));
            for (auto& t : ctx.enumerate_bitraces(lo_const, budget)) ns.emplace_back(std::move(t));
            auto all = enumerate_with_edges(ctx, lo, up, ns, ws, ns, ws, budget);
            for (auto& d : all) out.push_back(std::move(d));
        }
    }
    return out;
}

Biboundary diagonal_dual(const Biboundary& d) {
    Biboundary out = d;
    std::swap(out.n, out.e);
    std::swap(out.s, out.w);
    std::swap(out.l, out.r);
    return out;
}

std::vector<Biboundary> enumerate_biboundaries(const ClosureContext& ctx, Budget& budget) {
    std::vector<Biboundary> out;
    const auto& traces = ctx.all_bitraces(budget);
    for (ClusterId lo = 0; lo < ctx.cluster_count(); ++lo)
        for (ClusterId up = 0; up < ctx.cluster_count(); ++up) {
            // B3 prunes each edge list before the cross product.
            std::vector<std::optional<BiTrace>> n_opts{std::nullopt}, s_opts{std::nullopt},
                e_opts{std::nullopt}, w_opts{std::nullopt};
            for (const auto& t : traces) {
                if (t.final_lower() == up) {
                    n_opts.emplace_back(t);
                    e_opts.emplace_back(t);
                }
                if (t.initial_upper() == lo) {
                    s_opts.emplace_back(t);
                    w_opts.emplace_back(t);
                }
            }
            auto all = enumerate_with_edges(ctx, lo, up, n_opts, s_opts, e_opts, w_opts, budget);
            for (auto& d : all) out.push_back(std::move(d));
        }
    return out;
}

}  // namespace mink
