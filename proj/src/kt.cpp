#include "mink/kt.hpp"

#include <algorithm>

namespace mink {

namespace {

struct ClosureShape {
    std::vector<int> free_subs;   // Var, F, P (True is forced positive)
    std::vector<int> f_subs;      // indices of F-kind subformulas
    std::vector<int> p_subs;
    std::vector<int> var_subs;
    std::vector<int> child;       // per sub: child index for Not/F/P, -1 otherwise
    std::vector<int> rhs;         // per sub: right child for Or
};

ClosureShape shape_of(const ClosureTable& ct) {
    ClosureShape sh;
    int n = ct.sub_count();
    sh.child.assign(n, -1);
    sh.rhs.assign(n, -1);
    for (int i = 0; i < n; ++i) {
        const Formula& f = *ct.sub(i);
        switch (f.kind) {
            case Kind::Var:
                sh.free_subs.push_back(i);
                sh.var_subs.push_back(i);
                break;
            case Kind::True: break;
            case Kind::Not:
                sh.child[i] = ct.index_of(f.lhs);
                break;
            case Kind::Or:
                sh.child[i] = ct.index_of(f.lhs);
                sh.rhs[i] = ct.index_of(f.rhs);
                break;
            case Kind::F:
                sh.child[i] = ct.index_of(f.lhs);
                sh.free_subs.push_back(i);
                sh.f_subs.push_back(i);
                break;
            case Kind::P:
                sh.child[i] = ct.index_of(f.lhs);
                sh.free_subs.push_back(i);
                sh.p_subs.push_back(i);
                break;
        }
    }
    return sh;
}

}  // namespace

std::vector<SignVector> enumerate_atoms(const ClosureTable& ct) {
    ClosureShape sh = shape_of(ct);
    int n = ct.sub_count();
    if (n > 62) throw std::runtime_error("closure too large for sign-vector encoding");
    std::vector<SignVector> out;
    std::uint64_t combos = 1ull << sh.free_subs.size();
    for (std::uint64_t c = 0; c < combos; ++c) {
        SignVector a = 0;
        for (std::size_t j = 0; j < sh.free_subs.size(); ++j)
            if ((c >> j) & 1u) a |= 1ull << sh.free_subs[j];
        // Derived signs in post-order: children precede parents.
        for (int i = 0; i < n; ++i) {
            const Formula& f = *ct.sub(i);
            bool v;
            switch (f.kind) {
                case Kind::True: v = true; break;
                case Kind::Not: v = !((a >> sh.child[i]) & 1u); break;
                case Kind::Or: v = ((a >> sh.child[i]) & 1u) || ((a >> sh.rhs[i]) & 1u); break;
                default: continue;
            }
            if (v) a |= 1ull << i;
        }
        out.push_back(a);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<SignVector> kt_satisfiable_atoms(const ClosureTable& ct, Budget& budget) {
    ClosureShape sh = shape_of(ct);
    std::vector<SignVector> atoms = enumerate_atoms(ct);
    std::vector<bool> alive(atoms.size(), true);

    // Edge m -> n is coherent iff ~F psi at m forces ~psi at n, and
    // ~P psi at n forces ~psi at m. K_t imposes nothing further.
    auto coherent = [&](SignVector m, SignVector n) {
        for (int f : sh.f_subs)
            if (!((m >> f) & 1u) && ((n >> sh.child[f]) & 1u)) return false;
        for (int p : sh.p_subs)
            if (!((n >> p) & 1u) && ((m >> sh.child[p]) & 1u)) return false;
        return true;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            if (!alive[i]) continue;
            SignVector m = atoms[i];
            bool ok = true;
            for (int f : sh.f_subs) {
                if (!((m >> f) & 1u)) continue;
                bool found = false;
                for (std::size_t j = 0; j < atoms.size() && !found; ++j) {
                    if (!alive[j]) continue;
                    budget.tick();
                    found = coherent(m, atoms[j]) && ((atoms[j] >> sh.child[f]) & 1u);
                }
                if (!found) { ok = false; break; }
            }
            if (ok) {
                for (int p : sh.p_subs) {
                    if (!((m >> p) & 1u)) continue;
                    bool found = false;
                    for (std::size_t j = 0; j < atoms.size() && !found; ++j) {
                        if (!alive[j]) continue;
                        budget.tick();
                        found = coherent(atoms[j], m) && ((atoms[j] >> sh.child[p]) & 1u);
                    }
                    if (!found) { ok = false; break; }
                }
            }
            if (!ok) {
                alive[i] = false;
                changed = true;
            }
        }
    }
    std::vector<SignVector> out;
    for (std::size_t i = 0; i < atoms.size(); ++i)
        if (alive[i]) out.push_back(atoms[i]);
    return out;
}

bool kt_sat(const ClosureTable& ct, const Goal& goal, Budget& budget) {
    std::vector<SignVector> sat = kt_satisfiable_atoms(ct, budget);
    for (SignVector a : sat) {
        bool all = true;
        for (int e : goal)
            if (!atom_contains_entry(a, e)) { all = false; break; }
        if (all) return true;
    }
    return false;
}

bool kt_sat_bounded_oracle(const ClosureTable& ct, const Goal& goal, int k, Budget& budget) {
    ClosureShape sh = shape_of(ct);
    int n = ct.sub_count();
    int nv = static_cast<int>(sh.var_subs.size());
    for (int worlds = 1; worlds <= k; ++worlds) {
        std::uint64_t rel_combos = 1ull << (worlds * worlds);
        std::uint64_t val_combos = 1ull << (worlds * nv);
        for (std::uint64_t rel = 0; rel < rel_combos; ++rel) {
            auto edge = [&](int u, int v) { return (rel >> (u * worlds + v)) & 1u; };
            for (std::uint64_t val = 0; val < val_combos; ++val) {
                budget.tick();
                // truth[w] bit i = subformula i true at world w
                std::vector<std::uint64_t> truth(worlds, 0);
                for (int w = 0; w < worlds; ++w)
                    for (int j = 0; j < nv; ++j)
                        if ((val >> (w * nv + j)) & 1u) truth[w] |= 1ull << sh.var_subs[j];
                for (int i = 0; i < n; ++i) {
                    const Formula& f = *ct.sub(i);
                    for (int w = 0; w < worlds; ++w) {
                        bool v = false;
                        switch (f.kind) {
                            case Kind::Var: continue;
                            case Kind::True: v = true; break;
                            case Kind::Not: v = !((truth[w] >> sh.child[i]) & 1u); break;
                            case Kind::Or:
                                v = ((truth[w] >> sh.child[i]) & 1u) ||
                                    ((truth[w] >> sh.rhs[i]) & 1u);
                                break;
                            case Kind::F:
                                for (int u = 0; u < worlds && !v; ++u)
                                    v = edge(w, u) && ((truth[u] >> sh.child[i]) & 1u);
                                break;
                            case Kind::P:
                                for (int u = 0; u < worlds && !v; ++u)
                                    v = edge(u, w) && ((truth[u] >> sh.child[i]) & 1u);
                                break;
                        }
                        if (v) truth[w] |= 1ull << i;
                    }
                }
                for (int w = 0; w < worlds; ++w) {
                    bool all = true;
                    for (int e : goal) {
                        bool bit = (truth[w] >> ClosureTable::entry_sub(e)) & 1u;
                        if (bit != ClosureTable::entry_positive(e)) { all = false; break; }
                    }
                    if (all) return true;
                }
            }
        }
    }
    return false;
}

}  // namespace mink
