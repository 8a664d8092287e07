#include "mink/order.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>

namespace mink {

bool eval_lesssim(const ClosureTable& ct, SignVector m, SignVector n) {
    auto bit = [](SignVector a, int i) { return (a >> i) & 1u; };
    for (int i = 0; i < ct.sub_count(); ++i) {
        const Formula& f = *ct.sub(i);
        if (f.kind == Kind::F) {
            int ch = ct.index_of(f.lhs);
            if (bit(n, ch) && !bit(m, i)) return false;   // psi in n => F psi in m
            if (bit(n, i) && !bit(m, i)) return false;    // F psi in n => F psi in m
        } else if (f.kind == Kind::P) {
            int ch = ct.index_of(f.lhs);
            if (bit(m, ch) && !bit(n, i)) return false;   // psi in m => P psi in n
            if (bit(m, i) && !bit(n, i)) return false;    // P psi in m => P psi in n
        }
    }
    return true;
}

ClosureContext::ClosureContext(FormulaPtr root, Budget& budget)
    : root_(std::move(root)), ct_(root_), formula_size_(node_count(*root_)) {
    mcs_ = kt_satisfiable_atoms(ct_, budget);  // sorted by sign vector

    for (int i = 0; i < ct_.sub_count(); ++i) {
        Kind k = ct_.sub(i)->kind;
        if (k == Kind::F) f_subs_.push_back(i);
        if (k == Kind::P) p_subs_.push_back(i);
    }

    int n = mcs_count();
    lesssim_.assign(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) lesssim_[i][j] = eval_lesssim(ct_, mcs_[i], mcs_[j]);

    // Clusters: equivalence classes of reflexive elements under lesssim-both-ways.
    cluster_of_.assign(n, -1);
    for (int i = 0; i < n; ++i) {
        if (!lesssim_[i][i] || cluster_of_[i] != -1) continue;
        std::vector<McsId> members;
        for (int j = i; j < n; ++j)
            if (lesssim_[j][j] && cluster_of_[j] == -1 && lesssim_[i][j] && lesssim_[j][i])
                members.push_back(j);
        ClusterId c = static_cast<ClusterId>(clusters_.size());
        for (McsId m : members) cluster_of_[m] = c;
        clusters_.push_back(std::move(members));
    }

    int nc = cluster_count();
    cluster_le_.assign(nc, std::vector<bool>(nc, false));
    for (int c = 0; c < nc; ++c)
        for (int d = 0; d < nc; ++d)
            cluster_le_[c][d] = lesssim_[clusters_[c].front()][clusters_[d].front()];
}

std::vector<int> ClosureContext::mcs_entries(McsId m) const {
    std::vector<int> out;
    for (int e = 0; e < ct_.entry_count(); ++e)
        if (mcs_contains(m, e)) out.push_back(e);
    return out;
}

McsId ClosureContext::find_mcs(const std::vector<int>& entries) const {
    for (int m = 0; m < mcs_count(); ++m)
        if (mcs_entries(m) == entries) return m;
    return -1;
}

bool ClosureContext::mcs_le_cluster(McsId m, ClusterId c) const {
    for (McsId n : clusters_[c])
        if (!lesssim_[m][n]) return false;
    return true;
}
bool ClosureContext::mcs_lt_cluster(McsId m, ClusterId c) const {
    for (McsId n : clusters_[c])
        if (!lesssim_[m][n] || m == n) return false;
    return true;
}
bool ClosureContext::cluster_le_mcs(ClusterId c, McsId m) const {
    for (McsId n : clusters_[c])
        if (!lesssim_[n][m]) return false;
    return true;
}
bool ClosureContext::cluster_lt_mcs(ClusterId c, McsId m) const {
    for (McsId n : clusters_[c])
        if (!lesssim_[n][m] || m == n) return false;
    return true;
}

std::vector<DefectSub> ClosureContext::future_defects(McsId m) const {
    std::vector<DefectSub> out;
    for (int f : f_subs_)
        if ((mcs_[m] >> f) & 1u) out.push_back(f);
    return out;
}
std::vector<DefectSub> ClosureContext::past_defects(McsId m) const {
    std::vector<DefectSub> out;
    for (int p : p_subs_)
        if ((mcs_[m] >> p) & 1u) out.push_back(p);
    return out;
}
std::vector<DefectSub> ClosureContext::future_defects_set(const std::vector<McsId>& s) const {
    std::vector<DefectSub> out;
    for (int f : f_subs_)
        for (McsId m : s)
            if ((mcs_[m] >> f) & 1u) { out.push_back(f); break; }
    return out;
}
std::vector<DefectSub> ClosureContext::past_defects_set(const std::vector<McsId>& s) const {
    std::vector<DefectSub> out;
    for (int p : p_subs_)
        for (McsId m : s)
            if ((mcs_[m] >> p) & 1u) { out.push_back(p); break; }
    return out;
}
std::vector<DefectSub> ClosureContext::future_defects_cluster(ClusterId c) const {
    std::vector<DefectSub> out;
    for (int f : f_subs_) {
        int ch = ct_.index_of(ct_.sub(f)->lhs);
        bool demanded = false, realized = false;
        for (McsId m : clusters_[c]) {
            if ((mcs_[m] >> f) & 1u) demanded = true;
            if ((mcs_[m] >> ch) & 1u) realized = true;
        }
        if (demanded && !realized) out.push_back(f);
    }
    return out;
}
std::vector<DefectSub> ClosureContext::past_defects_cluster(ClusterId c) const {
    std::vector<DefectSub> out;
    for (int p : p_subs_) {
        int ch = ct_.index_of(ct_.sub(p)->lhs);
        bool demanded = false, realized = false;
        for (McsId m : clusters_[c]) {
            if ((mcs_[m] >> p) & 1u) demanded = true;
            if ((mcs_[m] >> ch) & 1u) realized = true;
        }
        if (demanded && !realized) out.push_back(p);
    }
    return out;
}

bool ClosureContext::passed_up(DefectSub f, const std::vector<McsId>& s) const {
    int ch = ct_.index_of(ct_.sub(f)->lhs);
    for (McsId m : s)
        if (((mcs_[m] >> ch) & 1u) || ((mcs_[m] >> f) & 1u)) return true;
    return false;
}
bool ClosureContext::passed_down(DefectSub p, const std::vector<McsId>& s) const {
    int ch = ct_.index_of(ct_.sub(p)->lhs);
    for (McsId m : s)
        if (((mcs_[m] >> ch) & 1u) || ((mcs_[m] >> p) & 1u)) return true;
    return false;
}
bool ClosureContext::passed_up_mcs(DefectSub f, McsId m) const {
    int ch = ct_.index_of(ct_.sub(f)->lhs);
    return ((mcs_[m] >> ch) & 1u) || ((mcs_[m] >> f) & 1u);
}
bool ClosureContext::passed_down_mcs(DefectSub p, McsId m) const {
    int ch = ct_.index_of(ct_.sub(p)->lhs);
    return ((mcs_[m] >> ch) & 1u) || ((mcs_[m] >> p) & 1u);
}

const std::vector<McsId>& ClosureContext::interpolant(ClusterId clo, ClusterId chi) const {
    auto key = std::make_pair(clo, chi);
    auto it = interpolant_cache_.find(key);
    if (it != interpolant_cache_.end()) return it->second;
    std::vector<McsId> out;
    for (McsId m = 0; m < mcs_count(); ++m) {
        if (!cluster_le_mcs(clo, m) || !mcs_le_cluster(m, chi)) continue;
        bool ok = true;
        for (DefectSub f : future_defects(m))
            if (!passed_up_cluster(f, chi)) { ok = false; break; }
        if (ok)
            for (DefectSub p : past_defects(m))
                if (!passed_down_cluster(p, clo)) { ok = false; break; }
        if (ok) out.push_back(m);
    }
    return interpolant_cache_.emplace(key, std::move(out)).first->second;
}

bool ClosureContext::validate_bitrace(const BiTrace& t) const {
    std::size_t n = t.trans.size();
    if (t.lower.size() != n + 1 || t.upper.size() != n + 1) return false;
    for (std::size_t i = 0; i <= n; ++i) {
        if (t.lower[i] < 0 || t.lower[i] >= cluster_count()) return false;
        if (t.upper[i] < 0 || t.upper[i] >= cluster_count()) return false;
        // c_i^- <= c_i^+ with nonempty interpolant
        if (!cluster_le(t.lower[i], t.upper[i])) return false;
        if (interpolant(t.lower[i], t.upper[i]).empty()) return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        // chains are increasing, with strict growth in at least one component
        if (!cluster_le(t.lower[i], t.lower[i + 1])) return false;
        if (!cluster_le(t.upper[i], t.upper[i + 1])) return false;
        if (!cluster_lt(t.lower[i], t.lower[i + 1]) && !cluster_lt(t.upper[i], t.upper[i + 1]))
            return false;
        // c_i^- <= b_{i+1} <= c_{i+1}^+
        McsId b = t.trans[i];
        if (b < 0 || b >= mcs_count()) return false;
        if (!cluster_le_mcs(t.lower[i], b) || !mcs_le_cluster(b, t.upper[i + 1])) return false;
        for (DefectSub f : future_defects(b))
            if (!passed_up_cluster(f, t.upper[i + 1])) return false;
        for (DefectSub p : past_defects(b))
            if (!passed_down_cluster(p, t.lower[i])) return false;
    }
    return true;
}

std::optional<BiTrace> ClosureContext::concat(const BiTrace& t1, McsId a, const BiTrace& t2) const {
    // Transition form: a becomes a transition value between the two traces.
    BiTrace trans;
    trans.lower = t1.lower;
    trans.upper = t1.upper;
    trans.trans = t1.trans;
    trans.trans.push_back(a);
    trans.lower.insert(trans.lower.end(), t2.lower.begin(), t2.lower.end());
    trans.upper.insert(trans.upper.end(), t2.upper.begin(), t2.upper.end());
    trans.trans.insert(trans.trans.end(), t2.trans.begin(), t2.trans.end());
    if (validate_bitrace(trans)) return trans;

    // Merge form: final clusters of t1 equal initial clusters of t2 and a lies
    // in their interpolant.
    if (t1.final_lower() == t2.initial_lower() && t1.final_upper() == t2.initial_upper()) {
        const auto& interp = interpolant(t1.final_lower(), t1.final_upper());
        if (std::find(interp.begin(), interp.end(), a) != interp.end()) {
            BiTrace merge;
            merge.lower = t1.lower;
            merge.upper = t1.upper;
            merge.trans = t1.trans;
            merge.lower.insert(merge.lower.end(), t2.lower.begin() + 1, t2.lower.end());
            merge.upper.insert(merge.upper.end(), t2.upper.begin() + 1, t2.upper.end());
            merge.trans.insert(merge.trans.end(), t2.trans.begin(), t2.trans.end());
            if (validate_bitrace(merge)) return merge;
        }
    }
    return std::nullopt;
}

std::vector<BiTrace> ClosureContext::enumerate_bitraces(const BiTraceFilter& filter,
                                                        Budget& budget) const {
    std::vector<BiTrace> out;
    auto pair_ok = [&](ClusterId lo, ClusterId up) {
        if (filter.constant_lower && lo != *filter.constant_lower) return false;
        if (filter.constant_upper && up != *filter.constant_upper) return false;
        return cluster_le(lo, up) && !interpolant(lo, up).empty();
    };
    std::function<void(BiTrace&)> extend = [&](BiTrace& t) {
        budget.tick();
        if (!filter.final ||
            (t.final_lower() == filter.final->first && t.final_upper() == filter.final->second))
            out.push_back(t);
        ClusterId lo = t.final_lower(), up = t.final_upper();
        for (ClusterId lo2 = 0; lo2 < cluster_count(); ++lo2) {
            if (!cluster_le(lo, lo2)) continue;
            for (ClusterId up2 = 0; up2 < cluster_count(); ++up2) {
                if (!cluster_le(up, up2)) continue;
                if (!cluster_lt(lo, lo2) && !cluster_lt(up, up2)) continue;
                if (!pair_ok(lo2, up2)) continue;
                for (McsId b = 0; b < mcs_count(); ++b) {
                    if (!cluster_le_mcs(lo, b) || !mcs_le_cluster(b, up2)) continue;
                    bool ok = true;
                    for (DefectSub f : future_defects(b))
                        if (!passed_up_cluster(f, up2)) { ok = false; break; }
                    if (ok)
                        for (DefectSub p : past_defects(b))
                            if (!passed_down_cluster(p, lo)) { ok = false; break; }
                    if (!ok) continue;
                    t.lower.push_back(lo2);
                    t.upper.push_back(up2);
                    t.trans.push_back(b);
                    extend(t);
                    t.lower.pop_back();
                    t.upper.pop_back();
                    t.trans.pop_back();
                }
            }
        }
    };
    for (ClusterId lo = 0; lo < cluster_count(); ++lo)
        for (ClusterId up = 0; up < cluster_count(); ++up) {
            if (!pair_ok(lo, up)) continue;
            if (filter.initial && (lo != filter.initial->first || up != filter.initial->second))
                continue;
            BiTrace t = pair_trace(lo, up);
            extend(t);
        }
    return out;
}

const std::vector<BiTrace>& ClosureContext::all_bitraces(Budget& budget) const {
    if (!bitrace_cache_ready_) {
        bitrace_cache_ = enumerate_bitraces(BiTraceFilter{}, budget);
        bitrace_cache_ready_ = true;
    }
    return bitrace_cache_;
}

std::string ClosureContext::debug_dump() const {
    std::ostringstream os;
    for (McsId m = 0; m < mcs_count(); ++m) {
        os << "m" << m << ":";
        for (int e : mcs_entries(m)) os << " " << e;
        os << "\n";
    }
    for (ClusterId c = 0; c < cluster_count(); ++c) {
        os << "c" << c << ": [";
        const auto& mem = clusters_[c];
        for (std::size_t i = 0; i < mem.size(); ++i) os << (i ? " " : "") << mem[i];
        os << "]\n";
    }
    for (ClusterId c = 0; c < cluster_count(); ++c)
        for (ClusterId d = 0; d < cluster_count(); ++d)
            if (cluster_lt(c, d)) os << "c" << c << " < c" << d << "\n";
    return os.str();
}

}  // namespace mink
