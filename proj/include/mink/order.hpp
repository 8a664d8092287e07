// Maximal consistent sets, the lesssim preorder, clusters, defects,
// interpolants, and bi-traces, all cached in a ClosureContext.
//
// Everything is immutable after construction and indexed by small integer
// ids with a deterministic global numbering (lexicographic on membership
// vectors), so emitted certificates are stable across runs.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mink/kt.hpp"

namespace mink {

using McsId = int;
using ClusterId = int;

// A future defect is identified by the closure index of its F-subformula;
// past defects by the index of the P-subformula.
using DefectSub = int;

// One closed edge: cluster pairs (lower_i, upper_i) for i = 0..n interleaved
// with transition values trans_1..trans_n.
struct BiTrace {
    std::vector<ClusterId> lower;
    std::vector<ClusterId> upper;
    std::vector<McsId> trans;

    int length() const { return static_cast<int>(trans.size()); }
    ClusterId initial_lower() const { return lower.front(); }
    ClusterId initial_upper() const { return upper.front(); }
    ClusterId final_lower() const { return lower.back(); }
    ClusterId final_upper() const { return upper.back(); }

    bool operator==(const BiTrace&) const = default;
    auto operator<=>(const BiTrace&) const = default;
};

// Single-pair trace (c-, c+).
inline BiTrace pair_trace(ClusterId lo, ClusterId up) { return BiTrace{{lo}, {up}, {}}; }

struct BiTraceFilter {
    std::optional<std::pair<ClusterId, ClusterId>> initial;  // (lower, upper)
    std::optional<std::pair<ClusterId, ClusterId>> final;
    std::optional<ClusterId> constant_upper;
    std::optional<ClusterId> constant_lower;
};

class ClosureContext {
public:
    ClosureContext(FormulaPtr root, Budget& budget);

    const ClosureTable& closure() const { return ct_; }
    const FormulaPtr& root() const { return root_; }
    int root_entry() const { return ClosureTable::entry(ct_.root_sub(), true); }

    // --- maximal consistent sets -------------------------------------------
    int mcs_count() const { return static_cast<int>(mcs_.size()); }
    SignVector mcs_signs(McsId m) const { return mcs_[m]; }
    bool mcs_contains(McsId m, int entry) const { return atom_contains_entry(mcs_[m], entry); }
    // Sorted entry indices of the members of m.
    std::vector<int> mcs_entries(McsId m) const;
    // Id of the MCS with exactly these member entries, or -1.
    McsId find_mcs(const std::vector<int>& entries) const;

    bool lesssim(McsId m, McsId n) const { return lesssim_[m][n]; }
    bool mcs_reflexive(McsId m) const { return lesssim_[m][m]; }

    // --- clusters ----------------------------------------------------------
    int cluster_count() const { return static_cast<int>(clusters_.size()); }
    const std::vector<McsId>& cluster_members(ClusterId c) const { return clusters_[c]; }
    ClusterId cluster_of(McsId m) const { return cluster_of_[m]; }  // -1 if irreflexive

    bool cluster_le(ClusterId c, ClusterId d) const { return cluster_le_[c][d]; }
    bool cluster_lt(ClusterId c, ClusterId d) const { return cluster_le_[c][d] && c != d; }
    // m <= c : for all n in c, m lesssim n. m < c : additionally m != n.
    bool mcs_le_cluster(McsId m, ClusterId c) const;
    bool mcs_lt_cluster(McsId m, ClusterId c) const;
    bool cluster_le_mcs(ClusterId c, McsId m) const;
    bool cluster_lt_mcs(ClusterId c, McsId m) const;

    // --- defects -----------------------------------------------------------
    std::vector<DefectSub> future_defects(McsId m) const;
    std::vector<DefectSub> past_defects(McsId m) const;
    std::vector<DefectSub> future_defects_set(const std::vector<McsId>& s) const;
    std::vector<DefectSub> past_defects_set(const std::vector<McsId>& s) const;
    // Cluster semantics: F psi in some member, psi realized in none.
    std::vector<DefectSub> future_defects_cluster(ClusterId c) const;
    std::vector<DefectSub> past_defects_cluster(ClusterId c) const;

    bool passed_up(DefectSub f, const std::vector<McsId>& s) const;
    bool passed_down(DefectSub p, const std::vector<McsId>& s) const;
    bool passed_up_cluster(DefectSub f, ClusterId c) const {
        return passed_up(f, cluster_members(c));
    }
    bool passed_down_cluster(DefectSub p, ClusterId c) const {
        return passed_down(p, cluster_members(c));
    }
    bool passed_up_mcs(DefectSub f, McsId m) const;
    bool passed_down_mcs(DefectSub p, McsId m) const;

    // --- interpolants ------------------------------------------------------
    // All m with clo <= m <= chi whose future defects pass up to chi and past
    // defects pass down to clo. Cached; sorted by id.
    const std::vector<McsId>& interpolant(ClusterId clo, ClusterId chi) const;

    // --- bi-traces ---------------------------------------------------------
    bool validate_bitrace(const BiTrace& t) const;
    std::optional<BiTrace> concat(const BiTrace& t1, McsId a, const BiTrace& t2) const;
    std::vector<BiTrace> enumerate_bitraces(const BiTraceFilter& filter, Budget& budget) const;
    // All bi-traces over this context, cached after the first call.
    const std::vector<BiTrace>& all_bitraces(Budget& budget) const;

    // One MCS per line as sorted entry indices; clusters as bracketed id lists.
    std::string debug_dump() const;

    int formula_size() const { return formula_size_; }  // |phi|, node count

private:
    FormulaPtr root_;
    ClosureTable ct_;
    int formula_size_;
    std::vector<SignVector> mcs_;
    std::vector<std::vector<bool>> lesssim_;
    std::vector<std::vector<McsId>> clusters_;
    std::vector<ClusterId> cluster_of_;
    std::vector<std::vector<bool>> cluster_le_;
    std::vector<DefectSub> f_subs_, p_subs_;
    mutable std::map<std::pair<ClusterId, ClusterId>, std::vector<McsId>> interpolant_cache_;
    mutable std::vector<BiTrace> bitrace_cache_;
    mutable bool bitrace_cache_ready_ = false;
};

// Standalone evaluation of the lesssim definition on raw sign vectors; used by
// ClosureContext and by test oracles.
bool eval_lesssim(const ClosureTable& ct, SignVector m, SignVector n);

}  // namespace mink
