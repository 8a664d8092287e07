// Fabricated biboundaries: bottom-up saturation to the least fixpoint
// (reference engine), a goal-directed memoized engine, and derivation
// certificates with an independent checker.

#pragma once

#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "mink/biboundary.hpp"

namespace mink {

enum class Rule { Ground, VJoin, HJoin, SeLimit, NwLimit, Shuffle };

const char* rule_name(Rule r);
std::optional<Rule> rule_from_name(const std::string& s);

// Certificate node. Premises: 2 for joins (below/west first), 4 for limits
// (d0..d3), the Delta members for shuffles, none for ground. aux carries the
// shuffle's M.
struct Derivation {
    Rule rule = Rule::Ground;
    Biboundary conclusion;
    std::vector<Derivation> premises;
    std::vector<McsId> aux;

    bool operator==(const Derivation&) const = default;
};

// Re-checks every node of the tree. On rejection, fail_path (if given) names
// the first failing node, e.g. "/premises[1]".
bool check_derivation(const ClosureContext& ctx, const Derivation& cert, Budget& budget,
                      std::string* fail_path = nullptr);

// One constructor application, with premises by value; derivation trees are
// unfolded from these on demand so the saturated set stays compact.
struct FabStep {
    Rule rule = Rule::Ground;
    std::vector<Biboundary> premises;
    std::vector<McsId> aux;
};

struct FabricatedSet {
    std::unordered_map<Biboundary, FabStep, BiboundaryHash> steps;
    bool complete = true;

    bool contains(const Biboundary& d) const { return steps.count(d) != 0; }
    std::size_t size() const { return steps.size(); }
    // Members in canonical (sorted) order.
    std::vector<Biboundary> members() const;
    // Unfolds the step DAG rooted at d into a certificate tree.
    Derivation derivation(const Biboundary& d) const;
};

// Least set containing the ground biboundaries and closed under joins, limit
// completions, and shuffles (|Delta|, |M| <= |phi|). The seed permutes
// internal iteration orders and threads > 1 parallelizes candidate
// generation; neither may change the resulting set.
FabricatedSet saturate(const ClosureContext& ctx, Budget& budget, unsigned seed = 0,
                       int threads = 1);

enum class EngineKind { BottomUp, TopDown };

// Decides membership in the fabricated set. Bottom-up delegates to a cached
// saturate; top-down explores the four constructor options goal-first with a
// success memo and per-path cycle cuts (failures are only memoized when no
// cut was taken underneath, which preserves least-fixpoint semantics).
class Fabricator {
public:
    Fabricator(const ClosureContext& ctx, EngineKind kind, Budget& budget);

    bool is_fabricated(const Biboundary& d);
    // Present whenever is_fabricated has returned true for d.
    std::optional<Derivation> derivation(const Biboundary& d);

    EngineKind kind() const { return kind_; }
    const FabricatedSet* saturated();  // bottom-up only; computes on demand

private:
    bool solve(const Biboundary& d, bool& cut_seen);
    bool try_ground(const Biboundary& d);
    bool try_joins(const Biboundary& d, bool& cut_seen);
    bool try_shuffle(const Biboundary& d, bool& cut_seen);
    bool try_limits(const Biboundary& d, bool& cut_seen);
    // Fabricated premise tuple (d0..d3) for the limit of d0, if any; memoized
    // per (d0, direction) since the completion set depends only on those.
    std::optional<FabStep> limit_premises(const Biboundary& d0, LimitDir dir, bool& cut_seen);

    const ClosureContext& ctx_;
    EngineKind kind_;
    Budget& budget_;
    std::optional<FabricatedSet> saturated_;
    std::unordered_map<Biboundary, bool, BiboundaryHash> memo_;
    std::unordered_map<Biboundary, FabStep, BiboundaryHash> steps_;
    std::unordered_set<Biboundary, BiboundaryHash> on_path_;
    // Per (minus, plus): closed candidates for shuffle Delta members.
    std::unordered_map<long long, std::vector<Biboundary>> shuffle_cands_;
    std::unordered_map<Biboundary, std::optional<FabStep>, BiboundaryHash> limit_memo_se_,
        limit_memo_nw_;
};

}  // namespace mink
