// Formula AST, parser, and closure for the basic temporal language.
//
// The stored AST is fully desugared: only Var, True, Not, Or, F, P appear.
// The surface grammar additionally accepts ->, &, G, H, and false, which the
// parser rewrites on the fly.

#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace mink {

enum class Kind { Var, True, Not, Or, F, P };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    Kind kind;
    std::string name;    // Var only
    FormulaPtr lhs;      // child of Not/F/P, left of Or
    FormulaPtr rhs;      // right of Or
};

FormulaPtr mk_var(std::string name);
FormulaPtr mk_true();
FormulaPtr mk_not(FormulaPtr f);
FormulaPtr mk_or(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_f(FormulaPtr f);
FormulaPtr mk_p(FormulaPtr f);

bool equal(const Formula& a, const Formula& b);
inline bool equal(const FormulaPtr& a, const FormulaPtr& b) { return equal(*a, *b); }
std::size_t hash_value(const Formula& f);

// Node count of the desugared AST.
int node_count(const Formula& f);

std::string pretty(const Formula& f);
inline std::string pretty(const FormulaPtr& f) { return pretty(*f); }

struct ParseError : std::runtime_error {
    std::size_t offset;
    ParseError(std::size_t off, const std::string& what)
        : std::runtime_error(what), offset(off) {}
};

// Parses the surface grammar and returns a desugared AST. Throws ParseError
// with the byte offset of the failure.
FormulaPtr parse(const std::string& text);

// Recursively replaces F psi with (psi' | F psi') where psi' is the rewritten
// child, and dually for P. Used to reduce reflexive-frame queries to the
// irreflexive pipeline.
FormulaPtr reflexive_rewrite(const FormulaPtr& f);

// Swaps F and P throughout. An involution.
FormulaPtr temporal_mirror(const FormulaPtr& f);

struct FormulaPtrHash {
    std::size_t operator()(const FormulaPtr& f) const { return hash_value(*f); }
};
struct FormulaPtrEq {
    bool operator()(const FormulaPtr& a, const FormulaPtr& b) const { return equal(*a, *b); }
};

// The closure of a formula: its distinct subformulas in post-order of first
// occurrence. Each subformula i owns two signed entries, 2i (positive) and
// 2i+1 (negated); negation pairing is e ^ 1.
class ClosureTable {
public:
    explicit ClosureTable(const FormulaPtr& root);

    int sub_count() const { return static_cast<int>(subs_.size()); }
    int entry_count() const { return 2 * sub_count(); }
    const FormulaPtr& sub(int i) const { return subs_.at(i); }
    const std::vector<FormulaPtr>& subs() const { return subs_; }
    int root_sub() const { return root_sub_; }

    // Index of a subformula, or -1 if absent.
    int index_of(const FormulaPtr& f) const;

    static int entry(int sub, bool positive) { return 2 * sub + (positive ? 0 : 1); }
    static int entry_sub(int e) { return e / 2; }
    static bool entry_positive(int e) { return (e & 1) == 0; }
    static int negate_entry(int e) { return e ^ 1; }

    std::string entry_name(int e) const;

private:
    std::vector<FormulaPtr> subs_;
    std::unordered_map<FormulaPtr, int, FormulaPtrHash, FormulaPtrEq> index_;
    int root_sub_ = -1;
};

}  // namespace mink
