#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mink/kt.hpp"

using namespace mink;

namespace {

Goal root_goal(const ClosureTable& ct, bool positive = true) {
    return {ClosureTable::entry(ct.root_sub(), positive)};
}

}  // namespace

TEST_CASE("propositional clash is unsatisfiable") {
    Budget b;
    ClosureTable ct(parse("p"));
    int p_sub = 0;
    Goal g{ClosureTable::entry(p_sub, true), ClosureTable::entry(p_sub, false)};
    CHECK_FALSE(kt_sat(ct, g, b));
    CHECK_FALSE(kt_sat_bounded_oracle(ct, g, 3, b));
}

TEST_CASE("p with ~Fp is satisfiable") {
    Budget b;
    ClosureTable ct(parse("F p"));
    // subs: 0 = p, 1 = F p
    Goal g{ClosureTable::entry(0, true), ClosureTable::entry(1, false)};
    CHECK(kt_sat(ct, g, b));
    CHECK(kt_sat_bounded_oracle(ct, g, 1, b));
}

TEST_CASE("p -> G P p is a K_t theorem") {
    Budget b;
    ClosureTable ct(parse("~(p -> G P p)"));
    CHECK_FALSE(kt_sat(ct, root_goal(ct), b));
    CHECK_FALSE(kt_sat_bounded_oracle(ct, root_goal(ct), 4, b));
}

TEST_CASE("bounded oracle examples") {
    Budget b;
    ClosureTable ct(parse("F p"));
    Goal fp{ClosureTable::entry(1, true)};
    CHECK(kt_sat_bounded_oracle(ct, fp, 1, b));  // one reflexive world
    Goal notp_fp{ClosureTable::entry(0, false), ClosureTable::entry(1, true)};
    CHECK(kt_sat_bounded_oracle(ct, notp_fp, 2, b));  // two-world chain
    CHECK(kt_sat(ct, notp_fp, b));
}

TEST_CASE("atom enumeration derives propositional signs") {
    ClosureTable ct(parse("p | q"));
    // subs: p, q, p|q; free bits p and q; sign of p|q forced
    auto atoms = enumerate_atoms(ct);
    CHECK(atoms.size() == 4);
    for (SignVector a : atoms) {
        bool p = a & 1u, q = (a >> 1) & 1u, por = (a >> 2) & 1u;
        CHECK(por == (p || q));
    }
}

TEST_CASE("survivors of F p closure") {
    Budget b;
    ClosureTable ct(parse("F p"));
    auto sat = kt_satisfiable_atoms(ct, b);
    // all four sign assignments over {p, Fp} are K_t-satisfiable
    CHECK(sat.size() == 4);
}

TEST_CASE("seriality demand eliminates nothing without G") {
    Budget b;
    // F true is satisfiable; ~F true also (a point with no successors)
    ClosureTable ct(parse("F true"));
    CHECK(kt_sat(ct, root_goal(ct, true), b));
    CHECK(kt_sat(ct, root_goal(ct, false), b));
}

TEST_CASE("transitivity is not a K_t theorem") {
    Budget b;
    ClosureTable ct(parse("~(F F p -> F p)"));
    CHECK(kt_sat(ct, root_goal(ct), b));  // K_t has non-transitive frames
    CHECK(kt_sat_bounded_oracle(ct, root_goal(ct), 3, b));
}

TEST_CASE("budget exhaustion throws") {
    Budget tiny(3);
    ClosureTable ct(parse("~(p -> G P p)"));
    CHECK_THROWS_AS(kt_sat(ct, root_goal(ct), tiny), BudgetExceeded);
}
