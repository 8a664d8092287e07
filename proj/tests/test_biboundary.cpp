#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "mink/biboundary.hpp"

using namespace mink;

// Fixture numbering as in test_order.cpp:
//   B (phi = F p): m0={~p,~Fp} m1={p,~Fp} m2={~p,Fp} m3={p,Fp};
//                  clusters c0={m0}, c1={m2,m3}, c1 < c0; m1 irreflexive.
//   A (phi = p):   m0={~p}, m1={p}; single cluster c0={m0,m1}.
namespace {

struct FixtureB {
    Budget budget;
    ClosureContext ctx;
    FixtureB() : ctx(parse("F p"), budget) {}
};

struct FixtureA {
    Budget budget;
    ClosureContext ctx;
    FixtureA() : ctx(parse("p"), budget) {}
};

Biboundary bare(ClusterId lo, ClusterId up) {
    Biboundary d;
    d.minus = lo;
    d.plus = up;
    return d;
}

// The closed all-(c0,c0) biboundary of fixture A with every corner m1 = {p}.
Biboundary closed_a() {
    Biboundary d = bare(0, 0);
    d.n = d.s = d.e = d.w = pair_trace(0, 0);
    d.b = d.t = d.l = d.r = 1;
    return d;
}

// A closed self-similar biboundary of fixture B over cluster c1.
Biboundary closed_b(McsId corner = 2) {
    Biboundary d = bare(1, 1);
    d.n = d.s = d.e = d.w = pair_trace(1, 1);
    d.b = d.t = d.l = d.r = corner;
    return d;
}

}  // namespace

TEST_CASE("validity: spec fixture examples") {
    FixtureB fx;
    CHECK(validate_biboundary(fx.ctx, bare(1, 1)));
    // b = m3 = {p, Fp}: Fp is not passed up to c0
    Biboundary d = bare(0, 0);
    d.s = pair_trace(0, 0);
    d.w = pair_trace(0, 0);
    d.b = 3;
    std::vector<std::string> why;
    CHECK_FALSE(validate_biboundary(fx.ctx, d, &why));
    CHECK(std::find(why.begin(), why.end(), "B1") != why.end());
    // N = (c1, c0): final lower c1 = plus; no cluster defects anywhere
    Biboundary e = bare(1, 1);
    e.n = pair_trace(1, 0);
    CHECK(validate_biboundary(fx.ctx, e));
}

TEST_CASE("validity: definedness pattern") {
    FixtureB fx;
    Biboundary d = bare(1, 1);
    d.b = 2;  // b without S and W
    CHECK_FALSE(validate_biboundary(fx.ctx, d));
    CHECK_FALSE(corners_consistent(d));
    CHECK(corners_consistent(bare(1, 1)));
    CHECK(corners_consistent(closed_b()));
}

TEST_CASE("validity: B3 anchoring") {
    FixtureB fx;
    Biboundary d = bare(1, 1);
    d.w = pair_trace(0, 0);  // initial upper c0 != minus c1
    CHECK_FALSE(validate_biboundary(fx.ctx, d));
    d = bare(1, 0);
    d.w = pair_trace(1, 1);
    d.e = BiTrace{{1, 0}, {1, 0}, {1}};  // final lower c0 = plus
    CHECK(validate_biboundary(fx.ctx, d));
}

TEST_CASE("validity of the closed fixtures") {
    FixtureA fa;
    CHECK(validate_biboundary(fa.ctx, closed_a()));
    FixtureB fb;
    CHECK(validate_biboundary(fb.ctx, closed_b(2)));
    CHECK(validate_biboundary(fb.ctx, closed_b(3)));
    CHECK_FALSE(validate_biboundary(fb.ctx, closed_b(0)));  // m0 not <= c1
}

TEST_CASE("is_ground") {
    FixtureB fx;
    CHECK(is_ground(fx.ctx, bare(1, 1)));
    CHECK_FALSE(is_ground(fx.ctx, bare(1, 0)));
    Biboundary d = bare(1, 1);
    d.n = pair_trace(0, 0);
    CHECK_FALSE(is_ground(fx.ctx, d));  // lower cluster c0 != c1
    CHECK(is_ground(fx.ctx, closed_b()));
    // N may climb in its upper component
    Biboundary e = bare(1, 1);
    e.n = BiTrace{{1, 1}, {1, 0}, {2}};
    if (validate_biboundary(fx.ctx, e)) CHECK(is_ground(fx.ctx, e));
}

TEST_CASE("vjoin: spec fixture examples") {
    FixtureB fx;
    Biboundary d1 = bare(1, 1);
    d1.n = pair_trace(1, 1);
    Biboundary d2 = bare(1, 1);
    d2.s = pair_trace(1, 1);
    auto j = vjoin(fx.ctx, d1, d2);
    REQUIRE(j.has_value());
    CHECK(*j == bare(1, 1));

    // merge-form W concatenation through l = b = m3
    Biboundary w1 = bare(1, 1);
    w1.n = pair_trace(1, 1);
    w1.w = pair_trace(1, 1);
    w1.l = 3;
    Biboundary w2 = bare(1, 1);
    w2.s = pair_trace(1, 1);
    w2.w = pair_trace(1, 1);
    w2.b = 3;
    auto jm = vjoin(fx.ctx, w1, w2);
    REQUIRE(jm.has_value());
    Biboundary expect = bare(1, 1);
    expect.w = pair_trace(1, 1);
    CHECK(*jm == expect);

    // mismatched shared edge
    Biboundary d3 = bare(1, 1);
    d3.s = pair_trace(1, 0);
    CHECK_FALSE(vjoin(fx.ctx, d1, d3).has_value());
    // junction corner disagreement
    w2.b = 2;
    CHECK_FALSE(vjoin(fx.ctx, w1, w2).has_value());
}

TEST_CASE("joins of the closed fixtures are self-similar") {
    FixtureA fx;
    Biboundary d = closed_a();
    auto v = vjoin(fx.ctx, d, d);
    REQUIRE(v.has_value());
    CHECK(*v == d);
    auto h = hjoin(fx.ctx, d, d);
    REQUIRE(h.has_value());
    CHECK(*h == d);
}

TEST_CASE("hjoin is the diagonal dual of vjoin") {
    FixtureB fx;
    Biboundary d1 = bare(1, 1);
    d1.e = pair_trace(1, 1);
    Biboundary d2 = bare(1, 1);
    d2.w = pair_trace(1, 1);
    auto h = hjoin(fx.ctx, d1, d2);
    REQUIRE(h.has_value());
    CHECK(*h == bare(1, 1));
    auto v = vjoin(fx.ctx, diagonal_dual(d1), diagonal_dual(d2));
    REQUIRE(v.has_value());
    CHECK(diagonal_dual(*v) == *h);
}

TEST_CASE("ground closed under vjoin") {
    FixtureB fx;
    Biboundary d1 = bare(1, 1);
    d1.n = pair_trace(1, 1);
    d1.s = pair_trace(1, 1);
    Biboundary d2 = bare(1, 1);
    d2.s = pair_trace(1, 1);
    REQUIRE(is_ground(fx.ctx, d1));
    REQUIRE(is_ground(fx.ctx, d2));
    auto j = vjoin(fx.ctx, d1, d2);
    REQUIRE(j.has_value());
    CHECK(is_ground(fx.ctx, *j));
}

TEST_CASE("diagonal dual involution and validity preservation") {
    FixtureB fx;
    Biboundary d = bare(1, 0);
    d.w = pair_trace(1, 1);
    d.n = pair_trace(0, 0);
    d.l = 1;
    REQUIRE(validate_biboundary(fx.ctx, d));
    Biboundary dd = diagonal_dual(d);
    CHECK(dd.e == d.n);
    CHECK(dd.s == d.w);
    CHECK(dd.r == d.l);
    CHECK(validate_biboundary(fx.ctx, dd));
    CHECK(diagonal_dual(dd) == d);
    CHECK(is_ground(fx.ctx, d) == is_ground(fx.ctx, dd));
}

TEST_CASE("SE limit of the fixture A closed biboundary") {
    FixtureA fx;
    Budget b;
    Biboundary d = closed_a();
    auto out = limit_completions(fx.ctx, d, d, d, d, LimitDir::SE, b);
    REQUIRE_FALSE(out.empty());
    Biboundary star = bare(0, 0);
    star.n = pair_trace(0, 0);
    star.w = pair_trace(0, 0);
    star.l = 1;
    CHECK(std::find(out.begin(), out.end(), star) != out.end());
    CHECK(std::find(out.begin(), out.end(), d) != out.end());
    for (const auto& c : out) {
        CHECK(validate_biboundary(fx.ctx, c));
        CHECK(c.l == d.l);
        CHECK(c.n == d.n);
        CHECK(c.w == d.w);
    }
}

TEST_CASE("NW limit on the mirrored configuration") {
    FixtureA fx;
    Budget b;
    Biboundary d = closed_a();
    auto out = limit_completions(fx.ctx, d, d, d, d, LimitDir::NW, b);
    REQUIRE_FALSE(out.empty());
    Biboundary star = bare(0, 0);
    star.s = pair_trace(0, 0);
    star.e = pair_trace(0, 0);
    star.r = 1;
    CHECK(std::find(out.begin(), out.end(), star) != out.end());
    for (const auto& c : out) {
        CHECK(c.r == d.r);
        CHECK(c.s == d.s);
        CHECK(c.e == d.e);
    }
}

TEST_CASE("limits reject broken premises") {
    FixtureB fx;
    Budget b;
    Biboundary d = closed_b();
    // equation holds for the self-similar quadruple
    CHECK_FALSE(limit_completions(fx.ctx, d, d, d, d, LimitDir::SE, b).empty());
    // a premise tuple that does not satisfy the join equation
    Biboundary g = bare(1, 1);
    CHECK(limit_completions(fx.ctx, d, g, d, d, LimitDir::SE, b).empty());
    CHECK(limit_completions(fx.ctx, g, d, d, d, LimitDir::SE, b).empty());
}

TEST_CASE("check_shuffle: spec fixture examples") {
    FixtureA fa;
    CHECK(check_shuffle(fa.ctx, bare(0, 0), {}, {1}));
    FixtureB fb;
    CHECK(check_shuffle(fb.ctx, bare(1, 0), {}, {1}));   // m1 between c1 and c0
    CHECK_FALSE(check_shuffle(fb.ctx, bare(1, 1), {}, {0}));  // m0 <= c1 fails
    CHECK_FALSE(check_shuffle(fb.ctx, bare(1, 0), {}, {}));   // M must be nonempty
}

TEST_CASE("check_shuffle S1 edge constancy") {
    FixtureB fx;
    Biboundary dp = bare(1, 0);
    dp.w = pair_trace(1, 1);
    CHECK(check_shuffle(fx.ctx, dp, {}, {1}));
    dp.w = BiTrace{{1, 1}, {1, 0}, {2}};  // upper clusters not constantly c1
    CHECK_FALSE(check_shuffle(fx.ctx, dp, {}, {1}));
}

TEST_CASE("enumerate_shuffles") {
    FixtureB fx;
    Budget b;
    auto out = enumerate_shuffles(fx.ctx, {}, {1}, b);
    Biboundary want = bare(1, 0);
    CHECK(std::find(out.begin(), out.end(), want) != out.end());
    Biboundary want_w = bare(1, 0);
    want_w.w = pair_trace(1, 1);
    CHECK(std::find(out.begin(), out.end(), want_w) != out.end());
    for (const auto& d : out) {
        CHECK(validate_biboundary(fx.ctx, d));
        CHECK(check_shuffle(fx.ctx, d, {}, {1}));
    }
    // M = {m0}: no shuffle with minus = plus = c1
    auto out0 = enumerate_shuffles(fx.ctx, {}, {0}, b);
    for (const auto& d : out0) CHECK_FALSE((d.minus == 1 && d.plus == 1));

    FixtureA fa;
    auto outa = enumerate_shuffles(fa.ctx, {}, {1}, b);
    CHECK(std::find(outa.begin(), outa.end(), bare(0, 0)) != outa.end());
}

TEST_CASE("fixture A biboundary universe") {
    FixtureA fx;
    Budget b;
    auto all = enumerate_biboundaries(fx.ctx, b);
    // single cluster, single bi-trace: 16 edge patterns; every defined corner
    // ranges over both MCS. Hand count: 1 + 4*1 + 4*2 + 2*1 + 4*4 + 16 = 47.
    CHECK(all.size() == 47);
    auto copy = all;
    std::sort(copy.begin(), copy.end());
    CHECK(std::unique(copy.begin(), copy.end()) == copy.end());
    for (const auto& d : all) {
        CHECK(validate_biboundary(fx.ctx, d));
        CHECK(std::find(all.begin(), all.end(), diagonal_dual(d)) != all.end());
    }
    CHECK(std::find(all.begin(), all.end(), closed_a()) != all.end());
}

TEST_CASE("fixture B biboundary universe properties") {
    FixtureB fx;
    Budget b;
    auto all = enumerate_biboundaries(fx.ctx, b);
    CHECK_FALSE(all.empty());
    auto copy = all;
    std::sort(copy.begin(), copy.end());
    CHECK(std::unique(copy.begin(), copy.end()) == copy.end());
    int ground_count = 0;
    for (const auto& d : all) {
        CHECK(validate_biboundary(fx.ctx, d));
        CHECK(std::find(all.begin(), all.end(), diagonal_dual(d)) != all.end());
        if (is_ground(fx.ctx, d)) ++ground_count;
    }
    CHECK(ground_count > 0);
    CHECK(std::find(all.begin(), all.end(), closed_b()) != all.end());
}
