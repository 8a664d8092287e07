// Biboundaries: the finite abstraction of a surrectangle's boundary, their
// validity conditions with every dual spelled out, and the constructors used
// by fabrication: ground recognition, vertical/horizontal joins, limit
// completions, and shuffles.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mink/order.hpp"

namespace mink {

struct Biboundary {
    ClusterId minus = -1;
    ClusterId plus = -1;
    std::optional<BiTrace> n, s, e, w;   // edges
    std::optional<McsId> b, t, l, r;     // corners: b=SW, t=NE, l=NW, r=SE

    bool closed() const { return n && s && e && w; }

    bool operator==(const Biboundary&) const = default;
    auto operator<=>(const Biboundary&) const = default;
};

struct BiboundaryHash {
    std::size_t operator()(const Biboundary& d) const;
};

std::string to_string(const Biboundary& d);

// Definedness pattern only: b iff S&W, t iff N&E, l iff N&W, r iff S&E.
bool corners_consistent(const Biboundary& d);

// Full validity: definedness plus conditions B1-B7 (the paper's (1)-(5) with
// all duals expanded). Pass a diagnostics pointer to collect the names of the
// violated conditions.
bool validate_biboundary(const ClosureContext& ctx, const Biboundary& d,
                         std::vector<std::string>* diagnostics = nullptr);

bool is_ground(const ClosureContext& ctx, const Biboundary& d);

// d1 below, d2 above; absent when the join is undefined or does not validate.
std::optional<Biboundary> vjoin(const ClosureContext& ctx, const Biboundary& d1,
                                const Biboundary& d2);
// d1 west, d2 east.
std::optional<Biboundary> hjoin(const ClosureContext& ctx, const Biboundary& d1,
                                const Biboundary& d2);

enum class LimitDir { SE, NW };

// All valid completions of the limit of d0 using d1, d2, d3; empty when the
// side conditions fail.
std::vector<Biboundary> limit_completions(const ClosureContext& ctx, const Biboundary& d0,
                                          const Biboundary& d1, const Biboundary& d2,
                                          const Biboundary& d3, LimitDir dir, Budget& budget);

// Conditions S1-S4 with all duals. Every member of delta must be closed.
bool check_shuffle(const ClosureContext& ctx, const Biboundary& dp,
                   const std::vector<Biboundary>& delta, const std::vector<McsId>& m);

// All valid dp with check_shuffle(dp, delta, m).
std::vector<Biboundary> enumerate_shuffles(const ClosureContext& ctx,
                                           const std::vector<Biboundary>& delta,
                                           const std::vector<McsId>& m, Budget& budget);

// Swap N<->E, S<->W, l<->r; b and t are fixed points.
Biboundary diagonal_dual(const Biboundary& d);

// Exhaustive universe of valid biboundaries over the context. Intended for
// fixture-scale contexts; budgeted.
std::vector<Biboundary> enumerate_biboundaries(const ClosureContext& ctx, Budget& budget);

// Shared helper: every valid biboundary whose minus/plus are fixed and whose
// edges are drawn from the given candidate lists (std::nullopt entries encode
// "edge absent"); corners range over all MCS admitted by validity.
std::vector<Biboundary> enumerate_with_edges(
    const ClosureContext& ctx, ClusterId minus, ClusterId plus,
    const std::vector<std::optional<BiTrace>>& n_opts,
    const std::vector<std::optional<BiTrace>>& s_opts,
    const std::vector<std::optional<BiTrace>>& e_opts,
    const std::vector<std::optional<BiTrace>>& w_opts, Budget& budget);

}  // namespace mink
