#pragma once
// Bounded-displacement testing: bipartite displacement graphs between two
// patterns, maximum matching, Hall-violator extraction with the full
// counting certificate, and windowed BD tests whose discrepancy ratios are
// recomputed exactly from generator queries.
//
// Soundness over completeness: a deficiency only counts as evidence when
// the violator set sits far enough inside the window (2m from the edge)
// that all of its potential partners are visible, so the same deficiency
// holds for the underlying infinite sets.

#include "cf_metric.hpp"
#include "core.hpp"
#include "generators.hpp"
#include "geometry.hpp"
#include "pattern.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <utility>
#include <vector>

namespace delone {

// ------------------------------------------------------------------ graphs

struct DisplacementGraph {
    FinitePattern p0, p1;  // common quantum, lexicographically sorted
    I128 m = 1;            // cube scale; displacement bound is 2m
    I128 bound_units = 0;  // 2m in quantum units
    std::vector<std::vector<std::uint32_t>> adj;  // left (p0) -> right (p1)
};

inline DisplacementGraph build_graph(const FinitePattern& p0_in, const FinitePattern& p1_in,
                                     I128 m) {
    require(p0_in.d == p1_in.d, "build_graph: dimension mismatch");
    require(m >= 1, "build_graph: m must be a positive integer");
    DisplacementGraph g;
    g.p0 = p0_in;
    g.p1 = p1_in;
    FinitePattern::to_common_quantum(g.p0, g.p1);
    g.m = m;
    Rat t = rat_of_i128(2 * m) / g.p0.quantum;
    require(rat_is_integer(t), "build_graph: bound not on the quantum grid");
    g.bound_units = rat_floor_i128(t);
    g.adj.assign(g.p0.size(), {});
    if (g.p1.empty()) return g;
    detail::GridIndex idx(g.p1, std::max<I128>(g.bound_units, 1));
    for (std::size_t i = 0; i < g.p0.size(); ++i) {
        for (std::size_t j : idx.within(g.p0.point(i), g.bound_units)) {
            g.adj[i].push_back(std::uint32_t(j));
        }
    }
    return g;
}

// Maximum matching via Hopcroft-Karp.  Deterministic: patterns are stored
// sorted, adjacency lists ascending, so certificates reproduce exactly.
struct Matching {
    std::vector<std::int64_t> match_left;   // right index or -1
    std::vector<std::int64_t> match_right;  // left index or -1
    std::size_t size = 0;
};

namespace detail {

inline Matching hopcroft_karp(const std::vector<std::vector<std::uint32_t>>& adj,
                              std::size_t nr) {
    const std::size_t nl = adj.size();
    Matching m;
    m.match_left.assign(nl, -1);
    m.match_right.assign(nr, -1);
    const std::int64_t INF = std::numeric_limits<std::int64_t>::max();
    std::vector<std::int64_t> dist(nl);
    std::vector<std::size_t> q(nl);

    auto bfs = [&]() -> bool {
        std::size_t qh = 0, qt = 0;
        for (std::size_t u = 0; u < nl; ++u) {
            if (m.match_left[u] < 0) {
                dist[u] = 0;
                q[qt++] = u;
            } else {
                dist[u] = INF;
            }
        }
        bool found = false;
        while (qh < qt) {
            std::size_t u = q[qh++];
            for (std::uint32_t v : adj[u]) {
                std::int64_t w = m.match_right[v];
                if (w < 0) {
                    found = true;
                } else if (dist[std::size_t(w)] == INF) {
                    dist[std::size_t(w)] = dist[u] + 1;
                    q[qt++] = std::size_t(w);
                }
            }
        }
        return found;
    };
    std::function<bool(std::size_t)> dfs = [&](std::size_t u) -> bool {
        for (std::uint32_t v : adj[u]) {
            std::int64_t w = m.match_right[v];
            if (w < 0 || (dist[std::size_t(w)] == dist[u] + 1 && dfs(std::size_t(w)))) {
                m.match_left[u] = std::int64_t(v);
                m.match_right[v] = std::int64_t(u);
                return true;
            }
        }
        dist[u] = std::numeric_limits<std::int64_t>::max();
        return false;
    };
    while (bfs()) {
        for (std::size_t u = 0; u < nl; ++u) {
            if (m.match_left[u] < 0 && dfs(u)) ++m.size;
        }
    }
    return m;
}

}  // namespace detail

inline Matching max_matching(const DisplacementGraph& g) {
    return detail::hopcroft_karp(g.adj, g.p1.size());
}

// Bottleneck perfect assignment: the least displacement delta, drawn from
// the exact multiset of pair distances, at which some matching saturates
// every point of `left` within delta.  Binary search over candidates with a
// matching-feasibility probe per step.
struct BottleneckResult {
    Rat value = 0;
    std::size_t left_size = 0;
};

inline BottleneckResult bottleneck_displacement(const FinitePattern& left_in,
                                                const FinitePattern& right_in,
                                                const Rat& cap) {
    require(left_in.d == right_in.d, "bottleneck: dimension mismatch");
    require(!left_in.empty() && !right_in.empty(), "bottleneck: empty side");
    FinitePattern left = left_in, right = right_in;
    FinitePattern::to_common_quantum(left, right);
    const Rat q = left.quantum;
    I128 cap_units = rat_floor_i128(cap / q);
    require(cap_units >= 0, "bottleneck: negative cap");
    detail::GridIndex idx(right, std::max<I128>(cap_units, 1));

    // per-left candidate lists within the cap, plus the global candidate set
    std::vector<std::vector<std::pair<I128, std::uint32_t>>> cand(left.size());
    std::vector<I128> deltas;
    for (std::size_t i = 0; i < left.size(); ++i) {
        for (std::size_t j : idx.within(left.point(i), cap_units)) {
            I128 dval = 0;
            for (int k = 0; k < left.d; ++k) {
                dval = std::max(dval,
                                i128_abs(checked_sub(left.point(i)[k], right.point(j)[k])));
            }
            cand[i].emplace_back(dval, std::uint32_t(j));
            deltas.push_back(dval);
        }
        require(!cand[i].empty(), "bottleneck: a point has no partner within the cap");
    }
    std::sort(deltas.begin(), deltas.end());
    deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());

    auto feasible = [&](I128 delta) {
        std::vector<std::vector<std::uint32_t>> adj(left.size());
        for (std::size_t i = 0; i < left.size(); ++i) {
            for (auto [dv, j] : cand[i]) {
                if (dv <= delta) adj[i].push_back(j);
            }
        }
        return detail::hopcroft_karp(adj, right.size()).size == left.size();
    };
    require(feasible(deltas.back()), "bottleneck: no saturating matching within the cap");
    std::size_t lo = 0, hi = deltas.size() - 1;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (feasible(deltas[mid])) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    BottleneckResult res;
    res.value = rat_of_i128(deltas[lo]) * q;
    res.left_size = left.size();
    return res;
}

// Hall violator on the deficient side: vertices reachable by alternating
// paths from unmatched vertices of that side.  By maximality the neighbor
// set is strictly smaller.
struct HallViolator {
    int side = 0;                     // 0: violator within p0, 1: within p1
    std::vector<std::size_t> X;       // violator vertex indices (its side)
    std::vector<std::size_t> N;       // neighbor indices on the other side
};

inline HallViolator hall_violator(const DisplacementGraph& g, const Matching& m, int side) {
    const std::size_t nl = g.p0.size(), nr = g.p1.size();
    // reduce side 1 to side 0 by transposing the adjacency
    std::vector<std::vector<std::uint32_t>> radj;
    const std::vector<std::vector<std::uint32_t>>* adj = &g.adj;
    const std::vector<std::int64_t>* ml = &m.match_left;
    const std::vector<std::int64_t>* mr = &m.match_right;
    std::size_t n_this = nl, n_other = nr;
    if (side == 1) {
        radj.assign(nr, {});
        for (std::size_t i = 0; i < nl; ++i) {
            for (std::uint32_t v : g.adj[i]) radj[v].push_back(std::uint32_t(i));
        }
        adj = &radj;
        ml = &m.match_right;
        mr = &m.match_left;
        n_this = nr;
        n_other = nl;
    }
    std::vector<char> vis_this(n_this, 0), vis_other(n_other, 0);
    std::queue<std::size_t> bfs;
    bool any_unmatched = false;
    for (std::size_t u = 0; u < n_this; ++u) {
        if ((*ml)[u] < 0) {
            vis_this[u] = 1;
            bfs.push(u);
            any_unmatched = true;
        }
    }
    require(any_unmatched, "hall_violator: side is perfectly matched");
    while (!bfs.empty()) {
        std::size_t u = bfs.front();
        bfs.pop();
        for (std::uint32_t v : (*adj)[u]) {
            if (vis_other[v]) continue;
            vis_other[v] = 1;
            std::int64_t w = (*mr)[v];
            if (w >= 0 && !vis_this[std::size_t(w)]) {
                vis_this[std::size_t(w)] = 1;
                bfs.push(std::size_t(w));
            }
        }
    }
    HallViolator out;
    out.side = side;
    for (std::size_t u = 0; u < n_this; ++u) {
        if (vis_this[u]) out.X.push_back(u);
    }
    for (std::size_t v = 0; v < n_other; ++v) {
        if (vis_other[v]) out.N.push_back(v);
    }
    require(out.X.size() > out.N.size(), "hall_violator: deficiency lost");
    return out;
}

// -------------------------------------------------- generator-exact counts

// Points of the generator in the half-open box prod [lo_k, hi_k): closed
// count up to the largest quantum multiple strictly below hi_k.
inline BigInt count_halfopen_box(const DeloneGenerator& g, const std::vector<Rat>& lo,
                                 const std::vector<Rat>& hi) {
    const Rat q = g.quantum();
    std::vector<Rat> hi2(hi);
    for (Rat& b : hi2) {
        Rat s = b / q;
        BigInt top = rat_is_integer(s) ? rat_floor(s) - 1 : rat_floor(s);
        b = Rat(top) * q;
    }
    for (std::size_t k = 0; k < lo.size(); ++k) {
        if (hi2[k] < lo[k]) return BigInt(0);
    }
    return g.count_in_closed_box(lo, hi2);
}

// Count of generator points in a half-open cube union, cell by cell.
inline BigInt count_halfopen_region(const DeloneGenerator& g, const CubeUnion& A) {
    require(g.dim() == A.d, "count_halfopen_region: dimension mismatch");
    const Rat ms = rat_of_i128(A.m);
    BigInt total = 0;
    std::vector<Rat> lo(static_cast<std::size_t>(A.d)), hi(static_cast<std::size_t>(A.d));
    for (std::size_t i = 0; i < A.cell_count(); ++i) {
        const I128* c = A.cell(i);
        for (int k = 0; k < A.d; ++k) {
            lo[std::size_t(k)] = rat_of_i128(c[k]) * ms + A.offset[std::size_t(k)];
            hi[std::size_t(k)] = lo[std::size_t(k)] + ms;
        }
        total += count_halfopen_box(g, lo, hi);
    }
    return total;
}

// ------------------------------------------------------------ certificates

enum class MatchVerdict { Matched, Violated };

struct MatchCertificate {
    I128 m = 1;
    int window_index = 0;
    MatchVerdict verdict = MatchVerdict::Matched;

    // matched case: both shrunk sides saturated
    std::size_t matching_size = 0;
    Rat max_displacement = 0;
    std::size_t interior_left = 0, interior_right = 0;  // shrunk-region sizes

    // violated case
    int side = 0;
    std::vector<RatPoint> violator;
    CubeUnion A, B;
    BigInt count_side_A = 0;     // #(Lambda_side in A)
    BigInt count_other_A = 0;    // #(Lambda_other in A)
    BigInt count_other_ring = 0; // #(Lambda_other in B \ A)
    BigInt hall_neighbor_count = 0;  // independent recount of #(X^{+2m} n other)
    bool chain_ok = false;       // Hall recount, counting step, geometry step
    bool denseness_ok = false;   // #ring >= (2R)^{-d} vol(ring): the proof's
                                 // asymptotic step, which may fail on small
                                 // rings and is therefore recorded separately
};

struct DiscrepancyRecord {
    CubeUnion region;
    RatPoint translation;  // zero for plain window records
    BigInt count0 = 0, count1 = 0;
    Rat ratio = 0;  // |count0 - count1| / surface(region)
};

struct DiscrepancyWitness {
    std::vector<DiscrepancyRecord> records;
    bool diverging = false;
    Rat divergence_factor = 10;  // threshold used for the label
};

// Exact discrepancy ratio of two patterns over a region.
inline Rat discrepancy_ratio(const FinitePattern& p0, const FinitePattern& p1,
                             const CubeUnion& A) {
    require(p0.d == p1.d && p0.d == A.d, "discrepancy_ratio: dimension");
    // the region must be inside both faithful windows
    const Rat ms = rat_of_i128(A.m);
    for (std::size_t i = 0; i < A.cell_count(); ++i) {
        const I128* c = A.cell(i);
        for (int k = 0; k < A.d; ++k) {
            Rat lo = rat_of_i128(c[k]) * ms + A.offset[std::size_t(k)];
            Rat hi = lo + ms;
            Rat corner = rat_max(rat_abs(lo), rat_abs(hi));
            require(corner <= p0.window && corner <= p1.window,
                    "discrepancy_ratio: region outside a faithful window");
        }
    }
    BigInt n0 = p0.count_in_region(A);
    BigInt n1 = p1.count_in_region(A);
    BigInt diff = n0 > n1 ? n0 - n1 : n1 - n0;
    return Rat(diff) / Rat(A.boundary_measure());
}

inline void mark_divergence(DiscrepancyWitness& w, int min_windows = 5) {
    w.diverging = false;
    if (int(w.records.size()) < min_windows) return;
    for (std::size_t i = 1; i < w.records.size(); ++i) {
        if (!(w.records[i].ratio > w.records[i - 1].ratio)) return;
    }
    if (w.records.front().ratio <= 0) return;
    w.diverging = w.records.back().ratio >= w.divergence_factor * w.records.front().ratio;
}

// First witness index whose region contains a sup-ball of radius R.
inline std::pair<bool, std::size_t> witness_inradius_check(const DiscrepancyWitness& w,
                                                           const Rat& R) {
    for (std::size_t i = 0; i < w.records.size(); ++i) {
        if (w.records[i].region.inball().radius >= R) return {true, i};
    }
    return {false, w.records.size()};
}

// ---------------------------------------------------------------- bd_test

struct BdOptions {
    I128 m_max = 4;
    Rat window_lo = 0;     // first window box is [lo, hi)^d ...
    Rat window_hi = 64;    // ...
    Rat growth = 4;        // ... scaled by growth per step
    int windows = 5;
    Rat divergence_factor = 10;
};

struct BdReport {
    std::vector<MatchCertificate> certificates;  // ordered by (window, m)
    DiscrepancyWitness witness;
    bool any_violation = false;
    std::string summary;  // human-readable one-liner
};

namespace detail {

// pattern of all generator points in the closed box, with the pattern window
// set to the enclosing ball radius (its points beyond the box are absent, so
// metric use is out of scope here; counting and matching only).
inline FinitePattern box_pattern(const DeloneGenerator& g, const std::vector<Rat>& lo,
                                 const std::vector<Rat>& hi) {
    Rat W = 0;
    for (std::size_t k = 0; k < lo.size(); ++k) {
        W = rat_max(W, rat_max(rat_abs(lo[k]), rat_abs(hi[k])));
    }
    return FinitePattern(g.dim(), g.quantum(), W, g.units_in_box(lo, hi));
}

}  // namespace detail

// Windowed BD test between two generators.  For each window of the schedule
// and each m <= m_max, matches the pattern restricted to the window against
// the other pattern; emits a full Hall certificate when a violator lies
// entirely in the window shrunk by 2m, and a window-level discrepancy record
// feeding the divergence label.
inline BdReport bd_test(const DeloneGenerator& g0, const DeloneGenerator& g1,
                        const BdOptions& opt) {
    require(g0.dim() == g1.dim(), "bd_test: dimension mismatch");
    const int d = g0.dim();
    BdReport rep;
    rep.witness.divergence_factor = opt.divergence_factor;

    for (int w = 0; w < opt.windows; ++w) {
        Rat f = 1;
        for (int i = 0; i < w; ++i) f *= opt.growth;
        Rat lo_v = opt.window_lo * f, hi_v = opt.window_hi * f;
        std::vector<Rat> lo(static_cast<std::size_t>(d), lo_v);
        std::vector<Rat> hi(static_cast<std::size_t>(d), hi_v);

        // window-level discrepancy record over the half-open box itself,
        // counted straight from the generators
        {
            Rat span = hi_v - lo_v;
            require(rat_is_integer(span) && span > 0, "bd_test: window span must be integral");
            I128 ms = rat_floor_i128(span);
            std::vector<I128> cell0(static_cast<std::size_t>(d), 0);
            CubeUnion box(d, ms, cell0, std::vector<Rat>(static_cast<std::size_t>(d), lo_v));
            DiscrepancyRecord rec;
            rec.region = box;
            rec.translation.assign(static_cast<std::size_t>(d), Rat(0));
            rec.count0 = count_halfopen_region(g0, box);
            rec.count1 = count_halfopen_region(g1, box);
            BigInt diff = rec.count0 > rec.count1 ? rec.count0 - rec.count1
                                                  : rec.count1 - rec.count0;
            rec.ratio = Rat(diff) / Rat(box.boundary_measure());
            rep.witness.records.push_back(std::move(rec));
        }

        // half-open window pattern: closed box shaved below the top face
        std::vector<Rat> hi_shaved(hi);
        for (Rat& b : hi_shaved) b -= rat_min(g0.quantum(), g1.quantum()) / 2;
        FinitePattern p0 = detail::box_pattern(g0, lo, hi_shaved);
        FinitePattern p1 = detail::box_pattern(g1, lo, hi_shaved);

        for (I128 m = 1; m <= opt.m_max; ++m) {
            MatchCertificate cert;
            cert.m = m;
            cert.window_index = w;

            // points of p farther than 2m from every face of the window box
            auto shrunk = [&](const FinitePattern& p) {
                std::vector<I128> pts;
                for (std::size_t i = 0; i < p.size(); ++i) {
                    bool in = true;
                    for (int k = 0; k < d && in; ++k) {
                        Rat x = rat_of_i128(p.point(i)[k]) * p.quantum;
                        if (x < lo_v + 2 * rat_of_i128(m) || x >= hi_v - 2 * rat_of_i128(m)) {
                            in = false;
                        }
                    }
                    if (in) {
                        for (int k = 0; k < d; ++k) pts.push_back(p.point(i)[k]);
                    }
                }
                if (pts.empty()) return FinitePattern();
                return FinitePattern(p.d, p.quantum, p.window, std::move(pts));
            };
            FinitePattern s0 = shrunk(p0), s1 = shrunk(p1);
            cert.interior_left = s0.size();
            cert.interior_right = s1.size();
            require(!s0.empty() && !s1.empty(), "bd_test: window too small for this m");

            // each side in turn: shrunk side against the full other side, so
            // any Hall violator is automatically valid for the infinite sets
            int deficient = -1;
            DisplacementGraph graph;
            Matching match;
            for (int side = 0; side < 2 && deficient < 0; ++side) {
                const FinitePattern& left = side == 0 ? s0 : s1;
                const FinitePattern& right = side == 0 ? p1 : p0;
                DisplacementGraph gr = build_graph(left, right, m);
                Matching mt = max_matching(gr);
                if (side == 0) {
                    cert.matching_size = mt.size;
                    I128 disp = 0;
                    for (std::size_t i = 0; i < gr.p0.size(); ++i) {
                        if (mt.match_left[i] < 0) continue;
                        const I128* x = gr.p0.point(i);
                        const I128* y = gr.p1.point(std::size_t(mt.match_left[i]));
                        for (int k = 0; k < d; ++k) {
                            disp = std::max(disp, i128_abs(checked_sub(x[k], y[k])));
                        }
                    }
                    cert.max_displacement = rat_of_i128(disp) * gr.p0.quantum;
                }
                if (mt.size < left.size()) {
                    deficient = side;
                    graph = std::move(gr);
                    match = std::move(mt);
                }
            }

            if (deficient < 0) {
                cert.verdict = MatchVerdict::Matched;
                rep.certificates.push_back(std::move(cert));
                continue;
            }

            cert.verdict = MatchVerdict::Violated;
            cert.side = deficient;
            HallViolator hv = hall_violator(graph, match, 0);  // left of this graph
            for (std::size_t u : hv.X) cert.violator.push_back(graph.p0.point_rat(u));
            cert.A = cover_points(cert.violator, d, m);
            cert.B = cert.A.thickened();

            const DeloneGenerator& gs = deficient == 0 ? g0 : g1;
            const DeloneGenerator& go = deficient == 0 ? g1 : g0;
            cert.count_side_A = count_halfopen_region(gs, cert.A);
            cert.count_other_A = count_halfopen_region(go, cert.A);
            BigInt other_B = count_halfopen_region(go, cert.B);
            cert.count_other_ring = other_B - cert.count_other_A;

            // independent recount of the Hall inequality: full-window other
            // points within 2m of some violator point
            {
                detail::GridIndex idx(graph.p1, std::max<I128>(graph.bound_units, 1));
                std::vector<char> seen(graph.p1.size(), 0);
                for (std::size_t u : hv.X) {
                    for (std::size_t j : idx.within(graph.p0.point(u), graph.bound_units)) {
                        seen[j] = 1;
                    }
                }
                BigInt cnt = 0;
                for (char c : seen) cnt += c;
                cert.hall_neighbor_count = cnt;
            }

            // proof inequality chain, all exact:
            //   #X > #(X^{+2m} n other)                       (Hall, recounted)
            //   #(side n A) - #(other n A) > #(other n ring)  (counting step)
            //   2d vol(ring) >= m surface(A)                  (geometry)
            bool ok = BigInt(hv.X.size()) > cert.hall_neighbor_count;
            ok = ok && cert.count_side_A - cert.count_other_A > cert.count_other_ring;
            BigInt ring_vol = cert.B.volume() - cert.A.volume();
            ok = ok && BigInt(2 * d) * ring_vol >= big_of_i128(m) * cert.A.boundary_measure();
            cert.chain_ok = ok;
            // the relative-denseness step #ring >= (2R)^{-d} vol(ring) is
            // asymptotic in the proof; on desk-scale rings it can fail and is
            // recorded on its own
            Rat c_dense = 1;
            for (int k = 0; k < d; ++k) c_dense /= 2 * go.delone_params().R;
            cert.denseness_ok = Rat(cert.count_other_ring) >= c_dense * Rat(ring_vol);
            rep.any_violation = true;
            rep.certificates.push_back(std::move(cert));
        }
    }

    mark_divergence(rep.witness);
    std::size_t violated = 0;
    for (const auto& c : rep.certificates) {
        if (c.verdict == MatchVerdict::Violated) ++violated;
    }
    rep.summary = rep.any_violation
                      ? "violated in " + std::to_string(violated) + " of " +
                            std::to_string(rep.certificates.size()) + " window/m cells" +
                            (rep.witness.diverging ? ", ratios diverging" : "")
                      : "BD-witness up to displacement 2*m_max only (no violation found)";
    return rep;
}

}  // namespace delone
