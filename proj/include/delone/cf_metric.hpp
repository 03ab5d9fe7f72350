#pragma once
// Chabauty-Fell distance between finite patterns, computed exactly.
//
// D(P0, P1) is the least eps in (0, 1] such that each pattern, restricted to
// the open ball B(0, 1/eps), lies in the closed eps-neighborhood of the
// other.  Feasibility is monotone in eps, and each point x contributes the
// threshold T_x = min(1 / |x|, dist(x, other)); the distance is simply
// min(1, max_x T_x), attained, with everything in sup norm.  Working on a
// shared rational quantum keeps every comparison exact.
//
// A finite window can only certify the answer for the underlying infinite
// sets when both windows contain B(0, 1/v + v) for the value v found: points
// beyond 1/v are then dominated by their norm term and every relevant
// nearest partner lies inside the window.  Results carry a certified flag;
// v = 0 (identical patterns) is never certified since no finite window can
// attest equality everywhere.

#include "core.hpp"
#include "geometry.hpp"
#include "pattern.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace delone {

namespace detail {

// Uniform-grid point index over a pattern's integer-unit coordinates.
// Cell size is chosen by the caller in units; nearest-neighbor queries are
// exact within the requested cap.
class GridIndex {
public:
    GridIndex(const FinitePattern& p, I128 cell_units) : p_(p), cell_(cell_units) {
        require(cell_ > 0, "grid index: cell size must be positive");
        for (std::size_t i = 0; i < p.size(); ++i) {
            cells_[key_of(p.point(i))].push_back(std::uint32_t(i));
        }
    }

    // Nearest point of the indexed pattern to x (sup norm, exact), looking
    // only within distance <= cap units.  Returns {distance, index}.
    std::optional<std::pair<I128, std::size_t>> nearest(const I128* x, I128 cap) const {
        const int d = p_.d;
        std::vector<I128> clo(static_cast<std::size_t>(d)), chi(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            clo[std::size_t(k)] = div_floor(checked_sub(x[k], cap), cell_);
            chi[std::size_t(k)] = div_floor(checked_add(x[k], cap), cell_);
        }
        std::optional<std::pair<I128, std::size_t>> best;
        std::vector<I128> c(clo);
        while (true) {
            auto it = cells_.find(key_raw(c));
            if (it != cells_.end()) {
                for (std::uint32_t idx : it->second) {
                    const I128* y = p_.point(idx);
                    I128 dist = 0;
                    for (int k = 0; k < d; ++k) {
                        dist = std::max(dist, i128_abs(checked_sub(x[k], y[k])));
                    }
                    if (dist <= cap && (!best || dist < best->first)) {
                        best = {dist, std::size_t(idx)};
                    }
                }
            }
            int k = 0;
            while (k < d && c[std::size_t(k)] == chi[std::size_t(k)]) {
                c[std::size_t(k)] = clo[std::size_t(k)];
                ++k;
            }
            if (k == d) break;
            ++c[std::size_t(k)];
        }
        return best;
    }

    // All indexed points within distance <= cap units of x, ascending index.
    std::vector<std::size_t> within(const I128* x, I128 cap) const {
        const int d = p_.d;
        std::vector<I128> clo(static_cast<std::size_t>(d)), chi(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            clo[std::size_t(k)] = div_floor(checked_sub(x[k], cap), cell_);
            chi[std::size_t(k)] = div_floor(checked_add(x[k], cap), cell_);
        }
        std::vector<std::size_t> out;
        std::vector<I128> c(clo);
        while (true) {
            auto it = cells_.find(key_raw(c));
            if (it != cells_.end()) {
                for (std::uint32_t idx : it->second) {
                    const I128* y = p_.point(idx);
                    I128 dist = 0;
                    for (int k = 0; k < d; ++k) {
                        dist = std::max(dist, i128_abs(checked_sub(x[k], y[k])));
                    }
                    if (dist <= cap) out.push_back(std::size_t(idx));
                }
            }
            int k = 0;
            while (k < d && c[std::size_t(k)] == chi[std::size_t(k)]) {
                c[std::size_t(k)] = clo[std::size_t(k)];
                ++k;
            }
            if (k == d) break;
            ++c[std::size_t(k)];
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    const FinitePattern& p_;
    I128 cell_;
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;

    std::uint64_t key_of(const I128* x) const {
        std::vector<I128> c(static_cast<std::size_t>(p_.d));
        for (int k = 0; k < p_.d; ++k) c[std::size_t(k)] = div_floor(x[k], cell_);
        return key_raw(c);
    }

    std::uint64_t key_raw(const std::vector<I128>& c) const {
        std::uint64_t h = 0x7c5f3a1e9b2d4u;
        for (I128 v : c) {
            require(v >= INT64_MIN && v <= INT64_MAX, "grid index: cell out of range");
            h = hash_combine(h, std::uint64_t(static_cast<std::int64_t>(v)));
        }
        return h;
    }
};

}  // namespace detail

struct CfWitness {
    std::size_t index = 0;   // point index within its own pattern
    RatPoint point;          // rational coordinates, for diagnostics
    Rat threshold = 0;       // this point's T value (clamped at 1)
};

struct CfDistanceResult {
    Rat value = 0;           // min(1, max_x T_x); 0 iff the point sets coincide
    bool certified = false;  // both windows contain B(0, 1/value + value)
    CfWitness from0, from1;  // extremal point of each pattern
};

inline CfDistanceResult cf_distance(const FinitePattern& a_in, const FinitePattern& b_in) {
    require(!a_in.empty() && !b_in.empty(), "cf_distance: empty pattern");
    require(a_in.d == b_in.d, "cf_distance: dimension mismatch");
    FinitePattern a = a_in, b = b_in;
    FinitePattern::to_common_quantum(a, b);
    const Rat q = a.quantum;

    // distances beyond value 1 never matter (the metric is capped), so the
    // nearest-neighbor search stops at just over one value unit
    const I128 cap = checked_add(rat_ceil_i128(Rat(1) / q), 1);
    detail::GridIndex ia(a, cap), ib(b, cap);

    CfDistanceResult res;
    Rat best = 0;
    bool clamped = false;  // some threshold exceeds 1

    auto scan = [&](const FinitePattern& from, const detail::GridIndex& other_idx,
                    CfWitness& wit) {
        for (std::size_t i = 0; i < from.size(); ++i) {
            I128 n = from.norm_units(i);
            auto hit = other_idx.nearest(from.point(i), cap);
            Rat t;
            bool over_one = false;
            if (hit && hit->first == 0) {
                t = 0;
            } else {
                Rat inv = n == 0 ? Rat(2) : Rat(1) / (rat_of_i128(n) * q);
                Rat dist = hit ? rat_of_i128(hit->first) * q : Rat(2);
                t = rat_min(inv, dist);
                if (t > 1) {
                    t = 1;
                    over_one = true;
                }
            }
            if (t > wit.threshold || wit.point.empty()) {
                wit.index = i;
                wit.point = from.point_rat(i);
                wit.threshold = t;
            }
            if (t > best) best = t;
            if (over_one) clamped = true;
        }
    };
    scan(a, ib, res.from0);
    scan(b, ia, res.from1);

    res.value = clamped ? Rat(1) : rat_min(Rat(1), best);
    if (res.value > 0) {
        Rat need = Rat(1) / res.value + res.value;
        res.certified = a_in.window >= need && b_in.window >= need;
    }
    return res;
}

// ------------------------------------------------------------- injections

struct InjectionMaps {
    // (index in source pattern, index in target pattern)
    std::vector<std::pair<std::size_t, std::size_t>> phi0, phi1;
    Rat max_displacement0 = 0, max_displacement1 = 0;
};

// Constant for the counting corollary: with separation r, the number of
// pattern points that can crowd into the eps-shell of the boundary of A is
// at most c1 * eps^d * surface(A) with c1 = 2 * 3^d * (2/r)^d.  This is an
// upper-bound stand-in: tests assert direction only.
inline Rat counting_constant(int d, const Rat& r) {
    require(d >= 1 && r > 0, "counting_constant: bad arguments");
    Rat c = 2;
    for (int k = 0; k < d; ++k) c *= 3 * (2 / r);
    return c;
}

// Injective nearest-point maps between P0 and P1 restricted to A, defined
// whenever the patterns are closer than eps < r/2: each source point then
// has exactly one partner strictly within eps, and distinct sources get
// distinct partners because two partners of one target would be < r apart.
inline InjectionMaps injection_maps(const FinitePattern& p0_in, const FinitePattern& p1_in,
                                    const CubeUnion& A, const Rat& eps, const Rat& r) {
    require(p0_in.d == p1_in.d && p0_in.d == A.d, "injection_maps: dimension");
    require(eps > 0 && 2 * eps < r, "injection_maps: need eps < r/2");
    // A must sit inside the ball of radius 1/eps: check every cell corner
    Rat ms = rat_of_i128(A.m);
    for (std::size_t ci = 0; ci < A.cell_count(); ++ci) {
        const I128* c = A.cell(ci);
        for (int k = 0; k < A.d; ++k) {
            Rat lo = rat_of_i128(c[k]) * ms + A.offset[std::size_t(k)];
            Rat hi = lo + ms;
            require(rat_max(rat_abs(lo), rat_abs(hi)) <= Rat(1) / eps,
                    "injection_maps: region escapes B(0, 1/eps)");
        }
    }

    FinitePattern p0 = p0_in, p1 = p1_in;
    FinitePattern::to_common_quantum(p0, p1);
    const Rat q = p0.quantum;
    // strict displacement bound in units: dist * q < eps
    Rat t = eps / q;
    I128 limit = rat_is_integer(t) ? rat_floor_i128(t) - 1 : rat_floor_i128(t);
    require(limit >= 0, "injection_maps: eps below one quantum");

    detail::GridIndex i0(p0, limit + 1), i1(p1, limit + 1);

    InjectionMaps out;
    auto build = [&](const FinitePattern& src, const FinitePattern& dst,
                     const detail::GridIndex& dst_idx,
                     std::vector<std::pair<std::size_t, std::size_t>>& phi, Rat& maxdisp) {
        std::vector<char> used(dst.size(), 0);
        for (std::size_t i = 0; i < src.size(); ++i) {
            if (!A.contains(src.point_rat(i))) continue;
            auto near = dst_idx.within(src.point(i), limit);
            require(!near.empty(),
                    "injection_maps: a point has no partner within eps (distance >= eps)");
            require(near.size() == 1, "injection_maps: separation below r (two partners)");
            std::size_t j = near[0];
            require(!used[j], "injection_maps: injectivity contradiction (separation)");
            used[j] = 1;
            phi.emplace_back(i, j);
            I128 disp = 0;
            for (int k = 0; k < src.d; ++k) {
                disp = std::max(disp, i128_abs(checked_sub(src.point(i)[k], dst.point(j)[k])));
            }
            maxdisp = rat_max(maxdisp, rat_of_i128(disp) * q);
        }
    };
    build(p0, p1, i1, out.phi0, out.max_displacement0);
    build(p1, p0, i0, out.phi1, out.max_displacement1);
    return out;
}

// ------------------------------------------------------- metric axiom suite

struct AxiomReport {
    int trials = 0;
    int violations = 0;          // triangle / symmetry / identity failures
    Rat min_triangle_slack = 2;  // min of D(X,Y) + D(Y,Z) - D(X,Z)
    Rat max_distance_seen = 0;
    std::string first_violation;  // empty when clean
};

namespace detail {

// Random finite pattern on quantum 1/8: a full or shifted integer grid, or
// a sparse random subset of the fine grid.  Variety matters more than
// realism here; the metric axioms must hold for arbitrary finite patterns.
inline FinitePattern random_pattern(Rng& rng, int d) {
    const Rat q = make_rat(1, 8);
    const long long W = 4 + (long long)rng.below(5);  // window radius 4..8
    const long long U = W * 8;
    std::vector<I128> pts;
    int mode = int(rng.below(3));
    if (mode == 0 || mode == 1) {
        // integer grid, optionally shifted by a sub-integer offset
        std::vector<long long> shift(static_cast<std::size_t>(d), 0);
        if (mode == 1) {
            for (int k = 0; k < d; ++k) shift[std::size_t(k)] = (long long)rng.below(8);
        }
        std::vector<long long> c(static_cast<std::size_t>(d), -W);
        while (true) {
            bool ok = true;
            for (int k = 0; k < d; ++k) {
                if (std::llabs(c[std::size_t(k)] * 8 + shift[std::size_t(k)]) > U) ok = false;
            }
            if (ok) {
                for (int k = 0; k < d; ++k) pts.push_back(c[std::size_t(k)] * 8 + shift[std::size_t(k)]);
            }
            int k = 0;
            while (k < d && c[std::size_t(k)] == W) {
                c[std::size_t(k)] = -W;
                ++k;
            }
            if (k == d) break;
            ++c[std::size_t(k)];
        }
    } else {
        std::size_t n = 20 + rng.below(40);
        for (std::size_t i = 0; i < n; ++i) {
            for (int k = 0; k < d; ++k) pts.push_back((I128)rng.range(-U, U));
        }
    }
    if (pts.empty()) pts.assign(static_cast<std::size_t>(d), 0);
    return FinitePattern(d, q, Rat(W), std::move(pts));
}

}  // namespace detail

inline AxiomReport metric_axiom_suite(std::uint64_t seed, int trials) {
    AxiomReport rep;
    rep.trials = trials;
    auto record = [&](const std::string& what) {
        ++rep.violations;
        if (rep.first_violation.empty()) rep.first_violation = what;
    };
    for (int t = 0; t < trials; ++t) {
        Rng rng(mix64(seed ^ (0x51ed2701u + std::uint64_t(t))));
        int d = 1 + int(t % 2);
        FinitePattern X = detail::random_pattern(rng, d);
        FinitePattern Y = detail::random_pattern(rng, d);
        FinitePattern Z = detail::random_pattern(rng, d);

        Rat dxy = cf_distance(X, Y).value;
        Rat dyz = cf_distance(Y, Z).value;
        Rat dxz = cf_distance(X, Z).value;
        rep.max_distance_seen = rat_max(rep.max_distance_seen, rat_max(dxy, rat_max(dyz, dxz)));

        if (cf_distance(Y, X).value != dxy) record("symmetry");
        if (cf_distance(X, X).value != 0) record("identity");
        Rat slacks[3] = {dxy + dyz - dxz, dxy + dxz - dyz, dyz + dxz - dxy};
        for (const Rat& s : slacks) {
            rep.min_triangle_slack = rat_min(rep.min_triangle_slack, s);
            if (s < 0) record("triangle");
        }
    }
    return rep;
}

}  // namespace delone
