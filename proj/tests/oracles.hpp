#pragma once
// Independent reference implementations used only by the tests: slow,
// simple, and sharing no code with the library algorithms they check.

#include <delone/generators.hpp>
#include <delone/geometry.hpp>
#include <delone/pattern.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

// ------------------------------------------------------------ cf distance

// Brute-force feasibility of one eps for the Chabauty-Fell inclusions,
// entirely in doubles: every point of a inside the open ball B(0, 1/eps)
// needs a partner in b within eps, and vice versa.
inline bool cf_feasible(const std::vector<std::vector<double>>& a,
                        const std::vector<std::vector<double>>& b, double eps) {
    auto covered = [](const std::vector<std::vector<double>>& from,
                      const std::vector<std::vector<double>>& to, double e) {
        for (const auto& x : from) {
            double n = 0;
            for (double c : x) n = std::max(n, std::fabs(c));
            if (!(n < 1.0 / e)) continue;  // outside the open ball: unconstrained
            double best = 1e300;
            for (const auto& y : to) {
                double d = 0;
                for (std::size_t k = 0; k < x.size(); ++k) {
                    d = std::max(d, std::fabs(x[k] - y[k]));
                }
                best = std::min(best, d);
            }
            if (best > e) return false;  // closed neighborhood: > fails, == passes
        }
        return true;
    };
    return covered(a, b, eps) && covered(b, a, eps);
}

// Bisection over a uniform 1e-6 grid of eps values.  Feasibility is monotone
// in eps, so binary search finds the smallest feasible grid value; the cap 1
// applies when even eps = 1 fails.
inline double cf_bisection(const delone::FinitePattern& p0, const delone::FinitePattern& p1,
                           double grid = 1e-6) {
    auto dump = [](const delone::FinitePattern& p) {
        std::vector<std::vector<double>> out;
        for (std::size_t i = 0; i < p.size(); ++i) {
            std::vector<double> x;
            for (const delone::Rat& c : p.point_rat(i)) x.push_back(delone::rat_to_double(c));
            out.push_back(std::move(x));
        }
        return out;
    };
    auto a = dump(p0), b = dump(p1);
    long long lo = 1, hi = (long long)std::llround(1.0 / grid);
    if (!cf_feasible(a, b, double(hi) * grid)) return 1.0;
    while (lo < hi) {
        long long mid = (lo + hi) / 2;
        if (cf_feasible(a, b, double(mid) * grid)) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return double(lo) * grid;
}

// --------------------------------------------------------------- matching

// Kuhn's augmenting-path maximum matching (exact, independent of the
// library's matcher).  adj[i] lists right neighbors of left vertex i.
inline int matching_kuhn(const std::vector<std::vector<int>>& adj, int n_right) {
    std::vector<int> match_right((std::size_t)n_right, -1);
    std::vector<char> seen;
    std::function<bool(int)> try_left = [&](int u) -> bool {
        for (int v : adj[(std::size_t)u]) {
            if (seen[(std::size_t)v]) continue;
            seen[(std::size_t)v] = 1;
            if (match_right[(std::size_t)v] < 0 || try_left(match_right[(std::size_t)v])) {
                match_right[(std::size_t)v] = u;
                return true;
            }
        }
        return false;
    };
    int size = 0;
    for (int u = 0; u < int(adj.size()); ++u) {
        seen.assign((std::size_t)n_right, 0);
        if (try_left(u)) ++size;
    }
    return size;
}

// Exhaustive maximum matching: branch over every assignment of each left
// vertex (any free neighbor, or unmatched), pruned only by the optimistic
// bound matched-so-far + lefts-remaining <= best-so-far, which never cuts a
// branch that could improve the optimum.  Exact for sides <= 32.
inline int matching_exhaustive(const std::vector<std::vector<int>>& adj, int n_right) {
    (void)n_right;
    std::uint64_t used = 0;
    int best = 0;
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int cur) {
        if (cur + int(adj.size() - i) <= best) return;  // cannot beat best
        if (i == adj.size()) {
            best = std::max(best, cur);
            return;
        }
        for (int v : adj[i]) {
            if (used & (1ull << v)) continue;
            used |= (1ull << v);
            rec(i + 1, cur + 1);
            used &= ~(1ull << v);
        }
        rec(i + 1, cur);  // leave left vertex i unmatched
    };
    rec(0, 0);
    return best;
}

// Naive averaging search: materialize every point of the generator in the
// closed ball, then scan all integer translates in lexicographic order,
// counting membership point by point.  Same contract as the library search
// but with no prefix tables; exact rational threshold comparison.
struct AveragingBrute {
    bool found = false;
    std::vector<delone::I128> x;
    delone::BigInt count = 0;
};

inline AveragingBrute averaging_brute(const delone::DeloneGenerator& g,
                                      const delone::CubeUnion& A, const delone::Rat& gamma,
                                      const delone::Rat& eps, delone::I128 k, bool lower) {
    using namespace delone;
    const int d = g.dim();
    std::vector<Rat> blo(std::size_t(d), rat_of_i128(-k)), bhi(std::size_t(d), rat_of_i128(k));
    std::vector<I128> units = g.units_in_box(blo, bhi);
    const Rat q = g.quantum();
    const std::size_t n = units.size() / std::size_t(d);

    std::vector<I128> clo, chi;
    A.cell_bounds(clo, chi);
    const auto sd = std::size_t(d);
    std::vector<I128> xlo(sd), xhi(sd);
    for (int a = 0; a < d; ++a) {
        I128 o = rat_floor_i128(A.offset[std::size_t(a)]);
        xlo[std::size_t(a)] = -k - A.m * clo[std::size_t(a)] - o;
        xhi[std::size_t(a)] = k - A.m * (chi[std::size_t(a)] + 1) - o;
    }
    Rat target = (lower ? Rat(gamma - eps) : Rat(gamma + eps)) * Rat(A.volume());

    AveragingBrute res;
    std::vector<I128> x = xlo;
    RatPoint p(sd);
    while (true) {
        BigInt cnt = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (int a = 0; a < d; ++a) {
                p[std::size_t(a)] = rat_of_i128(units[i * std::size_t(d) + std::size_t(a)]) * q -
                                    rat_of_i128(x[std::size_t(a)]);
            }
            if (A.contains(p)) ++cnt;
        }
        if (lower ? Rat(cnt) >= target : Rat(cnt) <= target) {
            res.found = true;
            res.x = x;
            res.count = cnt;
            return res;
        }
        int a = d - 1;
        while (a >= 0 && x[std::size_t(a)] == xhi[std::size_t(a)]) {
            x[std::size_t(a)] = xlo[std::size_t(a)];
            --a;
        }
        if (a < 0) break;
        ++x[std::size_t(a)];
    }
    return res;
}

}  // namespace oracle
