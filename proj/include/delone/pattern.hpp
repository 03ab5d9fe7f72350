#pragma once
// Finite point patterns with exact coordinates.  Every coordinate is an
// integer multiple of one positive rational quantum shared by the whole
// pattern, so geometric predicates reduce to 128-bit integer comparisons.
// A pattern also records the faithful window radius W: it contains exactly
// the points of the underlying (possibly infinite) set whose sup-norm is
// <= W, and says nothing about points beyond.

#include "core.hpp"
#include "geometry.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace delone {

class FinitePattern {
public:
    FinitePattern() = default;

    FinitePattern(int dim, Rat q, Rat window_radius, std::vector<I128> coords)
        : d(dim), quantum(std::move(q)), window(std::move(window_radius)),
          pts_(std::move(coords)) {
        require(d >= 1, "pattern: dimension must be positive");
        require(quantum > 0, "pattern: quantum must be positive");
        require(window >= 0, "pattern: negative window");
        require(pts_.size() % std::size_t(d) == 0, "pattern: ragged coordinates");
        normalize();
    }

    int d = 1;
    Rat quantum = 1;
    Rat window = 0;

    std::size_t size() const { return pts_.size() / std::size_t(d); }
    bool empty() const { return pts_.empty(); }
    const I128* point(std::size_t i) const { return pts_.data() + i * std::size_t(d); }
    const std::vector<I128>& raw() const { return pts_; }

    RatPoint point_rat(std::size_t i) const {
        RatPoint x(static_cast<std::size_t>(d));
        const I128* p = point(i);
        for (int k = 0; k < d; ++k) x[std::size_t(k)] = rat_of_i128(p[k]) * quantum;
        return x;
    }

    // Sup norm of a point, in quantum units.
    I128 norm_units(std::size_t i) const {
        const I128* p = point(i);
        I128 n = 0;
        for (int k = 0; k < d; ++k) n = std::max(n, i128_abs(p[k]));
        return n;
    }

    Rat max_norm() const {
        I128 n = 0;
        for (std::size_t i = 0; i < size(); ++i) n = std::max(n, norm_units(i));
        return rat_of_i128(n) * quantum;
    }

    bool contains_units(const I128* p) const {
        std::size_t lo = 0, hi = size();
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (lex_less(point(mid), p)) lo = mid + 1; else hi = mid;
        }
        if (lo == size()) return false;
        const I128* a = point(lo);
        for (int k = 0; k < d; ++k) {
            if (a[k] != p[k]) return false;
        }
        return true;
    }

    // Points with sup-norm <= r (closed) or < r (open).
    std::size_t count_in_ball(const Rat& r, bool open) const {
        if (r <= 0 && (open || r < 0)) return 0;
        // ||x|| <= r  <=>  n <= r/q;  ||x|| < r  <=>  n < r/q.
        Rat t = r / quantum;
        I128 limit;
        if (open) {
            // n < t  <=>  n <= ceil(t) - 1
            limit = checked_sub(rat_ceil_i128(t), 1);
        } else {
            limit = rat_floor_i128(t);
        }
        std::size_t c = 0;
        for (std::size_t i = 0; i < size(); ++i) {
            if (norm_units(i) <= limit) ++c;
        }
        return c;
    }

    FinitePattern restricted_to_ball(const Rat& r) const {
        require(r >= 0, "restricted_to_ball: negative radius");
        Rat t = r / quantum;
        I128 limit = rat_floor_i128(t);
        std::vector<I128> out;
        out.reserve(pts_.size());
        for (std::size_t i = 0; i < size(); ++i) {
            if (norm_units(i) <= limit) {
                const I128* p = point(i);
                out.insert(out.end(), p, p + d);
            }
        }
        return FinitePattern(d, quantum, rat_min(window, r), std::move(out));
    }

    // The pattern translated by -v (every point becomes x - v).  The result
    // is faithful on the ball of radius W - ||v|| only.
    FinitePattern translated(const RatPoint& v) const {
        require(v.size() == std::size_t(d), "translate: dimension mismatch");
        Rat vmax = 0;
        Rat q2 = quantum;
        for (const Rat& c : v) {
            vmax = rat_max(vmax, rat_abs(c));
            q2 = rat_gcd(q2, rat_abs(c));
        }
        Rat new_window = window - vmax;
        require(new_window >= 0, "translate: window exhausted");
        // Old coordinate n*q becomes (n*(q/q2) - v_k/q2) * q2; both factors
        // are exact integers by choice of q2.
        BigInt scale = rat_floor(quantum / q2);
        require(Rat(scale) == quantum / q2, "translate: quantum scaling not integral");
        std::vector<BigInt> shift(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            Rat s = v[std::size_t(k)] / q2;
            shift[std::size_t(k)] = rat_floor(s);
            require(Rat(shift[std::size_t(k)]) == s, "translate: shift not integral");
        }
        std::vector<I128> out(pts_.size());
        for (std::size_t i = 0; i < size(); ++i) {
            const I128* p = point(i);
            for (int k = 0; k < d; ++k) {
                out[i * std::size_t(d) + std::size_t(k)] =
                    i128_of_big(big_of_i128(p[k]) * scale - shift[std::size_t(k)]);
            }
        }
        return FinitePattern(d, q2, new_window, std::move(out));
    }

    std::size_t count_in_region(const CubeUnion& region) const {
        require(region.d == d, "count_in_region: dimension mismatch");
        std::size_t c = 0;
        // Fast path: offsets that are multiples of the quantum, with the cell
        // computation fitting 128-bit integers.
        Rat mq = rat_of_i128(region.m) / quantum;
        bool fast = rat_is_integer(mq);
        std::vector<I128> tau(static_cast<std::size_t>(d));
        I128 mu = 0;
        if (fast) {
            BigInt b = rat_floor(mq);
            fast = b <= big_of_i128(I128(1) << 100);
            if (fast) mu = i128_of_big(b);
        }
        if (fast) {
            for (int k = 0; k < d && fast; ++k) {
                Rat t = region.offset[std::size_t(k)] / quantum;
                if (!rat_is_integer(t)) {
                    fast = false;
                } else {
                    tau[std::size_t(k)] = rat_floor_i128(t);
                }
            }
        }
        std::vector<I128> cellbuf(static_cast<std::size_t>(d));
        for (std::size_t i = 0; i < size(); ++i) {
            const I128* p = point(i);
            if (fast) {
                for (int k = 0; k < d; ++k) {
                    cellbuf[std::size_t(k)] =
                        div_floor(checked_sub(p[k], tau[std::size_t(k)]), mu);
                }
                if (region.has_cell(cellbuf.data())) ++c;
            } else {
                if (region.contains(point_rat(i))) ++c;
            }
        }
        return c;
    }

    // Remaps both patterns onto one common quantum (the gcd), preserving the
    // represented point sets exactly.
    static void to_common_quantum(FinitePattern& a, FinitePattern& b) {
        require(a.d == b.d, "common quantum: dimension mismatch");
        Rat q = rat_gcd(a.quantum, b.quantum);
        a.rescale_to(q);
        b.rescale_to(q);
    }

    void rescale_to(const Rat& q) {
        if (q == quantum) return;
        Rat f = quantum / q;
        require(rat_is_integer(f) && f > 0, "rescale_to: incompatible quantum");
        BigInt factor = rat_floor(f);
        for (auto& n : pts_) n = i128_of_big(big_of_i128(n) * factor);
        quantum = q;
    }

    bool operator==(const FinitePattern& o) const {
        return d == o.d && quantum == o.quantum && window == o.window && pts_ == o.pts_;
    }

private:
    std::vector<I128> pts_;

    bool lex_less(const I128* a, const I128* b) const {
        for (int k = 0; k < d; ++k) {
            if (a[k] != b[k]) return a[k] < b[k];
        }
        return false;
    }

    void normalize() {
        std::size_t n = size();
        if (n < 2) return;
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [this](std::size_t x, std::size_t y) {
            return lex_less(point(x), point(y));
        });
        std::vector<I128> out;
        out.reserve(pts_.size());
        for (std::size_t i = 0; i < n; ++i) {
            const I128* p = point(order[i]);
            if (i > 0) {
                const I128* prev = point(order[i - 1]);
                if (!lex_less(prev, p)) continue;
            }
            out.insert(out.end(), p, p + d);
        }
        pts_ = std::move(out);
    }
};

}  // namespace delone
