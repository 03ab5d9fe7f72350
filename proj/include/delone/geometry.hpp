#pragma once
// Unions of axis-aligned cubes from a common grid: the region type used for
// target patches, matching certificates and discrepancy bookkeeping.
//
// A CubeUnion is a set of closed cubes  prod_i [m*c_i + t_i, m*(c_i+1) + t_i]
// indexed by integer cell vectors c.  The scale m is a positive integer and
// the offset t is rational.  Point membership uses the half-open convention
// cell(x)_i = floor((x_i - t_i) / m), so overlapping faces are not counted
// twice; all measures (volume, boundary area, inradius) treat the union as
// the closed region it geometrically is.

#include "core.hpp"

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <vector>

namespace delone {

using RatPoint = std::vector<Rat>;

struct Inball {
    Rat radius;       // sup-norm radius of a largest inscribed ball
    RatPoint center;  // one center achieving it
};

class CubeUnion {
public:
    CubeUnion() = default;

    CubeUnion(int dim, I128 scale, std::vector<I128> cell_data,
              std::vector<Rat> off = {})
        : d(dim), m(scale), offset(std::move(off)), cells_(std::move(cell_data)) {
        require(d >= 1, "CubeUnion: dimension must be positive");
        require(m >= 1, "CubeUnion: scale must be positive");
        if (offset.empty()) offset.assign(std::size_t(d), Rat(0));
        require(offset.size() == std::size_t(d), "CubeUnion: offset size");
        require(cells_.size() % std::size_t(d) == 0, "CubeUnion: ragged cell data");
        // Forbidding the empty union keeps every downstream boundary-measure
        // denominator positive.
        require(!cells_.empty(), "CubeUnion: empty cell set");
        normalize();
    }

    int d = 1;
    I128 m = 1;
    std::vector<Rat> offset;

    std::size_t cell_count() const { return cells_.size() / std::size_t(d); }
    bool empty() const { return cells_.empty(); }

    const I128* cell(std::size_t i) const { return cells_.data() + i * std::size_t(d); }
    const std::vector<I128>& raw_cells() const { return cells_; }

    bool has_cell(const I128* c) const {
        auto cmp = [this](std::size_t idx, const I128* key) {
            const I128* a = cell(idx);
            for (int k = 0; k < d; ++k) {
                if (a[k] != key[k]) return a[k] < key[k];
            }
            return false;
        };
        std::size_t lo = 0, hi = cell_count();
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (cmp(mid, c)) lo = mid + 1; else hi = mid;
        }
        if (lo == cell_count()) return false;
        const I128* a = cell(lo);
        for (int k = 0; k < d; ++k) {
            if (a[k] != c[k]) return false;
        }
        return true;
    }

    // Cell index of a rational point under the half-open convention.
    std::vector<I128> cell_of(const RatPoint& x) const {
        require(x.size() == std::size_t(d), "cell_of: dimension mismatch");
        std::vector<I128> c(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            c[std::size_t(k)] = rat_floor_i128((x[std::size_t(k)] - offset[std::size_t(k)]) / rat_of_i128(m));
        }
        return c;
    }

    bool contains(const RatPoint& x) const {
        auto c = cell_of(x);
        return has_cell(c.data());
    }

    // Exact test that the open sup-norm ball B(c, r) lies inside the closed
    // region: every grid cell overlapping the ball in positive volume must be
    // present (closed neighbor cells cannot cover the interior of a missing
    // cube beyond a null set, so this is an equivalence, not a sampling
    // heuristic).
    bool contains_ball(const RatPoint& c, const Rat& r) const {
        require(c.size() == std::size_t(d), "contains_ball: dimension mismatch");
        require(r > 0, "contains_ball: radius must be positive");
        Rat scale = rat_of_i128(m);
        std::vector<I128> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            // cells j with j*m + t < c_k + r and (j+1)*m + t > c_k - r
            Rat q = (c[std::size_t(k)] - r - offset[std::size_t(k)]) / scale;
            Rat p = (c[std::size_t(k)] + r - offset[std::size_t(k)]) / scale;
            lo[std::size_t(k)] = rat_floor_i128(q);  // j > q-1  <=>  j >= floor(q)
            hi[std::size_t(k)] = rat_is_integer(p) ? checked_sub(rat_floor_i128(p), 1)
                                                   : rat_floor_i128(p);
        }
        std::vector<I128> cur = lo;
        while (true) {
            if (!has_cell(cur.data())) return false;
            int k = 0;
            while (k < d && cur[std::size_t(k)] == hi[std::size_t(k)]) {
                cur[std::size_t(k)] = lo[std::size_t(k)];
                ++k;
            }
            if (k == d) break;
            ++cur[std::size_t(k)];
        }
        return true;
    }

    BigInt volume() const {
        BigInt v = big_of_i128(m);
        BigInt p = 1;
        for (int k = 0; k < d; ++k) p *= v;
        return BigInt(cell_count()) * p;
    }

    // Exposed faces: cube faces not shared with a neighboring cell.  Their
    // union is the topological boundary of the region.
    std::size_t exposed_face_count() const {
        std::size_t faces = 0;
        std::vector<I128> nb(static_cast<std::size_t>(d));
        for (std::size_t i = 0; i < cell_count(); ++i) {
            const I128* c = cell(i);
            for (int a = 0; a < d; ++a) {
                for (int sgn = -1; sgn <= 1; sgn += 2) {
                    for (int k = 0; k < d; ++k) nb[std::size_t(k)] = c[k];
                    nb[std::size_t(a)] = checked_add(nb[std::size_t(a)], sgn);
                    if (!has_cell(nb.data())) ++faces;
                }
            }
        }
        return faces;
    }

    // (d-1)-dimensional measure of the boundary; for d = 1 this is the number
    // of boundary points (counting measure).
    BigInt boundary_measure() const {
        BigInt p = 1;
        for (int k = 0; k + 1 < d; ++k) p *= big_of_i128(m);
        return BigInt(exposed_face_count()) * p;
    }

    // Region grown by one ring of cells: every cell within one step in the
    // sup norm (3^d neighborhood) of an existing cell.
    CubeUnion thickened() const {
        std::vector<I128> out;
        out.reserve(cells_.size() * 3);
        std::vector<I128> nb(static_cast<std::size_t>(d));
        std::vector<int> delta(std::size_t(d), -1);
        for (std::size_t i = 0; i < cell_count(); ++i) {
            const I128* c = cell(i);
            std::fill(delta.begin(), delta.end(), -1);
            while (true) {
                for (int k = 0; k < d; ++k) {
                    nb[std::size_t(k)] = checked_add(c[k], delta[std::size_t(k)]);
                }
                out.insert(out.end(), nb.begin(), nb.end());
                int k = 0;
                while (k < d && delta[std::size_t(k)] == 1) delta[std::size_t(k++)] = -1;
                if (k == d) break;
                ++delta[std::size_t(k)];
            }
        }
        return CubeUnion(d, m, std::move(out), offset);
    }

    // Largest sup-norm ball inscribed in the region.  For unions of aligned
    // cubes a maximal inscribed ball can be realized by an axis-aligned cube
    // whose side is a multiple of m spanning whole cells, so it suffices to
    // find the largest cube of present cells (dynamic program; for d = 1 the
    // longest run of consecutive cells).
    Inball inball() const {
        require(!empty(), "inball of empty region");
        if (d == 1) return inball_1d();
        return inball_nd();
    }

    // Exact volume of the closed s-neighborhood of the boundary, available in
    // dimensions 1 and 2 where the neighborhood is a union of axis-aligned
    // boxes we can sweep.  s must be positive.
    Rat boundary_neighborhood_volume(const Rat& s) const;

    // Monte-Carlo estimate of the same volume for any dimension (diagnostic
    // only; never asserted against).
    double boundary_neighborhood_volume_estimate(const Rat& s, Rng& rng,
                                                 std::size_t samples = 200000) const;

    // Smallest box of cells [lo, hi] containing all cells (inclusive).
    void cell_bounds(std::vector<I128>& lo, std::vector<I128>& hi) const {
        require(!empty(), "cell_bounds of empty region");
        lo.assign(cells_.begin(), cells_.begin() + d);
        hi = lo;
        for (std::size_t i = 1; i < cell_count(); ++i) {
            const I128* c = cell(i);
            for (int k = 0; k < d; ++k) {
                lo[std::size_t(k)] = std::min(lo[std::size_t(k)], c[k]);
                hi[std::size_t(k)] = std::max(hi[std::size_t(k)], c[k]);
            }
        }
    }

    bool operator==(const CubeUnion& o) const {
        return d == o.d && m == o.m && offset == o.offset && cells_ == o.cells_;
    }

private:
    std::vector<I128> cells_;  // flat, stride d, lexicographically sorted, unique

    void normalize() {
        std::size_t n = cell_count();
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        auto less = [this](std::size_t x, std::size_t y) {
            const I128* a = cell(x);
            const I128* b = cell(y);
            for (int k = 0; k < d; ++k) {
                if (a[k] != b[k]) return a[k] < b[k];
            }
            return false;
        };
        std::sort(order.begin(), order.end(), less);
        std::vector<I128> out;
        out.reserve(cells_.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0 && !less(order[i - 1], order[i])) continue;  // duplicate
            const I128* c = cell(order[i]);
            out.insert(out.end(), c, c + d);
        }
        cells_ = std::move(out);
    }

    Inball inball_1d() const {
        // Longest run of consecutive cells.
        std::size_t best_len = 1, best_start = 0, run_start = 0;
        for (std::size_t i = 1; i < cell_count(); ++i) {
            if (cells_[i] != checked_add(cells_[i - 1], 1)) run_start = i;
            if (i - run_start + 1 > best_len) {
                best_len = i - run_start + 1;
                best_start = run_start;
            }
        }
        Rat half = make_rat(m, 2);
        Rat radius = Rat(BigInt(best_len)) * half;
        RatPoint center{Rat(big_of_i128(cells_[best_start]) * big_of_i128(m)) + radius +
                        offset[0]};
        return Inball{radius, center};
    }

    Inball inball_nd() const {
        std::vector<I128> lo, hi;
        cell_bounds(lo, hi);
        std::size_t total = 1;
        std::vector<std::size_t> ext(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            I128 e = checked_add(checked_sub(hi[std::size_t(k)], lo[std::size_t(k)]), 1);
            require(e > 0 && U128(e) < (U128(1) << 26), "inball: extent too large");
            ext[std::size_t(k)] = std::size_t(e);
            require(total <= (std::size_t(1) << 26) / ext[std::size_t(k)] + 1,
                    "inball: bounding box too large");
            total *= ext[std::size_t(k)];
        }
        std::vector<std::int32_t> dp(total, 0);
        auto flat = [&](const I128* c) {
            std::size_t idx = 0;
            for (int k = 0; k < d; ++k) {
                idx = idx * ext[std::size_t(k)] +
                      std::size_t(checked_sub(c[k], lo[std::size_t(k)]));
            }
            return idx;
        };
        // dp[c] = side (in cells) of the largest cube of present cells whose
        // lexicographically largest corner cell is c.
        std::int32_t best = 0;
        std::size_t best_idx = 0;
        std::vector<I128> nb(static_cast<std::size_t>(d));
        for (std::size_t i = 0; i < cell_count(); ++i) {
            const I128* c = cell(i);
            std::int32_t v = INT32_MAX;
            // Minimum over the 2^d - 1 predecessor neighbors (shift back by
            // one along any nonempty subset of axes).
            for (unsigned mask = 1; mask < (1u << d) && v > 0; ++mask) {
                bool in_range = true;
                for (int k = 0; k < d; ++k) {
                    nb[std::size_t(k)] = c[k] - ((mask >> k) & 1u ? 1 : 0);
                    if (nb[std::size_t(k)] < lo[std::size_t(k)]) in_range = false;
                }
                std::int32_t w = 0;
                if (in_range && has_cell(nb.data())) w = dp[flat(nb.data())];
                v = std::min(v, w);
            }
            std::int32_t side = (v == INT32_MAX ? 1 : v + 1);
            dp[flat(c)] = side;
            if (side > best) {
                best = side;
                best_idx = i;
            }
        }
        Rat half = make_rat(m, 2);
        Rat radius = Rat(BigInt(best)) * half;
        const I128* corner = cell(best_idx);
        RatPoint center(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            // corner is the largest cell of the cube; its far face sits at
            // m*(corner_k + 1), the center radius away from it.
            center[std::size_t(k)] =
                Rat(big_of_i128(checked_add(corner[k], 1)) * big_of_i128(m)) - radius +
                offset[std::size_t(k)];
        }
        return Inball{radius, center};
    }
};

// Union of all scale-m grid cubes (offset 0) meeting a finite point set.
inline CubeUnion cover_points(const std::vector<RatPoint>& xs, int d, I128 m) {
    require(!xs.empty(), "cover_points: empty point set");
    require(m >= 1, "cover_points: scale must be positive");
    std::vector<I128> cells;
    cells.reserve(xs.size() * std::size_t(d));
    Rat scale = rat_of_i128(m);
    for (const auto& x : xs) {
        require(x.size() == std::size_t(d), "cover_points: dimension mismatch");
        for (int k = 0; k < d; ++k) {
            cells.push_back(rat_floor_i128(x[std::size_t(k)] / scale));
        }
    }
    return CubeUnion(d, m, std::move(cells));
}

// Upper bound c0 * s^d * vol_{d-1}(boundary) on the volume of the closed
// s-neighborhood of the boundary, with c0 = 3^d: for s <= m each boundary
// face's s-neighborhood fits in a 3m-slab centered on the face, and a face
// can be charged at most 3^d times across the union.  A coarse but explicit
// constant; only the bound's direction is ever asserted, and only for s
// large enough that the slab accounting is valid (see tests).
inline Rat neighborhood_volume_bound(const CubeUnion& region, const Rat& s) {
    require(s > 0, "neighborhood bound: s must be positive");
    Rat c0 = 1;
    Rat sd = 1;
    for (int k = 0; k < region.d; ++k) {
        c0 *= 3;
        sd *= s;
    }
    return c0 * sd * Rat(region.boundary_measure());
}

// --- boundary neighborhood volume -------------------------------------------

namespace detail {

struct RatBox {
    std::vector<Rat> lo, hi;  // closed box, lo < hi componentwise
};

// Exact area of a union of axis-aligned rectangles by x-sweep: between two
// consecutive event abscissae the covered y-extent is a merge of intervals.
inline Rat union_area_2d(const std::vector<RatBox>& boxes) {
    std::vector<Rat> xs;
    for (const auto& b : boxes) {
        xs.push_back(b.lo[0]);
        xs.push_back(b.hi[0]);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    Rat area = 0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        Rat x0 = xs[i], x1 = xs[i + 1];
        std::vector<std::pair<Rat, Rat>> ys;
        for (const auto& b : boxes) {
            if (b.lo[0] <= x0 && b.hi[0] >= x1) ys.emplace_back(b.lo[1], b.hi[1]);
        }
        std::sort(ys.begin(), ys.end());
        Rat covered = 0, cur_lo = 0, cur_hi = 0;
        bool open = false;
        for (const auto& [ylo, yhi] : ys) {
            if (!open || ylo > cur_hi) {
                if (open) covered += cur_hi - cur_lo;
                cur_lo = ylo;
                cur_hi = yhi;
                open = true;
            } else {
                cur_hi = rat_max(cur_hi, yhi);
            }
        }
        if (open) covered += cur_hi - cur_lo;
        area += (x1 - x0) * covered;
    }
    return area;
}

inline Rat union_length_1d(std::vector<std::pair<Rat, Rat>> iv) {
    std::sort(iv.begin(), iv.end());
    Rat len = 0, cur_lo = 0, cur_hi = 0;
    bool open = false;
    for (const auto& [a, b] : iv) {
        if (!open || a > cur_hi) {
            if (open) len += cur_hi - cur_lo;
            cur_lo = a;
            cur_hi = b;
            open = true;
        } else {
            cur_hi = rat_max(cur_hi, b);
        }
    }
    if (open) len += cur_hi - cur_lo;
    return len;
}

}  // namespace detail

// Exposed faces of the region as geometric boxes ((d-1)-dimensional; the
// normal-axis extent of each returned box is degenerate).
inline std::vector<detail::RatBox> exposed_faces(const CubeUnion& region) {
    std::vector<detail::RatBox> faces;
    const int d = region.d;
    std::vector<I128> nb(static_cast<std::size_t>(d));
    Rat scale = rat_of_i128(region.m);
    for (std::size_t i = 0; i < region.cell_count(); ++i) {
        const I128* c = region.cell(i);
        for (int a = 0; a < d; ++a) {
            for (int sgn = -1; sgn <= 1; sgn += 2) {
                for (int k = 0; k < d; ++k) nb[std::size_t(k)] = c[k];
                nb[std::size_t(a)] = checked_add(nb[std::size_t(a)], sgn);
                if (region.has_cell(nb.data())) continue;
                detail::RatBox f;
                f.lo.resize(static_cast<std::size_t>(d));
                f.hi.resize(static_cast<std::size_t>(d));
                for (int k = 0; k < d; ++k) {
                    Rat base = Rat(big_of_i128(c[k])) * scale + region.offset[std::size_t(k)];
                    if (k == a) {
                        Rat x = sgn < 0 ? base : base + scale;
                        f.lo[std::size_t(k)] = x;
                        f.hi[std::size_t(k)] = x;
                    } else {
                        f.lo[std::size_t(k)] = base;
                        f.hi[std::size_t(k)] = base + scale;
                    }
                }
                faces.push_back(std::move(f));
            }
        }
    }
    return faces;
}

inline Rat CubeUnion::boundary_neighborhood_volume(const Rat& s) const {
    require(s > 0, "boundary neighborhood: s must be positive");
    auto faces = exposed_faces(*this);
    if (d == 1) {
        std::vector<std::pair<Rat, Rat>> iv;
        iv.reserve(faces.size());
        for (const auto& f : faces) iv.emplace_back(f.lo[0] - s, f.hi[0] + s);
        return detail::union_length_1d(std::move(iv));
    }
    if (d == 2) {
        std::vector<detail::RatBox> grown;
        grown.reserve(faces.size());
        for (auto f : faces) {
            for (int k = 0; k < 2; ++k) {
                f.lo[std::size_t(k)] -= s;
                f.hi[std::size_t(k)] += s;
            }
            grown.push_back(std::move(f));
        }
        return detail::union_area_2d(grown);
    }
    fail("exact boundary neighborhood volume implemented for d <= 2 only");
}

inline double CubeUnion::boundary_neighborhood_volume_estimate(
    const Rat& s, Rng& rng, std::size_t samples) const {
    auto faces = exposed_faces(*this);
    require(!faces.empty(), "neighborhood estimate: region has no boundary");
    std::vector<I128> lo, hi;
    cell_bounds(lo, hi);
    double sd = rat_to_double(s), md = double(I128(m));
    std::vector<double> blo(static_cast<std::size_t>(d)), bhi(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        double off = rat_to_double(offset[std::size_t(k)]);
        blo[std::size_t(k)] = double(lo[std::size_t(k)]) * md + off - sd;
        bhi[std::size_t(k)] = (double(hi[std::size_t(k)]) + 1.0) * md + off + sd;
    }
    std::size_t hitcnt = 0;
    std::vector<double> x(static_cast<std::size_t>(d));
    for (std::size_t it = 0; it < samples; ++it) {
        for (int k = 0; k < d; ++k) {
            x[std::size_t(k)] =
                blo[std::size_t(k)] +
                rng.unit() * (bhi[std::size_t(k)] - blo[std::size_t(k)]);
        }
        double best = 1e300;
        for (const auto& f : faces) {
            double dist = 0;
            for (int k = 0; k < d; ++k) {
                double flo = rat_to_double(f.lo[std::size_t(k)]);
                double fhi = rat_to_double(f.hi[std::size_t(k)]);
                double dk = 0;
                if (x[std::size_t(k)] < flo) dk = flo - x[std::size_t(k)];
                if (x[std::size_t(k)] > fhi) dk = x[std::size_t(k)] - fhi;
                dist = std::max(dist, dk);
            }
            best = std::min(best, dist);
        }
        if (best <= sd) ++hitcnt;
    }
    double vol = 1;
    for (int k = 0; k < d; ++k) vol *= bhi[std::size_t(k)] - blo[std::size_t(k)];
    return vol * double(hitcnt) / double(samples);
}

}  // namespace delone
