#pragma once
// Exact density profiles over centered balls, averaging searches for dense
// (or sparse) translated cubes backed by prefix-sum tables, density
// separation into cube families, and target-patch sequences whose
// discrepancy ratios feed the patch-tower pipeline as divergence evidence.

#include "bd_match.hpp"
#include "core.hpp"
#include "generators.hpp"
#include "geometry.hpp"
#include "pattern.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace delone {

namespace detail {

inline Rat rat_pow_int(const Rat& b, int e) {
    Rat p = 1;
    for (int i = 0; i < e; ++i) p *= b;
    return p;
}

// Exact integer n-th root when v is a perfect n-th power.
inline std::optional<BigInt> exact_root(const BigInt& v, int n) {
    if (v < 0 || n < 1) return std::nullopt;
    if (v == 0 || v == 1 || n == 1) return v;
    BigInt lo = 1, hi = 2;
    auto pw = [n](const BigInt& b) {
        BigInt p = 1;
        for (int i = 0; i < n; ++i) p *= b;
        return p;
    };
    while (pw(hi) < v) hi *= 2;
    while (lo < hi) {
        BigInt mid = (lo + hi) / 2;
        if (pw(mid) < v) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    return pw(lo) == v ? std::optional<BigInt>(lo) : std::nullopt;
}

}  // namespace detail

// ----------------------------------------------------------------- profile

// Densities of closed centered balls: count / (2t)^d, with running tail
// extrema as finite-scale stand-ins for the upper and lower densities.
struct DensityProfile {
    int d = 1;
    std::vector<Rat> radii;
    std::vector<BigInt> counts;
    std::vector<Rat> densities;
    std::vector<Rat> inf_tail;  // min of densities[i..]
    std::vector<Rat> sup_tail;  // max of densities[i..]
};

inline DensityProfile density_profile(const DeloneGenerator& g, const std::vector<Rat>& radii) {
    require(!radii.empty(), "density_profile: no radii");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        require(radii[i] > 0, "density_profile: radii must be positive");
        require(i == 0 || radii[i - 1] < radii[i], "density_profile: radii must increase");
    }
    DensityProfile p;
    p.d = g.dim();
    p.radii = radii;
    for (const Rat& t : radii) {
        std::vector<Rat> lo(static_cast<std::size_t>(p.d), -t);
        std::vector<Rat> hi(static_cast<std::size_t>(p.d), t);
        BigInt c = g.count_in_closed_box(lo, hi);
        p.counts.push_back(c);
        p.densities.push_back(Rat(c) / detail::rat_pow_int(2 * t, p.d));
    }
    for (std::size_t i = 1; i < p.counts.size(); ++i) {
        require(p.counts[i - 1] <= p.counts[i], "density_profile: counts must be monotone");
    }
    p.inf_tail = p.densities;
    p.sup_tail = p.densities;
    for (std::size_t i = p.densities.size() - 1; i-- > 0;) {
        p.inf_tail[i] = rat_min(p.inf_tail[i], p.inf_tail[i + 1]);
        p.sup_tail[i] = rat_max(p.sup_tail[i], p.sup_tail[i + 1]);
    }
    return p;
}

// ------------------------------------------------------- averaging search

enum class AvgMode { Lower, Upper };

namespace detail {

// d-dimensional prefix-sum table of unit-cell point counts over [-k, k)^d,
// giving O(2^d) exact counts of any unit-aligned box.
struct PrefixTable {
    int d = 1;
    I128 k = 0;
    std::int64_t n = 0;                // cells per axis: 2k
    std::vector<std::int64_t> stride;  // row-major strides
    std::vector<std::int64_t> table;   // inclusive prefix sums

    PrefixTable(const DeloneGenerator& g, I128 k_in) : d(g.dim()), k(k_in) {
        require(k >= 1, "PrefixTable: radius must be positive");
        require(k <= (I128(1) << 40), "PrefixTable: radius too large");
        n = std::int64_t(2 * k);
        std::int64_t total = 1;
        for (int a = 0; a < d; ++a) {
            require(total <= std::int64_t(2e7) / n, "PrefixTable: cell grid too large");
            total *= n;
        }
        stride.assign(std::size_t(d), 1);
        for (int a = d - 2; a >= 0; --a) {
            stride[std::size_t(a)] = stride[std::size_t(a) + 1] * n;
        }
        table.assign(std::size_t(total), 0);

        std::vector<Rat> lo(static_cast<std::size_t>(d), rat_of_i128(-k));
        std::vector<Rat> hi(static_cast<std::size_t>(d), rat_of_i128(k));
        std::vector<I128> units = g.units_in_box(lo, hi);
        const Rat q = g.quantum();
        const std::size_t npts = units.size() / std::size_t(d);
        for (std::size_t i = 0; i < npts; ++i) {
            std::int64_t idx = 0;
            bool inside = true;
            for (int a = 0; a < d && inside; ++a) {
                I128 cell = rat_floor_i128(rat_of_i128(units[i * std::size_t(d) + std::size_t(a)]) * q);
                I128 s = cell + k;
                // points at coordinate exactly +k fall outside every candidate cube
                if (s < 0 || s >= n) {
                    inside = false;
                } else {
                    idx += std::int64_t(s) * stride[std::size_t(a)];
                }
            }
            if (inside) ++table[std::size_t(idx)];
        }
        // in-place prefix sums along each axis
        for (int a = 0; a < d; ++a) {
            const std::int64_t s = stride[std::size_t(a)];
            for (std::int64_t i = 0; i < total; ++i) {
                if ((i / s) % n > 0) table[std::size_t(i)] += table[std::size_t(i - s)];
            }
        }
    }

    // #points in the half-open cell box prod [lo_a, hi_a), absolute cell coords
    BigInt box_count(const std::vector<I128>& lo, const std::vector<I128>& hi) const {
        const auto sd = std::size_t(d);
        std::vector<std::int64_t> a(sd), b(sd);
        for (int i = 0; i < d; ++i) {
            I128 la = lo[std::size_t(i)] + k, hb = hi[std::size_t(i)] + k;
            require(la >= 0 && hb <= n && la <= hb, "PrefixTable: box out of range");
            a[std::size_t(i)] = std::int64_t(la);
            b[std::size_t(i)] = std::int64_t(hb);
        }
        std::int64_t total = 0;
        for (unsigned mask = 0; mask < (1u << d); ++mask) {
            std::int64_t idx = 0;
            bool zero = false;
            int bits = 0;
            for (int i = 0; i < d && !zero; ++i) {
                std::int64_t c = (mask >> i) & 1u ? a[std::size_t(i)] - 1 : b[std::size_t(i)] - 1;
                if (mask >> i & 1u) ++bits;
                if (c < 0) {
                    zero = true;
                } else {
                    idx += c * stride[std::size_t(i)];
                }
            }
            if (zero) continue;
            total += (bits % 2 == 0 ? 1 : -1) * table[std::size_t(idx)];
        }
        return BigInt(total);
    }
};

// Boundary-ring volume fraction of B(0,k) thickened by rho on both sides:
// ((2k+2rho)^d - (2k-2rho)^d) / (2k)^d.
inline Rat ring_volume_fraction(const Rat& k, const Rat& rho, int d) {
    require(k > rho, "ring fraction: thickening swallows the ball");
    return (rat_pow_int(2 * k + 2 * rho, d) - rat_pow_int(2 * k - 2 * rho, d)) /
           rat_pow_int(2 * k, d);
}

}  // namespace detail

struct AveragingResult {
    bool found = false;
    std::vector<I128> x;
    BigInt count = 0;
    Rat density = 0;    // count / vol(A)
    Rat threshold = 0;  // gamma - eps (Lower) or gamma + eps (Upper)
    BigInt candidates = 0;
};

// First (lexicographic) integer translate x with A+x inside B(0,k) whose
// point count crosses the averaged-density threshold.  Preconditions of the
// averaging lemma are verified here: the central density reaches gamma and
// k is past K(eps), i.e. the rho-thickened boundary ring of B(0,k) is a
// volume fraction below eps/2 for rho = diam(A).
inline AveragingResult averaging_search(const DeloneGenerator& g, const CubeUnion& A,
                                        const Rat& gamma, const Rat& eps, I128 k,
                                        AvgMode mode) {
    const int d = g.dim();
    require(A.d == d, "averaging_search: dimension mismatch");
    require(eps > 0, "averaging_search: eps must be positive");
    for (const Rat& o : A.offset) {
        require(rat_is_integer(o), "averaging_search: cube offset must be integral");
    }

    std::vector<I128> clo, chi;
    A.cell_bounds(clo, chi);
    Rat rho = 0;
    for (int a = 0; a < d; ++a) {
        rho = rat_max(rho, rat_of_i128((chi[std::size_t(a)] - clo[std::size_t(a)] + 1) * A.m));
    }
    require(detail::ring_volume_fraction(rat_of_i128(k), rho, d) < eps / 2,
            "averaging_search: k below K(eps) for this cube");

    // central density precondition over the closed ball B(0,k)
    std::vector<Rat> blo(static_cast<std::size_t>(d), rat_of_i128(-k));
    std::vector<Rat> bhi(static_cast<std::size_t>(d), rat_of_i128(k));
    Rat central = Rat(g.count_in_closed_box(blo, bhi)) / detail::rat_pow_int(rat_of_i128(2 * k), d);
    if (mode == AvgMode::Lower) {
        require(central >= gamma, "averaging_search: central density below gamma");
    } else {
        require(central <= gamma, "averaging_search: central density above gamma");
    }

    detail::PrefixTable tab(g, k);

    // translate range per axis: x + m*clo >= -k and x + m*(chi+1) <= k
    const auto sd = std::size_t(d);
    std::vector<I128> xlo(sd), xhi(sd);
    AveragingResult res;
    res.candidates = 1;
    for (int a = 0; a < d; ++a) {
        Rat off = A.offset[std::size_t(a)];
        I128 o = rat_floor_i128(off);
        xlo[std::size_t(a)] = -k - A.m * clo[std::size_t(a)] - o;
        xhi[std::size_t(a)] = k - A.m * (chi[std::size_t(a)] + 1) - o;
        require(xlo[std::size_t(a)] <= xhi[std::size_t(a)],
                "averaging_search: cube does not fit in the ball");
        res.candidates *= big_of_i128(xhi[std::size_t(a)] - xlo[std::size_t(a)] + 1);
    }

    const Rat vol = Rat(A.volume());
    res.threshold = mode == AvgMode::Lower ? Rat(gamma - eps) : Rat(gamma + eps);
    const Rat target = res.threshold * vol;

    std::vector<I128> x = xlo;
    std::vector<I128> blo_c(sd), bhi_c(sd);
    while (true) {
        // count over A + x, one prefix-table box per cube cell
        BigInt cnt = 0;
        for (std::size_t ci = 0; ci < A.cell_count(); ++ci) {
            const I128* c = A.cell(ci);
            for (int a = 0; a < d; ++a) {
                I128 base = x[std::size_t(a)] + A.m * c[a] + rat_floor_i128(A.offset[std::size_t(a)]);
                blo_c[std::size_t(a)] = base;
                bhi_c[std::size_t(a)] = base + A.m;
            }
            cnt += tab.box_count(blo_c, bhi_c);
        }
        bool hit = mode == AvgMode::Lower ? Rat(cnt) >= target : Rat(cnt) <= target;
        if (hit) {
            res.found = true;
            res.x = x;
            res.count = cnt;
            res.density = Rat(cnt) / vol;
            return res;
        }
        // lexicographic odometer, last axis fastest
        int a = d - 1;
        while (a >= 0 && x[std::size_t(a)] == xhi[std::size_t(a)]) {
            x[std::size_t(a)] = xlo[std::size_t(a)];
            --a;
        }
        if (a < 0) break;
        ++x[std::size_t(a)];
    }
    return res;  // found == false; callers decide how loud to be
}

// -------------------------------------------------- density separation

struct SeparationStage {
    I128 a = 0;            // cube radius: A = [-a, a]^d
    I128 search_ball = 0;  // b with the found translate inside B(0, b)
    std::vector<I128> x;
    BigInt center_count = 0;  // #(Lambda n A) (half-open realization)
    BigInt found_count = 0;   // #(Lambda n (A + x))
    Rat profile_density = 0;  // closed-ball central density at radius a
    Rat found_density = 0;    // found_count / vol(A) >= beta
};

struct SeparationReport {
    bool separated = false;
    std::size_t tail_start = 0;
    Rat alpha_tilde = 0, beta_tilde = 0;  // tail extrema of the profile
    Rat alpha_radius = 0, beta_radius = 0;
    Rat gap = 0;
    Rat alpha = 0, beta = 0;  // alpha_tilde + gap/3, beta_tilde - gap/3
    Rat delta = 0, eps = 0, gamma = 0;
    std::vector<SeparationStage> stages;
    std::vector<I128> skipped;  // low-density radii with no admissible ball
    std::string note;
};

namespace detail {

// Smallest profiled integer radius usable as the averaging ball for a cube
// of diameter rho: high enough central density and past K(eps).
inline std::optional<I128> pick_search_ball(const DensityProfile& prof, const Rat& gamma,
                                            const Rat& eps, const Rat& rho) {
    for (std::size_t i = 0; i < prof.radii.size(); ++i) {
        const Rat& b = prof.radii[i];
        if (!rat_is_integer(b) || prof.densities[i] < gamma) continue;
        if (b <= rho) continue;
        if (ring_volume_fraction(b, rho, prof.d) < eps / 2) return rat_floor_i128(b);
    }
    return std::nullopt;
}

// The cube [-a, a]^d realized half-open as [-a, a+1)^d: one cell of scale
// 2a+1 anchored at -a.
inline CubeUnion centered_cube(int d, I128 a) {
    return CubeUnion(d, 2 * a + 1, std::vector<I128>(std::size_t(d), 0),
                     std::vector<Rat>(std::size_t(d), rat_of_i128(-a)));
}

}  // namespace detail

// Density separation in the style of the unequal-densities lemma: tail
// extrema of the profile give proxies alpha~ < beta~; cubes at profiled
// low-density radii are paired, via lower-mode averaging searches in larger
// profiled balls, with translates of density >= beta = beta~ - gap/3.
inline SeparationReport unequal_density_cubes(const DeloneGenerator& g,
                                              const DensityProfile& prof,
                                              const Rat& min_gap) {
    require(prof.d == g.dim(), "unequal_density_cubes: dimension mismatch");
    require(prof.radii.size() >= 2, "unequal_density_cubes: profile too small");
    SeparationReport rep;
    rep.tail_start = prof.radii.size() / 2;
    rep.alpha_tilde = prof.inf_tail[rep.tail_start];
    rep.beta_tilde = prof.sup_tail[rep.tail_start];
    for (std::size_t i = rep.tail_start; i < prof.radii.size(); ++i) {
        if (prof.densities[i] == rep.alpha_tilde && rep.alpha_radius == 0) {
            rep.alpha_radius = prof.radii[i];
        }
        if (prof.densities[i] == rep.beta_tilde && rep.beta_radius == 0) {
            rep.beta_radius = prof.radii[i];
        }
    }
    rep.gap = rep.beta_tilde - rep.alpha_tilde;
    if (rep.gap <= min_gap) {
        rep.separated = false;
        rep.note = "no separation found at this scale";
        return rep;
    }
    rep.separated = true;
    rep.alpha = rep.alpha_tilde + rep.gap / 3;
    rep.beta = rep.beta_tilde - rep.gap / 3;
    rep.delta = rep.gap / 20;
    rep.eps = 17 * rep.gap / 60;  // gamma - eps == beta exactly
    rep.gamma = rep.beta_tilde - rep.delta;

    for (std::size_t i = 0; i < prof.radii.size(); ++i) {
        if (!rat_is_integer(prof.radii[i]) || prof.densities[i] > rep.alpha) continue;
        I128 a = rat_floor_i128(prof.radii[i]);
        if (a < 1) continue;
        Rat rho = rat_of_i128(2 * a + 1);
        auto b = detail::pick_search_ball(prof, rep.gamma, rep.eps, rho);
        if (!b) {
            rep.skipped.push_back(a);
            continue;
        }
        CubeUnion A = detail::centered_cube(prof.d, a);
        AveragingResult r = averaging_search(g, A, rep.gamma, rep.eps, *b, AvgMode::Lower);
        require(r.found,
                "unequal_density_cubes: averaging_search found nothing although its "
                "preconditions were verified");
        require(r.density >= rep.beta, "unequal_density_cubes: postcondition lost");
        SeparationStage st;
        st.a = a;
        st.search_ball = *b;
        st.x = r.x;
        st.center_count = count_halfopen_region(g, A);
        st.found_count = r.count;
        st.profile_density = prof.densities[i];
        st.found_density = r.density;
        rep.stages.push_back(std::move(st));
    }
    if (rep.stages.empty()) {
        rep.note = "separation evidenced by the profile, but no profiled radius "
                   "admitted a search ball";
    }
    return rep;
}

// ----------------------------------------------------- target patches

enum class PatchRoute { DensitySeparation, MatchedLattice, Inconclusive };

struct PatchStage {
    CubeUnion A;
    std::vector<I128> x;
    I128 search_ball = 0;
    Rat eps_m = 0;  // boundary/(2 vol), midpoint of the allowed schedule
    BigInt count_center = 0, count_shifted = 0;
    Rat ratio = 0;  // |difference| / boundary measure
};

struct TargetPatchOptions {
    std::vector<Rat> profile_radii;
    std::vector<I128> schedule;  // cube radii a_m
    Rat min_gap = make_rat(1, 10);
    BdOptions lattice_probe;  // windows for the matched-lattice route
    int min_stages = 5;
    Rat divergence_factor = 10;
};

struct TargetPatchReport {
    PatchRoute route = PatchRoute::Inconclusive;
    SeparationReport separation;
    std::optional<BdReport> lattice_witness;
    Rat delta_proxy = 0;   // density at the largest profiled radius
    Rat proxy_radius = 0;  // that radius, recorded alongside the proxy
    std::vector<PatchStage> stages;
    DiscrepancyWitness witness;  // one record per stage
    std::string note;
};

// Patch sequence with growing discrepancy ratios.  Route one: the profile
// separates tail densities, and each scheduled cube (low central density)
// is paired with a dense translate found by averaging.  Route two: no
// separation, but the BD probe against the density-matched lattice
// diverges, and translates are found at gamma = Delta - eps_m.  Otherwise
// the generator is reported as (evidently) uniformly spread, with the
// matched-lattice witness attached.
inline TargetPatchReport target_patches(const DeloneGenerator& g,
                                        const TargetPatchOptions& opt) {
    const int d = g.dim();
    require(!opt.schedule.empty(), "target_patches: empty schedule");
    TargetPatchReport rep;
    rep.witness.divergence_factor = opt.divergence_factor;

    DensityProfile prof = density_profile(g, opt.profile_radii);
    // density proxy from the half-open centered box [-t, t)^d, so exactly
    // periodic sets get their exact density (closed balls overcount by a
    // boundary layer that never vanishes at finite scale)
    rep.proxy_radius = prof.radii.back();
    {
        std::vector<Rat> plo(std::size_t(d), -rep.proxy_radius);
        std::vector<Rat> phi(std::size_t(d), rep.proxy_radius);
        rep.delta_proxy = Rat(count_halfopen_box(g, plo, phi)) /
                          detail::rat_pow_int(2 * rep.proxy_radius, d);
    }
    rep.separation = unequal_density_cubes(g, prof, opt.min_gap);

    Rat route_gamma, route_eps;  // per-route averaging parameters
    bool use_delta = false;

    if (rep.separation.separated) {
        rep.route = PatchRoute::DensitySeparation;
        route_gamma = rep.separation.gamma;
        route_eps = rep.separation.eps;
    } else {
        // density-matched lattice: scale = Delta^(-1/d), exact or bust
        require(rep.delta_proxy > 0, "target_patches: zero density proxy");
        Rat inv = 1 / rep.delta_proxy;
        auto rn = detail::exact_root(numerator(inv), d);
        auto rd = detail::exact_root(denominator(inv), d);
        if (!rn || !rd) {
            rep.route = PatchRoute::Inconclusive;
            rep.note = "matched-lattice scale is irrational at this dimension";
            return rep;
        }
        Rat scale = Rat(*rn) / Rat(*rd);
        LatticeGenerator lattice(d, std::vector<Rat>(std::size_t(d), scale),
                                 std::vector<Rat>(std::size_t(d), Rat(0)));
        rep.lattice_witness = bd_test(g, lattice, opt.lattice_probe);
        if (!rep.lattice_witness->witness.diverging) {
            rep.route = PatchRoute::Inconclusive;
            rep.note = "uniformly spread at the probed windows; matched-lattice "
                       "witness attached";
            return rep;
        }
        rep.route = PatchRoute::MatchedLattice;
        use_delta = true;
    }

    for (I128 a : opt.schedule) {
        require(a >= 1, "target_patches: schedule radii must be positive");
        CubeUnion A = detail::centered_cube(d, a);
        const Rat vol = Rat(A.volume());
        const Rat boundary = Rat(A.boundary_measure());
        PatchStage st;
        st.A = A;
        st.eps_m = boundary / (2 * vol);
        require(st.eps_m * vol < boundary, "target_patches: eps_m schedule violated");

        Rat gamma = route_gamma, eps = route_eps;
        if (use_delta) {
            gamma = rep.delta_proxy - st.eps_m;
            eps = st.eps_m;
        } else {
            // scheduled cube must show low central density, else the pair
            // carries no discrepancy evidence
            std::vector<Rat> lo(std::size_t(d), rat_of_i128(-a)), hi(std::size_t(d), rat_of_i128(a));
            Rat cd = Rat(g.count_in_closed_box(lo, hi)) /
                     detail::rat_pow_int(rat_of_i128(2 * a), d);
            require(cd <= rep.separation.alpha,
                    "target_patches: scheduled radius lacks low central density");
        }

        Rat rho = rat_of_i128(2 * a + 1);
        auto b = detail::pick_search_ball(prof, gamma, eps, rho);
        require(bool(b), "target_patches: no profiled ball admits this stage");
        AveragingResult r = averaging_search(g, A, gamma, eps, *b, AvgMode::Lower);
        require(r.found,
                "target_patches: averaging_search found nothing although its "
                "preconditions were verified");
        if (use_delta) {
            require(r.density >= rep.delta_proxy - 2 * st.eps_m,
                    "target_patches: stage density postcondition lost");
        } else {
            require(r.density >= rep.separation.beta,
                    "target_patches: stage density postcondition lost");
        }

        st.x = r.x;
        st.search_ball = *b;
        st.count_center = count_halfopen_region(g, A);
        st.count_shifted = r.count;
        BigInt diff = st.count_center > st.count_shifted ? st.count_center - st.count_shifted
                                                         : st.count_shifted - st.count_center;
        st.ratio = Rat(diff) / boundary;

        DiscrepancyRecord rec;
        rec.region = A;
        for (I128 xv : r.x) rec.translation.push_back(rat_of_i128(xv));
        rec.count0 = st.count_center;
        rec.count1 = st.count_shifted;
        rec.ratio = st.ratio;
        rep.witness.records.push_back(std::move(rec));
        rep.stages.push_back(std::move(st));
    }
    mark_divergence(rep.witness, opt.min_stages);
    if (rep.note.empty()) {
        rep.note = rep.witness.diverging ? "stage ratios diverging"
                                         : "stage ratios not diverging at this depth";
    }
    return rep;
}

}  // namespace delone
