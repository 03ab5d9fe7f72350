// Generator family: frozen enumeration values, dual-strategy agreement for
// the golden-ratio chain, separation/packing spot checks, query consistency
// on nested boxes, and the translation group action.
#include <catch2/catch_amalgamated.hpp>

#include <delone/generators.hpp>

#include <algorithm>
#include <set>
#include <vector>

using namespace delone;

namespace {

// flat units -> sorted list of d-tuples, for order-insensitive comparison
std::vector<std::vector<I128>> tuples(const std::vector<I128>& units, int d) {
    std::vector<std::vector<I128>> out;
    for (std::size_t i = 0; i * std::size_t(d) < units.size(); ++i) {
        out.emplace_back(units.begin() + long(i) * d, units.begin() + long(i + 1) * d);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Rat> rats(std::initializer_list<long long> xs) {
    std::vector<Rat> v;
    for (long long x : xs) v.emplace_back(x);
    return v;
}

Rat random_rat(Rng& rng, long long span) {
    long long den = 1 + (long long)rng.below(4);
    long long num = (long long)rng.range(-span * den, span * den);
    return make_rat(num, den);
}

// separation: all pairwise sup-distances within a window are >= r
void check_separation(const FinitePattern& p, const Rat& r) {
    const Rat rq = r / p.quantum;  // compare in quantum units
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = i + 1; j < p.size(); ++j) {
            I128 best = 0;
            for (int k = 0; k < p.d; ++k) {
                I128 dk = i128_abs(checked_sub(p.point(i)[k], p.point(j)[k]));
                best = std::max(best, dk);
            }
            REQUIRE(rat_of_i128(best) >= rq);
        }
    }
}

// packing: closed balls B(y, R) with B(y, R) inside the faithful window all
// contain a point
void check_packing(const DeloneGenerator& g, const FinitePattern& p, const Rat& R,
                   Rng& rng) {
    if (p.window <= R) return;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Rat> lo(static_cast<std::size_t>(p.d)), hi(static_cast<std::size_t>(p.d));
        for (int k = 0; k < p.d; ++k) {
            Rat span = p.window - R;
            Rat c = random_rat(rng, 8) * span / 8;  // center within [-span, span]
            lo[std::size_t(k)] = c - R;
            hi[std::size_t(k)] = c + R;
        }
        REQUIRE(g.count_in_closed_box(lo, hi) >= 1);
    }
}

void check_nested_consistency(const DeloneGenerator& g, const std::vector<Rat>& lo2,
                              const std::vector<Rat>& hi2, const std::vector<Rat>& lo1,
                              const std::vector<Rat>& hi1) {
    // B1 inside B2: query(B1) must equal query(B2) restricted to B1
    const int d = g.dim();
    Rat q = g.quantum();
    auto big = tuples(g.units_in_box(lo2, hi2), d);
    auto small = tuples(g.units_in_box(lo1, hi1), d);
    std::vector<std::vector<I128>> filtered;
    for (const auto& t : big) {
        bool in = true;
        for (int k = 0; k < d && in; ++k) {
            Rat x = rat_of_i128(t[std::size_t(k)]) * q;
            if (x < lo1[std::size_t(k)] || x > hi1[std::size_t(k)]) in = false;
        }
        if (in) filtered.push_back(t);
    }
    REQUIRE(small == filtered);
}

}  // namespace

TEST_CASE("integer lattice: windows, open queries, counts") {
    LatticeGenerator z1(1);
    CHECK(z1.quantum() == 1);
    CHECK(z1.delone_params().r == 1);
    CHECK(z1.delone_params().R == make_rat(1, 2));

    // B(0, 3.5) open: integers -3..3
    auto pts = z1.query_open({Rat(0)}, make_rat(7, 2));
    REQUIRE(pts.size() == 7);
    CHECK(pts.front()[0] == -3);
    CHECK(pts.back()[0] == 3);

    // open ball with integer radius drops the rim
    CHECK(z1.query_open({Rat(0)}, Rat(3)).size() == 5);
    // closed window keeps it
    CHECK(z1.window(Rat(3)).size() == 7);

    LatticeGenerator z2(2);
    CHECK(z2.window(Rat(10)).size() == 441);
    CHECK(z2.count_in_closed_box(rats({-10, -10}), rats({10, 10})) == 441);
    CHECK(z2.count_in_closed_box(rats({0, 0}), rats({(long long)0, (long long)0})) == 1);
    CHECK(z2.count_in_closed_box(rats({1, 1}), rats({0, 5})) == 0);

    // scaled + offset lattice: counts match the materialized points
    LatticeGenerator g(2, {make_rat(1, 2), Rat(3)}, {make_rat(1, 3), Rat(0)});
    Rng rng(11);
    for (int t = 0; t < 30; ++t) {
        std::vector<Rat> lo(2), hi(2);
        for (int k = 0; k < 2; ++k) {
            Rat a = random_rat(rng, 12), b = random_rat(rng, 12);
            lo[std::size_t(k)] = rat_min(a, b);
            hi[std::size_t(k)] = rat_max(a, b);
        }
        auto units = g.units_in_box(lo, hi);
        CHECK(g.count_in_closed_box(lo, hi) == BigInt(units.size() / 2));
    }
}

TEST_CASE("translate: group action on queries") {
    auto z1 = std::make_shared<LatticeGenerator>(1);
    auto shifted = translate(z1, {make_rat(1, 2)});
    CHECK(shifted->quantum() == make_rat(1, 2));

    // open B(0, 5/2): the four half-integers strictly inside
    auto pts = shifted->query_open({Rat(0)}, make_rat(5, 2));
    REQUIRE(pts.size() == 4);
    CHECK(pts[0][0] == make_rat(-3, 2));
    CHECK(pts[3][0] == make_rat(3, 2));

    // query(translate(g, v), B) == query(g, B + v) - v, for several kinds
    std::vector<GenPtr> gens = {
        std::make_shared<LatticeGenerator>(2, std::vector<Rat>{Rat(1), Rat(2)},
                                           std::vector<Rat>{make_rat(1, 4), Rat(0)}),
        std::make_shared<FibonacciGenerator>(),
        std::make_shared<NonminimalGenerator>(),
    };
    Rng rng(23);
    for (const auto& g : gens) {
        const int d = g->dim();
        RatPoint v(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) v[std::size_t(k)] = random_rat(rng, 3);
        auto tg = translate(g, v);
        for (int t = 0; t < 10; ++t) {
            std::vector<Rat> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
            std::vector<Rat> lo_s(lo), hi_s(lo);
            for (int k = 0; k < d; ++k) {
                Rat a = random_rat(rng, 20), b = random_rat(rng, 20);
                lo[std::size_t(k)] = rat_min(a, b);
                hi[std::size_t(k)] = rat_max(a, b);
                lo_s[std::size_t(k)] = lo[std::size_t(k)] + v[std::size_t(k)];
                hi_s[std::size_t(k)] = hi[std::size_t(k)] + v[std::size_t(k)];
            }
            // compare as rational tuples (quanta differ)
            auto got = tuples(tg->units_in_box(lo, hi), d);
            auto ref = tuples(g->units_in_box(lo_s, hi_s), d);
            REQUIRE(got.size() == ref.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                for (int k = 0; k < d; ++k) {
                    Rat a = rat_of_i128(got[i][std::size_t(k)]) * tg->quantum();
                    Rat b = rat_of_i128(ref[i][std::size_t(k)]) * g->quantum() - v[std::size_t(k)];
                    REQUIRE(a == b);
                }
            }
        }
    }
}

TEST_CASE("perturbed lattice: determinism, bounds, Delone constants") {
    PerturbedLatticeGenerator g(2, make_rat(1, 8), 7);
    CHECK(g.quantum() == make_rat(1, 32768));
    CHECK(g.delone_params().r == make_rat(3, 4));
    CHECK(g.delone_params().R == make_rat(5, 8));

    auto w = g.window(Rat(6));
    // one point per cell: the 11^2 cells with |n| <= 5 land inside for sure,
    // cells touching the rim may or may not
    CHECK(w.size() >= 11 * 11);
    CHECK(w.size() <= 13 * 13);

    // identical parameters reproduce identical points
    PerturbedLatticeGenerator g2(2, make_rat(1, 8), 7);
    CHECK(g2.window(Rat(6)).raw() == w.raw());
    // different seed must differ somewhere
    PerturbedLatticeGenerator g3(2, make_rat(1, 8), 8);
    CHECK(g3.window(Rat(6)).raw() != w.raw());

    // every point is within amplitude of its cell center
    Rat eta = make_rat(1, 8);
    for (std::size_t i = 0; i < w.size(); ++i) {
        RatPoint x = w.point_rat(i);
        for (int k = 0; k < 2; ++k) {
            Rat n = Rat(rat_floor(x[std::size_t(k)] + make_rat(1, 2)));
            CHECK(rat_abs(x[std::size_t(k)] - n) <= eta);
        }
    }

    Rng rng(99);
    check_separation(w, g.delone_params().r);
    check_packing(g, w, g.delone_params().R, rng);

    // amplitude 0 degenerates to the integer lattice
    PerturbedLatticeGenerator flat(1, Rat(0), 5);
    CHECK(flat.window(Rat(4)).raw() == LatticeGenerator(1).window(Rat(4)).raw());
}

TEST_CASE("gap sequence: alternating and constant rules") {
    GapSequenceGenerator alt(GapSequenceGenerator::Rule::Alternating, 1, 2, 100);
    auto w = alt.window(Rat(10));
    // right side 0,1,3,4,6,7,9,10 mirrored
    std::vector<I128> expect = {-10, -9, -7, -6, -4, -3, -1, 0, 1, 3, 4, 6, 7, 9, 10};
    CHECK(w.raw() == expect);
    CHECK(alt.delone_params().r == 1);
    CHECK(alt.delone_params().R == 1);

    GapSequenceGenerator cb(GapSequenceGenerator::Rule::ConstantB, 1, 2, 50);
    CHECK(cb.window(Rat(9)).raw() ==
          std::vector<I128>({-8, -6, -4, -2, 0, 2, 4, 6, 8}));
    CHECK(cb.delone_params().r == 2);
    CHECK(cb.delone_params().R == 1);

    // queries beyond the materialized extent fail loudly
    CHECK_THROWS(alt.window(Rat(500)));
}

TEST_CASE("gap sequence: block rule frozen values") {
    GapSequenceGenerator blk(GapSequenceGenerator::Rule::Block4k, 1, 2, 110000);

    // first right-side points: block 0 = one A, block 1 = four Bs, then As
    auto w = blk.window(Rat(16));
    std::vector<I128> right;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w.point(i)[0] >= 0) right.push_back(w.point(i)[0]);
    }
    CHECK(right == std::vector<I128>({0, 1, 3, 5, 7, 9, 10, 11, 12, 13, 14, 15, 16}));
    // mirror: same magnitudes on the left
    REQUIRE(w.size() == 2 * right.size() - 1);

    // one-sided counts N(t) = #([0, t]): frozen table
    struct Row {
        long long t;
        long long n;
    };
    const Row rows[] = {{1, 2},     {9, 6},      {10, 7},    {25, 22},
                        {100, 59},  {153, 86},   {409, 342}, {2457, 1366},
                        {6553, 5462}, {39321, 21846}, {104857, 87382}};
    for (const Row& row : rows) {
        CHECK(blk.count_in_closed_box({Rat(0)}, {Rat(row.t)}) == BigInt(row.n));
        CHECK(blk.count_in_closed_box({Rat(-row.t)}, {Rat(row.t)}) == BigInt(2 * row.n - 1));
    }
    // block boundaries: N(T_K) = 1 + (4^K - 1)/3
    long long tk[] = {0, 1, 9, 25, 153, 409, 2457, 6553, 39321, 104857};
    long long pow4 = 1;
    for (int K = 0; K < 10; ++K) {
        CHECK(blk.count_in_closed_box({Rat(0)}, {Rat(tk[K])}) == BigInt(1 + (pow4 - 1) / 3));
        pow4 *= 4;
    }

    CHECK(blk.delone_params().r == 1);
    CHECK(blk.delone_params().R == 1);

    // counts agree with materialized queries on random boxes
    Rng rng(31);
    for (int t = 0; t < 40; ++t) {
        Rat a = random_rat(rng, 3000), b = random_rat(rng, 3000);
        std::vector<Rat> lo{rat_min(a, b)}, hi{rat_max(a, b)};
        CHECK(blk.count_in_closed_box(lo, hi) == BigInt(blk.units_in_box(lo, hi).size()));
    }
}

TEST_CASE("gap sequence: explicit letters") {
    // A B B A : gaps 1,2,2,1 -> right side 0,1,3,5,6
    GapSequenceGenerator g(GapSequenceGenerator::Rule::Explicit, 1, 2, 100,
                           {0, 1, 1, 0});
    CHECK(g.faithful_extent() == 6);
    CHECK(g.window(Rat(6)).raw() == std::vector<I128>({-6, -5, -3, -1, 0, 1, 3, 5, 6}));
    CHECK_THROWS(g.window(Rat(7)));
}

TEST_CASE("golden-ratio chain: frozen counts and gap structure") {
    FibonacciGenerator scan(FibonacciGenerator::Strategy::StripScan);
    FibonacciGenerator walk(FibonacciGenerator::Strategy::IntervalWalk);

    CHECK(scan.quantum() == make_rat(1, FibonacciGenerator::F91));
    CHECK(scan.delone_params().r == 1);
    CHECK(scan.delone_params().R == make_rat(81, 100));

    // frozen window counts (closed balls)
    CHECK(scan.window(Rat(10)).size() == 15);
    CHECK(scan.window(Rat(100)).size() == 145);
    CHECK(scan.window(Rat(1000)).size() == 1447);

    // first right-side points: 0, P, 1+P, 1+2P, 1+3P, 2+3P
    const I128 F91 = FibonacciGenerator::F91;
    const I128 F92 = FibonacciGenerator::F92;
    auto w = scan.window(Rat(8));
    std::vector<I128> right;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w.point(i)[0] >= 0) right.push_back(w.point(i)[0]);
    }
    REQUIRE(right.size() >= 6);
    CHECK(right[0] == 0);
    CHECK(right[1] == F92);
    CHECK(right[2] == F91 + F92);
    CHECK(right[3] == F91 + 2 * F92);
    CHECK(right[4] == F91 + 3 * F92);
    CHECK(right[5] == 2 * F91 + 3 * F92);

    // consecutive gaps take exactly the two values 1 and P
    auto big = scan.window(Rat(1000));
    std::set<I128> gaps;
    for (std::size_t i = 1; i < big.size(); ++i) {
        gaps.insert(checked_sub(big.point(i)[0], big.point(i - 1)[0]));
    }
    CHECK(gaps == std::set<I128>({F91, F92}));

    // internal coordinates keep a huge margin from the acceptance-window
    // edges, so boundary-tolerance questions cannot arise at this scale;
    // walk the internal coordinate across the whole window and check
    {
        const I128 margin = I128(1000000000000000);  // 1e15 units ~ 2e-4 in value
        I128 x = 0, c = 0;
        const I128 upper = F92 - F91;
        while (x <= 1000 * F91) {
            CHECK(c - (-F91) >= margin);
            CHECK(upper - c >= margin);
            if (c + F91 < upper) {
                x += F91;
                c += F91;
            } else {
                x += F92;
                c -= FibonacciGenerator::F90;
            }
        }
    }

    // the two strategies agree on the big window and on random sub-boxes
    CHECK(scan.window(Rat(1000)).raw() == walk.window(Rat(1000)).raw());
    Rng rng(47);
    for (int t = 0; t < 20; ++t) {
        Rat a = random_rat(rng, 900), b = random_rat(rng, 900);
        std::vector<Rat> lo{rat_min(a, b)}, hi{rat_max(a, b)};
        CHECK(scan.units_in_box(lo, hi) == walk.units_in_box(lo, hi));
    }
    // off-center box away from the origin
    CHECK(scan.units_in_box({Rat(517)}, {Rat(923)}) ==
          walk.units_in_box({Rat(517)}, {Rat(923)}));

    check_separation(w, Rat(1));
    Rng rng2(53);
    check_packing(scan, scan.window(Rat(50)), make_rat(81, 100), rng2);
}

TEST_CASE("planar cut-and-project product") {
    CutProject2dGenerator g;
    FibonacciGenerator axis;
    CHECK(g.dim() == 2);
    auto w = g.window(Rat(20));
    std::size_t n1 = axis.window(Rat(20)).size();
    CHECK(w.size() == n1 * n1);
    CHECK(g.count_in_closed_box(rats({-20, -20}), rats({20, 20})) == BigInt(n1 * n1));

    // membership factorizes: (x, y) in the product iff both axes admit it
    FinitePattern ax = axis.window(Rat(20));
    std::set<I128> axis_pts(ax.raw().begin(), ax.raw().end());
    for (std::size_t i = 0; i < w.size(); ++i) {
        CHECK(axis_pts.count(w.point(i)[0]) == 1);
        CHECK(axis_pts.count(w.point(i)[1]) == 1);
    }
    check_separation(g.window(Rat(10)), Rat(1));
}

TEST_CASE("nonminimal example: half grid, half integers") {
    NonminimalGenerator g;
    // closed box [-4.5, 4.5]
    auto units = g.units_in_box({make_rat(-9, 2)}, {make_rat(9, 2)});
    CHECK(units == std::vector<I128>({-4, -2, 0, 1, 2, 3, 4}));
    CHECK(g.count_in_closed_box({make_rat(-9, 2)}, {make_rat(9, 2)}) == 7);

    // counts agree with enumeration on random boxes
    Rng rng(61);
    for (int t = 0; t < 50; ++t) {
        Rat a = random_rat(rng, 40), b = random_rat(rng, 40);
        std::vector<Rat> lo{rat_min(a, b)}, hi{rat_max(a, b)};
        CHECK(g.count_in_closed_box(lo, hi) == BigInt(g.units_in_box(lo, hi).size()));
    }
    check_separation(g.window(Rat(30)), Rat(1));
    Rng rng2(67);
    check_packing(g, g.window(Rat(30)), Rat(1), rng2);
}

TEST_CASE("union composite") {
    // Z u (Z + 1/2) = (1/2) Z
    auto a = std::make_shared<LatticeGenerator>(1);
    auto b = std::make_shared<LatticeGenerator>(1, std::vector<Rat>{Rat(1)},
                                                std::vector<Rat>{make_rat(1, 2)});
    UnionGenerator u({a, b}, DeloneParams{make_rat(1, 2), make_rat(1, 4)});
    CHECK(u.quantum() == make_rat(1, 2));
    auto w = u.window(Rat(3));
    CHECK(w.size() == 13);
    CHECK(w.raw() == LatticeGenerator(1, {make_rat(1, 2)}, {Rat(0)}).window(Rat(3)).raw());

    // overlapping parts deduplicate: Z u 2Z = Z
    auto c = std::make_shared<LatticeGenerator>(1, std::vector<Rat>{Rat(2)},
                                                std::vector<Rat>{Rat(0)});
    UnionGenerator u2({a, c}, DeloneParams{Rat(1), make_rat(1, 2)});
    CHECK(u2.window(Rat(5)).size() == 11);
}

TEST_CASE("query consistency on nested boxes, all kinds") {
    std::vector<GenPtr> gens = {
        std::make_shared<LatticeGenerator>(2, std::vector<Rat>{make_rat(3, 4), Rat(1)},
                                           std::vector<Rat>{Rat(0), make_rat(1, 3)}),
        std::make_shared<PerturbedLatticeGenerator>(2, make_rat(1, 10), 3),
        std::make_shared<FibonacciGenerator>(),
        std::make_shared<FibonacciGenerator>(FibonacciGenerator::Strategy::IntervalWalk),
        std::make_shared<NonminimalGenerator>(),
        std::make_shared<GapSequenceGenerator>(GapSequenceGenerator::Rule::Block4k, 1, 2,
                                               500),
    };
    Rng rng(71);
    for (const auto& g : gens) {
        const int d = g->dim();
        for (int t = 0; t < 10; ++t) {
            std::vector<Rat> lo2(static_cast<std::size_t>(d)), hi2(static_cast<std::size_t>(d));
            std::vector<Rat> lo1(static_cast<std::size_t>(d)), hi1(static_cast<std::size_t>(d));
            for (int k = 0; k < d; ++k) {
                Rat a = random_rat(rng, 25), b = random_rat(rng, 25);
                lo2[std::size_t(k)] = rat_min(a, b);
                hi2[std::size_t(k)] = rat_max(a, b);
                // inner box: shrink both ends by random nonnegative amounts
                Rat s = rat_abs(random_rat(rng, 5)) / 3;
                Rat e = rat_abs(random_rat(rng, 5)) / 3;
                lo1[std::size_t(k)] = rat_min(lo2[std::size_t(k)] + s, hi2[std::size_t(k)]);
                hi1[std::size_t(k)] = rat_max(hi2[std::size_t(k)] - e, lo1[std::size_t(k)]);
            }
            check_nested_consistency(*g, lo2, hi2, lo1, hi1);
            // determinism: identical query, identical answer
            CHECK(g->units_in_box(lo2, hi2) == g->units_in_box(lo2, hi2));
        }
    }
}

TEST_CASE("generator metadata round trip fields") {
    FibonacciGenerator fib;
    CHECK(fib.kind() == "cut-and-project-1D");
    LatticeGenerator lat(2);
    CHECK(lat.kind() == "lattice");
    auto p = lat.params();
    CHECK(p[0].first == "d");
    CHECK(p[0].second == "2");
    PerturbedLatticeGenerator pert(1, make_rat(1, 8), 42);
    bool has_seed = false;
    for (auto& kv : pert.params()) {
        if (kv.first == "seed" && kv.second == "42") has_seed = true;
    }
    CHECK(has_seed);
}
