#pragma once
// Generators of finite restrictions of infinite Delone sets: lattices,
// perturbed lattices, cut-and-project (Fibonacci) chains and their 2D
// product, 1D gap-sequence sets (mirrored through 0), the three-class
// example (-2N) u {0} u N, unions, and translations.
//
// Every generator declares one rational quantum and yields coordinates as
// 128-bit integer multiples of it, so downstream predicates stay exact.
// Queries are pure functions of the construction parameters (and seed).

#include "core.hpp"
#include "pattern.hpp"

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace delone {

struct DeloneParams {
    Rat r;  // separation: distinct points are >= r apart (sup norm)
    Rat R;  // packing: every closed ball of radius R meets the set
};

using ParamList = std::vector<std::pair<std::string, std::string>>;

class DeloneGenerator {
public:
    virtual ~DeloneGenerator() = default;

    virtual int dim() const = 0;
    virtual Rat quantum() const = 0;
    virtual DeloneParams delone_params() const = 0;

    // Serialization hooks: a kind tag plus flat string parameters, enough to
    // reconstruct the generator exactly.
    virtual std::string kind() const = 0;
    virtual ParamList params() const = 0;

    // All points of the set inside the closed box prod_k [lo_k, hi_k],
    // as flat quantum-unit coordinates (stride d, any order).
    virtual std::vector<I128> units_in_box(const std::vector<Rat>& lo,
                                           const std::vector<Rat>& hi) const = 0;

    // Point count in the closed box; overridden where a closed form or a
    // binary search beats materializing the points.
    virtual BigInt count_in_closed_box(const std::vector<Rat>& lo,
                                       const std::vector<Rat>& hi) const {
        return BigInt(units_in_box(lo, hi).size() / std::size_t(dim()));
    }

    // Pattern faithfully representing the set on the closed ball B(0, W).
    FinitePattern window(const Rat& W) const {
        require(W >= 0, "window: negative radius");
        std::vector<Rat> lo(static_cast<std::size_t>(dim()), -W);
        std::vector<Rat> hi(static_cast<std::size_t>(dim()), W);
        return FinitePattern(dim(), quantum(), W, units_in_box(lo, hi));
    }

    // Points in the open sup-norm ball B(c, rho) (the Box semantics).
    std::vector<RatPoint> query_open(const RatPoint& c, const Rat& rho) const {
        require(c.size() == std::size_t(dim()), "query: dimension mismatch");
        require(rho > 0, "query: radius must be positive");
        std::vector<Rat> lo(c.size()), hi(c.size());
        for (std::size_t k = 0; k < c.size(); ++k) {
            lo[k] = c[k] - rho;
            hi[k] = c[k] + rho;
        }
        std::vector<I128> units = units_in_box(lo, hi);
        std::vector<RatPoint> out;
        const int d = dim();
        Rat q = quantum();
        for (std::size_t i = 0; i * std::size_t(d) < units.size(); ++i) {
            RatPoint x(static_cast<std::size_t>(d));
            bool inside = true;
            for (int k = 0; k < d && inside; ++k) {
                x[std::size_t(k)] = rat_of_i128(units[i * std::size_t(d) + std::size_t(k)]) * q;
                if (rat_abs(x[std::size_t(k)] - c[std::size_t(k)]) >= rho) inside = false;
            }
            if (inside) out.push_back(std::move(x));
        }
        return out;
    }
};

using GenPtr = std::shared_ptr<const DeloneGenerator>;

// ------------------------------------------------------------------ lattice

// Diagonal lattice: { (a_1 n_1 + t_1, ..., a_d n_d + t_d) : n in Z^d }.
class LatticeGenerator final : public DeloneGenerator {
public:
    LatticeGenerator(int d, std::vector<Rat> scales = {}, std::vector<Rat> offset = {})
        : d_(d), scales_(std::move(scales)), offset_(std::move(offset)) {
        require(d_ >= 1, "lattice: dimension must be positive");
        if (scales_.empty()) scales_.assign(static_cast<std::size_t>(d_), Rat(1));
        if (offset_.empty()) offset_.assign(static_cast<std::size_t>(d_), Rat(0));
        require(scales_.size() == std::size_t(d_) && offset_.size() == std::size_t(d_),
                "lattice: parameter arity");
        q_ = 0;
        for (int k = 0; k < d_; ++k) {
            require(scales_[std::size_t(k)] > 0, "lattice: scales must be positive");
            q_ = rat_gcd(q_, scales_[std::size_t(k)]);
            q_ = rat_gcd(q_, offset_[std::size_t(k)]);
        }
    }

    int dim() const override { return d_; }
    Rat quantum() const override { return q_; }

    DeloneParams delone_params() const override {
        Rat rmin = scales_[0], rmax = scales_[0];
        for (const Rat& a : scales_) {
            rmin = rat_min(rmin, a);
            rmax = rat_max(rmax, a);
        }
        return DeloneParams{rmin, rmax / 2};
    }

    std::string kind() const override { return "lattice"; }

    ParamList params() const override {
        ParamList p{{"d", std::to_string(d_)}};
        for (int k = 0; k < d_; ++k) {
            p.emplace_back("scale" + std::to_string(k), rat_to_string(scales_[std::size_t(k)]));
            p.emplace_back("offset" + std::to_string(k), rat_to_string(offset_[std::size_t(k)]));
        }
        return p;
    }

    std::vector<I128> units_in_box(const std::vector<Rat>& lo,
                                   const std::vector<Rat>& hi) const override {
        std::vector<std::vector<I128>> axis(static_cast<std::size_t>(d_));
        for (int k = 0; k < d_; ++k) {
            const Rat& a = scales_[std::size_t(k)];
            const Rat& t = offset_[std::size_t(k)];
            I128 nlo = rat_ceil_i128((lo[std::size_t(k)] - t) / a);
            I128 nhi = rat_floor_i128((hi[std::size_t(k)] - t) / a);
            Rat aq = a / q_, tq = t / q_;
            I128 au = rat_floor_i128(aq), tu = rat_floor_i128(tq);
            for (I128 n = nlo; n <= nhi; ++n) {
                axis[std::size_t(k)].push_back(checked_add(checked_mul(n, au), tu));
            }
        }
        std::vector<I128> out;
        std::vector<std::size_t> idx(static_cast<std::size_t>(d_), 0);
        for (auto& ax : axis) {
            if (ax.empty()) return {};
        }
        while (true) {
            for (int k = 0; k < d_; ++k) out.push_back(axis[std::size_t(k)][idx[std::size_t(k)]]);
            int k = 0;
            while (k < d_ && idx[std::size_t(k)] + 1 == axis[std::size_t(k)].size()) {
                idx[std::size_t(k++)] = 0;
            }
            if (k == d_) break;
            ++idx[std::size_t(k)];
        }
        return out;
    }

    BigInt count_in_closed_box(const std::vector<Rat>& lo,
                               const std::vector<Rat>& hi) const override {
        BigInt c = 1;
        for (int k = 0; k < d_; ++k) {
            const Rat& a = scales_[std::size_t(k)];
            const Rat& t = offset_[std::size_t(k)];
            BigInt n = rat_floor((hi[std::size_t(k)] - t) / a) - rat_ceil((lo[std::size_t(k)] - t) / a) + 1;
            if (n <= 0) return BigInt(0);
            c *= n;
        }
        return c;
    }

private:
    int d_;
    std::vector<Rat> scales_, offset_;
    Rat q_;
};

// -------------------------------------------------------- perturbed lattice

// Z^d with every point displaced by an amplitude-eta dyadic offset that is a
// pure hash of (seed, cell, axis): deterministic, order-independent, exact.
class PerturbedLatticeGenerator final : public DeloneGenerator {
public:
    PerturbedLatticeGenerator(int d, Rat amplitude, std::uint64_t seed)
        : d_(d), eta_(std::move(amplitude)), seed_(seed) {
        require(d_ >= 1, "perturbed: dimension must be positive");
        require(eta_ >= 0 && eta_ < make_rat(1, 2), "perturbed: amplitude in [0, 1/2)");
        // coordinates are n + eta * j / 4096 with j integer, so everything is
        // a multiple of gcd(1, eta/4096)
        q_ = rat_gcd(Rat(1), eta_ == 0 ? Rat(1) : eta_ / 4096);
    }

    int dim() const override { return d_; }
    Rat quantum() const override { return q_; }

    DeloneParams delone_params() const override {
        return DeloneParams{Rat(1) - 2 * eta_, make_rat(1, 2) + eta_};
    }

    std::string kind() const override { return "perturbed-lattice"; }

    ParamList params() const override {
        return {{"d", std::to_string(d_)},
                {"amplitude", rat_to_string(eta_)},
                {"seed", std::to_string(seed_)}};
    }

    // displacement numerator j in [-4096, 4096] for (cell, axis)
    long long displacement_units(const std::vector<I128>& cell, int axis) const {
        std::uint64_t h = mix64(seed_ ^ 0x9d312c7be1f6a2b1ULL);
        h = hash_combine(h, std::uint64_t(axis) + 1);
        for (I128 c : cell) h = hash_combine(h, std::uint64_t(static_cast<std::int64_t>(c)));
        // modulo bias ~ 8193/2^64: irrelevant for a test-corpus perturbation
        return (long long)(h % 8193) - 4096;
    }

    std::vector<I128> units_in_box(const std::vector<Rat>& lo,
                                   const std::vector<Rat>& hi) const override {
        // candidate cells one step beyond the box absorb any displacement
        std::vector<I128> nlo(static_cast<std::size_t>(d_)), nhi(static_cast<std::size_t>(d_));
        for (int k = 0; k < d_; ++k) {
            nlo[std::size_t(k)] = checked_sub(rat_ceil_i128(lo[std::size_t(k)]), 1);
            nhi[std::size_t(k)] = checked_add(rat_floor_i128(hi[std::size_t(k)]), 1);
            if (nlo[std::size_t(k)] > nhi[std::size_t(k)]) return {};
        }
        Rat unit = eta_ == 0 ? Rat(0) : eta_ / 4096;      // value of one j step
        I128 per_one = rat_floor_i128(Rat(1) / q_);       // units per lattice step
        I128 per_j = eta_ == 0 ? 0 : rat_floor_i128(unit / q_);
        std::vector<I128> out;
        std::vector<I128> cell = nlo;
        while (true) {
            bool inside = true;
            std::vector<I128> pt(static_cast<std::size_t>(d_));
            for (int k = 0; k < d_ && inside; ++k) {
                long long j = eta_ == 0 ? 0 : displacement_units(cell, k);
                I128 u = checked_add(checked_mul(cell[std::size_t(k)], per_one),
                                     checked_mul(I128(j), per_j));
                Rat x = rat_of_i128(u) * q_;
                if (x < lo[std::size_t(k)] || x > hi[std::size_t(k)]) inside = false;
                pt[std::size_t(k)] = u;
            }
            if (inside) out.insert(out.end(), pt.begin(), pt.end());
            int k = 0;
            while (k < d_ && cell[std::size_t(k)] == nhi[std::size_t(k)]) {
                cell[std::size_t(k)] = nlo[std::size_t(k)];
                ++k;
            }
            if (k == d_) break;
            ++cell[std::size_t(k)];
        }
        return out;
    }

private:
    int d_;
    Rat eta_;
    std::uint64_t seed_;
    Rat q_;
};

// ------------------------------------------------------------- gap sequence

// 1D set from an infinite binary letter sequence: right side is the prefix
// sum of per-letter gaps starting at 0, left side mirrors it.  Positions are
// materialized up to a construction-time extent; queries beyond it fail
// loudly instead of answering wrong.
class GapSequenceGenerator final : public DeloneGenerator {
public:
    enum class Rule { ConstantA, ConstantB, Alternating, Block4k, Explicit };

    GapSequenceGenerator(Rule rule, I128 gap_a, I128 gap_b, I128 max_pos,
                         std::vector<std::uint8_t> letters = {})
        : rule_(rule), ga_(gap_a), gb_(gap_b), max_pos_(max_pos),
          letters_(std::move(letters)) {
        require(ga_ > 0 && gb_ > 0, "gap sequence: gaps must be positive");
        require(max_pos_ >= 1, "gap sequence: extent must be positive");
        long long x = 0;
        positions_.push_back(0);
        bool used_a = false, used_b = false;
        for (std::size_t i = 0; x <= (long long)max_pos_; ++i) {
            int letter = letter_at(i);
            if (letter < 0) break;  // explicit rule exhausted
            (letter == 0 ? used_a : used_b) = true;
            x += (long long)(letter == 0 ? ga_ : gb_);
            positions_.push_back(x);
        }
        faithful_ = positions_.back();  // may exceed max_pos_; that is fine
        I128 gmin = used_a ? (used_b ? std::min(ga_, gb_) : ga_) : gb_;
        I128 gmax = used_a ? (used_b ? std::max(ga_, gb_) : ga_) : gb_;
        r_ = rat_of_i128(gmin);
        R_ = rat_of_i128(gmax) / 2;
    }

    int dim() const override { return 1; }
    Rat quantum() const override { return Rat(1); }
    DeloneParams delone_params() const override { return DeloneParams{r_, R_}; }

    std::string kind() const override { return "gap-sequence"; }

    ParamList params() const override {
        const char* name = "";
        switch (rule_) {
            case Rule::ConstantA: name = "constant-a"; break;
            case Rule::ConstantB: name = "constant-b"; break;
            case Rule::Alternating: name = "alternating"; break;
            case Rule::Block4k: name = "block4k"; break;
            case Rule::Explicit: name = "explicit"; break;
        }
        return {{"rule", name},
                {"gap_a", i128_to_string(ga_)},
                {"gap_b", i128_to_string(gb_)},
                {"max_pos", i128_to_string(max_pos_)}};
    }

    std::vector<I128> units_in_box(const std::vector<Rat>& lo,
                                   const std::vector<Rat>& hi) const override {
        check_extent(lo[0], hi[0]);
        long long a = (long long)rat_ceil_i128(lo[0]);
        long long b = (long long)rat_floor_i128(hi[0]);
        std::vector<I128> out;
        // mirrored negative side, ascending
        if (a < 0) {
            long long from = std::max(1ll, -b);      // mirror of [-b, -a]
            long long to = -a;
            auto it0 = std::lower_bound(positions_.begin(), positions_.end(), from);
            auto it1 = std::upper_bound(positions_.begin(), positions_.end(), to);
            for (auto it = it1; it != it0;) {
                --it;
                out.push_back(-I128(*it));
            }
        }
        if (b >= 0) {
            long long from = std::max(0ll, a);
            auto it0 = std::lower_bound(positions_.begin(), positions_.end(), from);
            auto it1 = std::upper_bound(positions_.begin(), positions_.end(), b);
            for (auto it = it0; it != it1; ++it) out.push_back(I128(*it));
        }
        return out;
    }

    BigInt count_in_closed_box(const std::vector<Rat>& lo,
                               const std::vector<Rat>& hi) const override {
        check_extent(lo[0], hi[0]);
        long long a = (long long)rat_ceil_i128(lo[0]);
        long long b = (long long)rat_floor_i128(hi[0]);
        if (a > b) return BigInt(0);
        long long c = 0;
        if (a < 0) {
            long long from = std::max(1ll, -b), to = -a;
            if (from <= to) {
                c += std::upper_bound(positions_.begin(), positions_.end(), to) -
                     std::lower_bound(positions_.begin(), positions_.end(), from);
            }
        }
        if (b >= 0) {
            long long from = std::max(0ll, a);
            c += std::upper_bound(positions_.begin(), positions_.end(), b) -
                 std::lower_bound(positions_.begin(), positions_.end(), from);
        }
        return BigInt(c);
    }

    // Largest radius this generator can answer about.
    I128 faithful_extent() const { return faithful_; }

private:
    Rule rule_;
    I128 ga_, gb_, max_pos_;
    std::vector<std::uint8_t> letters_;   // for Rule::Explicit
    std::vector<long long> positions_;    // right-side points, ascending from 0
    I128 faithful_ = 0;
    Rat r_, R_;

    void check_extent(const Rat& lo, const Rat& hi) const {
        require(rat_abs(lo) <= rat_of_i128(faithful_) &&
                    rat_abs(hi) <= rat_of_i128(faithful_),
                "gap sequence: query exceeds materialized extent");
    }

    // 0 = A, 1 = B, -1 = exhausted (explicit rule only)
    int letter_at(std::size_t i) const {
        switch (rule_) {
            case Rule::ConstantA: return 0;
            case Rule::ConstantB: return 1;
            case Rule::Alternating: return int(i % 2);
            case Rule::Block4k: {
                // block j has length 4^j; letter alternates starting at A
                unsigned long long rem = i, len = 1;
                for (int j = 0;; ++j) {
                    if (rem < len) return j % 2;
                    rem -= len;
                    len *= 4;
                }
            }
            case Rule::Explicit:
                return i < letters_.size() ? int(letters_[i]) : -1;
        }
        return -1;
    }
};

// ------------------------------------------------- cut-and-project Fibonacci

// The golden-ratio model set { m + nP : m + n(1-P) in [-1, P-1) } with the
// slope P = F_92/F_91 fixed at construction (error vs the golden ratio about
// 4e-39, far below any tolerance used here).  Two independent enumeration
// strategies; both work in integer units over the denominator F_91.
class FibonacciGenerator final : public DeloneGenerator {
public:
    enum class Strategy { StripScan, IntervalWalk };

    static constexpr std::int64_t F90 = 2880067194370816120;
    static constexpr std::int64_t F91 = 4660046610375530309;
    static constexpr std::int64_t F92 = 7540113804746346429;

    explicit FibonacciGenerator(Strategy s = Strategy::StripScan) : strategy_(s) {}

    int dim() const override { return 1; }
    Rat quantum() const override { return make_rat(1, F91); }

    DeloneParams delone_params() const override {
        return DeloneParams{Rat(1), make_rat(81, 100)};  // gaps are 1 and P < 1.62
    }

    std::string kind() const override { return "cut-and-project-1D"; }

    ParamList params() const override {
        return {{"slope", rat_to_string(make_rat(F92, F91))},
                {"window", "[-1, slope-1)"},
                {"strategy", strategy_ == Strategy::StripScan ? "strip-scan" : "interval-walk"}};
    }

    std::vector<I128> units_in_box(const std::vector<Rat>& lo,
                                   const std::vector<Rat>& hi) const override {
        require(rat_abs(lo[0]) <= Rat(10000000) && rat_abs(hi[0]) <= Rat(10000000),
                "fibonacci: query radius beyond supported extent");
        if (lo[0] > hi[0]) return {};
        I128 lo_u = rat_ceil_i128(lo[0] * F91);   // x >= lo  <=>  units >= ceil
        I128 hi_u = rat_floor_i128(hi[0] * F91);
        std::vector<I128> out = strategy_ == Strategy::StripScan
                                    ? scan_units(lo_u, hi_u)
                                    : walk_units(lo_u, hi_u);
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    Strategy strategy_;

    // internal coordinate of (m, n) in units of 1/F91: m*F91 - n*F90
    // window: -F91 <= c_u < F92 - F91
    static I128 internal_units(I128 m, I128 n) {
        return checked_sub(checked_mul(m, F91), checked_mul(n, F90));
    }
    static I128 physical_units(I128 m, I128 n) {
        return checked_add(checked_mul(m, F91), checked_mul(n, F92));
    }

    std::vector<I128> scan_units(I128 lo_u, I128 hi_u) const {
        // physical x ranges over [n(2P-1) - 1, n(2P-1) + P - 1); solving for
        // the n whose slots can reach [lo, hi]:
        //   x >= lo needs n(2P-1) + P - 1 >= lo; x <= hi needs n(2P-1) <= hi+1.
        // In units: n*(2F92 - F91) >= lo_u - F92 + F91 and <= hi_u + F91.
        I128 span = 2 * I128(F92) - F91;
        I128 n_lo = div_floor(checked_sub(lo_u, I128(F92) - F91), span);
        I128 n_hi = div_ceil(checked_add(hi_u, F91), span);
        std::vector<I128> out;
        for (I128 n = n_lo; n <= n_hi; ++n) {
            // admissible m: -F91 <= m*F91 - n*F90 < F92 - F91
            I128 m_lo = div_ceil(checked_sub(checked_mul(n, F90), F91), F91);
            I128 m_hi = div_ceil(checked_add(checked_mul(n, F90), I128(F92) - F91), F91) - 1;
            for (I128 m = m_lo; m <= m_hi; ++m) {
                I128 x = physical_units(m, n);
                if (x >= lo_u && x <= hi_u) out.push_back(x);
            }
        }
        return out;
    }

    std::vector<I128> walk_units(I128 lo_u, I128 hi_u) const {
        std::vector<I128> out;
        // walk right from the origin (internal coordinate 0)
        I128 x = 0, c = 0;
        const I128 upper = I128(F92) - F91;   // window right edge (exclusive)
        while (x <= hi_u) {
            if (x >= lo_u) out.push_back(x);
            // successor gap: 1 if c + F91 still lies in the window, else P
            if (c + F91 < upper) {
                x += F91;
                c += F91;
            } else {
                x += F92;
                c -= F90;
            }
        }
        // walk left
        x = 0;
        c = 0;
        while (true) {
            // predecessor gap: 1 if c - F91 >= -F91 (i.e. c >= 0), else P
            if (c >= 0) {
                x -= F91;
                c -= F91;
            } else {
                x -= F92;
                c += F90;
            }
            if (x < lo_u) break;
            if (x <= hi_u) out.push_back(x);
        }
        return out;
    }
};

// Product of two golden-ratio chains: a genuine planar cut-and-project set
// (total space R^4, window a product interval).
class CutProject2dGenerator final : public DeloneGenerator {
public:
    explicit CutProject2dGenerator(
        FibonacciGenerator::Strategy s = FibonacciGenerator::Strategy::StripScan)
        : axis_(s) {}

    int dim() const override { return 2; }
    Rat quantum() const override { return axis_.quantum(); }
    DeloneParams delone_params() const override { return axis_.delone_params(); }
    std::string kind() const override { return "cut-and-project-2D"; }

    ParamList params() const override {
        ParamList p = axis_.params();
        p.emplace_back("structure", "product of two golden chains");
        return p;
    }

    std::vector<I128> units_in_box(const std::vector<Rat>& lo,
                                   const std::vector<Rat>& hi) const override {
        std::vector<I128> xs = axis_.units_in_box({lo[0]}, {hi[0]});
        std::vector<I128> ys = axis_.units_in_box({lo[1]}, {hi[1]});
        std::vector<I128> out;
        out.reserve(xs.size() * ys.size() * 2);
        for (I128 x : xs) {
            for (I128 y : ys) {
                out.push_back(x);
                out.push_back(y);
            }
        }
        return out;
    }

    BigInt count_in_closed_box(const std::vector<Rat>& lo,
                               const std::vector<Rat>& hi) const override {
        BigInt nx = axis_.count_in_closed_box({lo[0]}, {hi[0]});
        BigInt ny = axis_.count_in_closed_box({lo[1]}, {hi[1]});
        return nx * ny;
    }

private:
    FibonacciGenerator axis_;
};

// ------------------------------------------------------- nonminimal example

// (-2N) u {0} u N: looks like 2Z far left, like Z far right.
class NonminimalGenerator final : public DeloneGenerator {
public:
    int dim() const override { return 1; }
    Rat quantum() const override { return Rat(1); }
    DeloneParams delone_params() const override { return DeloneParams{Rat(1), Rat(1)}; }
    std::string kind() const override { return "nonminimal-example"; }
    ParamList params() const override { return {}; }

    std::vector<I128> units_in_box(const std::vector<Rat>& lo,
                                   const std::vector<Rat>& hi) const override {
        I128 a = rat_ceil_i128(lo[0]);
        I128 b = rat_floor_i128(hi[0]);
        std::vector<I128> out;
        for (I128 x = a; x <= b; ++x) {
            if (x >= 0 || x % 2 == 0) out.push_back(x);
        }
        return out;
    }

    BigInt count_in_closed_box(const std::vector<Rat>& lo,
                               const std::vector<Rat>& hi) const override {
        BigInt a = rat_ceil(lo[0]);
        BigInt b = rat_floor(hi[0]);
        if (a > b) return BigInt(0);
        BigInt c = 0;
        if (b >= 0) c += b - (a > 0 ? a : BigInt(0)) + 1;              // right integers
        if (a < 0) {
            BigInt lo_neg = a, hi_neg = (b < -2 ? b : BigInt(-2));
            if (lo_neg <= hi_neg) {
                // even integers in [lo_neg, hi_neg]
                BigInt first = lo_neg + ((lo_neg % 2 != 0) ? BigInt(1) : BigInt(0));
                if (first <= hi_neg) {
                    BigInt last = hi_neg - ((hi_neg % 2 != 0) ? BigInt(1) : BigInt(0));
                    c += (last - first) / 2 + 1;
                }
            }
        }
        return c;
    }
};

// ------------------------------------------------------- union / translate

class UnionGenerator final : public DeloneGenerator {
public:
    UnionGenerator(std::vector<GenPtr> parts, DeloneParams declared)
        : parts_(std::move(parts)), declared_(std::move(declared)) {
        require(!parts_.empty(), "union: needs at least one part");
        d_ = parts_[0]->dim();
        q_ = 0;
        for (const auto& g : parts_) {
            require(g->dim() == d_, "union: mixed dimensions");
            q_ = rat_gcd(q_, g->quantum());
        }
    }

    int dim() const override { return d_; }
    Rat quantum() const override { return q_; }
    DeloneParams delone_params() const override { return declared_; }
    std::string kind() const override { return "union-composite"; }

    ParamList params() const override {
        ParamList p;
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            p.emplace_back("part" + std::to_string(i), parts_[i]->kind());
        }
        p.emplace_back("r", rat_to_string(declared_.r));
        p.emplace_back("R", rat_to_string(declared_.R));
        return p;
    }

    std::vector<I128> units_in_box(const std::vector<Rat>& lo,
                                   const std::vector<Rat>& hi) const override {
        std::vector<I128> out;
        for (const auto& g : parts_) {
            std::vector<I128> part = g->units_in_box(lo, hi);
            BigInt f = rat_floor(g->quantum() / q_);
            require(Rat(f) == g->quantum() / q_, "union: quantum mismatch");
            for (I128 u : part) out.push_back(i128_of_big(big_of_i128(u) * f));
        }
        // deduplicate via a throwaway pattern normalization
        FinitePattern p(d_, q_, Rat(0), std::move(out));
        return p.raw();
    }

private:
    std::vector<GenPtr> parts_;
    DeloneParams declared_;
    int d_;
    Rat q_;
};

class TranslateGenerator final : public DeloneGenerator {
public:
    TranslateGenerator(GenPtr inner, RatPoint v) : inner_(std::move(inner)), v_(std::move(v)) {
        require(v_.size() == std::size_t(inner_->dim()), "translate: arity");
        q_ = inner_->quantum();
        for (const Rat& c : v_) q_ = rat_gcd(q_, rat_abs(c));
    }

    int dim() const override { return inner_->dim(); }
    Rat quantum() const override { return q_; }
    DeloneParams delone_params() const override { return inner_->delone_params(); }
    std::string kind() const override { return "translate:" + inner_->kind(); }

    ParamList params() const override {
        ParamList p = inner_->params();
        for (std::size_t k = 0; k < v_.size(); ++k) {
            p.emplace_back("shift" + std::to_string(k), rat_to_string(v_[k]));
        }
        return p;
    }

    std::vector<I128> units_in_box(const std::vector<Rat>& lo,
                                   const std::vector<Rat>& hi) const override {
        const int d = dim();
        std::vector<Rat> ilo(lo), ihi(hi);
        for (int k = 0; k < d; ++k) {
            ilo[std::size_t(k)] += v_[std::size_t(k)];
            ihi[std::size_t(k)] += v_[std::size_t(k)];
        }
        std::vector<I128> units = inner_->units_in_box(ilo, ihi);
        BigInt f = rat_floor(inner_->quantum() / q_);
        require(Rat(f) == inner_->quantum() / q_, "translate: quantum mismatch");
        std::vector<BigInt> shift_u(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            Rat s = v_[std::size_t(k)] / q_;
            shift_u[std::size_t(k)] = rat_floor(s);
            require(Rat(shift_u[std::size_t(k)]) == s, "translate: shift units");
        }
        for (std::size_t i = 0; i < units.size(); ++i) {
            int k = int(i % std::size_t(d));
            units[i] = i128_of_big(big_of_i128(units[i]) * f - shift_u[std::size_t(k)]);
        }
        return units;
    }

    BigInt count_in_closed_box(const std::vector<Rat>& lo,
                               const std::vector<Rat>& hi) const override {
        const int d = dim();
        std::vector<Rat> ilo(lo), ihi(hi);
        for (int k = 0; k < d; ++k) {
            ilo[std::size_t(k)] += v_[std::size_t(k)];
            ihi[std::size_t(k)] += v_[std::size_t(k)];
        }
        return inner_->count_in_closed_box(ilo, ihi);
    }

    const DeloneGenerator& inner() const { return *inner_; }
    const RatPoint& shift() const { return v_; }

private:
    GenPtr inner_;
    RatPoint v_;
    Rat q_;
};

inline GenPtr translate(GenPtr g, RatPoint v) {
    return std::make_shared<TranslateGenerator>(std::move(g), std::move(v));
}

}  // namespace delone
