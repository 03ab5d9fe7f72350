#pragma once
// Exact arithmetic building blocks shared by every module: arbitrary-precision
// rationals, 128-bit integers with overflow-checked helpers, floor/ceil on
// rationals, and deterministic hashing / random numbers.  Everything here is
// value-semantic and thread-safe.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace delone {

using I128 = __int128;
using U128 = unsigned __int128;
using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

[[noreturn]] inline void fail(const std::string& msg) {
    throw std::runtime_error(msg);
}

inline void require(bool ok, const std::string& msg) {
    if (!ok) fail(msg);
}

// ---------------------------------------------------------------- 128-bit ---

inline I128 i128_abs(I128 a) { return a < 0 ? -a : a; }

// Overflow-checked arithmetic.  Coordinates of every pattern this library
// builds fit comfortably in 128 bits; an overflow therefore signals a logic
// error or an out-of-contract input, and we stop loudly instead of wrapping.
inline I128 checked_add(I128 a, I128 b) {
    I128 r;
    if (__builtin_add_overflow(a, b, &r)) fail("i128 add overflow");
    return r;
}

inline I128 checked_sub(I128 a, I128 b) {
    I128 r;
    if (__builtin_sub_overflow(a, b, &r)) fail("i128 sub overflow");
    return r;
}

inline I128 checked_mul(I128 a, I128 b) {
    I128 r;
    if (__builtin_mul_overflow(a, b, &r)) fail("i128 mul overflow");
    return r;
}

// Floor division with the sign convention of mathematics, not of C.
inline I128 div_floor(I128 a, I128 b) {
    require(b > 0, "div_floor needs positive divisor");
    I128 q = a / b;
    if (a % b != 0 && a < 0) --q;
    return q;
}

inline I128 div_ceil(I128 a, I128 b) {
    require(b > 0, "div_ceil needs positive divisor");
    I128 q = a / b;
    if (a % b != 0 && a > 0) ++q;
    return q;
}

inline std::string i128_to_string(I128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    U128 u = neg ? U128(-(v + 1)) + 1 : U128(v);
    std::string s;
    while (u > 0) {
        s.push_back(char('0' + int(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    return std::string(s.rbegin(), s.rend());
}

inline I128 i128_from_string(const std::string& s) {
    require(!s.empty(), "empty integer literal");
    std::size_t i = 0;
    bool neg = false;
    if (s[0] == '-' || s[0] == '+') {
        neg = (s[0] == '-');
        i = 1;
    }
    require(i < s.size(), "sign without digits");
    // Accumulate negatively: the most negative value has no positive mirror.
    I128 v = 0;
    for (; i < s.size(); ++i) {
        require(s[i] >= '0' && s[i] <= '9', "bad digit in integer literal");
        v = checked_sub(checked_mul(v, 10), s[i] - '0');
    }
    return neg ? v : checked_sub(0, v);
}

// --------------------------------------------------------------- rationals ---

inline BigInt big_of_i128(I128 v) {
    // cpp_int converts from __int128 natively on this toolchain.
    return BigInt(v);
}

inline I128 i128_of_big(const BigInt& v) {
    static const BigInt lo = -(BigInt(1) << 127), hi = (BigInt(1) << 127) - 1;
    require(v >= lo && v <= hi, "value does not fit in 128 bits");
    return static_cast<I128>(v);
}

inline Rat rat_of_i128(I128 v) { return Rat(big_of_i128(v)); }

inline Rat make_rat(I128 num, I128 den) {
    require(den != 0, "zero denominator");
    return Rat(big_of_i128(num), big_of_i128(den));
}

// floor(r) as a big integer (exact for any rational).
inline BigInt rat_floor(const Rat& r) {
    BigInt q = numerator(r) / denominator(r);
    if (numerator(r) < 0 && q * denominator(r) != numerator(r)) --q;
    return q;
}

inline BigInt rat_ceil(const Rat& r) { return -rat_floor(-r); }

inline I128 rat_floor_i128(const Rat& r) { return i128_of_big(rat_floor(r)); }
inline I128 rat_ceil_i128(const Rat& r) { return i128_of_big(rat_ceil(r)); }

inline bool rat_is_integer(const Rat& r) { return denominator(r) == 1; }

// gcd of two nonnegative rationals: the largest rational dividing both.
// gcd(a/b, c/d) = gcd(a*d, c*b) / (b*d).  gcd(x, 0) = x.
inline Rat rat_gcd(const Rat& x, const Rat& y) {
    if (x == 0) return y < 0 ? Rat(-y) : y;
    if (y == 0) return x < 0 ? Rat(-x) : x;
    BigInt a = numerator(x), b = denominator(x);
    BigInt c = numerator(y), d = denominator(y);
    if (a < 0) a = -a;
    if (c < 0) c = -c;
    return Rat(gcd(a * d, c * b), b * d);
}

inline Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

inline Rat rat_min(const Rat& a, const Rat& b) { return a < b ? a : b; }
inline Rat rat_max(const Rat& a, const Rat& b) { return a > b ? a : b; }

// Serialized form used in every file format: "p" or "p/q", q > 0, reduced.
inline std::string rat_to_string(const Rat& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) s += "/" + denominator(r).str();
    return s;
}

inline Rat rat_from_string(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rat(BigInt(s));
        BigInt num(s.substr(0, slash));
        BigInt den(s.substr(slash + 1));
        require(den != 0, "zero denominator in rational literal");
        return Rat(num, den);
    } catch (const std::exception&) {
        fail("cannot parse rational '" + s + "'");
    }
}

inline double rat_to_double(const Rat& r) { return r.convert_to<double>(); }

// ------------------------------------------------- deterministic randomness ---

// splitmix64: the standard 64-bit finalizing mix.  Used both for seeding and
// as a stateless per-cell hash so that generators are pure functions of
// (seed, location), independent of query order.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    return mix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

// Minimal xoshiro256** generator.  The standard library's engines are
// portable but its distributions are not; we need byte-identical output for
// a fixed seed, so both the engine and the draw helpers live here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        for (int i = 0; i < 4; ++i) s_[i] = mix64(seed + std::uint64_t(i) * 0xa0761d6478bd642fULL);
        for (int i = 0; i < 8; ++i) next();
    }

    std::uint64_t next() {
        auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
        std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform draw from [0, n) by rejection; exact and portable.
    std::uint64_t below(std::uint64_t n) {
        require(n > 0, "Rng::below(0)");
        std::uint64_t limit = ~std::uint64_t(0) - ~std::uint64_t(0) % n;
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % n;
    }

    std::int64_t range(std::int64_t lo, std::int64_t hi) {  // inclusive bounds
        require(lo <= hi, "Rng::range empty");
        return lo + std::int64_t(below(std::uint64_t(hi - lo) + 1));
    }

    double unit() {  // [0, 1) with 53 random bits
        return double(next() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t s_[4];
};

}  // namespace delone
