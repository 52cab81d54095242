#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dimer {

typedef boost::multiprecision::cpp_int Int;
typedef boost::multiprecision::cpp_rational Rational;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }
inline long double to_long_double(const Rational& q) { return q.convert_to<long double>(); }

// Accepts "p", "p/q" and decimal forms like "-1.5".
inline Rational rational_from_string(const std::string& s) {
    auto dot = s.find('.');
    if (dot == std::string::npos) return Rational(s);
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    size_t frac_len = s.size() - dot - 1;
    if (frac_len == 0 || digits.empty()) throw std::invalid_argument("bad rational: " + s);
    // strip leading zeros so the Int parser does not read octal
    bool neg = digits[0] == '-' || digits[0] == '+';
    size_t first = neg ? 1 : 0;
    size_t nz = digits.find_first_not_of('0', first);
    if (nz == std::string::npos) nz = digits.size() - 1;
    digits = digits.substr(0, first) + digits.substr(nz);
    Int den = 1;
    for (size_t i = 0; i < frac_len; ++i) den *= 10;
    return Rational(Int(digits), den);
}

inline std::string to_string(const Rational& q) { return q.str(); }

// Exact integer square root; throws if x is not a perfect square.
inline Int exact_isqrt(const Int& x) {
    if (x < 0) throw std::domain_error("exact_isqrt: negative");
    Int r = boost::multiprecision::sqrt(x);
    if (r * r != x) throw std::domain_error("exact_isqrt: not a perfect square");
    return r;
}

// Square root of a rational known to be a perfect square (both num and den).
inline Rational exact_sqrt(const Rational& q) {
    return Rational(exact_isqrt(numerator(q)), exact_isqrt(denominator(q)));
}

// Gaussian integer a + b*i with arbitrary precision parts.
struct GInt {
    Int re, im;
    GInt() : re(0), im(0) {}
    GInt(Int r) : re(std::move(r)), im(0) {}
    GInt(Int r, Int i) : re(std::move(r)), im(std::move(i)) {}

    bool is_zero() const { return re == 0 && im == 0; }
    GInt conj() const { return GInt(re, -im); }
    Int norm() const { return re * re + im * im; }

    GInt operator+(const GInt& o) const { return GInt(re + o.re, im + o.im); }
    GInt operator-(const GInt& o) const { return GInt(re - o.re, im - o.im); }
    GInt operator-() const { return GInt(-re, -im); }
    GInt operator*(const GInt& o) const {
        return GInt(re * o.re - im * o.im, re * o.im + im * o.re);
    }
    bool operator==(const GInt& o) const { return re == o.re && im == o.im; }
};

// Exact division in Z[i]; the quotient must be an exact Gaussian integer.
inline GInt gint_div_exact(const GInt& a, const GInt& b) {
    Int n = b.norm();
    if (n == 0) throw std::domain_error("gint_div_exact: divide by zero");
    GInt t = a * b.conj();
    if (t.re % n != 0 || t.im % n != 0)
        throw std::domain_error("gint_div_exact: not divisible");
    return GInt(t.re / n, t.im / n);
}

// Gaussian rational a + b*i.
struct GRat {
    Rational re, im;
    GRat() : re(0), im(0) {}
    GRat(Rational r) : re(std::move(r)), im(0) {}
    GRat(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
    GRat(int r) : re(r), im(0) {}

    bool is_zero() const { return re == 0 && im == 0; }
    bool is_real() const { return im == 0; }
    GRat conj() const { return GRat(re, -im); }
    Rational norm() const { return re * re + im * im; }

    GRat operator+(const GRat& o) const { return GRat(re + o.re, im + o.im); }
    GRat operator-(const GRat& o) const { return GRat(re - o.re, im - o.im); }
    GRat operator-() const { return GRat(-re, -im); }
    GRat operator*(const GRat& o) const {
        return GRat(re * o.re - im * o.im, re * o.im + im * o.re);
    }
    GRat operator/(const GRat& o) const {
        Rational n = o.norm();
        if (n == 0) throw std::domain_error("GRat: divide by zero");
        GRat t = *this * o.conj();
        return GRat(t.re / n, t.im / n);
    }
    GRat& operator+=(const GRat& o) { re += o.re; im += o.im; return *this; }
    GRat& operator-=(const GRat& o) { re -= o.re; im -= o.im; return *this; }
    GRat& operator*=(const GRat& o) { *this = *this * o; return *this; }
    bool operator==(const GRat& o) const { return re == o.re && im == o.im; }

    std::complex<double> to_complex() const {
        return { to_double(re), to_double(im) };
    }
};

// i^k for k mod 4; edge phases live in {1, i, -1, -i}.
inline GRat unit_phase(int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return GRat(Rational(1), Rational(0));
        case 1: return GRat(Rational(0), Rational(1));
        case 2: return GRat(Rational(-1), Rational(0));
        default: return GRat(Rational(0), Rational(-1));
    }
}

// Phase exponent of a Gaussian unit, or -1 if g is not one of {1,i,-1,-i}.
inline int phase_exponent(const GRat& g) {
    if (g == unit_phase(0)) return 0;
    if (g == unit_phase(1)) return 1;
    if (g == unit_phase(2)) return 2;
    if (g == unit_phase(3)) return 3;
    return -1;
}

inline Rational rational_pow(Rational base, long e) {
    if (e < 0) { base = Rational(denominator(base), numerator(base)); e = -e; }
    Rational r(1);
    while (e) {
        if (e & 1) r *= base;
        base *= base;
        e >>= 1;
    }
    return r;
}

inline GRat grat_pow(GRat base, long e) {
    if (e < 0) { base = GRat(1) / base; e = -e; }
    GRat r(1);
    while (e) {
        if (e & 1) r *= base;
        base *= base;
        e >>= 1;
    }
    return r;
}

} // namespace dimer
