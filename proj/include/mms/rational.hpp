#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mms {

// All values in the library are exact rationals. Reduction and matching
// thresholds (v >= 1) are sharp inequalities; floating point would flip
// branches.
using Rational = mpq_class;
using Integer = mpz_class;

inline Rational rat(long num, long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    Rational r(num, den);
    r.canonicalize();
    return r;
}

// b^e for rational b, integer e (negative exponents allowed, b != 0).
inline Rational rat_pow(const Rational& base, long exp) {
    if (exp == 0) return Rational(1);
    bool neg = exp < 0;
    unsigned long k = neg ? static_cast<unsigned long>(-exp) : static_cast<unsigned long>(exp);
    Integer num, den;
    mpz_pow_ui(num.get_mpz_t(), base.get_num().get_mpz_t(), k);
    mpz_pow_ui(den.get_mpz_t(), base.get_den().get_mpz_t(), k);
    if (neg) {
        if (num == 0) throw std::domain_error("negative power of zero");
        std::swap(num, den);
    }
    Rational r(num, den);
    r.canonicalize();
    return r;
}

namespace detail {
inline Integer parse_integer(std::string s) {
    if (!s.empty() && s.front() == '+') s.erase(s.begin());
    if (s.empty()) throw std::invalid_argument("empty integer literal");
    Integer z;
    if (mpz_set_str(z.get_mpz_t(), s.c_str(), 10) != 0)
        throw std::invalid_argument("bad integer literal: " + s);
    return z;
}
}  // namespace detail

// Parses "p/q", integers, and plain decimals ("0.99" -> 99/100). Decimals are
// exact fractions over powers of ten; an optional e-exponent is honored.
inline Rational parse_rational(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw std::invalid_argument("empty rational literal");

    auto slash = s.find('/');
    if (slash != std::string::npos) {
        Integer num = detail::parse_integer(s.substr(0, slash));
        Integer den = detail::parse_integer(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator: " + text);
        Rational r(num, den);
        r.canonicalize();
        return r;
    }

    long exp10 = 0;
    auto epos = s.find_first_of("eE");
    if (epos != std::string::npos) {
        exp10 = std::stol(s.substr(epos + 1));
        s = s.substr(0, epos);
    }
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        exp10 -= static_cast<long>(s.size() - dot - 1);
        s = digits;
        if (s == "" || s == "-" || s == "+") s += "0";
    }
    Integer mant = detail::parse_integer(s);
    Rational r(mant);
    if (exp10 > 0)
        r *= rat_pow(Rational(10), exp10);
    else if (exp10 < 0)
        r /= rat_pow(Rational(10), -exp10);
    r.canonicalize();
    return r;
}

// Canonical text form: "p/q", or just "p" for integers.
inline std::string to_string(const Rational& r) {
    Rational c = r;
    c.canonicalize();
    if (c.get_den() == 1) return c.get_num().get_str();
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

// Fixed-point decimal rendering (round half away from zero).
inline std::string to_decimal_string(const Rational& r, int places = 6) {
    Integer scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(places));
    Rational scaled = r * Rational(scale);
    scaled.canonicalize();
    Integer den = scaled.get_den();
    Integer q, rem;
    mpz_fdiv_qr(q.get_mpz_t(), rem.get_mpz_t(), scaled.get_num().get_mpz_t(), den.get_mpz_t());
    // round: q + (rem*2 >= den)
    if (rem * 2 >= den) q += 1;
    bool neg = q < 0;
    Integer absq = abs(q);
    std::string digits = absq.get_str();
    if (static_cast<int>(digits.size()) <= places)
        digits.insert(0, static_cast<size_t>(places) + 1 - digits.size(), '0');
    digits.insert(digits.size() - static_cast<size_t>(places), ".");
    return (neg ? "-" : "") + digits;
}

inline double to_double(const Rational& r) { return r.get_d(); }

}  // namespace mms
