#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

#include "latred/errors.hpp"

namespace latred {

using bigint = mpz_class;
using rat = mpq_class;
using rat_vec = std::vector<rat>;
using rat_mat = std::vector<rat_vec>;  // row major: m[i][j], i = coordinate

inline rat make_rat(long num, long den = 1) {
    rat q(num, den);
    q.canonicalize();
    return q;
}

// Exact: every finite double is a dyadic rational.
inline rat rat_of_double(double x) { return rat(x); }

inline double to_double(const rat& q) { return q.get_d(); }

inline bigint num(const rat& q) { return q.get_num(); }
inline bigint den(const rat& q) { return q.get_den(); }

inline bool is_integer(const rat& q) { return q.get_den() == 1; }

inline rat rat_abs(const rat& q) { return q < 0 ? rat(-q) : q; }

inline rat pow_rat(const rat& base, unsigned long e) {
    bigint n, d;
    mpz_pow_ui(n.get_mpz_t(), base.get_num().get_mpz_t(), e);
    mpz_pow_ui(d.get_mpz_t(), base.get_den().get_mpz_t(), e);
    rat out(n, d);
    out.canonicalize();
    return out;
}

inline bigint pow_big(const bigint& base, unsigned long e) {
    bigint out;
    mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), e);
    return out;
}

inline bigint floor_rat(const rat& q) {
    bigint out;
    mpz_fdiv_q(out.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    return out;
}

inline bigint ceil_rat(const rat& q) {
    bigint out;
    mpz_cdiv_q(out.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
    return out;
}

// Nearest integer, ties away from zero.  Used to seed enumeration centers.
inline bigint round_rat(const rat& q) {
    return q < 0 ? ceil_rat(q - rat(1, 2)) : floor_rat(q + rat(1, 2));
}

// Accepts "a", "-a", "a/b", and decimal strings like "0.125" or "-3.5".
// Decimal forms convert exactly (power-of-ten denominator).
inline rat parse_rat(const std::string& s) {
    if (s.empty()) throw schema_error("empty rational literal");
    auto bad = [&] { throw schema_error("bad rational literal: '" + s + "'"); };
    std::string body = s;
    auto slash = body.find('/');
    auto dot = body.find('.');
    if (slash != std::string::npos && dot != std::string::npos) bad();
    try {
        if (dot != std::string::npos) {
            std::string digits = body.substr(0, dot) + body.substr(dot + 1);
            std::size_t frac_len = body.size() - dot - 1;
            if (frac_len == 0 || digits.empty()) bad();
            rat q(bigint(digits, 10), pow_big(bigint(10), frac_len));
            q.canonicalize();
            return q;
        }
        rat q(body);
        if (q.get_den() == 0) bad();
        q.canonicalize();
        return q;
    } catch (const std::invalid_argument&) {
        bad();
    }
    return rat();  // unreachable
}

inline std::string rat_str(const rat& q) { return q.get_str(); }

inline std::string vec_str(const rat_vec& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += v[i].get_str();
    }
    return out + "]";
}

}  // namespace latred
