#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "latred/basis.hpp"
#include "latred/errors.hpp"
#include "latred/rational.hpp"
#include "latred/theta.hpp"

namespace latred {

// Exact point counting in lp balls: recursive enumeration for Z^n around
// shifted centers, and LDL-based ellipsoid enumeration for arbitrary
// small-rank rational bases.  Radii travel as r^p throughout; p-th roots
// happen only at the interfaces.
//
// Two comparison regimes: when p is a positive integer and every scalar in
// sight is rational, all costs are exact rationals and boundary membership
// is decided exactly.  Otherwise costs are binary64 and points within a
// 1e-9 relative band of the radius are classified as boundary points,
// included by closed counts and excluded by strict ones.

struct enumeration_budget {
    std::uint64_t max_nodes = 50'000'000;
    long coeff_box = 1'000'000;  // per-coordinate coefficient range cap
};

struct count_result {
    bigint count;            // per the query's strict flag
    bigint boundary_points;  // points at (or within tolerance of) the radius
};

struct count_query {
    double p = 2.0;
    int n = 1;
    rat radius_pow;            // r^p
    bool radius_exact = true;  // false: rounded real, engage the tolerance band
    rat t_shift;               // center t*1 (used when center is empty)
    rat_vec center;            // explicit center, overrides t_shift
    bool strict = false;
};

namespace detail {

constexpr double k_boundary_rel = 1e-9;

inline bool integer_order(double p, unsigned& out) {
    if (p >= 1.0 && p <= 64.0 && p == std::floor(p)) {
        out = unsigned(p);
        return true;
    }
    return false;
}

inline double boundary_band(double radius_pow) {
    return k_boundary_rel * std::max(1.0, std::fabs(radius_pow));
}

inline void bump_nodes(std::uint64_t& nodes, std::uint64_t cap, const char* what) {
    if (++nodes > cap) throw budget_error(what, nodes);
}

// nearest integer to a rational, ties toward +inf (tie direction is
// irrelevant: enumeration walks outward from the start in both directions)
inline bigint nearest_int(const rat& q) {
    rat f = q + rat(1, 2);
    return floor_rat(f);
}

// exact scaled cost |D z - e|^p as a big integer
inline bigint scaled_cost(const bigint& D, const bigint& e, const bigint& z, unsigned p) {
    bigint k = D * z - e;
    if (k < 0) k = -k;
    return pow_big(k, p);
}

struct zn_exact_walk {
    unsigned pint;
    bigint D;                // common denominator of the center coordinates
    std::vector<bigint> e;   // D * center_i
    std::uint64_t max_nodes;
    long coeff_box;
    std::uint64_t nodes = 0;
    bigint closed = 0, boundary = 0;

    void run(int i, const rat& rem) {
        const int n = int(e.size());
        if (i == n) {
            ++closed;
            if (rem == 0) ++boundary;
            return;
        }
        const rat c = rat(e[i]) / rat(D);
        const bigint z0 = nearest_int(c);
        for (bigint z = z0;; ++z) {
            bump_nodes(nodes, max_nodes, "zn enumeration node budget");
            if (z - z0 > coeff_box)
                throw budget_error("zn coefficient box exceeded", nodes);
            const bigint cost = scaled_cost(D, e[i], z, pint);
            if (rat(cost) > rem) break;
            run(i + 1, rem - rat(cost));
        }
        for (bigint z = z0 - 1;; --z) {
            bump_nodes(nodes, max_nodes, "zn enumeration node budget");
            if (z0 - z > coeff_box)
                throw budget_error("zn coefficient box exceeded", nodes);
            const bigint cost = scaled_cost(D, e[i], z, pint);
            if (rat(cost) > rem) break;
            run(i + 1, rem - rat(cost));
        }
    }
};

struct zn_real_walk {
    double p;
    std::vector<double> c;
    double radius_pow, band;
    std::uint64_t max_nodes;
    long coeff_box;
    std::uint64_t nodes = 0;
    bigint closed = 0, boundary = 0, strict_cnt = 0;

    void run(int i, double acc) {
        const int n = int(c.size());
        if (i == n) {
            if (acc <= radius_pow - band) {
                ++closed;
                ++strict_cnt;
            } else {
                ++closed;
                ++boundary;  // within the band: boundary, closed-only
            }
            return;
        }
        const long long z0 = std::llround(c[i]);
        for (long long z = z0;; ++z) {
            bump_nodes(nodes, max_nodes, "zn enumeration node budget");
            if (z - z0 > coeff_box)
                throw budget_error("zn coefficient box exceeded", nodes);
            const double acc2 = acc + std::pow(std::fabs(double(z) - c[i]), p);
            if (acc2 > radius_pow + band) break;
            run(i + 1, acc2);
        }
        for (long long z = z0 - 1;; --z) {
            bump_nodes(nodes, max_nodes, "zn enumeration node budget");
            if (z0 - z > coeff_box)
                throw budget_error("zn coefficient box exceeded", nodes);
            const double acc2 = acc + std::pow(std::fabs(double(z) - c[i]), p);
            if (acc2 > radius_pow + band) break;
            run(i + 1, acc2);
        }
    }
};

inline bigint lcm_denominator(const rat_vec& v) {
    bigint D = 1;
    for (const rat& q : v) {
        bigint l;
        mpz_lcm(l.get_mpz_t(), D.get_mpz_t(), den(q).get_mpz_t());
        D = l;
    }
    return D;
}

}  // namespace detail

inline count_result count_zn(const count_query& q,
                             const enumeration_budget& budget = {}) {
    if (q.n < 1) throw std::domain_error("need n >= 1");
    if (!(q.p >= 1.0)) throw std::domain_error("p must be >= 1");
    if (q.n > 20) throw std::domain_error("rank exceeds the Z^n recursion cap");
    if (q.radius_pow < 0) return {0, 0};

    rat_vec c = q.center;
    if (c.empty()) c.assign(q.n, q.t_shift);
    if (int(c.size()) != q.n) throw std::domain_error("center length mismatch");

    unsigned pint = 0;
    if (q.radius_exact && detail::integer_order(q.p, pint)) {
        detail::zn_exact_walk w;
        w.pint = pint;
        w.D = detail::lcm_denominator(c);
        w.e.resize(q.n);
        for (int i = 0; i < q.n; ++i) w.e[i] = num(c[i]) * (w.D / den(c[i]));
        w.max_nodes = budget.max_nodes;
        w.coeff_box = budget.coeff_box;
        w.run(0, q.radius_pow * rat(pow_big(w.D, pint)));
        return {q.strict ? bigint(w.closed - w.boundary) : w.closed, w.boundary};
    }

    detail::zn_real_walk w;
    w.p = q.p;
    w.c.resize(q.n);
    for (int i = 0; i < q.n; ++i) w.c[i] = to_double(c[i]);
    w.radius_pow = to_double(q.radius_pow);
    w.band = detail::boundary_band(w.radius_pow);
    w.max_nodes = budget.max_nodes;
    w.coeff_box = budget.coeff_box;
    w.run(0, 0.0);
    return {q.strict ? w.strict_cnt : w.closed, w.boundary};
}

inline count_result count_zn(double p, int n, const rat& radius_pow, const rat& t,
                             bool strict, const enumeration_budget& budget = {}) {
    count_query q;
    q.p = p;
    q.n = n;
    q.radius_pow = radius_pow;
    q.t_shift = t;
    q.strict = strict;
    return count_zn(q, budget);
}

// Budget-convolution route for t*1 centers on the exact path: the n-fold
// convolution of the 1-D scaled-cost multiset.  Independent of the recursive
// walker; reaches n <= 64.
inline count_result count_zn_convolution(double p, int n, const rat& radius_pow,
                                         const rat& t, bool strict,
                                         const enumeration_budget& budget = {}) {
    unsigned pint = 0;
    if (!detail::integer_order(p, pint))
        throw std::domain_error("convolution path needs integer p");
    if (n < 1 || n > 64) throw std::domain_error("convolution path needs 1 <= n <= 64");
    if (radius_pow < 0) return {0, 0};

    const bigint D = den(t);
    const bigint e = num(t);
    const rat rhs = radius_pow * rat(pow_big(D, pint));
    const bigint kmax = floor_rat(rhs);

    std::map<bigint, bigint> one;
    const bigint z0 = detail::nearest_int(t);
    std::uint64_t nodes = 0;
    for (bigint z = z0;; ++z) {
        detail::bump_nodes(nodes, budget.max_nodes, "convolution seed budget");
        const bigint cost = detail::scaled_cost(D, e, z, pint);
        if (cost > kmax) break;
        ++one[cost];
    }
    for (bigint z = z0 - 1;; --z) {
        detail::bump_nodes(nodes, budget.max_nodes, "convolution seed budget");
        const bigint cost = detail::scaled_cost(D, e, z, pint);
        if (cost > kmax) break;
        ++one[cost];
    }

    std::map<bigint, bigint> conv{{bigint(0), bigint(1)}};
    for (int i = 0; i < n; ++i) {
        std::map<bigint, bigint> next;
        for (const auto& [ca, va] : conv)
            for (const auto& [cb, vb] : one) {
                bigint key = ca + cb;
                if (key > kmax) break;  // one is sorted ascending
                detail::bump_nodes(nodes, budget.max_nodes, "convolution budget");
                next[key] += va * vb;
            }
        conv = std::move(next);
    }

    bigint closed = 0, boundary = 0;
    for (const auto& [cost, cnt] : conv) closed += cnt;
    if (is_integer(rhs)) {
        auto it = conv.find(num(rhs));
        if (it != conv.end()) boundary = it->second;
    }
    return {strict ? bigint(closed - boundary) : closed, boundary};
}

// --------------------------------------------------------------------------
// General lattice enumeration.  The walker visits every integer coefficient
// vector inside a rational ellipsoid (x - tau)^T G (x - tau) <= radius2 given
// the exact LDL^T factors of G; leaves run an exact lp cost test.  The
// ellipsoid is a proven superset of the lp ball being counted, so no point
// is missed; radius2 may shrink between leaves (used by the minimizers).

namespace detail {

inline void ldl_decompose(const rat_mat& g, rat_mat& L, rat_vec& D) {
    const int n = int(g.size());
    L.assign(n, rat_vec(n, rat(0)));
    D.assign(n, rat(0));
    for (int i = 0; i < n; ++i) {
        rat di = g[i][i];
        for (int k = 0; k < i; ++k) di -= L[i][k] * L[i][k] * D[k];
        if (!(di > 0)) throw std::domain_error("form is not positive definite");
        D[i] = di;
        L[i][i] = rat(1);
        for (int j = i + 1; j < n; ++j) {
            rat v = g[j][i];
            for (int k = 0; k < i; ++k) v -= L[j][k] * L[i][k] * D[k];
            L[j][i] = v / di;
        }
    }
}

template <class LeafFn>
struct ellipsoid_walk {
    const rat_mat& L;
    const rat_vec& D;
    const rat_vec& tau;
    rat radius2;  // current bound; leaves may shrink it
    std::uint64_t max_nodes;
    long coeff_box;
    LeafFn& leaf;
    std::uint64_t nodes = 0;
    std::vector<bigint> x;
    rat_vec y;  // x_j - tau_j for chosen levels

    ellipsoid_walk(const rat_mat& l, const rat_vec& d, const rat_vec& t, rat r2,
                   std::uint64_t mn, long cb, LeafFn& lf)
        : L(l), D(d), tau(t), radius2(std::move(r2)), max_nodes(mn),
          coeff_box(cb), leaf(lf) {
        x.assign(tau.size(), bigint(0));
        y.assign(tau.size(), rat(0));
    }

    // level i chooses x_i; levels above i are already fixed
    void run(int i, const rat& spent) {
        const int n = int(tau.size());
        if (i < 0) {
            leaf(x, radius2);
            return;
        }
        rat c = tau[i];
        for (int j = i + 1; j < n; ++j) c -= L[j][i] * y[j];
        const bigint z0 = nearest_int(c);
        for (bigint z = z0;; ++z) {
            bump_nodes(nodes, max_nodes, "lattice enumeration node budget");
            if (z - z0 > coeff_box)
                throw budget_error("lattice coefficient box exceeded", nodes);
            const rat d = rat(z) - c;
            const rat cost = D[i] * d * d;
            if (spent + cost > radius2) break;
            x[std::size_t(i)] = z;
            y[std::size_t(i)] = rat(z) - tau[i];
            run(i - 1, spent + cost);
        }
        for (bigint z = z0 - 1;; --z) {
            bump_nodes(nodes, max_nodes, "lattice enumeration node budget");
            if (z0 - z > coeff_box)
                throw budget_error("lattice coefficient box exceeded", nodes);
            const rat d = rat(z) - c;
            const rat cost = D[i] * d * d;
            if (spent + cost > radius2) break;
            x[std::size_t(i)] = z;
            y[std::size_t(i)] = rat(z) - tau[i];
            run(i - 1, spent + cost);
        }
    }
};

// rational bound of v^e computed through binary64 with ulp slack
inline rat rat_pow_bound(const rat& v, double e, bool upper) {
    if (v == 0) return rat(0);
    double d = std::pow(to_double(v), e);
    for (int k = 0; k < 8; ++k)
        d = upper ? std::nextafter(d, std::numeric_limits<double>::infinity())
                  : std::nextafter(d, 0.0);
    return rat_of_double(d);
}

// exact weighted lp cost when p is integral, else binary64
struct lp_cost {
    bool exact;
    unsigned pint;
    double p;
    rat value_rat;
    double value_real;
};

inline lp_cost residual_cost(const rat_vec& r, const rat_vec& w, double p,
                             unsigned pint, bool exact) {
    lp_cost out{exact, pint, p, rat(0), 0.0};
    for (std::size_t i = 0; i < r.size(); ++i) {
        const rat a = rat_abs(r[i]);
        if (exact) {
            rat c = pow_rat(a, pint);
            if (!w.empty()) c *= w[i];
            out.value_rat += c;
        } else {
            double c = std::pow(to_double(a), p);
            if (!w.empty()) c *= to_double(w[i]);
            out.value_real += c;
        }
    }
    if (exact) out.value_real = to_double(out.value_rat);
    return out;
}

// superset ellipsoid data shared by the counting and minimizing drivers
struct superset_form {
    rat_mat L;
    rat_vec D;
    rat_vec tau;
    rat rho;        // M-distance^2 from target to the span
    rat_vec w2lo;   // rational lower bounds of w_i^{2/p}
    rat dim_factor; // d^{max(0, 1 - 2/p)} upper bound
};

inline superset_form build_superset(const rational_basis& b, double p,
                                    const rat_vec& w, const rat_vec& target) {
    const int d = b.dim(), n = b.rank();
    superset_form f;
    f.w2lo.assign(std::size_t(d), rat(1));
    if (!w.empty()) {
        if (int(w.size()) != d)
            throw std::domain_error("weight length must match dimension");
        for (int i = 0; i < d; ++i) {
            if (!(w[i] > 0)) throw std::domain_error("weights must be positive");
            f.w2lo[std::size_t(i)] =
                (p == 2.0) ? w[std::size_t(i)]
                           : rat_pow_bound(w[std::size_t(i)], 2.0 / p, false);
        }
    }
    const rat_mat g = gram(b, f.w2lo);
    ldl_decompose(g, f.L, f.D);
    if (!target.empty()) {
        if (int(target.size()) != d)
            throw std::domain_error("target dimension mismatch");
        rat_vec btm(std::size_t(n), rat(0));
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < d; ++i)
                btm[std::size_t(j)] +=
                    b.m[std::size_t(i)][std::size_t(j)] * f.w2lo[std::size_t(i)] * target[std::size_t(i)];
        f.tau = solve_linear(g, btm);
        rat tmt(0);
        for (int i = 0; i < d; ++i)
            tmt += f.w2lo[std::size_t(i)] * target[std::size_t(i)] * target[std::size_t(i)];
        rat quad(0);
        for (int j = 0; j < n; ++j) quad += f.tau[std::size_t(j)] * btm[std::size_t(j)];
        f.rho = tmt - quad;
        if (f.rho < 0) f.rho = rat(0);  // exact arithmetic: only at 0 itself
    } else {
        f.tau.assign(std::size_t(n), rat(0));
        f.rho = rat(0);
    }
    const double ex = std::max(0.0, 1.0 - 2.0 / p);
    f.dim_factor = (ex == 0.0) ? rat(1) : rat_pow_bound(rat(d), ex, true);
    return f;
}

// ellipsoid radius^2 that provably contains the weighted lp ball of radius
// power rp (slack covers the boundary tolerance band on the inexact path)
inline rat superset_radius2(const superset_form& f, double p, const rat& rp,
                            bool exact) {
    if (rp <= 0) return f.dim_factor * rat(0);
    rat padded = rp;
    if (!exact) padded *= rat(1) + rat(1, 100'000'000);  // 1e-8 > the 1e-9 band
    const rat r2 = (p == 2.0) ? padded : rat_pow_bound(padded, 2.0 / p, true);
    return r2 * f.dim_factor * (rat(1) + rat(bigint(1), pow_big(bigint(10), 12)));
}

}  // namespace detail

inline void check_enum_rank(const rational_basis& b, int cap) {
    check_basis(b);
    if (b.rank() > cap)
        throw std::domain_error("rank exceeds the enumeration cap");
}

// Count lattice points of Lambda(b) within lp radius radius_pow^{1/p} of
// target, with optional per-coordinate rational weights w (cost is
// sum_i w_i |v_i - t_i|^p; exact whenever p is integral and inputs exact).
inline count_result count_lattice(const rational_basis& b, double p,
                                  const rat& radius_pow, const rat_vec& target,
                                  bool strict, const enumeration_budget& budget = {},
                                  const rat_vec& coord_weight_pow = {},
                                  bool radius_exact = true) {
    if (!(p >= 1.0)) throw std::domain_error("p must be >= 1");
    check_enum_rank(b, 12);
    if (radius_pow < 0) return {0, 0};

    unsigned pint = 0;
    const bool exact = radius_exact && detail::integer_order(p, pint);
    const auto f = detail::build_superset(b, p, coord_weight_pow, target);
    rat rem2 = detail::superset_radius2(f, p, radius_pow, exact) - f.rho;
    if (rem2 < 0) return {0, 0};

    const double rp_real = to_double(radius_pow);
    const double band = detail::boundary_band(rp_real);
    bigint closed = 0, boundary = 0;

    auto leaf = [&](const std::vector<bigint>& xc, rat&) {
        rat_vec xr(xc.size());
        for (std::size_t i = 0; i < xc.size(); ++i) xr[i] = rat(xc[i]);
        rat_vec v = mat_vec(b.m, xr);
        const rat_vec res = target.empty() ? v : vec_sub(target, v);
        const auto cost =
            detail::residual_cost(res, coord_weight_pow, p, pint, exact);
        if (exact) {
            if (cost.value_rat > radius_pow) return;
            ++closed;
            if (cost.value_rat == radius_pow) ++boundary;
        } else {
            if (cost.value_real > rp_real + band) return;
            ++closed;
            if (cost.value_real > rp_real - band) ++boundary;
        }
    };
    detail::ellipsoid_walk<decltype(leaf)> walk(
        f.L, f.D, f.tau, rem2, budget.max_nodes, budget.coeff_box, leaf);
    walk.run(b.rank() - 1, rat(0));
    return {strict ? bigint(closed - boundary) : closed, boundary};
}

struct nearest_report {
    double value;             // lp distance
    rat cost_pow;             // exact r^p on the exact path (else rounded)
    std::vector<bigint> coeffs;
    rat_vec vector;           // the lattice vector itself
};

// Shortest nonzero vector by enumeration with a shrinking radius, seeded by
// the shortest basis column.
inline nearest_report min_distance(const rational_basis& b, double p,
                                   const enumeration_budget& budget = {},
                                   const rat_vec& coord_weight_pow = {}) {
    if (!(p >= 1.0)) throw std::domain_error("p must be >= 1");
    check_enum_rank(b, 12);
    unsigned pint = 0;
    const bool exact = detail::integer_order(p, pint);
    const auto f = detail::build_superset(b, p, coord_weight_pow, {});

    rat best_rat;
    double best_real = 0.0;
    std::vector<bigint> best_x(std::size_t(b.rank()), bigint(0));
    for (int j = 0; j < b.rank(); ++j) {
        const auto c = detail::residual_cost(b.column(j), coord_weight_pow, p,
                                             pint, exact);
        const bool better =
            (j == 0) || (exact ? c.value_rat < best_rat : c.value_real < best_real);
        if (better) {
            best_rat = c.value_rat;
            best_real = c.value_real;
            std::fill(best_x.begin(), best_x.end(), bigint(0));
            best_x[std::size_t(j)] = 1;
        }
    }

    auto bound2 = [&]() {
        return detail::superset_radius2(
            f, p, exact ? best_rat : rat_of_double(best_real), exact);
    };
    auto leaf = [&](const std::vector<bigint>& xc, rat& radius2) {
        bool zero = true;
        for (const auto& z : xc)
            if (z != 0) zero = false;
        if (zero) return;
        rat_vec xr(xc.size());
        for (std::size_t i = 0; i < xc.size(); ++i) xr[i] = rat(xc[i]);
        const auto cost = detail::residual_cost(mat_vec(b.m, xr),
                                                coord_weight_pow, p, pint, exact);
        const bool better =
            exact ? cost.value_rat < best_rat : cost.value_real < best_real;
        if (better) {
            best_rat = cost.value_rat;
            best_real = cost.value_real;
            best_x = xc;
            radius2 = bound2();
        }
    };
    detail::ellipsoid_walk<decltype(leaf)> walk(
        f.L, f.D, f.tau, bound2(), budget.max_nodes, budget.coeff_box, leaf);
    walk.run(b.rank() - 1, rat(0));

    nearest_report rep;
    rep.cost_pow = exact ? best_rat : rat_of_double(best_real);
    rep.value = std::pow(exact ? to_double(best_rat) : best_real, 1.0 / p);
    rep.coeffs = best_x;
    rat_vec xr(best_x.size());
    for (std::size_t i = 0; i < best_x.size(); ++i) xr[i] = rat(best_x[i]);
    rep.vector = mat_vec(b.m, xr);
    return rep;
}

// Closest lattice vector to target by enumeration around the rounded
// continuous preimage.
inline nearest_report dist_to_lattice(const rational_basis& b, double p,
                                      const rat_vec& target,
                                      const enumeration_budget& budget = {},
                                      const rat_vec& coord_weight_pow = {}) {
    if (!(p >= 1.0)) throw std::domain_error("p must be >= 1");
    check_enum_rank(b, 12);
    unsigned pint = 0;
    const bool exact = detail::integer_order(p, pint);
    const auto f = detail::build_superset(b, p, coord_weight_pow, target);

    std::vector<bigint> best_x(std::size_t(b.rank()));
    for (int j = 0; j < b.rank(); ++j)
        best_x[std::size_t(j)] = detail::nearest_int(f.tau[std::size_t(j)]);
    rat_vec xr(best_x.size());
    for (std::size_t i = 0; i < best_x.size(); ++i) xr[i] = rat(best_x[i]);
    auto seed = detail::residual_cost(vec_sub(target, mat_vec(b.m, xr)),
                                      coord_weight_pow, p, pint, exact);
    rat best_rat = seed.value_rat;
    double best_real = seed.value_real;

    const bool already_exactly_on = exact ? best_rat == 0 : best_real == 0.0;
    if (!already_exactly_on) {
        auto bound2 = [&]() {
            return detail::superset_radius2(
                f, p, exact ? best_rat : rat_of_double(best_real), exact);
        };
        auto leaf = [&](const std::vector<bigint>& xc, rat& radius2) {
            rat_vec yr(xc.size());
            for (std::size_t i = 0; i < xc.size(); ++i) yr[i] = rat(xc[i]);
            const auto cost =
                detail::residual_cost(vec_sub(target, mat_vec(b.m, yr)),
                                      coord_weight_pow, p, pint, exact);
            const bool better =
                exact ? cost.value_rat < best_rat : cost.value_real < best_real;
            if (better) {
                best_rat = cost.value_rat;
                best_real = cost.value_real;
                best_x = xc;
                radius2 = bound2();
            }
        };
        detail::ellipsoid_walk<decltype(leaf)> walk(
            f.L, f.D, f.tau, bound2(), budget.max_nodes, budget.coeff_box, leaf);
        walk.run(b.rank() - 1, rat(0));
    }

    nearest_report rep;
    rep.cost_pow = exact ? best_rat : rat_of_double(best_real);
    rep.value = std::pow(exact ? to_double(best_rat) : best_real, 1.0 / p);
    rep.coeffs = best_x;
    rat_vec br(best_x.size());
    for (std::size_t i = 0; i < best_x.size(); ++i) br[i] = rat(best_x[i]);
    rep.vector = mat_vec(b.m, br);
    return rep;
}

// Number of lattice vectors of l2 norm exactly lambda_1 (exact rational
// comparisons end to end).
inline bigint kissing_count(const rational_basis& b,
                            const enumeration_budget& budget = {}) {
    check_enum_rank(b, 10);
    const auto shortest = min_distance(b, 2.0, budget);
    const auto at_min = count_lattice(b, 2.0, shortest.cost_pow, {}, false, budget);
    return at_min.count - 1;  // drop the zero vector
}

// A_{p,u}(Lambda, r', t) = sum_{z=0}^{floor(r'/u)} N_p(Lambda, ((r')^p - z^p u^p)^{1/p}, z t) - 1.
// u and r' travel as p-th powers; exact for integer p.
inline bigint a_pu(const rational_basis& b, double p, const rat& u_pow,
                   const rat& rprime_pow, const rat_vec& target,
                   const enumeration_budget& budget = {},
                   const rat_vec& coord_weight_pow = {}) {
    if (!(u_pow > 0)) throw std::domain_error("need u > 0");
    unsigned pint = 0;
    const bool exact = detail::integer_order(p, pint);
    bigint total = 0;
    for (bigint z = 0;; ++z) {
        rat zp = exact ? rat(pow_big(z, pint))
                       : rat_of_double(std::pow(to_double(rat(z)), p));
        const rat rad = rprime_pow - zp * u_pow;
        if (rad < 0) break;
        rat_vec zt(target.size());
        for (std::size_t i = 0; i < target.size(); ++i) zt[i] = rat(z) * target[i];
        total += count_lattice(b, p, rad, zt, false, budget, coord_weight_pow,
                               exact).count;
    }
    return total - 1;
}

inline bigint a_pu(const rational_basis& b, double p, double u, double r_prime,
                   const rat_vec& target, const enumeration_budget& budget = {},
                   const rat_vec& coord_weight_pow = {}) {
    return a_pu(b, p, rat_of_double(std::pow(u, p)),
                rat_of_double(std::pow(r_prime, p)), target, budget,
                coord_weight_pow);
}

// --------------------------------------------------------------------------
// Exact count vs theta power: N_p(Z^n, a n^{1/p}, t*1) against b_t(a)^n.

struct sandwich_report {
    bigint count;
    double log_count;   // ln N
    double log_beta;    // ln b_t(a)
    double ratio_log;   // (ln N)/n - ln b_t(a), <= 0 when the bound holds
    bool passes_upper;
};

inline double log_of_bigint(const bigint& n) {
    signed long e = 0;
    const double m = mpz_get_d_2exp(&e, n.get_mpz_t());
    return std::log(m) + double(e) * std::log(2.0);
}

inline sandwich_report theta_sandwich_check(double p, int n, const rat& t,
                                            const rat& a,
                                            const enumeration_budget& budget = {}) {
    if (n < 1) throw std::domain_error("need n >= 1");
    unsigned pint = 0;
    const bool exact = detail::integer_order(p, pint);
    const rat radius_pow =
        (exact ? pow_rat(a, pint) : rat_of_double(std::pow(to_double(a), p))) *
        rat(n);

    count_result cr;
    if (exact)  // scaled costs are small integers: the convolution is cheap
        cr = count_zn_convolution(p, n, radius_pow, t, false, budget);
    else {
        count_query q;
        q.p = p;
        q.n = n;
        q.radius_pow = radius_pow;
        q.radius_exact = exact;
        q.t_shift = t;
        cr = count_zn(q, budget);
    }

    // the power side in extended precision so hairline cells (exact powers
    // of two at t = a = 1/2) land on the right side of the comparison
    const auto bp = beta_rat<long double>((long double)(p), t, a);
    sandwich_report rep;
    rep.count = cr.count;
    rep.log_count = log_of_bigint(cr.count);
    rep.log_beta = double(bp.log_value);
    rep.ratio_log = rep.log_count / n - rep.log_beta;
    const long double slack =
        1e-10L * std::max<long double>(1.0L, std::fabs(bp.log_value));
    rep.passes_upper =
        (long double)(rep.log_count) <= n * (bp.log_value + slack);
    return rep;
}

// --------------------------------------------------------------------------
// Spherical cap measure ratio and lp ball volume.

namespace detail {

template <class F>
double adaptive_simpson(F&& f, double a, double b, double fa, double fm,
                        double fb, double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0) throw convergence_error("cap quadrature depth exhausted");
    if (std::fabs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

}  // namespace detail

// Fraction of the unit (n-1)-sphere within angle theta of a fixed direction:
// int_0^theta sin^{n-2} / int_0^pi sin^{n-2}.
inline double cap_ratio(int n, double theta) {
    constexpr double pi = 3.14159265358979323846;
    if (n < 2) throw std::domain_error("need n >= 2");
    if (!(theta > 0.0) || theta > 0.5 * pi + 1e-12)
        throw std::domain_error("angle must lie in (0, pi/2]");
    const double full = std::exp(0.5 * std::log(pi) +
                                 std::lgamma((n - 1) / 2.0) -
                                 std::lgamma(n / 2.0));
    auto f = [n](double x) { return std::pow(std::sin(x), double(n - 2)); };
    const double fa = f(0.0), fb = f(theta), fm = f(0.5 * theta);
    const double whole = theta / 6.0 * (fa + 4.0 * fm + fb);
    const double eps = 1e-13 * full;
    const double cap =
        detail::adaptive_simpson(f, 0.0, theta, fa, fm, fb, whole, eps, 48);
    return cap / full;
}

// Volume of the lp ball of radius r in R^n, computed in log space.
inline double lp_ball_volume(double p, int n, double r) {
    if (!(p >= 1.0) || n < 1 || !(r > 0))
        throw std::domain_error("need p >= 1, n >= 1, r > 0");
    const double log_vol = n * (std::log(2.0) + std::lgamma(1.0 + 1.0 / p)) -
                           std::lgamma(1.0 + double(n) / p) +
                           n * std::log(r);
    return std::exp(log_vol);
}

}  // namespace latred
