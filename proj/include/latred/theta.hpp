#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "latred/errors.hpp"
#include "latred/rational.hpp"

namespace latred {

// One-dimensional Gaussian-like mass over the integers,
//   G(tau, t) = sum_z exp(-tau*|z - t|^p),
// evaluated together with its cost moment
//   M(tau, t) = sum_z |z - t|^p exp(-tau*|z - t|^p) / G(tau, t).
// Everything downstream (growth exponents, hardness constants, reduction
// geometry) is built from these two scalars and their inverses, so the
// routines here are templated on the real type: binary64 by default, a
// 50-digit float for the extended mode.

template <class R>
struct theta_tols {
    R series_rel_tail = R(1e-17);  // per-direction series cutoff
    R root_abs = R(1e-13);         // bisection interval floor
    R root_rel = R(1e-12);         // relative residual target for roots
};

template <class R>
inline void check_tols(const theta_tols<R>& tol) {
    auto ok = [](const R& x) { return x > R(0) && x <= R(1e-6); };
    if (!ok(tol.series_rel_tail) || !ok(tol.root_abs) || !ok(tol.root_rel))
        throw std::domain_error("tolerances must lie in (0, 1e-6]");
}

template <class R>
inline void check_domain(R p, R t) {
    if (!(p >= R(1))) throw std::domain_error("p must be >= 1");
    if (!(t >= R(0) && t <= R(0.5)))
        throw std::domain_error("t must lie in [0, 1/2]");
}

namespace detail {

// Below this tau the direct series would need more than ~2e7 terms; the
// integral approximation G ~ 2 Gamma(1+1/p) tau^{-1/p}, M ~ 1/(p tau) is
// then used instead.  Its relative error is driven by the first oscillating
// correction, of size O(tau^{1+1/p}) for odd cost exponents and
// exponentially small for p = 2, so at the switch point it is already far
// below the 1e-12 solver tolerances.
template <class R>
bool below_series_range(R p, R tau) {
    using std::pow;
    return pow(R(745) / tau, R(1) / p) > R(2e7);
}

// Shared series walker.  Factors out exp(-tau*c0) where c0 = t^p is the
// smallest cost, sums outward from z = 0 in both directions, and stops a
// direction once its next term can no longer move either running sum.
// Costs grow monotonically away from z = 0 for t in [0, 1/2], which makes
// the per-direction cutoff sound.
template <class R>
struct series_sums {
    R c0;       // minimal cost t^p
    R w_sum;    // sum of exp(-tau*(c - c0))
    R cw_sum;   // sum of c * exp(-tau*(c - c0)), with absolute costs
};

template <class R>
series_sums<R> theta_series(R p, R tau, R t, const theta_tols<R>& tol) {
    using std::exp;
    using std::fabs;
    using std::pow;
    check_tols(tol);
    check_domain(p, t);
    if (!(tau > R(0))) throw std::domain_error("tau must be positive");

    const R tail = tol.series_rel_tail;
    const R c0 = pow(t, p);
    series_sums<R> s{c0, R(1), c0};
    constexpr std::int64_t max_terms = 80'000'000;

    for (int dir : {+1, -1}) {
        for (std::int64_t k = 1;; ++k) {
            if (k > max_terms)
                throw convergence_error("theta series exceeded term cap");
            const R z = R(dir) * R(double(k));
            const R c = pow(fabs(z - t), p);
            const R w = exp(-tau * (c - c0));
            s.w_sum += w;
            s.cw_sum += c * w;
            if (w <= tail * s.w_sum && c * w <= tail * s.cw_sum) break;
        }
    }
    return s;
}

}  // namespace detail

template <class R>
R theta_log(R p, R tau, R t, const theta_tols<R>& tol = {}) {
    using std::log;
    using std::tgamma;
    if (detail::below_series_range(p, tau)) {
        check_tols(tol);
        check_domain(p, t);
        if (!(tau > R(0))) throw std::domain_error("tau must be positive");
        return log(R(2) * tgamma(R(1) + R(1) / p)) - log(tau) / p;
    }
    auto s = detail::theta_series(p, tau, t, tol);
    return -tau * s.c0 + log(s.w_sum);
}

template <class R>
R theta(R p, R tau, R t, const theta_tols<R>& tol = {}) {
    using std::exp;
    return exp(theta_log(p, tau, t, tol));
}

// Expected cost under the weight exp(-tau*cost); strictly decreasing in tau,
// range (t^p, +inf) swept as tau runs from +inf down to 0.
template <class R>
R theta_moment(R p, R tau, R t, const theta_tols<R>& tol = {}) {
    if (detail::below_series_range(p, tau)) {
        check_tols(tol);
        check_domain(p, t);
        if (!(tau > R(0))) throw std::domain_error("tau must be positive");
        return R(1) / (p * tau);
    }
    auto s = detail::theta_series(p, tau, t, tol);
    return s.cw_sum / s.w_sum;
}

// Solves theta_moment(p, tau, t) = a^p for tau.  Brackets by repeated
// doubling/halving from tau = 1 (at most 200 steps each way), then bisects
// geometrically; accepts when the moment residual is within root_rel
// relative.
template <class R>
R solve_tau(R p, R a, R t, const theta_tols<R>& tol = {}) {
    using std::fabs;
    using std::pow;
    using std::sqrt;
    check_tols(tol);
    check_domain(p, t);
    if (!(a > t)) throw std::domain_error("need a > t");
    const R m = pow(a, p);

    R lo = R(1), hi = R(1);
    R mu_lo = theta_moment(p, lo, t, tol);
    if (mu_lo < m) {
        int steps = 0;
        while (mu_lo < m) {
            if (++steps > 200)
                throw convergence_error("tau bracket: lower expansion cap");
            lo /= R(2);
            mu_lo = theta_moment(p, lo, t, tol);
        }
        hi = lo * R(2);
    } else {
        R mu_hi = theta_moment(p, hi, t, tol);
        int steps = 0;
        while (mu_hi > m) {
            if (++steps > 200)
                throw convergence_error("tau bracket: upper expansion cap");
            hi *= R(2);
            mu_hi = theta_moment(p, hi, t, tol);
        }
        lo = hi / R(2);
    }

    R mid = sqrt(lo * hi);
    for (int iter = 0; iter < 400; ++iter) {
        mid = sqrt(lo * hi);
        const R resid = theta_moment(p, mid, t, tol) - m;
        if (fabs(resid) <= tol.root_rel * m) return mid;
        if (resid > R(0))
            lo = mid;  // moment too large: need larger tau
        else
            hi = mid;
        if (hi - lo <= tol.root_abs * lo) break;
    }
    const R resid = theta_moment(p, mid, t, tol) - m;
    if (fabs(resid) <= R(1e4) * tol.root_rel * m) return mid;
    throw convergence_error("tau bisection stalled at relative residual " +
                            std::to_string(double(resid / m)));
}

// Pointwise growth coefficient
//   b_t(a) = 0                        a < t
//          = 1 (or 2 when t = 1/2)    a = t
//          = exp(tau* a^p) G(tau*,t)  a > t, moment(tau*) = a^p,
// with the log carried separately so callers can stay in log space when the
// value itself overflows binary64.
template <class R>
struct beta_point {
    R t, a;
    R value;
    R log_value;
    std::optional<R> tau_star;  // set only on the a > t branch
};

namespace detail {

template <class R>
beta_point<R> beta_solved(R p, R t, R a, const theta_tols<R>& tol) {
    using std::exp;
    using std::pow;
    beta_point<R> out{t, a, R(0), R(0), std::nullopt};
    const R ts = solve_tau(p, a, t, tol);
    out.tau_star = ts;
    out.log_value = ts * pow(a, p) + theta_log(p, ts, t, tol);
    out.value = exp(out.log_value);
    return out;
}

template <class R>
beta_point<R> beta_equal(R t, bool t_is_half) {
    using std::log;
    beta_point<R> out{t, t, R(0), R(0), std::nullopt};
    out.value = t_is_half ? R(2) : R(1);
    out.log_value = log(out.value);
    return out;
}

}  // namespace detail

// Floating arguments: the a = t tie is taken with 1e-12 absolute slack, and
// t = 1/2 likewise.  Use beta_rat when the inputs are exact rationals.
template <class R>
beta_point<R> beta(R p, R t, R a, const theta_tols<R>& tol = {}) {
    using std::fabs;
    using std::log;
    check_tols(tol);
    check_domain(p, t);
    if (!(a >= R(0))) throw std::domain_error("need a >= 0");
    const R eq = R(1e-12);
    if (fabs(a - t) <= eq)
        return detail::beta_equal(t, fabs(t - R(0.5)) <= eq);
    if (a < t) return beta_point<R>{t, a, R(0),
                                    -std::numeric_limits<R>::infinity(),
                                    std::nullopt};
    return detail::beta_solved(p, t, a, tol);
}

// Exact-argument front end: equality and the t = 1/2 test are decided on the
// rationals, never through rounding.
template <class R>
beta_point<R> beta_rat(R p, const rat& t, const rat& a,
                       const theta_tols<R>& tol = {}) {
    check_tols(tol);
    const R td = R(to_double(t)), ad = R(to_double(a));
    check_domain(p, td);
    if (a == t) return detail::beta_equal(td, t == rat(1, 2));
    if (a < t)
        return beta_point<R>{td, ad, R(0),
                             -std::numeric_limits<R>::infinity(),
                             std::nullopt};
    return detail::beta_solved(p, td, ad, tol);
}

// Variational cross-check: b_t(a) also equals min_{tau>0} exp(tau a^p)
// G(tau, t).  Scans a 512-point log grid spanning [tau*/32, 32 tau*].
template <class R>
R beta_min_form(R p, R t, R a, const theta_tols<R>& tol = {}) {
    using std::exp;
    using std::log;
    using std::pow;
    const R ts = solve_tau(p, a, t, tol);
    const R m = pow(a, p);
    const R lo = log(ts / R(32)), hi = log(ts * R(32));
    R best = std::numeric_limits<R>::infinity();
    const int grid = 512;
    for (int i = 0; i <= grid; ++i) {
        const R tau = exp(lo + (hi - lo) * R(double(i)) / R(double(grid)));
        const R v = tau * m + theta_log(p, tau, t, tol);
        if (v < best) best = v;
    }
    return exp(best);
}

namespace detail {

// Slope of the linear growth b_t(a) ~ kappa_p * a; independent of t.
template <class R>
R beta_slope(R p) {
    using std::exp;
    using std::pow;
    using std::tgamma;
    return R(2) * tgamma(R(1) + R(1) / p) * pow(exp(R(1)) * p, R(1) / p);
}

// Largest offset the numeric inverse may bisect over: beyond it the root
// solver's tau bracket (200 halvings from 1) cannot reach tau* ~ a^{-p}/p,
// and the linear asymptote is exact to far below solver tolerance anyway.
template <class R>
R beta_inv_numeric_cap(R p) {
    using std::exp;
    using std::log;
    const R cap = R(0.5) * exp((R(200) * log(R(2)) - log(p)) / p);
    return cap < R(1e6) ? cap : R(1e6);
}

}  // namespace detail

// Inverse of a -> b_t(a) on [t, inf) in log coordinates: takes log(nu),
// returns log(a), so astronomically large budgets stay representable.
// Defined for nu >= b_t(t); returns -inf at the left endpoint when t = 0.
template <class R>
R beta_inv_ln(R p, R t, R log_nu, const theta_tols<R>& tol = {}) {
    using std::exp;
    using std::fabs;
    using std::log;
    check_tols(tol);
    check_domain(p, t);
    const R log_bt =
        (fabs(t - R(0.5)) <= R(1e-12)) ? log(R(2)) : R(0);
    if (log_nu < log_bt - tol.root_rel)
        throw std::domain_error("inverse undefined: nu below the value at a = t");
    if (log_nu <= log_bt + tol.root_rel) return log(t);

    const R log_kappa = log(detail::beta_slope(p));
    if (log_nu - log_kappa >= log(detail::beta_inv_numeric_cap(p)))
        return log_nu - log_kappa;  // linear regime, exact past the cap

    const R nu_cap = log_nu;  // alias: everything below works on logs of beta
    R step = R(1);
    R hi = t + step;
    int expand = 0;
    while (beta<R>(p, t, hi, tol).log_value < nu_cap) {
        if (++expand > 200)
            throw convergence_error("inverse bracket expansion cap");
        step *= R(2);
        hi = t + step;
    }
    R lo = (expand == 0) ? t : t + step / R(2);

    for (int iter = 0; iter < 300; ++iter) {
        const R mid = (lo + hi) / R(2);
        if (mid <= t || hi - lo <= tol.root_abs * (R(1) + mid)) break;
        const R lb = beta<R>(p, t, mid, tol).log_value;
        if (fabs(lb - nu_cap) <= tol.root_rel) return log(mid);
        if (lb < nu_cap)
            lo = mid;
        else
            hi = mid;
    }
    const R mid = (lo + hi) / R(2);
    const R resid = beta<R>(p, t, mid, tol).log_value - nu_cap;
    if (fabs(resid) <= R(1e4) * tol.root_rel) return log(mid);
    throw convergence_error("inverse bisection stalled");
}

template <class R>
R beta_inv(R p, R t, R nu, const theta_tols<R>& tol = {}) {
    using std::exp;
    using std::log;
    if (!(nu > R(0))) throw std::domain_error("need nu > 0");
    const R la = beta_inv_ln(p, t, log(nu), tol);
    return la == -std::numeric_limits<R>::infinity() ? R(0) : exp(la);
}

}  // namespace latred
