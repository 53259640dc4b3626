#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "latred/errors.hpp"
#include "latred/theta.hpp"

namespace latred {

// Scalar constants of the counting-to-lattice reduction pipeline.  Everything
// here reduces to the growth coefficient b_t(a) and its inverse; closed-form
// quantities are templated on the real type so the extended-precision mode
// can rerun them at 50 digits.

// Exponent of the kissing-number lower bound; a runtime knob, never baked in.
struct kissing_constant {
    double c_kn = 0.02194;
};

inline void check_kissing(const kissing_constant& k) {
    if (!(k.c_kn > 0.0 && k.c_kn < 1.0))
        throw std::domain_error("need 0 < c_kn < 1");
}

template <class R>
R alpha_kn(R c_kn) {
    using std::pow;
    if (!(c_kn > R(0) && c_kn < R(1)))
        throw std::domain_error("need 0 < c_kn < 1");
    return pow(R(2), -c_kn);
}

inline double alpha_kn(const kissing_constant& k = {}) {
    check_kissing(k);
    return alpha_kn<double>(k.c_kn);
}

// 1 / (2 a2) where b_0(a2) = 2.
template <class R>
R alpha_star(R p, const theta_tols<R>& tol = {}) {
    return R(1) / (R(2) * beta_inv(p, R(0), R(2), tol));
}

// (1 + (2 d0)^{-p})^{1/p} with d0 = b_0^{-1}(2^{c_kn (C-1)}).  Diverges as
// C -> 1+ (d0 -> 0 makes the inner term blow up).  Works on logs end to end
// so very large C (where d0 itself overflows) still yields the limit 1.
template <class R>
R alpha_dagger(R p, R C, R c_kn, const theta_tols<R>& tol = {}) {
    using std::exp;
    using std::log;
    using std::pow;
    if (!(C > R(1))) throw std::domain_error("need C > 1");
    if (!(c_kn > R(0) && c_kn < R(1)))
        throw std::domain_error("need 0 < c_kn < 1");
    const R ln_nu = c_kn * (C - R(1)) * log(R(2));
    const R ln_d0 = beta_inv_ln(p, R(0), ln_nu, tol);
    return pow(R(1) + exp(-p * (log(R(2)) + ln_d0)), R(1) / p);
}

inline double alpha_dagger(double p, double C, const kissing_constant& k = {},
                           const theta_tols<double>& tol = {}) {
    check_kissing(k);
    return alpha_dagger<double>(p, C, k.c_kn, tol);
}

// Unique order where b_0(1/2) crosses 2; bisected on [2, 3].
template <class R>
R p_zero(const theta_tols<R>& tol = {}, R width = R(1e-6)) {
    using std::log;
    auto g = [&](R p) {
        return beta(p, R(0), R(0.5), tol).log_value - log(R(2));
    };
    R lo(2), hi(3);
    if (!(g(lo) > R(0)) || !(g(hi) < R(0)))
        throw convergence_error("crossing not bracketed in [2, 3]");
    for (int i = 0; i < 200 && hi - lo > width; ++i) {
        const R mid = (lo + hi) / R(2);
        (g(mid) > R(0) ? lo : hi) = mid;
    }
    return (lo + hi) / R(2);
}

// 1 / (1 - log2 b_0(1/2)); defined only above the crossing order.
template <class R>
R c_p(R p, const theta_tols<R>& tol = {}) {
    using std::log;
    const R lb = beta(p, R(0), R(0.5), tol).log_value / log(R(2));
    if (!(lb < R(1)))
        throw std::domain_error("undefined: b_0(1/2) >= 2 at this order");
    return R(1) / (R(1) - lb);
}

// Closed-form upper bound ln2 / (ln2 - asinh(2^-p) - asinh(2^p)/2^p);
// its denominator turns positive near p ~ 2.2241.
template <class R>
R c_p_bound(R p) {
    using std::asinh;
    using std::log;
    using std::pow;
    const R l2 = log(R(2));
    const R tp = pow(R(2), p);
    const R den = l2 - asinh(R(1) / tp) - asinh(tp) / tp;
    if (!(den > R(0)))
        throw std::domain_error("bound undefined at this order");
    return l2 / den;
}

// Counting-gadget quality profile: decoding shells alpha_A <= alpha_G and
// the per-dimension count budgets nu0 (short vectors) and nu1 (shifted
// centers).
template <class R = double>
struct gadget_profile {
    R alpha_G, alpha_A, nu0, nu1;
};

template <class R>
void check_profile(const gadget_profile<R>& g) {
    if (!(g.alpha_A > R(0)) || !(g.alpha_A <= g.alpha_G))
        throw std::domain_error("need 0 < alpha_A <= alpha_G");
    if (!(g.nu0 > R(1)) || !(g.nu1 > R(1)))
        throw std::domain_error("need nu0 > 1 and nu1 > 1");
}

template <class R>
struct seth_result {
    R alpha, d0, d1;
    bool min_is_alpha_A;  // which branch of the inner min was active
};

template <class R>
seth_result<R> generic_alpha_seth(R p, const gadget_profile<R>& g, R gamma,
                                  R C, const theta_tols<R>& tol = {}) {
    using std::exp;
    using std::log;
    using std::pow;
    check_profile(g);
    if (!(gamma > R(1))) throw std::domain_error("need gamma > 1");
    if (!(C > R(1))) throw std::domain_error("need C > 1");
    // Budgets and radii live on logs: (C-1) log nu can be in the thousands
    // while the final alpha stays small, so intermediate overflow would be
    // purely an artifact.
    const R ln_d0 = beta_inv_ln(p, R(0), (C - R(1)) * log(g.nu0), tol);
    const R ln_nu1C = (C - R(1)) * log(g.nu1);
    const R ln_d1 = beta_inv_ln(
        p, R(0.5), ln_nu1C > log(R(2)) ? ln_nu1C : log(R(2)), tol);
    const R agp = pow(g.alpha_G, p);
    const R aap = pow(g.alpha_A, p);
    const R ln_2d0 = log(R(2)) + ln_d0;
    const R inv_twod0p = exp(-p * ln_2d0);  // underflows gracefully to 0
    const R cand = exp(p * (log(R(2)) + ln_d1 - ln_2d0)) - inv_twod0p;
    const bool a_branch = aap <= cand;
    const R m = a_branch ? aap : cand;
    const R val = agp + (agp - m) / (pow(gamma, p) - R(1)) + inv_twod0p;
    return {pow(val, R(1) / p), exp(ln_d0), exp(ln_d1), a_branch};
}

template <class R>
R generic_alpha_eth(R p, const gadget_profile<R>& g, R gamma) {
    using std::pow;
    if (!(g.alpha_A > R(0)) || !(g.alpha_A <= g.alpha_G))
        throw std::domain_error("need 0 < alpha_A <= alpha_G");
    if (!(gamma > R(1))) throw std::domain_error("need gamma > 1");
    const R agp = pow(g.alpha_G, p);
    const R aap = pow(g.alpha_A, p);
    const R m = aap < R(1) ? aap : R(1);
    return pow(agp + (agp - m) / (pow(gamma, p) - R(1)), R(1) / p);
}

// ---------------------------------------------------------------------------
// Two-parameter infimum  inf_{t in [0,1/2], a > t}  a / b_0^{-1}(b_t(a)).
// The surface is flat near its minimum, so the strategy is: cheap tabulated
// inverse for a dense coarse scan, pattern-search descent from the best
// cells, then one exact re-evaluation at the winner.

struct ddagger_result {
    double alpha, t_star, a_star;
};

namespace detail {

// log b_0 sampled on a log-spaced grid; inverts by binary search + linear
// interpolation in log-log space.  Accurate to ~3e-5 relative, which is
// plenty for steering the search (the final value is recomputed exactly).
class beta0_inverse_table {
  public:
    beta0_inverse_table(double p, const theta_tols<double>& tol) {
        const double lo = std::log(1e-6), hi = std::log(25.0);
        ln_a_.resize(kPoints + 1);
        ln_b_.resize(kPoints + 1);
        for (int i = 0; i <= kPoints; ++i) {
            ln_a_[i] = lo + (hi - lo) * i / kPoints;
            ln_b_[i] = beta(p, 0.0, std::exp(ln_a_[i]), tol).log_value;
        }
    }

    // a such that log b_0(a) = ln_nu; 0 below range, +inf above.
    double inv(double ln_nu) const {
        if (ln_nu <= ln_b_.front()) return 0.0;
        if (ln_nu >= ln_b_.back())
            return std::numeric_limits<double>::infinity();
        auto it = std::lower_bound(ln_b_.begin(), ln_b_.end(), ln_nu);
        std::size_t j = std::size_t(it - ln_b_.begin());
        double w = (ln_nu - ln_b_[j - 1]) / (ln_b_[j] - ln_b_[j - 1]);
        return std::exp(ln_a_[j - 1] + w * (ln_a_[j] - ln_a_[j - 1]));
    }

  private:
    static constexpr int kPoints = 2048;
    std::vector<double> ln_a_, ln_b_;
};

}  // namespace detail

inline ddagger_result alpha_ddagger(double p,
                                    const theta_tols<double>& tol = {}) {
    check_tols(tol);
    if (!(p >= 1.0)) throw std::domain_error("p must be >= 1");
    const detail::beta0_inverse_table table(p, tol);
    const double inf = std::numeric_limits<double>::infinity();

    // Offset parametrization a = t + s keeps the log grid meaningful near
    // the a -> t+ corner, where the infimum sits for large p.
    auto objective = [&](double t, double s) {
        const double a = t + s;
        if (s < 1e-7 || a > 20.0) return inf;
        const double ln_nu = beta(p, t, a, tol).log_value;
        const double inv = table.inv(ln_nu);
        return (inv > 0.0 && std::isfinite(inv)) ? a / inv : inf;
    };

    struct cell {
        double f, t, s;
    };
    std::vector<cell> cells;
    for (int i = 0; i <= 32; ++i) {
        const double t = i / 64.0;
        const double s_lo = std::log(1e-6), s_hi = std::log(20.0 - t);
        for (int j = 0; j < 200; ++j) {
            const double s = std::exp(s_lo + (s_hi - s_lo) * j / 199.0);
            cells.push_back({objective(t, s), t, s});
        }
    }
    std::partial_sort(cells.begin(), cells.begin() + 5, cells.end(),
                      [](const cell& x, const cell& y) { return x.f < y.f; });

    cell best = cells[0];
    for (int start = 0; start < 5; ++start) {
        cell cur = cells[start];
        if (!std::isfinite(cur.f)) continue;
        double dt = 1.0 / 128.0;
        double lm = std::log(2.0);  // multiplicative step for s, in logs
        while (dt > 1e-6 || lm > 5e-7) {
            bool improved = false;
            for (double tn : {cur.t - dt, cur.t + dt}) {
                tn = std::clamp(tn, 0.0, 0.5);
                const double f = objective(tn, cur.s);
                if (f < cur.f) {
                    cur = {f, tn, cur.s};
                    improved = true;
                }
            }
            for (double sn : {cur.s * std::exp(lm), cur.s * std::exp(-lm)}) {
                sn = std::clamp(sn, 1e-7, 20.0 - cur.t);
                const double f = objective(cur.t, sn);
                if (f < cur.f) {
                    cur = {f, cur.t, sn};
                    improved = true;
                }
            }
            if (!improved) {
                dt /= 2.0;
                lm /= 2.0;
            }
        }
        if (cur.f < best.f) best = cur;
    }
    if (!std::isfinite(best.f))
        throw convergence_error("infimum search found no finite cell");

    // Exact re-evaluation at the located argmin; the surface is flat there,
    // so table steering error does not propagate into the value.
    const double a_star = best.t + best.s;
    const double ln_nu = beta(p, best.t, a_star, tol).log_value;
    const double alpha = a_star / beta_inv(p, 0.0, std::exp(ln_nu), tol);
    if (alpha < 0.5 - 1e-6 || alpha > 1.0 + 1e-6)
        throw convergence_error("infimum left the proven envelope [1/2, 1]");
    return {std::clamp(alpha, 0.5, 1.0), best.t, a_star};
}

// ---------------------------------------------------------------------------
// Geometry selection for the counting gadget: picks outer/inner radii
// coefficients (a, b) strictly inside the feasible region cut out by the
// four decoding constraints, taking midpoints in p-th-power coordinates.

struct reduction_geometry {
    double a, b, d0, d1;
    double C, gamma;
};

inline void validate_reduction_geometry(double p, double alpha,
                                        const gadget_profile<double>& prof,
                                        const reduction_geometry& g) {
    const double half = std::pow(0.5, p);
    const double ap = std::pow(g.a, p), bp = std::pow(g.b, p);
    const double gp = std::pow(g.gamma, p);
    const double agd = std::pow(prof.alpha_G * g.d0, p);
    const double aad = std::pow(prof.alpha_A * g.d0, p);
    if (!(g.a / alpha < g.d0))
        throw infeasible_error("outer radius reaches the decoding shell");
    const double x2 = ap - gp * bp - half;
    if (x2 > 0.0 && !(x2 < aad))
        throw infeasible_error("approximate-count shell too wide");
    if (!(ap - bp - half > agd))
        throw infeasible_error("exact-count shell too narrow");
    const double x4 = ap - gp * bp;
    if (x4 > 0.0 && !(x4 < std::pow(g.d1, p)))
        throw infeasible_error("shifted-center shell too wide");
}

inline reduction_geometry choose_reduction_geometry(
    double p, const gadget_profile<double>& prof, double gamma, double C,
    double alpha, const theta_tols<double>& tol = {}) {
    if (!(alpha > 0.0)) throw std::domain_error("need alpha > 0");
    const auto sr = generic_alpha_seth(p, prof, gamma, C, tol);
    const double d0 = sr.d0, d1 = sr.d1;

    const double half = std::pow(0.5, p);
    const double gp = std::pow(gamma, p);
    const double agd = std::pow(prof.alpha_G * d0, p);
    const double aad = std::pow(prof.alpha_A * d0, p);
    const double d1p = std::pow(d1, p);

    const double lo_ap =
        agd + (agd - std::min(aad, d1p - half)) / (gp - 1.0) + half;
    const double hi_ap = std::pow(alpha * d0, p);
    if (!(lo_ap < hi_ap))
        throw infeasible_error(
            "no admissible outer radius: decoding parameter at or below " +
            std::to_string(sr.alpha));
    const double ap = (lo_ap + hi_ap) / 2.0;

    double lo_bp = (ap - std::min(half + aad, d1p)) / gp;
    lo_bp = std::max(lo_bp, 0.0);
    const double hi_bp = ap - half - agd;
    if (!(lo_bp < hi_bp) || !(hi_bp > 0.0))
        throw infeasible_error("no admissible inner radius");
    const double bp = (lo_bp + hi_bp) / 2.0;

    reduction_geometry g{std::pow(ap, 1.0 / p), std::pow(bp, 1.0 / p),
                         d0,     d1,
                         C,      gamma};
    validate_reduction_geometry(p, alpha, prof, g);
    return g;
}

// ---------------------------------------------------------------------------
// One row of the constants table.

struct constants_row {
    double p = 0.0;
    double alpha_star = std::numeric_limits<double>::quiet_NaN();
    double alpha_ddagger = std::numeric_limits<double>::quiet_NaN();
    double t_star = std::numeric_limits<double>::quiet_NaN();
    double a_star = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> alpha_dagger_at;      // aligned with the C list
    std::vector<bool> dagger_min_is_alpha_A;  // active branch per C
    double alpha_kn = std::numeric_limits<double>::quiet_NaN();
    bool above_p0 = false;
    double cp = std::numeric_limits<double>::quiet_NaN();        // above p0 only
    double cp_bound = std::numeric_limits<double>::quiet_NaN();  // where defined
    std::string error;
};

inline constants_row build_constants_row(double p, const std::vector<double>& Cs,
                                         const kissing_constant& k = {},
                                         const theta_tols<double>& tol = {}) {
    check_kissing(k);
    constants_row row;
    row.p = p;
    try {
        row.alpha_kn = alpha_kn(k);
        row.alpha_star = alpha_star(p, tol);
        const auto dd = alpha_ddagger(p, tol);
        row.alpha_ddagger = dd.alpha;
        row.t_star = dd.t_star;
        row.a_star = dd.a_star;
        const double nu0 = std::pow(2.0, k.c_kn);
        for (double C : Cs) {
            row.alpha_dagger_at.push_back(alpha_dagger(p, C, k, tol));
            // Branch bookkeeping from the generic bound at the same plug-ins;
            // nu1 carries 10x the short-vector budget so the shifted-shell
            // term stays out of the way at every C.
            gadget_profile<double> prof{1.0, 1.0, nu0,
                                        nu0 * std::pow(10.0, 1.0 / (C - 1.0))};
            row.dagger_min_is_alpha_A.push_back(
                generic_alpha_seth(p, prof, 2.0, C, tol).min_is_alpha_A);
        }
        const double lb2 = beta(p, 0.0, 0.5, tol).log_value / std::log(2.0);
        row.above_p0 = lb2 < 1.0;
        if (row.above_p0) row.cp = 1.0 / (1.0 - lb2);
        try {
            row.cp_bound = c_p_bound(p);
        } catch (const std::domain_error&) {
            // below the closed form's domain: leave the cell empty
        }
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

}  // namespace latred
