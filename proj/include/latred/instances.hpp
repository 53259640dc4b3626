#pragma once

#include <string>
#include <vector>

#include "latred/basis.hpp"
#include "latred/counting.hpp"
#include "latred/errors.hpp"
#include "latred/rational.hpp"

namespace latred {

// Problem instances for the reduction chain, plus brute-force classifiers
// that evaluate every promise quantity by exact enumeration at desk scale.
// Real scalars that only ever enter comparisons through their p-th powers
// (radii, approximation factors) are stored as exact rational p-th powers;
// the classifiers never round them.

enum class promise_case { yes, no, neither };

inline const char* promise_name(promise_case c) {
    switch (c) {
        case promise_case::yes: return "YES";
        case promise_case::no: return "NO";
        default: return "NEITHER";
    }
}

// Binary-combination CVP: YES if some x in {0,1}^n has ||Bx - t||_p <= 1,
// NO if dist_p(t, L) > gamma.
struct cvp_prime_instance {
    rational_basis basis;
    rat_vec target;
    rat gamma_pow = rat(1);  // gamma^p
};

// Promise dist_p(t, L) <= alpha * lambda_1(L); the classifier checks it and
// hands back the closest vector.
//
// Instances produced by the reduction pipeline may carry a per-coordinate
// weight vector: coordinate i contributes weight_pow[i] * |v_i|^p to every
// cost. That is how irrational block scales (s, l with rational s^p, l^p)
// stay exactly rational end to end. Empty means all weights are 1.
struct bdd_instance {
    rational_basis basis;
    rat_vec target;
    rat alpha_pow;  // alpha^p
    rat_vec weight_pow;
};

// Counting relaxation of decisional BDD: YES needs at most A short nonzero
// vectors below r/alpha and at least G lattice points within r of the
// target; NO caps the points near the target at A.
struct agbdd_instance {
    rational_basis basis;
    rat_vec target;
    rat r_pow;      // r^p
    rat alpha_pow;  // alpha^p
    bigint a_bound;
    bigint g_bound;
    rat_vec weight_pow;
};

// Counting GapCVP: YES needs at least G points within r of the target; NO
// bounds the layered count A_{p,u} at radius gamma'(r^p + u^p)^{1/p} by A.
struct aggapcvp_instance {
    rational_basis basis;
    rat_vec target;
    rat r_pow;
    rat u_pow;
    rat gamma_prime_pow = rat(1);
    bigint a_bound;
    bigint g_bound;
    rat_vec weight_pow;
};

struct svp_instance {
    rational_basis basis;
    rat r_pow;
    rat gamma_pow = rat(1);
    rat_vec weight_pow;
};

// ---------------------------------------------------------------------------
// Validation.

inline void check_target_dim(const rational_basis& b, const rat_vec& t) {
    check_basis(b);
    if (int(t.size()) != b.dim())
        throw std::domain_error("target dimension does not match the basis");
}

inline void check_weight_dim(const rational_basis& b, const rat_vec& w) {
    if (w.empty()) return;
    if (int(w.size()) != b.dim())
        throw std::domain_error("weight dimension does not match the basis");
    for (const rat& wi : w)
        if (!(wi > 0)) throw std::domain_error("weights must be positive");
}

inline void check_instance(const cvp_prime_instance& inst) {
    check_target_dim(inst.basis, inst.target);
    if (inst.gamma_pow < 1) throw std::domain_error("need gamma >= 1");
}

inline void check_instance(const bdd_instance& inst) {
    check_target_dim(inst.basis, inst.target);
    check_weight_dim(inst.basis, inst.weight_pow);
    if (!(inst.alpha_pow > 0)) throw std::domain_error("need alpha > 0");
}

inline void check_instance(const agbdd_instance& inst) {
    check_target_dim(inst.basis, inst.target);
    check_weight_dim(inst.basis, inst.weight_pow);
    if (!(inst.r_pow > 0)) throw std::domain_error("need r > 0");
    if (!(inst.alpha_pow > 0)) throw std::domain_error("need alpha > 0");
    if (inst.a_bound < 0 || inst.g_bound <= inst.a_bound)
        throw std::domain_error("need counts G > A >= 0");
}

inline void check_instance(const aggapcvp_instance& inst) {
    check_target_dim(inst.basis, inst.target);
    check_weight_dim(inst.basis, inst.weight_pow);
    if (!(inst.r_pow > 0) || !(inst.u_pow > 0))
        throw std::domain_error("need r > 0 and u > 0");
    if (inst.gamma_prime_pow < 1) throw std::domain_error("need gamma' >= 1");
    if (inst.a_bound < 0 || inst.g_bound < 0)
        throw std::domain_error("counts must be nonnegative");
}

inline void check_instance(const svp_instance& inst) {
    check_basis(inst.basis);
    check_weight_dim(inst.basis, inst.weight_pow);
    if (!(inst.r_pow > 0)) throw std::domain_error("need r > 0");
    if (inst.gamma_pow < 1) throw std::domain_error("need gamma >= 1");
}

// The downstream embedding theorem wants a wide count gap; callers verify it
// where they rely on it rather than at construction.
inline bool count_gap_ok(const aggapcvp_instance& inst) {
    return inst.g_bound >= 1000 * inst.a_bound;
}

// ---------------------------------------------------------------------------
// Classifiers.

struct cvp_prime_report {
    promise_case status;
    rat best_binary_pow;            // min over binary combinations
    std::vector<int> binary_witness;
    rat dist_pow;                   // exact dist^p to the whole lattice
    rat_vec closest;
};

inline cvp_prime_report classify_cvp_prime(const cvp_prime_instance& inst,
                                           double p,
                                           const enumeration_budget& budget = {}) {
    check_instance(inst);
    if (inst.basis.rank() > 20)
        throw std::domain_error("rank exceeds the binary sweep cap");
    unsigned pint = 0;
    const bool exact = detail::integer_order(p, pint);

    const int n = inst.basis.rank();
    cvp_prime_report rep;
    rep.binary_witness.assign(std::size_t(n), 0);
    bool have = false;
    std::uint64_t nodes = 0;
    std::vector<int> x(std::size_t(n), 0);
    for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << n); ++mask) {
        detail::bump_nodes(nodes, budget.max_nodes, "binary sweep budget");
        rat_vec coeffs(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            x[std::size_t(j)] = int((mask >> j) & 1u);
            coeffs[std::size_t(j)] = rat(x[std::size_t(j)]);
        }
        const rat_vec res = vec_sub(inst.target, basis_vec(inst.basis, coeffs));
        const auto cost = detail::residual_cost(res, {}, p, pint, exact);
        const rat cost_pow = exact ? cost.value_rat : rat_of_double(cost.value_real);
        if (!have || cost_pow < rep.best_binary_pow) {
            rep.best_binary_pow = cost_pow;
            rep.binary_witness = x;
            have = true;
        }
    }

    const auto nearest = dist_to_lattice(inst.basis, p, inst.target, budget);
    rep.dist_pow = nearest.cost_pow;
    rep.closest = nearest.vector;

    if (rep.best_binary_pow <= 1)
        rep.status = promise_case::yes;
    else if (rep.dist_pow > inst.gamma_pow)
        rep.status = promise_case::no;
    else
        rep.status = promise_case::neither;
    return rep;
}

struct bdd_report {
    bool promise_holds;  // dist <= alpha * lambda_1
    rat dist_pow;
    rat lambda1_pow;
    rat_vec witness;     // closest lattice vector to the target
};

inline bdd_report classify_bdd(const bdd_instance& inst, double p,
                               const enumeration_budget& budget = {}) {
    check_instance(inst);
    const auto nearest = dist_to_lattice(inst.basis, p, inst.target, budget,
                                         inst.weight_pow);
    const auto shortest = min_distance(inst.basis, p, budget, inst.weight_pow);
    bdd_report rep;
    rep.dist_pow = nearest.cost_pow;
    rep.lambda1_pow = shortest.cost_pow;
    rep.witness = nearest.vector;
    rep.promise_holds = rep.dist_pow <= inst.alpha_pow * rep.lambda1_pow;
    return rep;
}

struct agbdd_report {
    promise_case status;
    bigint n_close;  // N_p(L, r, t), closed
    bigint n_short;  // N_p(L \ {0}, < r/alpha, 0), strict
};

inline agbdd_report classify_agbdd(const agbdd_instance& inst, double p,
                                   const enumeration_budget& budget = {}) {
    check_instance(inst);
    unsigned pint = 0;
    const bool exact = detail::integer_order(p, pint);
    agbdd_report rep;
    rep.n_close = count_lattice(inst.basis, p, inst.r_pow, inst.target, false,
                                budget, inst.weight_pow, exact)
                      .count;
    const rat short_pow = inst.r_pow / inst.alpha_pow;
    rep.n_short = count_lattice(inst.basis, p, short_pow, {}, true, budget,
                                inst.weight_pow, exact)
                      .count -
                  1;  // drop the zero vector
    if (rep.n_short <= inst.a_bound && rep.n_close >= inst.g_bound)
        rep.status = promise_case::yes;
    else if (rep.n_close <= inst.a_bound)
        rep.status = promise_case::no;
    else
        rep.status = promise_case::neither;
    return rep;
}

struct aggapcvp_report {
    promise_case status;
    bigint n_close;       // N_p(L, r, t), closed
    bigint layered_count; // A_{p,u} at radius gamma'(r^p + u^p)^{1/p}
};

inline aggapcvp_report classify_aggapcvp(const aggapcvp_instance& inst, double p,
                                         const enumeration_budget& budget = {}) {
    check_instance(inst);
    unsigned pint = 0;
    const bool exact = detail::integer_order(p, pint);
    aggapcvp_report rep;
    rep.n_close = count_lattice(inst.basis, p, inst.r_pow, inst.target, false,
                                budget, inst.weight_pow, exact)
                      .count;
    const rat rprime_pow = inst.gamma_prime_pow * (inst.r_pow + inst.u_pow);
    rep.layered_count = a_pu(inst.basis, p, inst.u_pow, rprime_pow,
                             inst.target, budget, inst.weight_pow);
    if (rep.n_close >= inst.g_bound)
        rep.status = promise_case::yes;
    else if (rep.layered_count <= inst.a_bound)
        rep.status = promise_case::no;
    else
        rep.status = promise_case::neither;
    return rep;
}

struct svp_report {
    promise_case status;
    rat lambda1_pow;
    rat_vec shortest;
};

inline svp_report classify_svp(const svp_instance& inst, double p,
                               const enumeration_budget& budget = {}) {
    check_instance(inst);
    const auto sh = min_distance(inst.basis, p, budget, inst.weight_pow);
    svp_report rep;
    rep.lambda1_pow = sh.cost_pow;
    rep.shortest = sh.vector;
    if (rep.lambda1_pow <= inst.r_pow)
        rep.status = promise_case::yes;
    else if (rep.lambda1_pow > inst.gamma_pow * inst.r_pow)
        rep.status = promise_case::no;
    else
        rep.status = promise_case::neither;
    return rep;
}

}  // namespace latred
