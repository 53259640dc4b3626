#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "latred/reductions.hpp"

using namespace latred;

namespace {

rat abs_det(const rational_basis& b) { return rat_abs(det(b.m)); }

long dot_mod(const std::vector<bigint>& coeffs, const std::vector<long>& x,
             long q) {
    bigint acc = 0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) acc += coeffs[i] * x[i];
    bigint m = acc % q;
    if (m < 0) m += q;
    return long(m.get_si());
}

}  // namespace

TEST_CASE("random streams are reproducible and unbiased enough") {
    random_stream a(42, 7), b(42, 7), c(42, 8);
    for (int i = 0; i < 64; ++i) CHECK(a.next() == b.next());
    bool differs = false;
    random_stream a2(42, 7);
    for (int i = 0; i < 64; ++i) differs |= (a2.next() != c.next());
    CHECK(differs);

    random_stream r(1, 0);
    for (int i = 0; i < 1000; ++i) CHECK(r.below(11) < 11);
    CHECK_THROWS_AS(r.below(0), std::domain_error);

    // unit() in [0,1), normal() finite
    random_stream g(9, 3);
    for (int i = 0; i < 100; ++i) {
        const double u = g.unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(std::isfinite(g.normal()));
    }
}

TEST_CASE("sublattice bases mod q") {
    const auto z3 = zn_basis(3);

    SUBCASE("zero form returns the original lattice") {
        const auto out = sublattice_basis_mod_q(z3, 5, {0, 0, 0});
        CHECK(out.m == z3.m);
        CHECK(abs_det(out) == 1);
    }

    SUBCASE("membership and index on the worked example") {
        const std::vector<long> x = {1, 1, 2};
        const auto out = sublattice_basis_mod_q(z3, 3, x);
        CHECK(abs_det(out) == 3);
        for (int j = 0; j < out.rank(); ++j) {
            const auto coeffs = coefficients_of(z3, out.column(j));
            CHECK(dot_mod(coeffs, x, 3) == 0);
        }
    }

    SUBCASE("determinant ratio is exactly q on skewed bases") {
        rational_basis b;
        b.m = {{rat(2), rat(1), rat(0)},
               {rat(0), rat(3), rat(1)},
               {rat(1), rat(0), rat(2)}};
        const rat base = abs_det(b);
        for (long q : {2L, 5L, 7L}) {
            const auto out = sublattice_basis_mod_q(b, q, {0, q - 1, 3 % q});
            CHECK(abs_det(out) == base * q);
            for (int j = 0; j < out.rank(); ++j) {
                const auto coeffs = coefficients_of(b, out.column(j));
                std::vector<long> x = {0, q - 1, 3 % q};
                CHECK(dot_mod(coeffs, x, q) == 0);
            }
        }
    }

    SUBCASE("pivot construction matches the hermite form of all kernel residues") {
        // Independent route: collect every coefficient vector in [0,q)^3
        // satisfying <c, x> = 0 mod q, add q e_i, and reduce to a hermite
        // form; the pivot construction must generate the same lattice.
        const long q = 3;
        const std::vector<long> x = {1, 1, 2};
        std::vector<std::vector<bigint>> gens;
        for (long a = 0; a < q; ++a)
            for (long b2 = 0; b2 < q; ++b2)
                for (long c = 0; c < q; ++c)
                    if ((a * x[0] + b2 * x[1] + c * x[2]) % q == 0)
                        gens.push_back({bigint(a), bigint(b2), bigint(c)});
        for (int i = 0; i < 3; ++i) {
            std::vector<bigint> e(3, 0);
            e[std::size_t(i)] = q;
            gens.push_back(e);
        }
        const auto want = hnf_columns(gens, 3);

        const auto out = sublattice_basis_mod_q(z3, q, x);
        std::vector<std::vector<bigint>> cols;
        for (int j = 0; j < out.rank(); ++j) {
            const auto coeffs = coefficients_of(z3, out.column(j));
            cols.push_back(coeffs);
        }
        CHECK(hnf_columns(cols, 3) == want);
    }

    SUBCASE("rejects bad moduli and mismatched forms") {
        CHECK_THROWS_AS(sublattice_basis_mod_q(z3, 6, {1, 0, 0}),
                        std::domain_error);
        CHECK_THROWS_AS(sublattice_basis_mod_q(z3, 3, {1, 0}),
                        std::domain_error);
    }
}

TEST_CASE("sparsification shifts targets within the lattice") {
    const auto z3 = zn_basis(3);
    const rat_vec t = {rat(1, 2), rat(1, 3), rat(0)};

    SUBCASE("zero shift keeps the target") {
        sparsify_spec spec;
        spec.q = 5;
        spec.x = {1, 2, 3};
        spec.z = {0, 0, 0};
        const auto sp = sparsify(z3, t, spec);
        CHECK(sp.target == t);
        CHECK(abs_det(sp.basis) == 5);
    }

    SUBCASE("target moves by exactly Bz") {
        sparsify_spec spec;
        spec.q = 5;
        spec.x = {0, 1, 0};
        spec.z = {1, 4, 2};
        const auto sp = sparsify(z3, t, spec);
        CHECK(sp.target == rat_vec{rat(1, 2) - 1, rat(1, 3) - 4, rat(-2)});
    }

    SUBCASE("minimum distance never drops under sparsification") {
        rational_basis b;
        b.m = {{rat(2), rat(1)}, {rat(0), rat(1)}};
        const rat lam = min_distance(b, 2.0).cost_pow;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            random_stream rng(seed, 0);
            const auto spec = sample_sparsify_spec(7, 2, rng);
            const auto sp = sparsify(b, rat_vec{rat(0), rat(0)}, spec);
            CHECK(min_distance(sp.basis, 2.0).cost_pow >= lam);
        }
    }

    SUBCASE("targets outside the span are rejected") {
        rational_basis line;
        line.m = {{rat(1)}, {rat(1)}};
        CHECK_THROWS_AS(
            sparsify(line, rat_vec{rat(1), rat(0)},
                     sparsify_spec{3, {1}, {0}, 0}),
            std::domain_error);
    }
}

TEST_CASE("sparsification tail bounds hold empirically") {
    const auto z4 = zn_basis(4);
    const rat_vec half(4, rat(1, 2));

    SUBCASE("short, drop and too-close frequencies stay under their bounds") {
        // r_short^2 = 2 gives exactly 8 nonzero vectors strictly inside.
        const auto rep = sparsify_stats(z4, half, 2.0, 11, rat(2), rat(1),
                                        rat(1, 2), 2000, 20240501);
        CHECK(rep.n_short == 8);
        CHECK(rep.n_close == 16);
        CHECK(rep.n_tooclose == 0);
        CHECK(rep.short_vec.bound == doctest::Approx(8.0 / 11.0));
        CHECK(rep.short_vec.pass);
        CHECK(rep.close_drop.pass);
        CHECK(rep.too_close.pass);
        CHECK(rep.too_close.empirical == 0.0);
    }

    SUBCASE("too-close frequency sits near its bound when q is large") {
        const rat_vec off = {rat(1, 10), rat(0), rat(0), rat(0)};
        const auto rep = sparsify_stats(z4, off, 2.0, 101, rat(0), rat(1, 4),
                                        rat(1, 4), 2000, 7);
        CHECK(rep.n_tooclose == 1);
        CHECK(rep.too_close.bound == doctest::Approx(1.0 / 101.0));
        CHECK(rep.too_close.pass);
        // the single close point survives the shift about once per q trials
        CHECK(rep.too_close.empirical >=
              rep.too_close.bound - 3.0 * rep.too_close.sigma);
    }

    SUBCASE("zero radii make every bad event impossible") {
        const rat_vec off = {rat(1, 10), rat(0), rat(0), rat(0)};
        const auto rep =
            sparsify_stats(z4, off, 2.0, 11, rat(0), rat(0), rat(0), 200, 3);
        CHECK(rep.short_vec.empirical == 0.0);
        CHECK(rep.close_drop.empirical == 0.0);
        CHECK(rep.too_close.empirical == 0.0);
    }

    SUBCASE("parameter validation") {
        CHECK_THROWS_AS(sparsify_stats(z4, half, 2.0, 10, rat(1), rat(1),
                                       rat(1), 10, 0),
                        std::domain_error);
        CHECK_THROWS_AS(sparsify_stats(z4, half, 2.0, 11, rat(1), rat(1),
                                       rat(1), 0, 0),
                        std::domain_error);
        CHECK_THROWS_AS(sparsify_stats(z4, half, 2.0, 11, rat(-1), rat(1),
                                       rat(1), 10, 0),
                        std::domain_error);
    }
}

namespace {

// Exercise the three gadget-transform count inequalities on one instance.
void check_gadget_inequalities(const rational_basis& bp, const rat_vec& tp,
                               const rat& s_pow, const rational_basis& bg,
                               const rat_vec& tg, double p, const rat& r_pow,
                               const rat& gamma_pow, bool planted_yes,
                               bool planted_no) {
    const auto g = gadget_transform(bp, tp, s_pow, bg, tg);
    const int np = bp.rank();
    unsigned pint = 0;
    const bool exact = detail::integer_order(p, pint);
    const rat two_p = real_power_pow(p, 2);

    const auto ds = direct_sum(zn_basis(np), bg);
    rat_vec ds_t(std::size_t(np), rat(1, 2));
    ds_t.insert(ds_t.end(), tg.begin(), tg.end());

    // short vectors never multiply: strict counts of the transform are
    // bounded by strict counts of the unscaled direct sum
    const bigint lhs1 = count_lattice(g.basis, p, r_pow, g.target, true, {},
                                      g.weight_pow, exact)
                            .count;
    const bigint rhs1 =
        count_lattice(ds, p, r_pow, ds_t, true, {}, {}, exact).count;
    CHECK(lhs1 <= rhs1);

    if (planted_yes) {
        // close vectors survive: closed count at (s^p + n'/2^p + r^p)^{1/p}
        // dominates the gadget's own close count
        const rat big_pow = s_pow + rat(np) / two_p + r_pow;
        const bigint lhs2 = count_lattice(g.basis, p, big_pow, g.target, false,
                                          {}, g.weight_pow, exact)
                                .count;
        const bigint rhs2 =
            count_lattice(bg, p, r_pow, tg, false, {}, {}, exact).count;
        CHECK(lhs2 >= rhs2);
    }
    if (planted_no) {
        // far targets stay far: closed count at (gamma^p s^p + r^p)^{1/p} is
        // bounded by the strict direct-sum count at r
        const rat no_pow = gamma_pow * s_pow + r_pow;
        const bigint lhs3 = count_lattice(g.basis, p, no_pow, g.target, false,
                                          {}, g.weight_pow, exact)
                                .count;
        CHECK(lhs3 <= rhs1);
    }
}

}  // namespace

TEST_CASE("gadget transform carries scales exactly") {
    rational_basis bp;
    bp.m = {{rat(4), rat(0)}, {rat(0), rat(4)}};
    const rat_vec t_yes = {rat(4), rat(4)};

    SUBCASE("shapes and weight layout") {
        const auto g = gadget_transform(bp, t_yes, rat(2), zn_basis(3),
                                        rat_vec(3, rat(1, 2)));
        CHECK(g.basis.dim() == 2 + 2 + 3);
        CHECK(g.basis.rank() == 2 + 3);
        CHECK(g.target.size() == 7);
        CHECK(g.target[2] == rat(1, 2));
        CHECK(g.weight_pow ==
              rat_vec{rat(2), rat(2), rat(1), rat(1), rat(1), rat(1), rat(1)});
        check_basis(g.basis);
    }

    SUBCASE("planted YES keeps the gadget's close count") {
        // irrational scale s = sqrt(2) travels as weight 2
        check_gadget_inequalities(bp, t_yes, rat(2), zn_basis(3),
                                  rat_vec(3, rat(1, 2)), 2.0, rat(3, 4),
                                  rat(4), true, false);
    }

    SUBCASE("planted NO stays bounded by the direct sum") {
        const rat_vec t_no = {rat(2), rat(2)};  // dist^2 = 8 > gamma^2 = 4
        for (const rat& rp : {rat(3, 4), rat(1), rat(2)})
            check_gadget_inequalities(bp, t_no, rat(2), zn_basis(3),
                                      rat_vec(3, rat(1, 2)), 2.0, rp, rat(4),
                                      false, true);
    }

    SUBCASE("inequalities hold across random planted instances") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            random_stream rng(91, seed);
            const int np = 2 + int(rng.below(2));   // 2..3
            const int ng = 2 + int(rng.below(2));   // gadget rank 2..3
            const double p = double(1 + rng.below(3));

            rational_basis b;
            b.m.assign(std::size_t(np), rat_vec(std::size_t(np), rat(0)));
            for (int i = 0; i < np; ++i)
                b.m[std::size_t(i)][std::size_t(i)] = rat(2 + long(rng.below(3)));
            // one random column mix keeps determinants honest
            const int src = int(rng.below(std::uint64_t(np)));
            const int dst = (src + 1) % np;
            for (int i = 0; i < np; ++i)
                b.m[std::size_t(i)][std::size_t(dst)] +=
                    b.m[std::size_t(i)][std::size_t(src)];

            const bool yes = (rng.below(2) == 0);
            rat_vec tp(static_cast<std::size_t>(np));
            if (yes) {
                // B x for binary x, plus a tiny sub-unit offset
                rat_vec coeffs(static_cast<std::size_t>(np));
                for (auto& cc : coeffs) cc = rat(long(rng.below(2)));
                tp = basis_vec(b, coeffs);
                tp[0] += rat(1, 4);
            } else {
                for (auto& v : tp) v = rat(long(20 + rng.below(10))) / 3;
            }
            const rat gamma_pow = rat(2);
            const auto probe = dist_to_lattice(b, p, tp);
            const bool truly_no = probe.cost_pow > gamma_pow;
            const rat s_pow = rat(1 + long(rng.below(3))) / 2;
            const rat r_pow = rat(1 + long(rng.below(8))) / 2;
            check_gadget_inequalities(b, tp, s_pow, zn_basis(ng),
                                      rat_vec(std::size_t(ng), rat(1, 2)), p,
                                      r_pow, gamma_pow, yes,
                                      !yes && truly_no);
        }
    }

    SUBCASE("dimension and span validation") {
        CHECK_THROWS_AS(gadget_transform(bp, rat_vec{rat(1)}, rat(1),
                                         zn_basis(2), rat_vec(2, rat(0))),
                        std::domain_error);
        rational_basis line;
        line.m = {{rat(1)}, {rat(1)}};
        CHECK_THROWS_AS(gadget_transform(bp, t_yes, rat(1), line,
                                         rat_vec{rat(1), rat(0)}),
                        std::domain_error);
        CHECK_THROWS_AS(gadget_transform(bp, t_yes, rat(0), zn_basis(2),
                                         rat_vec(2, rat(0))),
                        std::domain_error);
    }
}

TEST_CASE("decision reduction drops to a zero-one promise") {
    // Z^12 with the all-halves target: 2^12 close vectors at r^2 = 3 and no
    // nonzero vector strictly inside r / alpha, so (A, G) = (1, 4096) and
    // the regime G >= 400 alpha A holds with alpha = 2.
    agbdd_instance yes;
    yes.basis = zn_basis(12);
    yes.target = rat_vec(12, rat(1, 2));
    yes.r_pow = rat(3);
    yes.alpha_pow = rat(4);
    yes.a_bound = 1;
    yes.g_bound = 4096;

    SUBCASE("single run bookkeeping") {
        const auto cand = decision_bdd_reduce(yes, 2.0, 5);
        CHECK(cand.regime_ok);
        CHECK(cand.q >= 40);
        CHECK(cand.q <= 80);
        CHECK(is_prime_long(cand.q));
        CHECK(abs_det(cand.basis) == cand.q);
        CHECK(cand.r_pow == yes.r_pow);

        const auto again = decision_bdd_reduce(yes, 2.0, 5);
        CHECK(again.basis.m == cand.basis.m);
        CHECK(again.target == cand.target);
        CHECK(again.q == cand.q);
    }

    SUBCASE("YES instances survive sparsification at the lemma rate") {
        const int trials = 500;
        int good = 0;
        for (int seed = 0; seed < trials; ++seed) {
            const auto cand = decision_bdd_reduce(yes, 2.0, std::uint64_t(seed));
            const bigint short_cnt =
                count_lattice(cand.basis, 2.0, cand.r_pow / cand.alpha_pow, {},
                              true, {}, cand.weight_pow)
                    .count -
                1;
            const bigint close =
                count_lattice(cand.basis, 2.0, cand.r_pow, cand.target, false,
                              {}, cand.weight_pow)
                    .count;
            if (short_cnt == 0 && close >= 1) ++good;
        }
        const double freq = double(good) / trials;
        const double sigma = std::sqrt((2.0 / 3.0) * (1.0 / 3.0) / trials);
        CHECK(freq > 2.0 / 3.0 - 3.0 * sigma);
    }

    SUBCASE("NO instances stay empty at the lemma rate") {
        agbdd_instance no = yes;
        no.r_pow = rat(2);  // strictly inside the half-shell, N = 0 <= A
        const int trials = 500;
        int good = 0;
        for (int seed = 0; seed < trials; ++seed) {
            const auto cand = decision_bdd_reduce(no, 2.0, std::uint64_t(seed));
            const bigint close =
                count_lattice(cand.basis, 2.0, cand.r_pow, cand.target, false,
                              {}, cand.weight_pow)
                    .count;
            if (close == 0) ++good;
        }
        const double freq = double(good) / trials;
        const double sigma = std::sqrt((2.0 / 3.0) * (1.0 / 3.0) / trials);
        CHECK(freq > 2.0 / 3.0 - 3.0 * sigma);
    }

    SUBCASE("regime flag and validation") {
        agbdd_instance weak = yes;
        weak.g_bound = 16;  // below 400 alpha A
        const auto cand = decision_bdd_reduce(weak, 2.0, 1);
        CHECK_FALSE(cand.regime_ok);

        agbdd_instance bad = yes;
        bad.a_bound = 0;
        bad.g_bound = 5;
        CHECK_THROWS_AS(decision_bdd_reduce(bad, 2.0, 1), std::domain_error);

        agbdd_instance tiny = yes;
        tiny.alpha_pow = rat(1, 100);  // alpha = 1/10 < 1/2
        CHECK_THROWS_AS(decision_bdd_reduce(tiny, 2.0, 1), std::domain_error);
    }
}

TEST_CASE("search embedding pins the minimum distance") {
    const auto z2 = zn_basis(2);
    const rat_vec t = {rat(3, 10), rat(0)};

    SUBCASE("new direction becomes the shortest vector when r/alpha < lambda1") {
        const auto out = search_embed(z2, t, rat(1, 4), rat(1));
        CHECK(out.basis.rank() == 3);
        CHECK(out.basis.dim() == 3);
        CHECK(out.weight_pow == rat_vec{rat(1), rat(1), rat(1, 4)});
        const auto sh = min_distance(out.basis, 2.0, {}, out.weight_pow);
        CHECK(sh.cost_pow == rat(1, 4));
    }

    SUBCASE("existing lattice wins when r/alpha > lambda1") {
        const auto out = search_embed(z2, t, rat(9), rat(1));
        const auto sh = min_distance(out.basis, 2.0, {}, out.weight_pow);
        CHECK(sh.cost_pow == rat(1));
    }

    SUBCASE("distance to the target is preserved exactly") {
        const auto out = search_embed(z2, t, rat(1, 4), rat(1));
        const auto before = dist_to_lattice(z2, 2.0, t);
        const auto after =
            dist_to_lattice(out.basis, 2.0, out.target, {}, out.weight_pow);
        CHECK(after.cost_pow == before.cost_pow);
        CHECK(after.cost_pow == rat(9, 100));
    }

    SUBCASE("validation") {
        CHECK_THROWS_AS(search_embed(z2, t, rat(0), rat(1)), std::domain_error);
        CHECK_THROWS_AS(search_embed(z2, t, rat(1), rat(0)), std::domain_error);
    }
}

TEST_CASE("binary CVP lifts to counting GapCVP") {
    SUBCASE("epsilon_u arithmetic at the worked parameters") {
        // p = 3, eps = 1/10, gamma = 6/5: gamma^3 eps / 26 = 54/8125
        const rat eu = derive_epsilon_u(3.0, rat(1, 10), rat(216, 125));
        CHECK(eu == rat(54, 8125));
        CHECK(to_double(eu) == doctest::Approx(0.1728 / 26.0).epsilon(1e-12));
    }

    agcvp_params prm;
    prm.epsilon = rat(1, 4);
    prm.gamma_pow = rat(2);
    prm.epsilon_u = derive_epsilon_u(2.0, prm.epsilon, prm.gamma_pow);
    prm.gamma_prime_pow = rat(8, 7);
    prm.n_prime = 3;
    prm.n = 6;

    rational_basis bp;
    bp.m = {{rat(3), rat(0), rat(0)},
            {rat(0), rat(3), rat(0)},
            {rat(0), rat(0), rat(3)}};

    SUBCASE("derived scalars and counts") {
        CHECK(prm.epsilon_u == rat(1, 16));

        cvp_prime_instance yes;
        yes.basis = bp;
        yes.target = {rat(3), rat(3), rat(0)};
        yes.gamma_pow = rat(2);
        const auto out = cvp_to_agcvp(yes, 2.0, prm);
        CHECK(out.r_pow == rat(15, 8));
        CHECK(out.u_pow == rat(3, 32));
        CHECK(out.gamma_prime_pow == rat(8, 7));
        CHECK(out.g_bound == 8);
        CHECK(out.a_bound == 73);  // strict ambient count below 75/32
        CHECK(out.basis.rank() == 6);
        CHECK(out.basis.dim() == 3 + 3 + 3);
        CHECK(out.weight_pow[0] == rat(3, 8));
        CHECK(out.weight_pow[3] == rat(1));
    }

    SUBCASE("planted YES keeps at least G close vectors") {
        cvp_prime_instance yes;
        yes.basis = bp;
        yes.target = {rat(3), rat(3), rat(0)};
        yes.gamma_pow = rat(2);
        CHECK(classify_cvp_prime(yes, 2.0).status == promise_case::yes);

        const auto out = cvp_to_agcvp(yes, 2.0, prm);
        const auto rep = classify_aggapcvp(out, 2.0);
        CHECK(rep.n_close >= out.g_bound);
        CHECK(rep.status == promise_case::yes);
    }

    SUBCASE("planted NO zeroes every odd layer") {
        cvp_prime_instance no;
        no.basis = bp;
        no.target = {rat(3, 2), rat(3, 2), rat(3, 2)};
        no.gamma_pow = rat(2);
        CHECK(classify_cvp_prime(no, 2.0).status == promise_case::no);

        const auto out = cvp_to_agcvp(no, 2.0, prm);
        const rat rprime_pow = out.gamma_prime_pow * (out.r_pow + out.u_pow);
        CHECK(rprime_pow == rat(9, 4));
        int odd_layers = 0;
        for (bigint z = 1;; z += 2) {
            const rat rad = rprime_pow - rat(z * z) * out.u_pow;
            if (rad < 0) break;
            rat_vec zt(out.target.size());
            for (std::size_t i = 0; i < out.target.size(); ++i)
                zt[i] = rat(z) * out.target[i];
            const bigint layer = count_lattice(out.basis, 2.0, rad, zt, false,
                                               {}, out.weight_pow)
                                     .count;
            CHECK(layer == 0);
            ++odd_layers;
        }
        CHECK(odd_layers >= 2);
        CHECK(classify_aggapcvp(out, 2.0).status == promise_case::no);
    }

    SUBCASE("rank-preserving degenerate gadget") {
        agcvp_params flat = prm;
        flat.n_prime = 3;
        flat.n = 3;
        flat.gamma_prime_pow = rat(1);
        cvp_prime_instance yes;
        yes.basis = bp;
        yes.target = {rat(3), rat(3), rat(0)};
        yes.gamma_pow = rat(2);
        const auto out = cvp_to_agcvp(yes, 2.0, flat);
        CHECK(out.basis.rank() == 3);
        CHECK(out.basis.dim() == 6);
        CHECK(out.g_bound == 1);
    }

    SUBCASE("parameter validation") {
        agcvp_params bad = prm;
        bad.gamma_prime_pow = rat(2);  // outside the admissible window
        cvp_prime_instance inst;
        inst.basis = bp;
        inst.target = {rat(3), rat(3), rat(0)};
        CHECK_THROWS_AS(cvp_to_agcvp(inst, 2.0, bad), std::domain_error);

        agcvp_params neg = prm;
        neg.epsilon = rat(0);
        CHECK_THROWS_AS(cvp_to_agcvp(inst, 2.0, neg), std::domain_error);

        agcvp_params shrunk = prm;
        shrunk.n_prime = 2;
        shrunk.n = 6;
        CHECK_THROWS_AS(cvp_to_agcvp(inst, 2.0, shrunk), std::domain_error);
    }
}

TEST_CASE("kannan embedding bookkeeping") {
    rational_basis b;
    b.m = {{rat(1), rat(0)}, {rat(0), rat(1)}, {rat(1), rat(1)}};
    const rat_vec t = {rat(1, 2), rat(1, 4), rat(0)};

    SUBCASE("shapes and block arithmetic") {
        const auto out = kannan_embed(b, t, rat(1, 3));
        CHECK(out.dim() == 4);
        CHECK(out.rank() == 3);
        // coefficient w on the new column shifts by w t and adds w u
        const rat_vec v = basis_vec(out, rat_vec{rat(1), rat(-1), rat(2)});
        CHECK(v == rat_vec{rat(2), rat(-1, 2), rat(0), rat(2, 3)});
    }

    SUBCASE("embedded minimum is bounded by dist^p + u^p") {
        const auto z2 = zn_basis(2);
        const rat_vec t2 = {rat(1, 2), rat(1, 4)};
        const auto out = kannan_embed(z2, t2, rat(1, 3));
        const rat dist_pow = dist_to_lattice(z2, 2.0, t2).cost_pow;
        const auto sh = min_distance(out, 2.0);
        CHECK(sh.cost_pow <= dist_pow + rat(1, 9));
    }

    SUBCASE("validation") {
        CHECK_THROWS_AS(kannan_embed(b, t, rat(0)), std::domain_error);
        CHECK_THROWS_AS(kannan_embed(b, rat_vec{rat(1)}, rat(1)),
                        std::domain_error);
    }
}

TEST_CASE("counting GapCVP drops to SVP") {
    // Z^11 with the all-halves target: 2^11 = 2048 >= 1000 close vectors at
    // r^2 = 11/4, so the 1000 A gap holds with A = 1.
    aggapcvp_instance yes;
    yes.basis = zn_basis(11);
    yes.target = rat_vec(11, rat(1, 2));
    yes.r_pow = rat(11, 4);
    yes.u_pow = rat(1, 4);
    yes.gamma_prime_pow = rat(1);
    yes.a_bound = 1;
    yes.g_bound = 2048;

    SUBCASE("shapes, reproducibility and the count-gap guard") {
        const auto out = agcvp_to_svp(yes, 2.0, 11);
        CHECK(out.basis.rank() == 12);
        CHECK(out.r_pow == rat(3));
        CHECK(out.gamma_pow == rat(1));
        CHECK(out.weight_pow.size() == 12);
        CHECK(out.weight_pow.back() == rat(1, 4));

        const auto again = agcvp_to_svp(yes, 2.0, 11);
        CHECK(again.basis.m == out.basis.m);

        aggapcvp_instance thin = yes;
        thin.g_bound = 900;
        CHECK_THROWS_AS(agcvp_to_svp(thin, 2.0, 1), std::domain_error);
    }

    SUBCASE("YES instances keep a short vector at the empirical rate") {
        // brute-force YES test: some nonzero vector has cost <= r'^p, i.e.
        // the closed count at r'^p exceeds the zero vector alone
        const int trials = 500;
        int good = 0;
        for (int seed = 0; seed < trials; ++seed) {
            const auto out = agcvp_to_svp(yes, 2.0, std::uint64_t(seed));
            const bigint c = count_lattice(out.basis, 2.0, out.r_pow, {}, false,
                                           {}, out.weight_pow)
                                 .count;
            if (c > 1) ++good;
        }
        CHECK(double(good) / trials > 0.5);
    }

    SUBCASE("NO instances stay long at the empirical rate") {
        // embedded lattice minimum is 1/2 (w = 2 doubles the all-halves
        // target into an integer vector), strictly above gamma' r'^2 = 3/8
        aggapcvp_instance no = yes;
        no.r_pow = rat(1, 4);
        no.u_pow = rat(1, 8);
        no.g_bound = 1024;
        const int trials = 500;
        int good = 0;
        for (int seed = 0; seed < trials; ++seed) {
            const auto out = agcvp_to_svp(no, 2.0, std::uint64_t(seed));
            const bigint c = count_lattice(out.basis, 2.0,
                                           out.gamma_pow * out.r_pow, {}, false,
                                           {}, out.weight_pow)
                                 .count;
            if (c == 1) ++good;
        }
        CHECK(double(good) / trials > 0.5);
    }

    SUBCASE("classifier agrees with the count test at small scale") {
        aggapcvp_instance small;
        small.basis = zn_basis(4);
        small.target = rat_vec(4, rat(1, 2));
        small.r_pow = rat(1);
        small.u_pow = rat(1, 4);
        small.gamma_prime_pow = rat(1);
        small.a_bound = 1;
        // the count-gap guard is a claim field; assert it as satisfied to
        // exercise the plumbing at a rank where classify_svp enumerates fast
        small.g_bound = 1000;
        const auto out = agcvp_to_svp(small, 2.0, 3);
        const auto rep = classify_svp(out, 2.0);
        const bigint c = count_lattice(out.basis, 2.0, out.r_pow, {}, false, {},
                                       out.weight_pow)
                             .count;
        CHECK((rep.status == promise_case::yes) == (c > 1));
    }
}

TEST_CASE("random shifts keep enough close points") {
    const auto z4 = zn_basis(4);
    const rat_vec half(4, rat(1, 2));

    SUBCASE("empirical mean ratio beats the cap floor") {
        const auto rep = random_target_shift(z4, half, rat(2, 5), rat(1, 5),
                                             300, 20240502);
        CHECK(rep.base_count == 16);
        CHECK(rep.theta == doctest::Approx(std::acos(0.65)));
        CHECK(rep.floor > 0.0);
        CHECK(rep.pass);
    }

    SUBCASE("boundary delta = eps gives angle zero") {
        const auto rep =
            random_target_shift(z4, half, rat(1, 5), rat(1, 5), 50, 1);
        CHECK(rep.theta == 0.0);
        CHECK(rep.floor == 0.0);
        CHECK(rep.pass);
    }

    SUBCASE("eps = delta = 1/2 predicts an empty cap") {
        const auto rep =
            random_target_shift(z4, half, rat(1, 2), rat(1, 2), 50, 2);
        CHECK(rep.theta == 0.0);
        CHECK(rep.floor == 0.0);
    }

    SUBCASE("validation") {
        CHECK_THROWS_AS(random_target_shift(z4, half, rat(2, 5), rat(3, 5),
                                            10, 0),
                        std::domain_error);
        CHECK_THROWS_AS(random_target_shift(z4, half, rat(1, 10), rat(1, 5),
                                            10, 0),
                        std::domain_error);
        CHECK_THROWS_AS(random_target_shift(z4, half, rat(19, 20), rat(1, 5),
                                            10, 0),
                        std::domain_error);
        rational_basis line;
        line.m = {{rat(1)}, {rat(0)}};
        CHECK_THROWS_AS(random_target_shift(line, rat_vec{rat(0), rat(0)},
                                            rat(1, 4), rat(1, 4), 10, 0),
                        std::domain_error);
    }
}

TEST_CASE("full pipeline produces decodable instances") {
    // Unit-scale integer gadget: close distance 1 hits the 2^k half-shell
    // while nothing lands strictly inside radius 1, so any nu gaps pass.
    const gadget_profile<double> prof{1.0, 0.9, 2.0, 2.0};
    const double C = 3.0;
    const auto gadget = zn_basis(4);  // rank (C - 1) n' = 4
    const rat_vec gadget_t(4, rat(1, 2));

    cvp_prime_instance yes;
    yes.basis.m = {{rat(4), rat(0)}, {rat(0), rat(4)}};
    yes.target = {rat(4), rat(4)};
    yes.gamma_pow = rat(4);

    const double alpha_min = generic_alpha_seth(2.0, prof, 2.0, C).alpha;

    SUBCASE("rank bookkeeping and diagnostics") {
        const auto res =
            end_to_end_bdd(yes, 2.0, prof, gadget, gadget_t, alpha_min * 1.05,
                           C, 17);
        CHECK(res.instance.basis.rank() == 7);  // C n' + 1
        CHECK(res.instance.basis.dim() == 2 + 2 + 4 + 1);
        CHECK(res.g_bound >= 1);
        CHECK(res.a_bound >= 1);
        CHECK(res.q > 0);
        CHECK(res.instance.weight_pow.size() == 9);

        const auto again = end_to_end_bdd(yes, 2.0, prof, gadget, gadget_t,
                                          alpha_min * 1.05, C, 17);
        CHECK(again.instance.basis.m == res.instance.basis.m);
    }

    // Decode-grade knobs. The sparsifier keeps each close vector with chance
    // 1/q and q scales with alpha * A, while the close count only grows when
    // extra gadget shells fit under the outer radius; the outer radius grows
    // like alpha^2, so a decoding parameter well above the feasibility
    // threshold is what pushes the expected survivor count past 1. Measured
    // at this setting: A = 5, G = 448, q in [341, 680], ~1400 close vectors
    // inside the outer radius, YES rate ~0.94.
    const gadget_profile<double> prof_mc{1.5, 0.9, 1.5, 1.5};
    const double C_mc = 5.0;
    const auto gadget_mc = zn_basis(6);
    const rat_vec gadget_mc_t(6, rat(1, 2));

    SUBCASE("planted YES decodes at better than even odds") {
        const double alpha =
            generic_alpha_seth(2.0, prof_mc, 2.0, C_mc).alpha * 2.0;
        const int trials = 40;
        int good = 0;
        for (int seed = 0; seed < trials; ++seed) {
            const auto res = end_to_end_bdd(yes, 2.0, prof_mc, gadget_mc,
                                            gadget_mc_t, alpha, C_mc,
                                            std::uint64_t(seed));
            const auto rep = classify_bdd(res.instance, 2.0);
            if (rep.promise_holds && rep.dist_pow <= res.r_pow) ++good;
        }
        CHECK(double(good) / trials > 0.5);
    }

    SUBCASE("planted NO stays far at better than even odds") {
        cvp_prime_instance no = yes;
        no.target = {rat(5, 2), rat(5, 2)};  // dist^2 = 4.5 > gamma^2 = 4
        CHECK(classify_cvp_prime(no, 2.0).status == promise_case::no);
        const double alpha =
            generic_alpha_seth(2.0, prof_mc, 2.0, C_mc).alpha * 2.0;
        const int trials = 40;
        int good = 0;
        for (int seed = 0; seed < trials; ++seed) {
            const auto res = end_to_end_bdd(no, 2.0, prof_mc, gadget_mc,
                                            gadget_mc_t, alpha, C_mc,
                                            std::uint64_t(seed));
            const auto rep = classify_bdd(res.instance, 2.0);
            if (rep.dist_pow > res.r_pow) ++good;
        }
        CHECK(double(good) / trials > 0.5);
    }

    SUBCASE("infeasible decoding parameter fails in the geometry stage") {
        CHECK_THROWS_AS(end_to_end_bdd(yes, 2.0, prof, gadget, gadget_t,
                                       alpha_min * 0.95, C, 1),
                        infeasible_error);
    }

    SUBCASE("a gadget that misses its profile is rejected") {
        // too-close radius 1.3 swallows the 16-point shell, so the close
        // count 16 cannot beat nu1^4 * 16
        const gadget_profile<double> greedy{1.6, 1.3, 2.0, 2.0};
        try {
            end_to_end_bdd(yes, 2.0, greedy, gadget, gadget_t,
                           generic_alpha_seth(2.0, greedy, 2.0, C).alpha * 1.05,
                           C, 1);
            CHECK(false);
        } catch (const stage_error& e) {
            CHECK(e.stage == "gadget-check");
        }
    }
}
