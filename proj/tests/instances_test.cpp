#include <vector>

#include "doctest.h"
#include "latred/instances.hpp"

using namespace latred;

TEST_CASE("binary-combination cvp classification") {
    // identity basis, target at the origin: the all-zero combination works
    cvp_prime_instance easy{zn_basis(2), {rat(0), rat(0)}, rat(4)};
    const auto a = classify_cvp_prime(easy, 2.0);
    CHECK(a.status == promise_case::yes);
    CHECK(a.best_binary_pow == 0);
    CHECK(a.binary_witness == std::vector<int>{0, 0});
    CHECK(a.dist_pow == 0);

    // 4Z^2 around (2,2): every lattice point is at squared distance >= 8
    cvp_prime_instance far{diag_basis({rat(4), rat(4)}),
                           {rat(2), rat(2)},
                           rat(9, 4)};  // gamma = 1.5
    const auto b = classify_cvp_prime(far, 2.0);
    CHECK(b.status == promise_case::no);
    CHECK(b.dist_pow == 8);
    CHECK(b.best_binary_pow == 8);

    // distance strictly between 1 and gamma: the promise is violated
    cvp_prime_instance gap{diag_basis({rat(3), rat(3)}),
                           {rat(3, 2), rat(0)},
                           rat(4)};  // gamma = 2, dist = 3/2
    const auto c = classify_cvp_prime(gap, 2.0);
    CHECK(c.status == promise_case::neither);
    CHECK(c.dist_pow == rat(9, 4));

    // same target, tighter gamma: becomes a NO instance
    cvp_prime_instance no2{diag_basis({rat(3), rat(3)}),
                           {rat(3, 2), rat(0)},
                           rat(49, 25)};  // gamma = 1.4
    CHECK(classify_cvp_prime(no2, 2.0).status == promise_case::no);

    // binary witness beats the origin when the target sits near a corner
    cvp_prime_instance corner{zn_basis(2), {rat(9, 10), rat(1)}, rat(4)};
    const auto d = classify_cvp_prime(corner, 2.0);
    CHECK(d.status == promise_case::yes);
    CHECK(d.binary_witness == std::vector<int>{1, 1});
    CHECK(d.best_binary_pow == rat(1, 100));

    // non-integer order runs on the tolerance path
    CHECK(classify_cvp_prime(easy, 1.5).status == promise_case::yes);

    cvp_prime_instance bad{zn_basis(2), {rat(0)}, rat(4)};
    CHECK_THROWS_AS(classify_cvp_prime(bad, 2.0), std::domain_error);
    cvp_prime_instance small_gamma{zn_basis(2), {rat(0), rat(0)}, rat(1, 2)};
    CHECK_THROWS_AS(classify_cvp_prime(small_gamma, 2.0), std::domain_error);
}

TEST_CASE("bounded-distance decoding promise checks") {
    bdd_instance inst{zn_basis(2), {rat(1, 10), rat(0)}, rat(1, 4), {}};  // alpha = 1/2
    const auto rep = classify_bdd(inst, 2.0);
    CHECK(rep.promise_holds);
    CHECK(rep.dist_pow == rat(1, 100));
    CHECK(rep.lambda1_pow == 1);
    CHECK(rep.witness == rat_vec{rat(0), rat(0)});

    bdd_instance tight{zn_basis(2), {rat(1, 10), rat(0)}, rat(1, 400), {}};
    CHECK_FALSE(classify_bdd(tight, 2.0).promise_holds);

    // exactly at the threshold counts as within the promise
    bdd_instance edge{zn_basis(2), {rat(1, 2), rat(0)}, rat(1, 4), {}};
    CHECK(classify_bdd(edge, 2.0).promise_holds);
}

TEST_CASE("counting bdd classification") {
    // r = 3/5 around (1/2, 0): two close points; alpha steers the short count
    agbdd_instance yes{zn_basis(2),
                       {rat(1, 2), rat(0)},
                       rat(9, 25),
                       rat(4),  // alpha = 2: (r/alpha)^2 = 9/100, no short vectors
                       bigint(0),
                       bigint(2), {}};
    const auto a = classify_agbdd(yes, 2.0);
    CHECK(a.status == promise_case::yes);
    CHECK(a.n_close == 2);
    CHECK(a.n_short == 0);

    // alpha = 1/2: the open ball of radius 6/5 holds 4 nonzero vectors
    agbdd_instance neither{zn_basis(2),
                           {rat(1, 2), rat(0)},
                           rat(9, 25),
                           rat(1, 4),
                           bigint(0),
                           bigint(1), {}};
    const auto b = classify_agbdd(neither, 2.0);
    CHECK(b.status == promise_case::neither);
    CHECK(b.n_short == 4);

    // far target: nothing within r, so the close count collapses to A
    agbdd_instance no{zn_basis(2),
                      {rat(1, 2), rat(1, 2)},
                      rat(1, 8),
                      rat(4),
                      bigint(0),
                      bigint(1), {}};
    const auto c = classify_agbdd(no, 2.0);
    CHECK(c.status == promise_case::no);
    CHECK(c.n_close == 0);

    agbdd_instance bad = yes;
    bad.g_bound = bigint(0);
    CHECK_THROWS_AS(classify_agbdd(bad, 2.0), std::domain_error);
}

TEST_CASE("counting gapcvp classification") {
    // four lattice points exactly at squared distance 1/2 from the center
    aggapcvp_instance yes{zn_basis(2),
                          {rat(1, 2), rat(1, 2)},
                          rat(1, 2),
                          rat(1),
                          rat(1),
                          bigint(0),
                          bigint(4), {}};
    const auto a = classify_aggapcvp(yes, 2.0);
    CHECK(a.status == promise_case::yes);
    CHECK(a.n_close == 4);

    // larger G starves the YES branch; the layered count decides NO
    aggapcvp_instance no = yes;
    no.g_bound = bigint(9000);
    no.a_bound = bigint(8);
    const auto b = classify_aggapcvp(no, 2.0);
    CHECK(b.layered_count == 8);
    CHECK(b.status == promise_case::no);
    CHECK(count_gap_ok(no));  // 9000 >= 1000 * 8
    no.g_bound = bigint(7999);
    CHECK_FALSE(count_gap_ok(no));

    aggapcvp_instance trimmed = yes;
    trimmed.a_bound = bigint(7);
    trimmed.g_bound = bigint(9000);
    CHECK(classify_aggapcvp(trimmed, 2.0).status == promise_case::neither);
}

TEST_CASE("shortest-vector classification") {
    const auto d = diag_basis({rat(2), rat(3)});
    svp_instance yes{d, rat(4), rat(4), {}};
    const auto a = classify_svp(yes, 2.0);
    CHECK(a.status == promise_case::yes);
    CHECK(a.lambda1_pow == 4);

    svp_instance no{d, rat(1), rat(9, 4), {}};  // gamma = 3/2: 4 > 9/4
    CHECK(classify_svp(no, 2.0).status == promise_case::no);

    svp_instance gap{d, rat(2), rat(4), {}};  // r^2 = 2 < 4 <= gamma^2 r^2 = 8
    CHECK(classify_svp(gap, 2.0).status == promise_case::neither);

    svp_instance bad{d, rat(0), rat(4), {}};
    CHECK_THROWS_AS(classify_svp(bad, 2.0), std::domain_error);
}

TEST_CASE("classifier budgets propagate") {
    enumeration_budget tiny;
    tiny.max_nodes = 3;
    cvp_prime_instance inst{zn_basis(4), rat_vec(4, rat(1, 3)), rat(4)};
    CHECK_THROWS_AS(classify_cvp_prime(inst, 2.0, tiny), budget_error);
    bdd_instance b{zn_basis(4), rat_vec(4, rat(1, 3)), rat(1), {}};
    CHECK_THROWS_AS(classify_bdd(b, 2.0, tiny), budget_error);
}
