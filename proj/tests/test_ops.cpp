#include "sls/fir.hpp"
#include "sls/ltv.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace sls;
namespace tt = sls::testing;

TEST_CASE("fir l1 norm matches hand values") {
    FirResponse g(2, 2);
    Matrix tap(2, 2);
    tap << 1, -2, 0.5, 0;
    g.push_tap(tap);
    CHECK(l1_norm(g) == doctest::Approx(3.0).epsilon(1e-15));

    FirResponse h(1, 1);
    h.push_tap(Matrix::Constant(1, 1, 1.0));
    h.push_tap(Matrix::Constant(1, 1, -1.0));
    CHECK(l1_norm(h) == doctest::Approx(2.0).epsilon(1e-15));

    CHECK(l1_norm(FirResponse::zero(3, 2, 4)) == 0.0);
    CHECK(l1_norm(FirResponse(3, 2)) == 0.0);  // empty tap list
}

TEST_CASE("fir compose: shifts, scalars, and the block-multiplication oracle") {
    const FirResponse z1 = FirResponse::delay_identity(2);
    const FirResponse z2 = compose(z1, z1);
    REQUIRE(z2.num_taps() == 2);
    CHECK(z2.tap(1).isZero(0.0));
    CHECK(z2.tap(2).isApprox(Matrix::Identity(2, 2)));

    FirResponse a(1, 1), b(1, 1);
    a.push_tap(Matrix::Constant(1, 1, 2.0));
    b.push_tap(Matrix::Constant(1, 1, 3.0));
    const FirResponse ab = compose(a, b);
    REQUIRE(ab.num_taps() == 2);
    CHECK(ab.tap(1)(0, 0) == 0.0);
    CHECK(ab.tap(2)(0, 0) == doctest::Approx(6.0));

    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const FirResponse fa = tt::random_fir(rng, 2, 2, 3);
        const FirResponse fb = tt::random_fir(rng, 2, 2, 2);
        const int horizon = fa.num_taps() + fb.num_taps() + 2;
        const Matrix oracle = lift(fa, horizon).dense() * lift(fb, horizon).dense();
        CHECK((lift(compose(fa, fb), horizon).dense() - oracle).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("signal shifts satisfy the one-sided identities") {
    Signal s(1, 3);
    s.sample(0)(0) = 1;
    s.sample(1)(0) = 2;
    s.sample(2)(0) = 3;

    const Signal right = shift_right(s);
    CHECK(right.sample(0)(0) == 0.0);
    CHECK(right.sample(1)(0) == 1.0);
    CHECK(right.sample(2)(0) == 2.0);

    // S- S+ = I on the fixed horizon: exact once the last sample is zero.
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        Signal w = tt::random_signal(rng, 3, 6);
        const Signal back = shift_left(shift_right(w));
        for (int t = 0; t < 5; ++t) CHECK(back.sample(t) == w.sample(t));
        CHECK(back.sample(5).isZero(0.0));

        w.sample(5).setZero();
        CHECK(tt::flatten(shift_left(shift_right(w))) == tt::flatten(w));

        // S+ S- != I: it zeroes the first sample.
        const Signal fwd = shift_right(shift_left(w));
        CHECK(fwd.sample(0).isZero(0.0));
        for (int t = 1; t < 5; ++t) CHECK(fwd.sample(t) == w.sample(t));
    }
}

TEST_CASE("ltv apply: identity, sub-diagonal gain, dense oracle") {
    const LtvOperator id = LtvOperator::identity(2, 4);
    std::mt19937_64 rng(11);
    const Signal w = tt::random_signal(rng, 2, 4);
    CHECK(tt::flatten(apply(id, w)) == tt::flatten(w));

    LtvOperator half(1, 1, 3);
    for (int i = 1; i < 3; ++i) half.block(i, i - 1) = Matrix::Constant(1, 1, 0.5);
    half.finalize(true);
    Signal imp(1, 3);
    imp.sample(0)(0) = 1.0;
    const Signal y = apply(half, imp);
    CHECK(y.sample(0)(0) == 0.0);
    CHECK(y.sample(1)(0) == doctest::Approx(0.5));
    CHECK(y.sample(2)(0) == 0.0);

    for (int rep = 0; rep < 30; ++rep) {
        const LtvOperator d = tt::random_ltv(rng, 3, 2, 5, rep % 2 == 0);
        const Signal v = tt::random_signal(rng, 2, 5);
        const Vector oracle = d.dense() * tt::flatten(v);
        CHECK((tt::flatten(apply(d, v)) - oracle).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("ltv induced norm: identity, gain, lifted FIR equality") {
    CHECK(induced_norm(LtvOperator::identity(3, 3)) == doctest::Approx(1.0));

    LtvOperator half(1, 1, 3);
    for (int i = 1; i < 3; ++i) half.block(i, i - 1) = Matrix::Constant(1, 1, 0.5);
    half.finalize(true);
    CHECK(induced_norm(half) == doctest::Approx(0.5));

    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 20; ++rep) {
        const FirResponse g = tt::random_fir(rng, 2, 1, 3);
        const int horizon = 3 + 1 + rep % 3;
        CHECK(induced_norm(lift(g, horizon)) == doctest::Approx(l1_norm(g)).epsilon(1e-13));
    }

    // sign-pattern enumeration oracle on small operators
    for (int rep = 0; rep < 10; ++rep) {
        const LtvOperator d = tt::random_ltv(rng, 2, 2, 4, false);
        CHECK(induced_norm(d) == doctest::Approx(tt::enumerated_gain(d)).epsilon(1e-12));
    }
    for (int rep = 0; rep < 5; ++rep) {
        const FirResponse g = tt::random_fir(rng, 1, 2, 2);
        const LtvOperator d = lift(g, 5);
        CHECK(induced_norm(d) == doctest::Approx(tt::enumerated_gain(d)).epsilon(1e-12));
    }
}

TEST_CASE("ltv compose: identity, sub-diagonal product, dense oracle") {
    std::mt19937_64 rng(17);
    const LtvOperator a = tt::random_ltv(rng, 2, 2, 4, false);
    const LtvOperator id = LtvOperator::identity(2, 4);
    CHECK(compose(a, id).dense().isApprox(a.dense()));
    CHECK(compose(id, a).dense().isApprox(a.dense()));

    LtvOperator d1(1, 1, 4), d2(1, 1, 4);
    for (int i = 1; i < 4; ++i) {
        d1.block(i, i - 1) = Matrix::Constant(1, 1, 2.0);
        d2.block(i, i - 1) = Matrix::Constant(1, 1, -3.0);
    }
    d1.finalize(true);
    d2.finalize(true);
    const LtvOperator prod = compose(d1, d2);
    CHECK(prod.strictly_causal());
    for (int i = 2; i < 4; ++i)
        CHECK(prod.block(i, i - 2)(0, 0) == doctest::Approx(-6.0));

    for (int rep = 0; rep < 30; ++rep) {
        const LtvOperator x = tt::random_ltv(rng, 2, 3, 5, rep % 2 == 0);
        const LtvOperator y = tt::random_ltv(rng, 3, 2, 5, rep % 3 == 0);
        CHECK((compose(x, y).dense() - x.dense() * y.dense()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("feedback inverse: zero, geometric recursion, composition identity") {
    const LtvOperator zero = LtvOperator::zero(2, 2, 4);
    CHECK(feedback_inverse(zero).dense().isApprox(LtvOperator::identity(2, 4).dense()));

    LtvOperator half(1, 1, 3);
    for (int i = 1; i < 3; ++i) half.block(i, i - 1) = Matrix::Constant(1, 1, 0.5);
    half.finalize(true);
    Signal imp(1, 3);
    imp.sample(0)(0) = 1.0;
    const Signal y = apply(feedback_inverse(half), imp);
    CHECK(y.sample(0)(0) == doctest::Approx(1.0));
    CHECK(y.sample(1)(0) == doctest::Approx(0.5));
    CHECK(y.sample(2)(0) == doctest::Approx(0.25));

    std::mt19937_64 rng(19);
    for (int rep = 0; rep < 20; ++rep) {
        const LtvOperator d = tt::random_ltv(rng, 2, 2, 5, true);
        const LtvOperator inv = feedback_inverse(d);
        const LtvOperator i_minus =
            add(LtvOperator::identity(2, 5), scaled(d, -1.0));
        const Matrix prod = compose(inv, i_minus).dense();
        CHECK((prod - Matrix::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-10);
    }

    CHECK_THROWS_AS(feedback_inverse(LtvOperator::identity(2, 3)), std::invalid_argument);
}

TEST_CASE("lift: structure and convolution equality") {
    const LtvOperator d = lift(FirResponse::delay_identity(2), 4);
    for (int i = 1; i < 4; ++i) CHECK(d.block(i, i - 1).isApprox(Matrix::Identity(2, 2)));
    CHECK(d.strictly_causal());

    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 20; ++rep) {
        const FirResponse g = tt::random_fir(rng, 2, 3, 4);
        const Signal w = tt::random_signal(rng, 3, 7);
        const Signal via_fir = apply(g, w);
        const Signal via_ltv = apply(lift(g, 7), w);
        CHECK((tt::flatten(via_fir) - tt::flatten(via_ltv)).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("operator algebra invariants over randomized cases") {
    std::mt19937_64 rng(29);
    for (int rep = 0; rep < 150; ++rep) {
        const int horizon = 3 + static_cast<int>(rng() % 4);
        const LtvOperator a = tt::random_ltv(rng, 2, 2, horizon, false);
        const LtvOperator b = tt::random_ltv(rng, 2, 2, horizon, false);

        // submultiplicativity and triangle inequality
        CHECK(induced_norm(compose(a, b)) <=
              induced_norm(a) * induced_norm(b) + 1e-12);
        CHECK(induced_norm(add(a, b)) <= induced_norm(a) + induced_norm(b) + 1e-12);

        // shift isometry, truncation-aware
        const LtvOperator sp = LtvOperator::right_shift(2, horizon);
        CHECK(induced_norm(compose(sp, a)) ==
              doctest::Approx(induced_norm(truncate(a, horizon - 1))).epsilon(1e-13));

        // gain attainment by a sign-pattern input
        const Signal w = worst_case_input(a);
        for (int t = 0; t < horizon; ++t)
            for (int i = 0; i < 2; ++i) CHECK(std::abs(w.sample(t)(i)) == 1.0);
        CHECK(apply(a, w).peak() == doctest::Approx(induced_norm(a)).epsilon(1e-13));
    }

    // Neumann identity: feedback_inverse(d) == sum_k d^k, exact finite sum
    for (int rep = 0; rep < 30; ++rep) {
        const int horizon = 4 + static_cast<int>(rng() % 3);
        const LtvOperator d = tt::random_ltv(rng, 2, 2, horizon, true);
        LtvOperator series = LtvOperator::identity(2, horizon);
        LtvOperator power = LtvOperator::identity(2, horizon);
        for (int k = 1; k < horizon; ++k) {
            power = compose(power, d);
            series = add(series, power);
        }
        CHECK((feedback_inverse(d).dense() - series.dense()).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("hstack dimensions and norms") {
    std::mt19937_64 rng(31);
    const LtvOperator a = tt::random_ltv(rng, 2, 2, 4, false);
    const LtvOperator b = tt::random_ltv(rng, 2, 1, 4, false);
    const LtvOperator s = hstack(a, b);
    CHECK(s.in_dim() == 3);
    // row sums add across the stacked blocks
    double expect = 0.0;
    for (int i = 0; i < 4; ++i) {
        Vector sums = Vector::Zero(2);
        for (int j = 0; j <= i; ++j)
            sums += a.block(i, j).cwiseAbs().rowwise().sum() +
                    b.block(i, j).cwiseAbs().rowwise().sum();
        expect = std::max(expect, sums.maxCoeff());
    }
    CHECK(induced_norm(s) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("validation rejects malformed values") {
    CHECK_THROWS_AS(Signal{Matrix(0, 3)}, std::invalid_argument);
    CHECK_THROWS_AS((Signal(2, 0)), std::invalid_argument);
    Matrix bad = Matrix::Zero(1, 1);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(Signal{bad}, std::invalid_argument);
    FirResponse g(1, 1);
    CHECK_THROWS_AS(g.push_tap(bad), std::invalid_argument);
    CHECK_THROWS_AS(g.push_tap(Matrix::Zero(2, 1)), std::invalid_argument);
    CHECK_THROWS_AS(compose(FirResponse::zero(1, 2, 1), FirResponse::zero(1, 2, 1)),
                    std::invalid_argument);

    LtvOperator diag_nonzero(1, 1, 2);
    diag_nonzero.block(0, 0)(0, 0) = 1.0;
    CHECK_THROWS_AS(diag_nonzero.finalize(true), std::invalid_argument);
}
