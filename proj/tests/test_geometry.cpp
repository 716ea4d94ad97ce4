#include <gtest/gtest.h>

#include <cmtheta/checks.hpp>

using namespace cmtheta;

TEST(PeriodDomain, XiRoundTripAndIdentities) {
    std::mt19937_64 g(11);
    for (int i = 0; i < 200; ++i) {
        auto tau = random_siegel(g);
        auto X = xi_map(tau);
        EXPECT_LT(qform_V(X).abs(), 1e-12);
        EXPECT_NEAR(hermitian_B(X), -4 * tau.det_im(), 1e-12);
        EXPECT_LT(siegel_dist(xi_inv(X), tau), 1e-14);
    }
}

// Hermitian form is negative exactly on points coming from H2+ or H2-.
TEST(PeriodDomain, SignDistinguishesHalfSpaces) {
    SiegelPoint<double> up{{0.1, 1.0}, {0.2, 2.0}, {0.0, 0.3}};
    SiegelPoint<double> down{{0.1, -1.0}, {0.2, -2.0}, {0.0, -0.3}};
    EXPECT_LT(hermitian_B(xi_map(up)), 0);
    EXPECT_LT(hermitian_B(xi_map(down)), 0);
    EXPECT_TRUE(up.im_positive_definite());
    EXPECT_TRUE(down.im_negative_definite());
}

TEST(HilbertEmbedding, PhiMatrixIsSymplecticAndMultiplicative) {
    std::mt19937_64 g(5);
    const long D = 5;
    for (int i = 0; i < 20; ++i) {
        FMat2 a = random_sl2_OF(g, D), b = random_sl2_OF(g, D);
        FMat2 ab = {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2],
                    a[2] * b[1] + a[3] * b[3]};
        QMat4 A = phi_matrix(a, D), B = phi_matrix(b, D), AB = phi_matrix(ab, D);
        EXPECT_TRUE(is_symplectic(A));
        QMat4 P{};
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                for (int k = 0; k < 4; ++k) P[r][c] += A[r][k] * B[k][c];
        EXPECT_EQ(P, AB);
    }
    QuadElem two(D, 2), zero(D, 0), half(D, Rational(1, 2));
    EXPECT_THROW(phi_matrix({two, zero, zero, two}, D), InputError);
}

TEST(HilbertEmbedding, Equivariance) {
    std::mt19937_64 g(17);
    for (int i = 0; i < 50; ++i) {
        FMat2 gm = random_sl2_OF(g, 5);
        auto z = random_hpoint(g);
        auto lhs = phi_point(act_hilbert(gm, z), 5);
        auto rhs = act(phi_matrix(gm, 5), phi_point(z, 5));
        EXPECT_LT(siegel_dist(lhs, rhs), 1e-10 * std::max(1.0, lhs.t1.abs()));
    }
}

TEST(HilbertEmbedding, PhiPointLiesInH2) {
    std::mt19937_64 g(23);
    for (int i = 0; i < 50; ++i) EXPECT_TRUE(phi_point(random_hpoint(g), 5).im_positive_definite());
}

TEST(Characteristics, InverseRoundTrip) {
    for (int m = 0; m < 16; ++m) {
        CharQuadruple c(m & 1, (m >> 1) & 1, (m >> 2) & 1, (m >> 3) & 1);
        EXPECT_EQ(phi_char(phi_char_inverse(c, 5), 5), c);
        EXPECT_EQ(hilbert_even(phi_char_inverse(c, 5), 5), c.even());
    }
}

TEST(CMInput, DefaultInputValidates) {
    CMInput cm = default_cm_input();
    auto v = validate(cm);
    EXPECT_TRUE(v.ok);
    EXPECT_EQ(cm.Dtilde(), Rational(5));
}

TEST(CMInput, RejectsBadNormalization) {
    CMInput cm = default_cm_input();
    cm.xi = cm.xi * Rational(2);
    EXPECT_FALSE(validate(cm).ok);
    cm = default_cm_input();
    cm.Delta = QuadElem(5, Rational(5, 2), Rational(1, 2));
    EXPECT_FALSE(validate(cm).ok);
}

TEST(CMPoints, AllCandidatesInSiegelSpace) {
    CMInput cm = default_cm_input();
    for (auto w : {OraclePoint::lattice, OraclePoint::direct, OraclePoint::inverted})
        EXPECT_TRUE(oracle_point<double>(cm, w).im_positive_definite());
    // the lattice point lies on tau1 = D tau2
    auto t = oracle_point<double>(cm, OraclePoint::lattice);
    EXPECT_LT((t.t1 - t.t2 * 5.0).abs(), 1e-12);
}

// Frozen value: the norm identity forces N(f0) = 1/4 for the default input.
TEST(CMPoints, ImpliedConductorNorm) {
    EXPECT_NEAR(implied_conductor_norm<double>(default_cm_input()), 0.25, 1e-12);
}

TEST(OraclePointNames, ParseAndReject) {
    EXPECT_EQ(parse_oracle_point("direct"), OraclePoint::direct);
    EXPECT_THROW(parse_oracle_point("other"), InputError);
}
