#include <gtest/gtest.h>

#include <cmtheta/checks.hpp>

using namespace cmtheta;

// theta_{0000}(-tau^{-1}) = sqrt(det(-i tau)) theta_{0000}(tau), branch fixed by
// continuity from tau = iI.
TEST(SiegelTheta, InversionFormula) {
    std::mt19937_64 g(41);
    std::uniform_real_distribution<double> U(-0.2, 0.2);
    for (int i = 0; i < 20; ++i) {
        SiegelPoint<double> tau{{U(g), 1.0 + U(g)}, {U(g), 1.2 + U(g)}, {U(g), 0.1 * U(g)}};
        Mat2<double> inv = tau.matrix().inverse();
        SiegelPoint<double> s = SiegelPoint<double>::from_matrix(
            Mat2<double>{-inv.a, -inv.b, -inv.c, -inv.d});
        Cplx<double> d = (tau.matrix() * Mat2<double>{{0, -1}, {0, 0}, {0, 0}, {0, -1}}).det();
        double r = std::sqrt(d.abs()), ph = std::atan2(d.im, d.re) / 2;
        Cplx<double> root(r * std::cos(ph), r * std::sin(ph));
        CharQuadruple z(0, 0, 0, 0);
        auto lhs = siegel_theta<double>(z, s, 1e-16).value;
        auto rhs = root * siegel_theta<double>(z, tau, 1e-16).value;
        EXPECT_LT((lhs - rhs).abs(), 1e-12);
    }
}

TEST(SiegelTheta, OddVanishesEvenDoesNot) {
    SiegelPoint<double> tau{{0.1, 1.1}, {-0.3, 0.9}, {0.05, 0.2}};
    for (int m = 0; m < 16; ++m) {
        CharQuadruple c(m & 1, (m >> 1) & 1, (m >> 2) & 1, (m >> 3) & 1);
        double v = siegel_theta<double>(c, tau, 1e-16).value.abs();
        if (c.even()) EXPECT_GT(v, 1e-3);
        else EXPECT_LT(v, 1e-13);
    }
}

TEST(SiegelTheta, MultiprecisionAgreesWithDouble) {
    set_precision_bits(200);
    SiegelPoint<double> td{{0.1, 1.1}, {-0.3, 0.9}, {0.05, 0.2}};
    SiegelPoint<Real> tr{{Real(0.1), Real(1.1)}, {Real(-0.3), Real(0.9)}, {Real(0.05), Real(0.2)}};
    for (auto& c : even_characteristics()) {
        auto a = siegel_theta<double>(c, td, 1e-16).value;
        auto b = siegel_theta<Real>(c, tr, 1e-40).value;
        EXPECT_NEAR(a.re, to_double(b.re), 1e-13);
        EXPECT_NEAR(a.im, to_double(b.im), 1e-13);
    }
}

TEST(SiegelTheta, RejectsBadInput) {
    SiegelPoint<double> bad{{0, -1}, {0, 1}, {0, 0}};
    EXPECT_THROW(siegel_theta<double>(CharQuadruple(), bad), InputError);
    SiegelPoint<double> ok{{0, 1}, {0, 1}, {0, 0}};
    EXPECT_THROW(siegel_theta<double>(CharQuadruple(), ok, -1), InputError);
    set_precision_bits(64);
    SiegelPoint<Real> okr{{Real(0), Real(1)}, {Real(0), Real(1)}, {Real(0), Real(0)}};
    EXPECT_THROW(siegel_theta<Real>(CharQuadruple(), okr, 1e-60), PrecisionError);
}

TEST(HilbertTheta, PullbackAgreesUpToSign) {
    std::mt19937_64 g(99);
    for (auto& c : even_characteristics()) {
        auto h = phi_char_inverse(c, 5);
        auto z = random_hpoint(g);
        auto tH = hilbert_theta<double>(h, z, 5, 1e-16);
        EXPECT_EQ(tH.ch, c);
        auto tS = siegel_theta<double>(c, phi_point(z, 5), 1e-16);
        double e = std::min((tS.value - tH.value).abs(), (tS.value + tH.value).abs());
        EXPECT_LT(e, 1e-10) << c.str();
    }
}

// lambda_k in terms of theta squares, recomputed independently.
TEST(Rosenhain, LambdaFromThetaSquares) {
    SiegelPoint<double> tau{{0.1, 1.1}, {-0.3, 0.9}, {0.05, 0.2}};
    auto r = rosenhain_numeric<double>(tau, 1e-16);
    auto sq = [&](const char* s) {
        auto v = siegel_theta<double>(CharQuadruple::parse(s), tau, 1e-16).value;
        return v * v;
    };
    auto l1 = -(sq("0010") * sq("0110")) / (sq("0011") * sq("1001"));
    EXPECT_LT((r.lambda[0] - l1).abs(), 1e-12 * l1.abs());
}

TEST(Petersson, WeightScaling) {
    SiegelPoint<double> tau{{0.0, 2.0}, {0.0, 3.0}, {0.0, 1.0}};
    Cplx<double> v(0.5, -1.5);
    double base = 4 * M_PI * std::exp(-0.57721566490153286) * 5.0;
    EXPECT_NEAR(pet_norm<double>(v, tau, 0), 2.5, 1e-14);
    EXPECT_NEAR(pet_norm<double>(v, tau, Rational(1, 2)), 2.5 * base, 1e-11);
}
