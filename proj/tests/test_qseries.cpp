#include <gtest/gtest.h>

#include <cmtheta/qseries.hpp>

using namespace cmtheta;

TEST(LogLinear, ArithmeticAndPrinting) {
    LogLinear a = LogLinear::log_of(5, Rational(-4, 5)) + LogLinear::log_of(29, Rational(-8, 5));
    EXPECT_EQ(a.str(), "-4/5*log5 - 8/5*log29");
    EXPECT_NEAR(a.evaluate(), -0.8 * std::log(5.0) - 1.6 * std::log(29.0), 1e-14);
    EXPECT_TRUE((a - a).is_zero());
    EXPECT_EQ(a * Rational(5), LogLinear::log_of(5, -4) + LogLinear::log_of(29, -8));
    EXPECT_THROW(a * a, InputError);
    EXPECT_EQ(LogLinear(Rational(3)) * a, a * Rational(3));
}

// theta = sum q^{n^2/2}: coefficient of q^{k/2} is the number of n with n^2 = k.
TEST(ClassicalTheta, CoefficientsFromCounting) {
    auto th = classical_theta(ThetaKind::theta, Rational(20));
    for (long k = 0; k < 40; ++k) {
        long cnt = 0;
        for (long n = -10; n <= 10; ++n) cnt += n * n == k;
        EXPECT_EQ(th.coeff(Rational(k, 2)), LogLinear(Rational(cnt))) << k;
    }
    auto tt = classical_theta(ThetaKind::theta_tilde2, Rational(10));
    EXPECT_EQ(tt.coeff(Rational(1, 8)), LogLinear(Rational(2)));
    EXPECT_EQ(tt.coeff(Rational(9, 8)), LogLinear(Rational(2)));
    EXPECT_TRUE(tt.coeff(Rational(5, 8)).is_zero());
}

TEST(FourierSeries, ReciprocalIsInverse) {
    for (auto kind : {ThetaKind::theta, ThetaKind::theta_tilde, ThetaKind::theta_tilde2}) {
        auto f = classical_theta(kind, Rational(6));
        auto p = f * f.reciprocal();
        ASSERT_FALSE(p.is_zero());
        EXPECT_EQ(p.coeff(0), LogLinear(Rational(1)));
        for (auto& [e, c] : p.coeffs)
            if (e != 0) EXPECT_TRUE(c.is_zero()) << to_string(e);
        EXPECT_GE(p.trunc, Rational(5));
    }
}

TEST(FourierSeries, ProductTruncationAndShift) {
    FourierSeries f(2, Rational(2));
    f.set(0, LogLinear(Rational(1)));
    f.set(Rational(1, 2), LogLinear(Rational(2)));
    FourierSeries g = f.shift(Rational(-1, 8));
    EXPECT_EQ(*g.leading_exponent(), Rational(-1, 8));
    EXPECT_EQ(g.trunc, Rational(15, 8));
    auto h = f * g;
    EXPECT_EQ(h.trunc, Rational(15, 8));
    EXPECT_EQ(h.coeff(Rational(3, 8)), LogLinear(Rational(4)));
    EXPECT_EQ(h.coeff(Rational(7, 8)), LogLinear(Rational(4)));
    EXPECT_EQ(constant_term(f), LogLinear(Rational(1)));
}

// u, v from 1/theta and 1/theta~; w from 1/theta~~.
TEST(UVW, DefiningIdentities) {
    auto b = build_uvw(Rational(6));
    auto th = classical_theta(ThetaKind::theta, Rational(6));
    auto tht = classical_theta(ThetaKind::theta_tilde, Rational(6));
    auto one_a = (b.u + b.v) * th;
    auto one_b = (b.u - b.v) * tht;
    for (auto* s : {&one_a, &one_b}) {
        EXPECT_EQ(s->coeff(0), LogLinear(Rational(1)));
        EXPECT_EQ(s->coeffs.size(), 1u);
    }
    auto tt2 = classical_theta(ThetaKind::theta_tilde2, Rational(7));
    auto two = b.w * tt2;
    EXPECT_EQ(two.coeff(0), LogLinear(Rational(2)));
    EXPECT_EQ(two.coeffs.size(), 1u);
}

TEST(UVW, ExponentsLieInExpectedCosets) {
    auto b = build_uvw(Rational(5));
    for (auto& [e, c] : b.u.coeffs) EXPECT_TRUE(is_integral(e));
    for (auto& [e, c] : b.v.coeffs) EXPECT_TRUE(is_integral(e - Rational(1, 2)));
    for (auto& [e, c] : b.w.coeffs) EXPECT_TRUE(is_integral(e + Rational(1, 8)));
}

// theta0 for L0 = Z with Q(t) = 2Dt^2 against a direct count.
TEST(Theta0, MatchesDirectEnumeration) {
    for (long D : {2L, 5L, 13L}) {
        for (long j = 0; j < 4 * D; ++j) {
            Rational mu(j, 4 * D);
            auto f = theta0_series(mu, D, Rational(40));
            std::map<Rational, long> cnt;
            for (long n = -20; n <= 20; ++n) {
                Rational x = mu + n;
                Rational e = 2 * D * x * x;
                if (e < 40) cnt[e]++;
            }
            ASSERT_EQ(f.coeffs.size(), cnt.size());
            for (auto& [e, k] : cnt) EXPECT_EQ(f.coeff(e), LogLinear(Rational(k)));
        }
    }
}

TEST(UVW, RejectsSmallTruncation) { EXPECT_THROW(build_uvw(Rational(1, 2)), InputError); }
