#include <gtest/gtest.h>

#include <random>

#include <cmtheta/checks.hpp>

using namespace cmtheta;

namespace {

std::mt19937_64& rng() {
    static std::mt19937_64 g(20261017);
    return g;
}

Rational rand_rat(long span = 20, long maxden = 12) {
    std::uniform_int_distribution<long> n(-span, span), d(1, maxden);
    return Rational(n(rng()), d(rng()));
}

W0Vector rand_w0() { return {rand_rat(), rand_rat(), rand_rat(), rand_rat()}; }

}  // namespace

TEST(Property, RationalRoundTripAndFrac) {
    for (int i = 0; i < 500; ++i) {
        Rational x = rand_rat(1000, 97);
        EXPECT_EQ(parse_rational(to_string(x)), x);
        Rational f = frac(x);
        EXPECT_GE(f, 0);
        EXPECT_LT(f, 1);
        EXPECT_TRUE(is_integral(x - f));
    }
}

TEST(Property, QuadraticNormIsMultiplicative) {
    for (long d : {2L, 5L, -3L, 13L}) {
        for (int i = 0; i < 100; ++i) {
            QuadElem x(d, rand_rat(), rand_rat()), y(d, rand_rat(), rand_rat());
            EXPECT_EQ((x * y).norm(), x.norm() * y.norm());
            EXPECT_EQ((x + y).trace(), x.trace() + y.trace());
            if (!y.norm().is_zero()) EXPECT_EQ((x / y) * y, x);
        }
    }
}

TEST(Property, W0FormPolarization) {
    for (long D = 2; D <= 13; ++D)
        for (int i = 0; i < 50; ++i) {
            W0Vector x = rand_w0(), y = rand_w0(), s;
            for (int k = 0; k < 4; ++k) s[k] = x[k] + y[k];
            EXPECT_EQ(qform_W0(s, D) - qform_W0(x, D) - qform_W0(y, D), bform_W0(x, y, D));
            EXPECT_EQ(bform_W0(x, y, D), bform_W0(y, x, D));
        }
}

// Fibers partition L0'/L0 x M'/M and the norm is additive across them.
TEST(Property, FibersPartitionAndPreserveQ) {
    for (long D = 2; D <= 13; ++D) {
        std::set<std::pair<std::string, std::string>> seen;
        for (auto& mu : all_cosets_L()) {
            auto fib = fiber_decompose(mu, D);
            EXPECT_EQ(long(fib.size()), 2 * D);
            for (auto& p : fib) {
                EXPECT_EQ(frac(qval(p.mu0, D) + qval(p.mu1, D)), qval(mu)) << D << " " << p.mu1.str();
                EXPECT_TRUE(seen.insert({p.mu0.str(), p.mu1.str()}).second);
            }
        }
        EXPECT_EQ(long(seen.size()), 64 * 2 * D);
    }
}

TEST(Property, SeriesRingAxioms) {
    Rational T(4);
    auto rand_series = [&](Rational lead) {
        FourierSeries f(8, T);
        std::uniform_int_distribution<int> c(-5, 5);
        f.set(lead, LogLinear(Rational(c(rng()) == 0 ? 1 : 3)));
        for (int k = 1; k < 20; ++k) f.add_to(lead + Rational(k, 8), LogLinear(Rational(c(rng()))));
        return f.truncated(T);
    };
    for (int i = 0; i < 20; ++i) {
        auto f = rand_series(Rational(-1, 8)), g = rand_series(0), h = rand_series(Rational(1, 2));
        EXPECT_EQ(((f * g) * h).truncated(T), (f * (g * h)).truncated(T));
        EXPECT_EQ((f * (g + h)).truncated(T), (f * g + f * h).truncated(T));
        auto one = (g * g.reciprocal()).truncated(T);
        EXPECT_EQ(one, FourierSeries::constant(LogLinear(Rational(1)), T).truncated(T));
    }
}

TEST(Property, LogLinearEvaluateIsLinear) {
    for (int i = 0; i < 200; ++i) {
        LogLinear x = LogLinear(rand_rat()) + LogLinear::log_of(5, rand_rat()) + LogLinear::log_of(19, rand_rat());
        LogLinear y = LogLinear::log_of(5, rand_rat()) + LogLinear::log_of(29, rand_rat());
        Rational s = rand_rat();
        double lhs = (x * s + y).evaluate();
        double rhs = rational_to<double>(s) * x.evaluate() + y.evaluate();
        EXPECT_NEAR(lhs, rhs, 1e-9 * (1 + std::abs(rhs)));
        EXPECT_EQ(x - x, LogLinear());
    }
}

TEST(Property, EisensteinCoefficientsSymmetric) {
    auto ctx = make_context(default_cm_input());
    auto sample = sample_admissible_t(ctx, 400, 3);
    std::shuffle(sample.begin(), sample.end(), rng());
    sample.resize(std::min<size_t>(sample.size(), 25));
    for (auto& [t, mu] : sample) {
        auto d = coeff_a_detail(ctx, t, mu);
        EXPECT_TRUE(d.in_support);
        EXPECT_EQ(d.a, coeff_a(ctx, t, -mu));
        EXPECT_EQ(diff_set(ctx, t).size() % 2, 1u) << t.str();
    }
}
