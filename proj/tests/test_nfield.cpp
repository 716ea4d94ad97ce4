#include <gtest/gtest.h>

#include <cmtheta/nfield.hpp>

#include <random>

using namespace cmtheta;

TEST(Rational, ParseAndPrint) {
    EXPECT_EQ(parse_rational("-3/4"), Rational(-3, 4));
    EXPECT_EQ(parse_rational(" 12 "), Rational(12));
    EXPECT_EQ(to_string(Rational(-6, 4)), "-3/2");
    EXPECT_THROW(parse_rational("1/0"), InputError);
    EXPECT_THROW(parse_rational("abc"), InputError);
}

TEST(Rational, FloorFracIntegral) {
    EXPECT_EQ(floor_int(Rational(-7, 2)), Integer(-4));
    EXPECT_EQ(ceil_int(Rational(-7, 2)), Integer(-3));
    EXPECT_EQ(frac(Rational(-1, 8)), Rational(7, 8));
    EXPECT_TRUE(is_integral(Rational(10, 5)));
}

TEST(Primes, OrdAndFactor) {
    EXPECT_EQ(ord_p(Integer(360), 2), 3);
    EXPECT_EQ(ord_p(Rational(5, 72), 3), -2);
    auto f = factor(Integer(360));
    std::vector<std::pair<long, int>> want = {{2, 3}, {3, 2}, {5, 1}};
    EXPECT_EQ(f, want);
    for (long n : {2L, 3L, 97L, 7919L}) EXPECT_TRUE(is_prime(n));
    for (long n : {1L, 4L, 91L, 7917L}) EXPECT_FALSE(is_prime(n));
}

TEST(Primes, SquareClass) {
    auto s = square_class(Rational(-12));
    EXPECT_EQ(s.d, Integer(-3));
    EXPECT_EQ(s.f, Rational(2));
    auto t = square_class(Rational(5, 4));
    EXPECT_EQ(t.d, Integer(5));
    EXPECT_EQ(t.f, Rational(1, 2));
    EXPECT_EQ(fundamental_discriminant(Rational(5)), Integer(5));
    EXPECT_EQ(fundamental_discriminant(Rational(3)), Integer(12));
    EXPECT_EQ(fundamental_discriminant(Rational(8)), Integer(8));
}

// Euler's criterion against an explicit list of squares.
TEST(Primes, KroneckerMatchesSquareCount) {
    for (long p : {3L, 5L, 7L, 11L, 13L, 29L}) {
        std::set<long> sq;
        for (long x = 1; x < p; ++x) sq.insert(x * x % p);
        for (long d = -20; d <= 20; ++d) {
            long r = ((d % p) + p) % p;
            int want = r == 0 ? 0 : (sq.count(r) ? 1 : -1);
            EXPECT_EQ(kronecker(Integer(d), p), want) << "d=" << d << " p=" << p;
        }
    }
    EXPECT_EQ(kronecker(Integer(5), 2), -1);
    EXPECT_EQ(kronecker(Integer(17), 2), 1);
}

TEST(Primes, SqrtModPrimePower) {
    for (long p : {3L, 5L, 11L}) {
        for (long a : {1L, 4L, 9L, 16L}) {
            if (a % p == 0) continue;
            Integer r = sqrt_mod_prime_power(Integer(a), p, 6);
            Integer pN = boost::multiprecision::pow(Integer(p), 6);
            EXPECT_EQ(mod_floor(r * r - a, pN), Integer(0));
        }
    }
    Integer r = sqrt_mod_prime_power(Integer(17), 2, 10);
    EXPECT_EQ(mod_floor(r * r - 17, Integer(1024)), Integer(0));
}

TEST(QuadField, ArithmeticAndParse) {
    QuadElem x = parse_quad("-5/2 - 1/2 sqrtD", 5);
    EXPECT_EQ(x, QuadElem(5, Rational(-5, 2), Rational(-1, 2)));
    EXPECT_EQ(x.norm(), Rational(5));
    EXPECT_EQ(x.trace(), Rational(-5));
    QuadElem y(5, 3, 1);
    EXPECT_EQ((x / y) * y, x);
    EXPECT_EQ(QuadElem::sqrt_of(5) * QuadElem::sqrt_of(5), QuadElem(5, 5));
    EXPECT_NEAR(QuadElem::sqrt_of(5).embed<double>(0), std::sqrt(5.0), 1e-15);
    EXPECT_NEAR(QuadElem::sqrt_of(5).embed<double>(1), -std::sqrt(5.0), 1e-15);
    EXPECT_THROW(parse_quad("1 + sqrtQ", 5), InputError);
}

TEST(QuadField, TotalPositivity) {
    EXPECT_TRUE(is_totally_positive(QuadElem(5, 3, 1)));
    EXPECT_FALSE(is_totally_positive(QuadElem(5, 2, 1)));
    EXPECT_FALSE(is_totally_positive(QuadElem(5, -1, 0)));
}

TEST(QuadField, NormIsMultiplicative) {
    std::mt19937 g(3);
    std::uniform_int_distribution<int> d(-9, 9);
    for (int i = 0; i < 200; ++i) {
        QuadElem x(13, Rational(d(g), 1 + (i % 3)), d(g)), y(13, d(g), Rational(d(g), 2));
        EXPECT_EQ((x * y).norm(), x.norm() * y.norm());
        EXPECT_EQ((x * y).conj(), x.conj() * y.conj());
    }
}

TEST(CMField, InverseAndRelativeNorm) {
    QuadElem Delta = parse_quad("-5/2 - 1/2 sqrtD", 5);
    CMElem x{QuadElem(5, 1, 2), QuadElem(5, Rational(1, 2), 0), Delta};
    CMElem y{QuadElem(5, -3, 0), QuadElem(5, 1, 1), Delta};
    CMElem one{QuadElem(5, 1), QuadElem(5, 0), Delta};
    EXPECT_EQ(x * x.inverse(), one);
    EXPECT_EQ((x * y).norm_EF(), x.norm_EF() * y.norm_EF());
    EXPECT_EQ((x * x.conj()).v, QuadElem(5, 0));
}

TEST(Splitting, PrimesAboveSqrt5) {
    EXPECT_EQ(primes_above(11, 5).size(), 2u);
    EXPECT_EQ(primes_above(3, 5)[0].kind, SplitKind::inert);
    EXPECT_EQ(primes_above(5, 5)[0].kind, SplitKind::ramified);
    EXPECT_EQ(primes_above(2, 5)[0].kind, SplitKind::inert);
    EXPECT_EQ(primes_above(3, 5)[0].norm(), Integer(9));
}

// Enumeration against a direct scan of a box.
TEST(TraceSupport, EnumerationMatchesScan) {
    TraceSupport sup = TraceSupport::from_generators(Rational(1, 2), Rational(1, 10),
                                                     {{Rational(1), Rational(0)}, {Rational(1, 2), Rational(1, 10)},
                                                      {Rational(0), Rational(1, 5)}});
    for (long M = 1; M <= 6; ++M) {
        Rational m(M);
        auto ts = enumerate_trace_t(m, sup, Rational(5));
        std::set<Rational> got;
        for (auto& t : ts) {
            EXPECT_EQ(t.trace(), m);
            EXPECT_TRUE(is_totally_positive(t));
            EXPECT_TRUE(sup.contains(t.a, t.b));
            got.insert(t.b);
        }
        std::set<Rational> want;
        for (long k = -400; k <= 400; ++k) {
            Rational y(k, 100);
            QuadElem t(5, m / 2, y);
            if (sup.contains(t.a, y) && is_totally_positive(t)) want.insert(y);
        }
        EXPECT_EQ(got, want) << "m=" << M;
    }
}
