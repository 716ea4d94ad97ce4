#include <gtest/gtest.h>

#include <cmtheta/weilrep.hpp>

using namespace cmtheta;

TEST(Z8, CyclotomicArithmetic) {
    Z8 z = Z8::zeta(1);
    Z8 p = Z8(1);
    for (int k = 0; k < 8; ++k) p = p * z;
    EXPECT_EQ(p, Z8(1));
    EXPECT_EQ(Z8::zeta(4), Z8(-1));
    EXPECT_EQ(z * z.conj(), Z8(1));
    EXPECT_EQ(e8(Rational(1, 8)), z);
    EXPECT_EQ(e8(Rational(-3, 4)), Z8::zeta(2));
    EXPECT_THROW(e8(Rational(1, 3)), InputError);
}

TEST(WeilRep, TIsDiagonalOfOrderEight) {
    CycloMatrix T = rho_T();
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j)
            if (i != j) EXPECT_TRUE(T.at(i, j).is_zero());
    EXPECT_EQ(T.pow(8), CycloMatrix::identity());
}

TEST(WeilRep, ExactRelations) {
    auto rep = verify_mp2_relations();
    for (auto& l : rep.lines) SCOPED_TRACE(l);
    EXPECT_TRUE(rep.ok);
}

TEST(Characteristics, TenEvenInTableOrder) {
    const auto& ev = even_characteristics();
    ASSERT_EQ(ev.size(), 10u);
    EXPECT_EQ(ev.front().str(), "1111");
    EXPECT_EQ(ev.back().str(), "0000");
    for (auto& c : ev) EXPECT_TRUE(c.even());
    EXPECT_FALSE(CharQuadruple::parse("1010").even());
    EXPECT_THROW(CharQuadruple::parse("012"), InputError);
}

TEST(Tables, ChecksumAndOddRejection) {
    EXPECT_EQ(table_checksum(), kTableChecksum);
    EXPECT_THROW(load_f(CharQuadruple::parse("1010")), InputError);
}

// f_{1,1,1,1} carries w at mu(45) = (0,0,0,0,1/4).
TEST(Tables, KnownWComponent) {
    auto toks = table_tokens(CharQuadruple::parse("1111"));
    EXPECT_EQ(toks[44].sym, 'w');
    auto f = load_f(CharQuadruple::parse("1111"));
    const UVW& b = uvw_cached(3);
    EXPECT_TRUE(f[45] == b.w || f[45] == -b.w);
}

// Components at labels 1, 5, 9, 13 are +-u for every table.
TEST(Tables, ConstantComponentsArePlusMinusU) {
    const UVW& b = uvw_cached(3);
    for (auto& xy : even_characteristics()) {
        auto f = load_f(xy);
        for (int i : {1, 5, 9, 13}) EXPECT_TRUE(f[i] == b.u || f[i] == -b.u) << xy.str() << " " << i;
    }
}

TEST(Tables, ExponentsSatisfyTInvariance) {
    for (auto& xy : even_characteristics()) {
        auto rep = validate_exponents(load_f(xy));
        EXPECT_TRUE(rep.ok) << xy.str();
        ASSERT_EQ(rep.negative_terms.size(), 2u);
        for (auto& [i, e] : rep.negative_terms) {
            EXPECT_EQ(e, Rational(-1, 8));
            EXPECT_EQ(qval(label(i)), Rational(1, 8));
        }
    }
}

// S_1 = {i1, i3, i4, i6}; eps_{2,i5} = +1, eps_{2,i1} = 0.
TEST(Rosenhain, IndexSetAndSigns) {
    const auto& I = rosenhain_index_set();
    EXPECT_EQ(I[0].str(), "0010");
    EXPECT_EQ(I[5].str(), "1001");
    std::array<int, 6> e1 = {-1, 0, -1, 1, 0, 1};
    EXPECT_EQ(rosenhain_signs(1), e1);
    EXPECT_EQ(rosenhain_signs(2)[4], 1);
    EXPECT_EQ(rosenhain_signs(2)[0], 0);
    EXPECT_THROW(rosenhain_signs(4), InputError);
}

TEST(Rosenhain, InputIsSignedSum) {
    for (int k = 1; k <= 3; ++k) {
        SLVector f = rosenhain_inputs(k);
        SLVector g;
        for (auto& c : g.comp) c = FourierSeries(8, 3);
        for (int j = 0; j < 6; ++j)
            g += load_f(rosenhain_index_set()[j]) * Rational(rosenhain_signs(k)[j]);
        for (int i = 1; i <= 64; ++i) EXPECT_EQ(f[i], g[i]);
    }
}

// The seesaw contraction keeps only M'/M cosets and lands in exponents
// -Q_M(mu1) + Z.
TEST(HilbertInput, ExponentsMatchMCosets) {
    auto g = build_hilbert_input(load_f(CharQuadruple::parse("0000")), 5, Rational(2));
    EXPECT_FALSE(g.empty());
    for (auto& [m1, s] : g)
        for (auto& [e, c] : s.coeffs) EXPECT_TRUE(is_integral(e + qval(m1, 5))) << m1.str() << " " << to_string(e);
}

TEST(Dump, ContainsAllTables) {
    std::string s = dump_tables(2);
    for (auto& xy : even_characteristics()) EXPECT_NE(s.find("[f " + xy.str() + "]"), std::string::npos);
}
