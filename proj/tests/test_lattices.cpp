#include <gtest/gtest.h>

#include <cmtheta/checks.hpp>

using namespace cmtheta;

TEST(Labels, SixtyFourDistinctCosets) {
    std::set<CosetL> seen;
    for (int i = 1; i <= 64; ++i) {
        CosetL m = label(i);
        EXPECT_EQ(label_index(m), i);
        seen.insert(m);
    }
    EXPECT_EQ(seen.size(), 64u);
    auto all = all_cosets_L();
    EXPECT_EQ(seen, std::set<CosetL>(all.begin(), all.end()));
}

TEST(Labels, KnownEntries) {
    EXPECT_EQ(label(45), CosetL(0, 0, 0, 0, Rational(1, 4)));
    EXPECT_EQ(qval(label(45)), Rational(1, 8));
    EXPECT_EQ(label(1), CosetL(0, 0, 0, 0, 0));
}

TEST(QuadraticForms, ValuesModOne) {
    EXPECT_EQ(qform_V(0, 0, 0, 0, Rational(1, 2)), Rational(1, 2));
    EXPECT_EQ(qval(CosetL0(Rational(1, 20)), 5), Rational(1, 40));
    EXPECT_EQ(qval(CosetM(0, 0, Rational(1, 4), Rational(1, 20)), 5), Rational(1, 8) - Rational(1, 40));
}

// Q_L(mu) = Q_0(mu0) + Q_M(mu1) mod 1 on every fiber pair.
TEST(Fibers, QuadraticFormIsAdditive) {
    for (long D : {2L, 5L, 6L, 13L})
        for (int i = 1; i <= 64; ++i)
            for (auto& p : fiber_decompose(label(i), D))
                EXPECT_EQ(qval(label(i)), frac(qval(p.mu0, D) + qval(p.mu1, D))) << "D=" << D << " i=" << i;
}

// Brute-force membership over all 4D x 64D candidate pairs as an
// independent oracle for the fiber of each label.
TEST(Fibers, MatchBruteForceMembership) {
    const long D = 3;
    for (int i : {1, 4, 17, 45, 64}) {
        CosetL mu = label(i);
        std::set<std::pair<CosetL0, CosetM>> want;
        for (long j = 0; j < 4 * D; ++j)
            for (auto& m1 : all_cosets_M(D)) {
                Rational t(j, 4 * D);
                // mu0 + mu1 = (a, b, D(s - t), s + t, r); must be mu mod L = Z^4 x (1/2)Z... checked coordinatewise
                CosetL sum(m1.a, m1.b, D * (m1.s - t), m1.s + t, m1.r);
                if (sum == mu) want.insert({CosetL0(t), m1});
            }
        std::set<std::pair<CosetL0, CosetM>> got;
        for (auto& p : fiber_decompose(mu, D)) got.insert({p.mu0, p.mu1});
        EXPECT_EQ(got, want) << "label " << i;
    }
}

// [L : L0 + M]^2 = |disc(L0)| |disc(M)| / |disc(L)| with Gram determinants
// 4D, 64D and 64.
TEST(Index, MatchesGramDeterminants) {
    for (long D = 2; D <= 13; ++D) {
        Integer idx = lattice_index(D);
        EXPECT_EQ(idx * idx * 64, Integer(4 * D) * Integer(64 * D));
        EXPECT_EQ(idx, Integer(2 * D));
        EXPECT_EQ(long(all_cosets_M(D).size()), 64 * D);
    }
}

TEST(SmithForm, ElementaryDivisors) {
    IntMatrix A = {{2, 4, 4}, {-6, 6, 12}, {10, -4, -16}};
    auto d = elementary_divisors(A);
    std::vector<Integer> want = {2, 6, 12};
    EXPECT_EQ(d, want);
}

class KappaTest : public ::testing::Test {
protected:
    CMInput cm = default_cm_input();
};

// Exact Q(kappa(A)) agrees with the numerical reflex form and is a fixed
// multiple of Q_W0.
TEST_F(KappaTest, ExactMatchesNumericAndScalesQW0) {
    std::optional<Rational> ratio;
    for (int a = -1; a <= 1; ++a)
        for (int s = -1; s <= 1; ++s) {
            W0Vector A = {Rational(a), Rational(1), Rational(s + 1), Rational(s)};
            auto k = kappa_exact(cm.alpha, cm.beta, A);
            double num = reflex_Q<double>(kappa_tensor(cm.alpha, cm.beta, A), cm.Dtilde());
            EXPECT_NEAR(rational_to<double>(k.Q()), num, 1e-9);
            Rational q = qform_W0(A, cm.D);
            if (q != 0) {
                if (!ratio) ratio = k.Q() / q;
                EXPECT_EQ(k.Q() / q, *ratio);
            }
        }
    ASSERT_TRUE(ratio);
    EXPECT_EQ(*ratio, Rational(-5, 2));
}

// kappa(M) has index 2 in N_Phi(a), a = O_F alpha + O_F beta.
TEST_F(KappaTest, ImageIndexTwo) {
    EXPECT_EQ(kappa_image_index_squared(cm.alpha, cm.beta, 125, 125), Rational(4));
}
