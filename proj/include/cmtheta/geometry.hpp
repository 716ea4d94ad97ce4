#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lattices.hpp"
#include "weilrep.hpp"

namespace cmtheta {

// ---------------------------------------------------------------- 2x2 complex

template <class T>
struct Mat2 {
    Cplx<T> a, b, c, d;  // [[a, b], [c, d]]

    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
    Mat2 transpose() const { return {a, c, b, d}; }
    Cplx<T> det() const { return a * d - b * c; }
    Mat2 inverse() const {
        Cplx<T> D = det();
        if (D.norm2() == 0) throw InputError("singular 2x2 matrix");
        return {d / D, -b / D, -c / D, a / D};
    }
};

template <class T>
struct SiegelPoint {
    Cplx<T> t1, t2, t12;

    Mat2<T> matrix() const { return {t1, t12, t12, t2}; }
    static SiegelPoint from_matrix(const Mat2<T>& m) {
        // symmetrise to absorb rounding
        return {m.a, m.d, (m.b + m.c) * T(0.5)};
    }
    T det_im() const { return t1.im * t2.im - t12.im * t12.im; }
    bool im_positive_definite() const { return t1.im > 0 && det_im() > 0; }
    bool im_negative_definite() const { return t1.im < 0 && det_im() > 0; }
};

// Projective coordinates [a, b, c, d, r] on the quadric Q_V = 0.
template <class T>
struct DCoord {
    Cplx<T> a, b, c, d, r;
};

template <class T>
Cplx<T> qform_V(const DCoord<T>& z) {
    return z.r * z.r * T(2) - z.a * z.b * T(2) - z.c * z.d * T(2);
}

// B(z, zbar) = 2|r|^2 - (a bbar + abar b) - (c dbar + cbar d), half the
// polarization of Q_V; with this scaling B(Xi tau, conj) = -4 det Im tau.
template <class T>
T hermitian_B(const DCoord<T>& z) {
    return T(2) * z.r.norm2() - (z.a * z.b.conj() + z.a.conj() * z.b).re -
           (z.c * z.d.conj() + z.c.conj() * z.d).re;
}

template <class T>
DCoord<T> xi_map(const SiegelPoint<T>& tau) {
    if (tau.det_im() == 0) throw InputError("xi_map: Im(tau) is singular");
    Cplx<T> det = tau.t1 * tau.t2 - tau.t12 * tau.t12;
    return {-det, Cplx<T>(T(1)), tau.t1, tau.t2, tau.t12};
}

template <class T>
SiegelPoint<T> xi_inv(const DCoord<T>& z) {
    if (z.b.norm2() == 0) throw InputError("xi_inv: b = 0");
    return {z.c / z.b, z.d / z.b, z.r / z.b};
}

// ---------------------------------------------------------------- Hilbert embedding

// Z-basis e1 = 1, e2 of O_F.
inline QuadElem basis_e2(long D) {
    if (D % 4 == 1) return QuadElem(D, Rational(1, 2), Rational(-1, 2));
    if (D % 4 == 0) return QuadElem(D, 0, Rational(-1, 2));
    throw InputError("D must be a fundamental discriminant");
}

// R = [[e1, e2], [s(e1), s(e2)]] as exact quadratic numbers.
inline std::array<QuadElem, 4> R_exact(long D) {
    QuadElem e1(D, 1), e2 = basis_e2(D);
    return {e1, e2, e1.conj(), e2.conj()};
}

template <class T>
Mat2<T> R_numeric(long D) {
    auto R = R_exact(D);
    return {Cplx<T>(R[0].embed<T>(0)), Cplx<T>(R[1].embed<T>(0)), Cplx<T>(R[2].embed<T>(0)),
            Cplx<T>(R[3].embed<T>(0))};
}

template <class T>
struct HPoint {
    Cplx<T> z1, z2;
};

template <class T>
SiegelPoint<T> phi_point(const HPoint<T>& z, long D) {
    Mat2<T> R = R_numeric<T>(D);
    Mat2<T> Z{z.z1, Cplx<T>(T(0)), Cplx<T>(T(0)), z.z2};
    return SiegelPoint<T>::from_matrix(R.transpose() * Z * R);
}

using QMat4 = std::array<std::array<Rational, 4>, 4>;
using FMat2 = std::array<QuadElem, 4>;  // [[a, b], [c, d]] over F

inline QMat4 phi_matrix(const FMat2& g, long D) {
    QuadElem det = g[0] * g[3] - g[1] * g[2];
    if (det != QuadElem(D, 1)) throw InputError("phi_matrix: matrix not in SL2(F)");
    auto R = R_exact(D);
    QuadElem zero(D, 0);
    using QM = std::array<std::array<QuadElem, 4>, 4>;
    auto mul = [&](const QM& A, const QM& B) {
        QM C;
        for (auto& row : C) row.fill(zero);
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k)
                for (int j = 0; j < 4; ++j) C[i][j] += A[i][k] * B[k][j];
        return C;
    };
    QuadElem detR = R[0] * R[3] - R[1] * R[2];
    // R^-1 and (R^t)^-1
    std::array<QuadElem, 4> Ri = {R[3] / detR, -R[1] / detR, -R[2] / detR, R[0] / detR};
    QM left, mid, right;
    for (auto* m : {&left, &mid, &right})
        for (auto& row : *m) row.fill(zero);
    // diag(R^t, R^-1)
    left[0][0] = R[0]; left[0][1] = R[2]; left[1][0] = R[1]; left[1][1] = R[3];
    left[2][2] = Ri[0]; left[2][3] = Ri[1]; left[3][2] = Ri[2]; left[3][3] = Ri[3];
    // gamma*
    mid[0][0] = g[0]; mid[0][2] = g[1]; mid[2][0] = g[2]; mid[2][2] = g[3];
    mid[1][1] = g[0].conj(); mid[1][3] = g[1].conj(); mid[3][1] = g[2].conj(); mid[3][3] = g[3].conj();
    // diag((R^t)^-1, R)
    right[0][0] = Ri[0]; right[0][1] = Ri[2]; right[1][0] = Ri[1]; right[1][1] = Ri[3];
    right[2][2] = R[0]; right[2][3] = R[1]; right[3][2] = R[2]; right[3][3] = R[3];
    QM P = mul(mul(left, mid), right);
    QMat4 out;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (!P[i][j].is_rational()) throw InputError("phi_matrix: irrational entry");
            out[i][j] = P[i][j].a;
        }
    return out;
}

// A^t D - C^t B = I, A^t C and B^t D symmetric.
inline bool is_symplectic(const QMat4& M) {
    auto blk = [&](int bi, int bj, int i, int j) { return M[2 * bi + i][2 * bj + j]; };
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            Rational adcb = 0, ac = 0, ac_t = 0, bd = 0, bd_t = 0;
            for (int k = 0; k < 2; ++k) {
                adcb += blk(0, 0, k, i) * blk(1, 1, k, j) - blk(1, 0, k, i) * blk(0, 1, k, j);
                ac += blk(0, 0, k, i) * blk(1, 0, k, j);
                ac_t += blk(0, 0, k, j) * blk(1, 0, k, i);
                bd += blk(0, 1, k, i) * blk(1, 1, k, j);
                bd_t += blk(0, 1, k, j) * blk(1, 1, k, i);
            }
            if (adcb != (i == j ? 1 : 0) || ac != ac_t || bd != bd_t) return false;
        }
    return true;
}

// (A tau + B)(C tau + D)^-1 for a real 4x4 symplectic matrix.
template <class T>
SiegelPoint<T> act(const QMat4& M, const SiegelPoint<T>& tau) {
    auto blk = [&](int bi, int bj) {
        return Mat2<T>{Cplx<T>(rational_to<T>(M[2 * bi][2 * bj])),
                       Cplx<T>(rational_to<T>(M[2 * bi][2 * bj + 1])),
                       Cplx<T>(rational_to<T>(M[2 * bi + 1][2 * bj])),
                       Cplx<T>(rational_to<T>(M[2 * bi + 1][2 * bj + 1]))};
    };
    Mat2<T> t = tau.matrix();
    Mat2<T> num = blk(0, 0) * t + blk(0, 1);
    Mat2<T> den = blk(1, 0) * t + blk(1, 1);
    return SiegelPoint<T>::from_matrix(num * den.inverse());
}

template <class T>
Cplx<T> cocycle_det(const QMat4& M, const SiegelPoint<T>& tau) {
    Mat2<T> C{Cplx<T>(rational_to<T>(M[2][0])), Cplx<T>(rational_to<T>(M[2][1])),
              Cplx<T>(rational_to<T>(M[3][0])), Cplx<T>(rational_to<T>(M[3][1]))};
    Mat2<T> Dm{Cplx<T>(rational_to<T>(M[2][2])), Cplx<T>(rational_to<T>(M[2][3])),
               Cplx<T>(rational_to<T>(M[3][2])), Cplx<T>(rational_to<T>(M[3][3]))};
    return (C * tau.matrix() + Dm).det();
}

// gamma . z = (s1(gamma) z1, s2(gamma) z2).
template <class T>
HPoint<T> act_hilbert(const FMat2& g, const HPoint<T>& z) {
    auto mob = [](const FMat2& m, int j, const Cplx<T>& w) {
        Cplx<T> a(m[0].embed<T>(j)), b(m[1].embed<T>(j)), c(m[2].embed<T>(j)), d(m[3].embed<T>(j));
        return (a * w + b) / (c * w + d);
    };
    return {mob(g, 0, z.z1), mob(g, 1, z.z2)};
}

// Hilbert characteristic (x, y) in (O_F / 2 O_F)^2.
struct HilbertChar {
    QuadElem x, y;
};

inline int mod2(const Rational& q) {
    if (!is_integral(q)) throw InputError("characteristic is not integral in the chosen basis");
    return static_cast<int>(mod_floor(num(q), 2).convert_to<long>());
}

// (a1, a2)^t = R^-1 (a, s a)^t, (b1, b2)^t = [[s e2, -s e1], [e2, -e1]]^-1 (b, s b)^t.
inline CharQuadruple phi_char(const HilbertChar& h, long D) {
    QuadElem e2 = basis_e2(D);
    // a = a1 + a2 e2 with a2 = coefficient of sqrtD divided by that of e2
    Rational a2 = h.x.b / e2.b;
    Rational a1 = h.x.a - a2 * e2.a;
    // b = b1 s(e2) - b2
    Rational b1 = h.y.b / e2.conj().b;
    Rational b2 = b1 * e2.conj().a - h.y.a;
    return {mod2(a1), mod2(a2), mod2(b1), mod2(b2)};
}

inline HilbertChar phi_char_inverse(const CharQuadruple& c, long D) {
    QuadElem e1(D, 1), e2 = basis_e2(D);
    QuadElem x = e1 * Rational(c.e[0]) + e2 * Rational(c.e[1]);
    QuadElem y = e2.conj() * Rational(c.e[2]) - e1 * Rational(c.e[3]);
    return {x, y};
}

// tr(x y / sqrt D) in 2Z.
inline bool hilbert_even(const HilbertChar& h, long D) {
    QuadElem t = h.x * h.y / QuadElem::sqrt_of(D);
    return is_integral(t.trace() / 2);
}

// ---------------------------------------------------------------- CM input

struct CMInput {
    long D = 5;
    QuadElem Delta;
    CMElem alpha, beta, xi;
    long omega_E = 2;
    long cT = 1;
    std::optional<Rational> Lambda0chi;
    std::map<std::string, LogLinear> a0_overrides;  // keyed by M'/M coset string

    Rational Dtilde() const { return Delta.norm(); }
};

struct CMValidation {
    bool ok = true;
    std::vector<std::string> errors;
    std::vector<std::string> notes;
};

// Checks the stated invariants: Sigma(beta/alpha) in H^2, xi purely
// imaginary and xi (alphabar beta - alpha betabar) = 1.
inline CMValidation validate(const CMInput& in) {
    CMValidation v;
    auto fail = [&](const std::string& s) {
        v.ok = false;
        v.errors.push_back(s);
    };
    if (in.alpha.is_zero()) fail("alpha must be nonzero");
    if (!(in.Delta.a < 0 && is_totally_positive(-in.Delta))) fail("Delta must be totally negative");
    if (!v.ok) return v;
    CMElem q = in.beta / in.alpha;
    for (int j = 0; j < 2; ++j)
        if (!(q.embed<double>(j).im > 0))
            fail("Sigma(beta/alpha) is not in H^2 (embedding " + std::to_string(j + 1) + ")");
    if (!in.xi.u.is_zero()) fail("xi must satisfy xibar = -xi");
    CMElem one = CMElem::from_base(QuadElem(in.D, 1), in.Delta);
    CMElem norm = in.xi * (in.alpha.conj() * in.beta - in.alpha * in.beta.conj());
    if (!(norm == one)) fail("xi (alphabar beta - alpha betabar) = " + norm.str() + ", expected 1");
    for (int j = 0; j < 2; ++j)
        v.notes.push_back("Im sigma" + std::to_string(j + 1) +
                          "(xi) = " + std::to_string(in.xi.embed<double>(j).im));
    return v;
}

enum class OraclePoint { lattice, direct, inverted };

inline OraclePoint parse_oracle_point(const std::string& s) {
    if (s == "lattice") return OraclePoint::lattice;
    if (s == "direct") return OraclePoint::direct;
    if (s == "inverted") return OraclePoint::inverted;
    throw InputError("oracle_point must be lattice, direct or inverted");
}

template <class T>
struct CMPoint {
    HPoint<T> z;
    SiegelPoint<T> tau;
    Cplx<T> kappa_value;     // kappa of the W0-part of Xi(phi(z))
    Cplx<T> kappa_expected;  // (1 - D) s1(beta) s2(beta)
    T v0_component;          // |t-coordinate| of Xi(phi(z)) along V0, relative
};

// Complex-linear extension of kappa at embedding e.
template <class T>
Cplx<T> kappa_complex(const CMElem& alpha, const CMElem& beta, const std::array<Cplx<T>, 4>& A,
                      int e = 0) {
    Cplx<T> z(T(0));
    for (int i = 0; i < 4; ++i) z += A[i] * kappa_embed<T>(alpha, beta, w0_basis()[i], e);
    return z;
}

// z = Sigma(beta/alpha), tau = phi(z), and the kappa comparison.
template <class T>
CMPoint<T> cm_point(const CMInput& in) {
    CMElem q = in.beta / in.alpha;
    CMPoint<T> p;
    p.z = {q.embed<T>(0), q.embed<T>(1)};
    if (!(p.z.z1.im > 0 && p.z.z2.im > 0)) throw InputError("CM type error: Sigma(beta/alpha) not in H^2");
    p.tau = phi_point(p.z, in.D);
    DCoord<T> X = xi_map(p.tau);
    // V = V0 + W0: (c, d) = (D(s - t), s + t)
    T D = T(in.D);
    Cplx<T> s = (X.c + X.d * D) / (T(2) * D);
    Cplx<T> t = (X.d * D - X.c) / (T(2) * D);
    p.kappa_value = kappa_complex<T>(in.alpha, in.beta, {X.a, X.b, X.r, s});
    p.kappa_expected = in.beta.embed<T>(0) * in.beta.embed<T>(1) * T(1 - in.D);
    p.v0_component = t.abs() / s.abs();
    return p;
}

// Solves kappa_e(A) = delta_{e, e0} on W0(C) and reads off the Siegel point
// (1/b)[[D s, r], [r, s]]; the embedding e0 giving Im tau > 0 is used.
template <class T>
SiegelPoint<T> lattice_cm_point(const CMInput& in) {
    using std::abs;
    for (int e0 = 0; e0 < 4; ++e0) {
        // 4x4 complex system, Gaussian elimination with partial pivoting
        std::array<std::array<Cplx<T>, 5>, 4> M;
        for (int e = 0; e < 4; ++e) {
            for (int i = 0; i < 4; ++i) M[e][i] = kappa_embed<T>(in.alpha, in.beta, w0_basis()[i], e);
            M[e][4] = Cplx<T>(T(e == e0 ? 1 : 0));
        }
        for (int c = 0; c < 4; ++c) {
            int p = c;
            for (int r = c + 1; r < 4; ++r)
                if (M[r][c].norm2() > M[p][c].norm2()) p = r;
            std::swap(M[p], M[c]);
            for (int r = 0; r < 4; ++r) {
                if (r == c) continue;
                Cplx<T> f = M[r][c] / M[c][c];
                for (int k = c; k < 5; ++k) M[r][k] -= f * M[c][k];
            }
        }
        std::array<Cplx<T>, 4> A;
        for (int i = 0; i < 4; ++i) A[i] = M[i][4] / M[i][i];
        if (A[1].norm2() == 0) continue;
        SiegelPoint<T> tau{A[3] * T(in.D) / A[1], A[3] / A[1], A[2] / A[1]};
        if (tau.im_positive_definite()) return tau;
    }
    throw InputError("lattice_cm_point: no embedding gives a point of H2+");
}

template <class T>
SiegelPoint<T> oracle_point(const CMInput& in, OraclePoint which) {
    switch (which) {
        case OraclePoint::lattice:
            return lattice_cm_point<T>(in);
        case OraclePoint::direct:
            return cm_point<T>(in).tau;
        case OraclePoint::inverted: {
            CMElem q = -(in.alpha / in.beta);
            HPoint<T> z{q.embed<T>(0), q.embed<T>(1)};
            if (!(z.z1.im > 0 && z.z2.im > 0)) throw InputError("inverted point not in H^2");
            return phi_point(z, in.D);
        }
    }
    throw InputError("unknown oracle point");
}

// sqrt(D~) N(a) / (4 |(alpha betabar - alphabar beta)(s(alpha) s(beta)bar - s(alpha)bar s(beta))|),
// i.e. the value of N(f0) forced by the norm identity.
template <class T>
T implied_conductor_norm(const CMInput& in) {
    using std::sqrt;
    Cplx<T> a1 = in.alpha.embed<T>(0), b1 = in.beta.embed<T>(0);
    Cplx<T> a2 = in.alpha.embed<T>(1), b2 = in.beta.embed<T>(1);
    Cplx<T> X = (a1 * b1.conj() - a1.conj() * b1) * (a2 * b2.conj() - a2.conj() * b2);
    Integer dE = num(in.Delta.disc * in.Delta.disc * in.Dtilde());
    T Na = sqrt(rational_to<T>(ideal_norm_squared(in.alpha, in.beta, dE)));
    return sqrt(rational_to<T>(in.Dtilde())) * Na / (T(4) * X.abs());
}

}  // namespace cmtheta
