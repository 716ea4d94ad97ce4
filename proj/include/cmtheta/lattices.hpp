#pragma once

#include <array>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "nfield.hpp"

namespace cmtheta {

// ---------------------------------------------------------------- cosets

// mu in L'/L, L = Z^5 in coordinates (a, b, c, d, r), Q_V = 2r^2 - 2ab - 2cd.
struct CosetL {
    Rational a, b, c, d, r;

    CosetL() = default;
    CosetL(Rational a_, Rational b_, Rational c_, Rational d_, Rational r_)
        : a(frac(a_)), b(frac(b_)), c(frac(c_)), d(frac(d_)), r(frac(r_)) {}

    auto key() const { return std::tie(a, b, c, d, r); }
    bool operator<(const CosetL& o) const { return key() < o.key(); }
    bool operator==(const CosetL& o) const { return key() == o.key(); }
    CosetL operator-() const { return {-a, -b, -c, -d, -r}; }
    CosetL operator+(const CosetL& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d, r + o.r}; }

    std::string str() const {
        return "(" + to_string(a) + "," + to_string(b) + "," + to_string(c) + "," + to_string(d) +
               "," + to_string(r) + ")";
    }
};

// mu1 in M'/M, M = Z^4 in coordinates (a, b, r, s), Q = 2r^2 - 2ab - 2Ds^2.
struct CosetM {
    Rational a, b, r, s;

    CosetM() = default;
    CosetM(Rational a_, Rational b_, Rational r_, Rational s_)
        : a(frac(a_)), b(frac(b_)), r(frac(r_)), s(frac(s_)) {}

    auto key() const { return std::tie(a, b, r, s); }
    bool operator<(const CosetM& o) const { return key() < o.key(); }
    bool operator==(const CosetM& o) const { return key() == o.key(); }
    CosetM operator-() const { return {-a, -b, -r, -s}; }
    std::array<Rational, 4> vec() const { return {a, b, r, s}; }

    std::string str() const {
        return "(" + to_string(a) + "," + to_string(b) + "," + to_string(r) + "," + to_string(s) +
               ")";
    }
};

// mu0 in L0'/L0, L0 = Z t with Q0 = 2 D t^2.
struct CosetL0 {
    Rational t;

    CosetL0() = default;
    explicit CosetL0(Rational t_) : t(frac(t_)) {}
    bool operator<(const CosetL0& o) const { return t < o.t; }
    bool operator==(const CosetL0& o) const { return t == o.t; }
    std::string str() const { return "(" + to_string(t) + ")"; }
};

inline Rational qform_V(const Rational& a, const Rational& b, const Rational& c, const Rational& d,
                        const Rational& r) {
    return 2 * r * r - 2 * a * b - 2 * c * d;
}

inline Rational qform_W0(const std::array<Rational, 4>& x, long D) {
    return 2 * x[2] * x[2] - 2 * x[0] * x[1] - 2 * Rational(D) * x[3] * x[3];
}

inline Rational bform_W0(const std::array<Rational, 4>& x, const std::array<Rational, 4>& y,
                         long D) {
    return 4 * x[2] * y[2] - 2 * (x[0] * y[1] + x[1] * y[0]) - 4 * Rational(D) * x[3] * y[3];
}

inline Rational qval(const CosetL& m) { return frac(qform_V(m.a, m.b, m.c, m.d, m.r)); }
inline Rational qval(const CosetM& m, long D) { return frac(qform_W0(m.vec(), D)); }
inline Rational qval(const CosetL0& m, long D) { return frac(2 * Rational(D) * m.t * m.t); }

// B(mu, nu) = Q(mu + nu) - Q(mu) - Q(nu) mod 1.
inline Rational bval(const CosetL& m, const CosetL& n) {
    return frac(qform_V(m.a + n.a, m.b + n.b, m.c + n.c, m.d + n.d, m.r + n.r) -
                qform_V(m.a, m.b, m.c, m.d, m.r) - qform_V(n.a, n.b, n.c, n.d, n.r));
}

// ---------------------------------------------------------------- label table

// Ordering of L'/L used by the input-form tables: entries are
// (2a, 2b, 2c, 2d, 4r) for labels 1..64.
inline const std::array<std::array<int, 5>, 64>& label_table_raw() {
    static const std::array<std::array<int, 5>, 64> t = {{
        {0, 0, 0, 0, 0}, {0, 0, 0, 1, 0}, {0, 0, 1, 0, 0}, {0, 0, 1, 1, 2},
        {0, 1, 0, 0, 0}, {0, 1, 0, 1, 0}, {0, 1, 1, 0, 0}, {0, 1, 1, 1, 2},
        {1, 0, 0, 0, 0}, {1, 0, 0, 1, 0}, {1, 0, 1, 0, 0}, {1, 0, 1, 1, 2},
        {1, 1, 0, 0, 2}, {1, 1, 0, 1, 2}, {1, 1, 1, 0, 2}, {1, 1, 1, 1, 0},
        {0, 0, 1, 1, 1}, {0, 0, 1, 1, 3}, {0, 1, 1, 1, 1}, {0, 1, 1, 1, 3},
        {1, 0, 1, 1, 1}, {1, 0, 1, 1, 3}, {1, 1, 0, 0, 1}, {1, 1, 0, 0, 3},
        {1, 1, 0, 1, 1}, {1, 1, 0, 1, 3}, {1, 1, 1, 0, 1}, {1, 1, 1, 0, 3},
        {0, 0, 0, 0, 2}, {0, 0, 0, 1, 2}, {0, 0, 1, 0, 2}, {0, 0, 1, 1, 0},
        {0, 1, 0, 0, 2}, {0, 1, 0, 1, 2}, {0, 1, 1, 0, 2}, {0, 1, 1, 1, 0},
        {1, 0, 0, 0, 2}, {1, 0, 0, 1, 2}, {1, 0, 1, 0, 2}, {1, 0, 1, 1, 0},
        {1, 1, 0, 0, 0}, {1, 1, 0, 1, 0}, {1, 1, 1, 0, 0}, {1, 1, 1, 1, 2},
        {0, 0, 0, 0, 1}, {0, 0, 0, 0, 3}, {0, 0, 0, 1, 1}, {0, 0, 0, 1, 3},
        {0, 0, 1, 0, 1}, {0, 0, 1, 0, 3}, {0, 1, 0, 0, 1}, {0, 1, 0, 0, 3},
        {0, 1, 0, 1, 1}, {0, 1, 0, 1, 3}, {0, 1, 1, 0, 1}, {0, 1, 1, 0, 3},
        {1, 0, 0, 0, 1}, {1, 0, 0, 0, 3}, {1, 0, 0, 1, 1}, {1, 0, 0, 1, 3},
        {1, 0, 1, 0, 1}, {1, 0, 1, 0, 3}, {1, 1, 1, 1, 1}, {1, 1, 1, 1, 3},
    }};
    return t;
}

// mu(i) for i = 1..64.
inline CosetL label(int i) {
    if (i < 1 || i > 64) throw InputError("label index out of range");
    auto& e = label_table_raw()[i - 1];
    return CosetL(Rational(e[0], 2), Rational(e[1], 2), Rational(e[2], 2), Rational(e[3], 2),
                  Rational(e[4], 4));
}

inline int label_index(const CosetL& m) {
    static const std::map<CosetL, int> idx = [] {
        std::map<CosetL, int> r;
        for (int i = 1; i <= 64; ++i) r[label(i)] = i;
        return r;
    }();
    auto it = idx.find(m);
    if (it == idx.end()) throw InputError("not an element of L'/L: " + m.str());
    return it->second;
}

inline std::vector<CosetL> all_cosets_L() {
    std::vector<CosetL> v;
    for (int i = 1; i <= 64; ++i) v.push_back(label(i));
    return v;
}

inline std::vector<CosetM> all_cosets_M(long D) {
    std::vector<CosetM> v;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int r = 0; r < 4; ++r)
                for (long s = 0; s < 4 * D; ++s)
                    v.emplace_back(Rational(a, 2), Rational(b, 2), Rational(r, 4),
                                   Rational(s, 4 * D));
    return v;
}

// ---------------------------------------------------------------- fibers

struct FiberPair {
    CosetL0 mu0;
    CosetM mu1;
};

// The full fiber of L'/(L0 + M) -> L'/L over mu, by membership testing of
// every candidate pair.  With s = i/4D and t = j/4D the sum mu0 + mu1 is
// (a, b, D(s - t), s + t, r) = (a, b, (i - j)/4, (i + j)/4D, r); the a, b, r
// coordinates of mu1 must equal those of mu, so only (i, j) is searched.
inline std::vector<FiberPair> fiber_decompose(const CosetL& mu, long D) {
    if (D < 2) throw InputError("fiber_decompose: D >= 2 required");
    const long N = 4 * D;
    const long c4 = num(mu.c * 4).convert_to<long>();      // 0 or 2
    const long dN = num(mu.d * N).convert_to<long>();      // 0 or 2D
    std::vector<FiberPair> out;
    for (long j = 0; j < N; ++j)
        for (long i = 0; i < N; ++i) {
            long cm = i - j, dm = i + j;
            if (cm % 2 != 0 || dm % (2 * D) != 0) continue;  // c, d in (1/2)Z
            if (((cm % 4) + 4) % 4 != c4 || dm % N != dN) continue;
            out.push_back({CosetL0(Rational(j, N)), CosetM(mu.a, mu.b, mu.r, Rational(i, N))});
        }
    return out;
}

// ---------------------------------------------------------------- Smith form

using IntMatrix = std::vector<std::vector<Integer>>;

inline std::vector<Integer> elementary_divisors(IntMatrix A) {
    size_t m = A.size(), n = m ? A[0].size() : 0;
    std::vector<Integer> out;
    size_t t = 0;
    auto absI = [](const Integer& z) { return boost::multiprecision::abs(z); };
    while (t < m && t < n) {
        // pivot: smallest nonzero |entry| in the trailing block
        bool found = false;
        size_t pi = t, pj = t;
        for (size_t i = t; i < m; ++i)
            for (size_t j = t; j < n; ++j)
                if (A[i][j] != 0 && (!found || absI(A[i][j]) < absI(A[pi][pj]))) {
                    pi = i;
                    pj = j;
                    found = true;
                }
        if (!found) break;
        std::swap(A[t], A[pi]);
        for (auto& row : A) std::swap(row[t], row[pj]);
        bool clean;
        do {
            clean = true;
            for (size_t i = t + 1; i < m; ++i) {
                Integer q = A[i][t] / A[t][t];
                for (size_t j = t; j < n; ++j) A[i][j] -= q * A[t][j];
                if (A[i][t] != 0) {
                    clean = false;
                    std::swap(A[t], A[i]);
                }
            }
            for (size_t j = t + 1; j < n; ++j) {
                Integer q = A[t][j] / A[t][t];
                for (size_t i = t; i < m; ++i) A[i][j] -= q * A[i][t];
                if (A[t][j] != 0) {
                    clean = false;
                    for (auto& row : A) std::swap(row[t], row[j]);
                }
            }
            if (clean) {
                // divisibility of the rest of the block
                for (size_t i = t + 1; i < m && clean; ++i)
                    for (size_t j = t + 1; j < n; ++j)
                        if (A[i][j] % A[t][t] != 0) {
                            for (size_t k = t; k < n; ++k) A[t][k] += A[i][k];
                            clean = false;
                            break;
                        }
            }
        } while (!clean);
        out.push_back(absI(A[t][t]));
        ++t;
    }
    return out;
}

// Images of the bases of L0 and M in L (coordinates a, b, c, d, r).
inline IntMatrix embedding_matrix(long D) {
    return {
        {0, 0, -D, 1, 0},  // L0: t -> (0, 0, -D t, t, 0)
        {1, 0, 0, 0, 0},   // M: a
        {0, 1, 0, 0, 0},   // M: b
        {0, 0, 0, 0, 1},   // M: r
        {0, 0, D, 1, 0},   // M: s -> (0, 0, D s, s, 0)
    };
}

inline Integer lattice_index(long D) {
    Integer idx = 1;
    auto ed = elementary_divisors(embedding_matrix(D));
    if (ed.size() < 5) return 0;
    for (auto& e : ed) idx *= e;
    return idx;
}

// ---------------------------------------------------------------- kappa

// kappa(A) = a alpha s(alpha) + alpha s(beta)(r - s sqrtD) + beta s(alpha)(r + s sqrtD)
//          + b beta s(beta),
// stored as pairs (x_j, y_j) standing for sum_j x_j (x) s(y_j); the first slot
// is embedded by sigma1 and the second by sigma2.
struct KappaTensor {
    std::vector<std::pair<CMElem, CMElem>> pairs;
};

using W0Vector = std::array<Rational, 4>;  // (a, b, r, s)

inline KappaTensor kappa_tensor(const CMElem& alpha, const CMElem& beta, const W0Vector& A) {
    if (alpha.is_zero()) throw InputError("kappa: alpha must be nonzero");
    alpha.same_field(beta);
    const Rational& Dq = alpha.Delta.disc;
    KappaTensor k;
    k.pairs.push_back({alpha * A[0], alpha});
    k.pairs.push_back({alpha, beta * QuadElem(Dq, A[2], A[3])});
    k.pairs.push_back({beta * QuadElem(Dq, A[2], A[3]), alpha});
    k.pairs.push_back({beta * A[1], beta});
    return k;
}

// The four embeddings of the reflex field: 0 = (s1, s2), 1 = (s1bar, s2bar),
// 2 = (s1, s2bar), 3 = (s1bar, s2).
template <class T>
Cplx<T> embed_tensor(const KappaTensor& k, int e) {
    bool b1 = (e == 1 || e == 3), b2 = (e == 1 || e == 2);
    Cplx<T> z(T(0));
    for (auto& [x, y] : k.pairs) z += x.template embed<T>(0, b1) * y.template embed<T>(1, b2);
    return z;
}

template <class T>
Cplx<T> kappa_embed(const CMElem& alpha, const CMElem& beta, const W0Vector& A, int e = 0) {
    return embed_tensor<T>(kappa_tensor(alpha, beta, A), e);
}

// sqrt(D~) is sent to -|s1 Delta|^{1/2}|s2 Delta|^{1/2} by the CM-type place,
// so Q(z) = tr(z zbar / sqrt D~) = (|z_(s1,s2bar)|^2 - |z_(s1,s2)|^2)/sqrt(D~).
template <class T>
T reflex_Q(const KappaTensor& k, const Rational& Dtilde) {
    using std::sqrt;
    T P1 = embed_tensor<T>(k, 0).norm2();
    T P2 = embed_tensor<T>(k, 2).norm2();
    return (P2 - P1) / sqrt(rational_to<T>(Dtilde));
}

// Exact F~-valued data of kappa(A): kappa kappabar = S_T/4 + (S_w/4) sqrt D~,
// kappa + kappabar = trace_u + trace_v sqrt D~, and Q(kappa) = S_w/2.
struct KappaExact {
    Rational S_T, S_w;
    Rational trace_u, trace_v;
    Rational Q() const { return S_w / 2; }
};

inline KappaExact kappa_exact(const KappaTensor& k) {
    auto T = [](const CMElem& x, const CMElem& y) {
        return (x.u * y.u - x.Delta * x.v * y.v) * Rational(2);
    };
    auto W = [](const CMElem& x, const CMElem& y) { return (x.v * y.u - x.u * y.v) * Rational(2); };
    const Rational& Dq = k.pairs.front().first.Delta.disc;
    QuadElem sT(Dq, 0), sW(Dq, 0), tu(Dq, 0), tv(Dq, 0);
    for (auto& [xj, yj] : k.pairs) {
        for (auto& [xk, yk] : k.pairs) {
            sT += T(xj, xk) * T(yj, yk).conj();
            sW += W(xj, xk) * W(yj, yk).conj();
        }
        tu += xj.u * yj.u.conj();
        tv += xj.v * yj.v.conj();
    }
    if (!sT.is_rational() || !sW.is_rational() || !tu.is_rational())
        throw InputError("kappa_exact: norm data not rational");
    if (!tv.is_rational()) throw InputError("kappa_exact: trace data not rational");
    return {sT.a, sW.a, 2 * tu.a, 2 * tv.a};
}

inline KappaExact kappa_exact(const CMElem& alpha, const CMElem& beta, const W0Vector& A) {
    return kappa_exact(kappa_tensor(alpha, beta, A));
}

inline const std::array<W0Vector, 4>& w0_basis() {
    static const std::array<W0Vector, 4> e = {{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}};
    return e;
}

// Tr_{E~/Q}(kappa(A) kappa(B)): summing over both conjugations independently
// factors through tr_{E/F} in each slot.
inline Rational reflex_trace_product(const KappaTensor& x, const KappaTensor& y) {
    const Rational& Dq = x.pairs.front().first.Delta.disc;
    QuadElem s(Dq, 0);
    for (auto& [a1, b1] : x.pairs)
        for (auto& [a2, b2] : y.pairs)
            s += (a1 * a2).trace_EF() * (b1 * b2).trace_EF().conj();
    if (!s.is_rational()) throw InputError("reflex trace not rational");
    return s.a;
}

inline Rational det4(std::vector<std::vector<Rational>> G) {
    const size_t n = G.size();
    Rational det = 1;
    for (size_t c = 0; c < n; ++c) {
        size_t p = c;
        while (p < n && G[p][c] == 0) ++p;
        if (p == n) return 0;
        if (p != c) {
            std::swap(G[p], G[c]);
            det = -det;
        }
        det *= G[c][c];
        for (size_t r = c + 1; r < n; ++r) {
            Rational f = G[r][c] / G[c][c];
            for (size_t k = c; k < n; ++k) G[r][k] -= f * G[c][k];
        }
    }
    return det;
}

// Gram determinant of kappa(M) under the trace form of E~.
inline Rational kappa_gram_det(const CMElem& alpha, const CMElem& beta) {
    std::vector<KappaTensor> g;
    for (auto& e : w0_basis()) g.push_back(kappa_tensor(alpha, beta, e));
    std::vector<std::vector<Rational>> G(4, std::vector<Rational>(4));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) G[i][j] = reflex_trace_product(g[i], g[j]);
    return det4(G);
}

// N(a) for a = O_F alpha + O_F beta, from Tr_{E/Q} Gram det = N(a)^2 d_E.
inline Rational ideal_norm_squared(const CMElem& alpha, const CMElem& beta, const Integer& disc_E) {
    const Rational& Dq = alpha.Delta.disc;
    QuadElem omega = (num(Dq) % 4 == 1) ? QuadElem(Dq, Rational(1, 2), Rational(1, 2))
                                        : QuadElem(Dq, 0, 1);
    std::vector<CMElem> g = {alpha, alpha * omega, beta, beta * omega};
    std::vector<std::vector<Rational>> G(4, std::vector<Rational>(4));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) G[i][j] = (g[i] * g[j]).trace_EF().trace();
    return boost::multiprecision::abs(det4(G)) / Rational(disc_E);
}

// [N_Phi(a) : kappa(M)]^2 = det Gram(kappa(M)) / (N(N_Phi a)^2 d_{E~}).
// N_{E~/Q}(N_Phi a) = N(a)^2 since the four conjugates of s1(x) s2(x) multiply
// to N_{E/Q}(x)^2.
inline Rational kappa_image_index_squared(const CMElem& alpha, const CMElem& beta,
                                          const Integer& disc_E, const Integer& disc_Et) {
    Rational Na2 = ideal_norm_squared(alpha, beta, disc_E);
    return boost::multiprecision::abs(kappa_gram_det(alpha, beta)) /
           (Na2 * Na2 * Rational(disc_Et));
}

}  // namespace cmtheta
