#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "lattices.hpp"
#include "qseries.hpp"

namespace cmtheta {

struct InconsistencyError : InputError {
    using InputError::InputError;
};

struct A0MissingError : InputError {
    using InputError::InputError;
};

// ---------------------------------------------------------------- the F~-valued form

// Q_W(y) = y^t g0 y + (y^t g1 y) sqrt(D~) on M (x) Q, normalized so that
// tr Q_W = Q_W0. It equals c kappa(y) kappabar(y) / sqrt(D~) with c rational.
struct HermitianForm {
    Rational Dt;
    Rational scale;  // c
    std::array<std::array<Rational, 4>, 4> g0{}, g1{};

    QuadElem value(const W0Vector& y) const {
        Rational a = 0, b = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                a += g0[i][j] * y[i] * y[j];
                b += g1[i][j] * y[i] * y[j];
            }
        return {Dt, a, b};
    }
    // Q(x + y) - Q(x) - Q(y)
    QuadElem bilinear(const W0Vector& x, const W0Vector& y) const {
        Rational a = 0, b = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                a += 2 * g0[i][j] * x[i] * y[j];
                b += 2 * g1[i][j] * x[i] * y[j];
            }
        return {Dt, a, b};
    }
};

inline HermitianForm hermitian_form(const CMInput& cm) {
    HermitianForm h;
    h.Dt = cm.Dtilde();
    const auto& e = w0_basis();
    auto sum = [](const W0Vector& x, const W0Vector& y) {
        W0Vector z;
        for (int i = 0; i < 4; ++i) z[i] = x[i] + y[i];
        return z;
    };
    std::vector<W0Vector> probes(e.begin(), e.end());
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) probes.push_back(sum(e[i], e[j]));
    std::optional<Rational> c;
    std::vector<KappaExact> ke;
    for (auto& y : probes) {
        ke.push_back(kappa_exact(cm.alpha, cm.beta, y));
        Rational q0 = qform_W0(y, cm.D);
        if (ke.back().S_w == 0) {
            if (q0 != 0) throw InputError("hermitian_form: Q_W0 is not proportional to Q(kappa)");
            continue;
        }
        Rational ci = 2 * q0 / ke.back().S_w;
        if (c && *c != ci) throw InputError("hermitian_form: Q_W0 is not proportional to Q(kappa)");
        c = ci;
    }
    if (!c) throw InputError("hermitian_form: degenerate kappa");
    h.scale = *c;
    // kappa kappabar / sqrt(D~) = S_w/4 + (S_T/(4 D~)) sqrt(D~)
    auto Qv = [&](const KappaExact& k) {
        return std::pair<Rational, Rational>{h.scale * k.S_w / 4, h.scale * k.S_T / (4 * h.Dt)};
    };
    for (int i = 0; i < 4; ++i) {
        auto [a, b] = Qv(ke[i]);
        h.g0[i][i] = a;
        h.g1[i][i] = b;
    }
    int n = 4;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j, ++n) {
            auto [a, b] = Qv(ke[n]);
            h.g0[i][j] = h.g0[j][i] = (a - h.g0[i][i] - h.g0[j][j]) / 2;
            h.g1[i][j] = h.g1[j][i] = (b - h.g1[i][i] - h.g1[j][j]) / 2;
        }
    return h;
}

// ---------------------------------------------------------------- local places of F~

inline long floor_div(long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

// A prime of F~ over p together with local coordinates: x = A0 + A1 sqrt(D~)
// lies in P^e iff ord_p(l0 A0 + l1 A1) >= g(e) for every functional, where g
// is e, ceil(e/2) or floor(e/2).
struct LocalPlace {
    enum Rule { full, ceil_half, floor_half };
    struct Functional {
        Rational l0, l1;
        Rule rule;
    };
    QuadPrime P;
    long q = 0;        // residue field size
    int residue_degree = 1;
    int diff_exp = 0;  // ord_P of the different of F~
    std::vector<Functional> fns;

    static long bound(Rule r, long e) {
        switch (r) {
            case full: return e;
            case ceil_half: return -floor_div(-e, 2);
            default: return floor_div(e, 2);
        }
    }

    // ord_P(x) (capped at 2^20 for x = 0).
    int ord(const QuadElem& x) const {
        long best = 1 << 20;
        for (auto& f : fns) {
            Rational v = f.l0 * x.a + f.l1 * x.b;
            long o = ord_p(v, P.p);
            if (o >= (1 << 19)) continue;
            long cap = f.rule == full ? o : (f.rule == ceil_half ? 2 * o : 2 * o + 1);
            best = std::min(best, cap);
        }
        return static_cast<int>(best);
    }
};

struct FieldData {
    Rational Dt;
    Integer d0;  // squarefree part of D~
    Rational f;  // D~ = f^2 d0
};

inline FieldData field_data(const Rational& Dt) {
    auto sc = square_class(Dt);
    return {Dt, sc.d, sc.f};
}

// Precision of the p-adic square root used for split coordinates.
inline int split_precision(long p) { return p == 2 ? 80 : 40; }

inline std::vector<LocalPlace> local_places(long p, const FieldData& F) {
    std::vector<LocalPlace> out;
    auto kind = splitting_type(p, F.Dt).kind;
    const Rational& f = F.f;
    Integer d0m8 = mod_floor(F.d0, 8);
    if (kind == SplitKind::split) {
        int N = split_precision(p);
        Integer delta = sqrt_mod_prime_power(F.d0, p, N);
        for (int br = 0; br < 2; ++br) {
            LocalPlace L;
            L.P = {p, kind, br};
            L.q = p;
            L.fns.push_back({1, f * Rational(br == 0 ? delta : -delta), LocalPlace::full});
            out.push_back(L);
        }
        return out;
    }
    LocalPlace L;
    L.P = {p, kind, 0};
    if (kind == SplitKind::inert) {
        L.q = p * p;
        L.residue_degree = 2;
        if (p == 2) {  // d0 = 5 mod 8; O = Z_2[(1 + sqrt d0)/2], A0 + B sqrt d0 = (A0 - B) + 2B w
            L.fns.push_back({1, -f, LocalPlace::full});
            L.fns.push_back({0, 2 * f, LocalPlace::full});
        } else {
            L.fns.push_back({1, 0, LocalPlace::full});
            L.fns.push_back({0, f, LocalPlace::full});
        }
    } else {
        L.q = p;
        if (p != 2) {
            L.diff_exp = 1;
            L.fns.push_back({1, 0, LocalPlace::ceil_half});
            L.fns.push_back({0, f, LocalPlace::floor_half});
        } else if (d0m8 == 2 || d0m8 == 6) {
            L.diff_exp = 3;
            L.fns.push_back({1, 0, LocalPlace::ceil_half});
            L.fns.push_back({0, f, LocalPlace::floor_half});
        } else {  // d0 = 3 mod 4, uniformizer 1 + sqrt d0
            L.diff_exp = 2;
            L.fns.push_back({1, -f, LocalPlace::ceil_half});
            L.fns.push_back({0, f, LocalPlace::floor_half});
        }
    }
    out.push_back(L);
    return out;
}

// ---------------------------------------------------------------- p-adic volumes

// Quadratic polynomial in 4 variables with coefficients mod p^prec:
// c[0] constant, c[1..4] linear, c[5..14] the monomials y_i y_j (i <= j).
struct PadicPoly {
    std::array<long long, 15> c{};
    int prec = 0;
};

inline int quad_index(int i, int j) {
    if (i > j) std::swap(i, j);
    static const int base[4] = {5, 9, 12, 14};
    return base[i] + (j - i);
}

struct PadicCondition {
    PadicPoly P;
    int e;  // require ord_p(P(y)) >= e
};

class VolumeSolver {
public:
    explicit VolumeSolver(long p, int max_depth = 64) : p_(p), max_depth_(max_depth) {
        pw_.push_back(1);
        while (pw_.back() <= (1LL << 62) / p) pw_.push_back(pw_.back() * p);
    }

    int max_prec() const { return static_cast<int>(pw_.size()) - 1; }
    long prime() const { return p_; }

    // vol{y in Z_p^4 : every condition holds}, Haar measure of Z_p^4 = 1. The
    // optional filter restricts y mod p.
    Rational volume(std::vector<PadicCondition> conds,
                    const std::function<bool(const std::array<long, 4>&)>& root_filter = {}) const {
        std::vector<PadicCondition> live;
        for (auto& c : conds)
            if (normalize(c)) live.push_back(c);
        Integer numer = 0;
        long denexp = 0;
        // accumulate sum over leaves of p^(-x) as numer / p^denexp
        std::vector<std::pair<long, Integer>> leaves;
        recurse(live, 0, 0, root_filter, leaves);
        for (auto& [x, n] : leaves) denexp = std::max(denexp, x);
        for (auto& [x, n] : leaves) numer += n * boost::multiprecision::pow(Integer(p_), denexp - x);
        return Rational(numer, boost::multiprecision::pow(Integer(p_), denexp));
    }

    // Residue of a p-integral rational mod p^prec.
    long long residue(const Rational& x, int prec) const {
        Integer m = pw_.at(prec);
        Integer r = mod_floor(num(x) * inv_mod(den(x), m), m);
        return r.convert_to<long long>();
    }

private:
    long p_;
    int max_depth_;
    std::vector<long long> pw_;

    long long mulmod(long long a, long long b, long long m) const {
        return static_cast<long long>((__int128)a * b % m);
    }

    int ord_res(long long r, int prec) const {
        if (r == 0) return prec;
        int v = 0;
        while (r % p_ == 0) {
            r /= p_;
            ++v;
        }
        return v;
    }

    // Divides out the content; false when the condition is automatically satisfied.
    bool normalize(PadicCondition& c) const {
        if (c.e <= 0) return false;
        int content = c.P.prec;
        for (auto v : c.P.c) content = std::min(content, ord_res(v, c.P.prec));
        if (content >= c.P.prec) return false;  // P = 0 mod p^prec and e < prec
        if (content > 0) {
            long long d = pw_[content];
            for (auto& v : c.P.c) v /= d;
            c.P.prec -= content;
            c.e -= content;
            long long m = pw_[c.P.prec];
            for (auto& v : c.P.c) v %= m;
        }
        return c.e > 0;
    }

    long long eval(const PadicPoly& P, const std::array<long, 4>& y) const {
        long long m = pw_[P.prec];
        __int128 s = P.c[0];
        for (int i = 0; i < 4; ++i) s += (__int128)P.c[1 + i] * y[i];
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) s += (__int128)P.c[quad_index(i, j)] * (y[i] * y[j]) % m;
        long long r = static_cast<long long>(s % m);
        return r < 0 ? r + m : r;
    }

    std::array<long long, 4> grad(const PadicPoly& P, const std::array<long, 4>& y) const {
        long long m = pw_[P.prec];
        std::array<long long, 4> g{};
        for (int i = 0; i < 4; ++i) {
            __int128 s = P.c[1 + i];
            for (int j = 0; j < 4; ++j) {
                long long cij = P.c[quad_index(i, j)];
                s += (__int128)(i == j ? 2 * cij % m : cij) * y[j];
            }
            long long r = static_cast<long long>(s % m);
            g[i] = r < 0 ? r + m : r;
        }
        return g;
    }

    bool full_rank(const std::vector<std::array<long long, 4>>& G) const {
        if (G.size() == 1) {
            for (auto v : G[0])
                if (v % p_) return true;
            return false;
        }
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
                __int128 m = (__int128)(G[0][i] % p_) * (G[1][j] % p_) -
                             (__int128)(G[0][j] % p_) * (G[1][i] % p_);
                if (m % p_ != 0) return true;
            }
        return false;
    }

    void recurse(const std::vector<PadicCondition>& conds, long scale, int depth,
                 const std::function<bool(const std::array<long, 4>&)>& filter,
                 std::vector<std::pair<long, Integer>>& leaves) const {
        if (conds.empty()) {
            if (!filter) {
                leaves.push_back({scale, 1});
                return;
            }
        }
        if (depth > max_depth_)
            throw InputError("local density: recursion depth exceeded at p = " + std::to_string(p_));
        std::array<long, 4> y{};
        long long p4 = p_ * p_ * p_ * p_;
        Integer hensel_count = 0;
        long hensel_exp = -1;
        for (long long idx = 0; idx < p4; ++idx) {
            long long r = idx;
            for (int i = 0; i < 4; ++i) {
                y[i] = r % p_;
                r /= p_;
            }
            if (filter && !filter(y)) continue;
            bool ok = true;
            std::vector<long long> vals;
            for (auto& c : conds) {
                long long v = eval(c.P, y);
                if (v % p_) {
                    ok = false;
                    break;
                }
                vals.push_back(v);
            }
            if (!ok) continue;
            if (conds.empty()) {
                leaves.push_back({scale + 4, 1});
                continue;
            }
            std::vector<std::array<long long, 4>> G;
            for (auto& c : conds) G.push_back(grad(c.P, y));
            if (full_rank(G)) {
                long x = scale + 4;
                for (auto& c : conds) x += c.e - 1;
                if (hensel_exp < 0 || hensel_exp == x) {
                    hensel_exp = x;
                    hensel_count += 1;
                } else {
                    leaves.push_back({x, 1});
                }
                continue;
            }
            std::vector<PadicCondition> child;
            for (size_t k = 0; k < conds.size(); ++k) {
                const auto& P = conds[k].P;
                long long m = pw_[P.prec];
                PadicCondition c;
                c.e = conds[k].e;
                c.P.prec = P.prec;
                c.P.c[0] = vals[k];
                for (int i = 0; i < 4; ++i) c.P.c[1 + i] = mulmod(G[k][i], p_, m);
                for (int i = 5; i < 15; ++i) c.P.c[i] = mulmod(P.c[i], p_ * p_ % m, m);
                if (normalize(c)) child.push_back(c);
            }
            recurse(child, scale + 4, depth + 1, {}, leaves);
        }
        if (hensel_count != 0) leaves.push_back({hensel_exp, hensel_count});
    }
};

// ---------------------------------------------------------------- local factors

// Quadratic polynomial coefficients over Q of Q_W(mu + y) - t, split into the
// rational and sqrt(D~) parts.
struct RationalPoly {
    std::array<Rational, 15> a{}, b{};
};

inline RationalPoly shifted_form(const HermitianForm& h, const W0Vector& mu, const QuadElem& t) {
    RationalPoly R;
    QuadElem c0 = h.value(mu) - t;
    R.a[0] = c0.a;
    R.b[0] = c0.b;
    const auto& e = w0_basis();
    for (int i = 0; i < 4; ++i) {
        QuadElem l = h.bilinear(mu, e[i]);
        R.a[1 + i] = l.a;
        R.b[1 + i] = l.b;
        for (int j = i; j < 4; ++j) {
            Rational s = i == j ? Rational(1) : Rational(2);
            R.a[quad_index(i, j)] = s * h.g0[i][j];
            R.b[quad_index(i, j)] = s * h.g1[i][j];
        }
    }
    return R;
}

// Conditions "Q_W(mu + y) - t in P^k d^{-1}" for one place.
inline std::vector<PadicCondition> place_conditions(const VolumeSolver& S, const RationalPoly& R,
                                                    const LocalPlace& L, long k) {
    std::vector<PadicCondition> out;
    const long p = L.P.p;
    long e = k - L.diff_exp;
    for (auto& fn : L.fns) {
        std::array<Rational, 15> c;
        int mino = 1 << 20;
        for (int i = 0; i < 15; ++i) {
            c[i] = fn.l0 * R.a[i] + fn.l1 * R.b[i];
            if (c[i] != 0) mino = std::min(mino, ord_p(c[i], p));
        }
        long g = LocalPlace::bound(fn.rule, e);
        if (mino == (1 << 20)) continue;  // identically zero
        int s = mino < 0 ? -mino : 0;
        long need = g + s;
        if (need <= 0) continue;
        int prec = static_cast<int>(need) + 2;
        if (prec > S.max_prec())
            throw InputError("local density: exponent " + std::to_string(need) +
                             " exceeds working precision at p = " + std::to_string(p));
        PadicCondition pc;
        pc.e = static_cast<int>(need);
        pc.P.prec = prec;
        Rational sc = boost::multiprecision::pow(Integer(p), s);
        for (int i = 0; i < 15; ++i) pc.P.c[i] = c[i] == 0 ? 0 : S.residue(c[i] * sc, prec);
        out.push_back(pc);
    }
    return out;
}

using RootFilter = std::function<bool(const std::array<long, 4>&)>;

// Local polynomial alpha(X) = sum_j c_j X^j at a rational prime p (product
// over the places above p), X = N(P)^{-s}; value alpha(1), derivative of
// alpha(N(P)^{-s}) at s = 0 equals -deriv_coeff... stored as a multiple of log p.
struct LocalFactor {
    long p = 0;
    std::map<long, Rational> poly;  // total degree -> coefficient
    Rational value;
    Rational deriv_logp;  // d/ds at 0 = deriv_logp * log p
    std::vector<Rational> trace;  // stabilization trace of the limiting count
    long k_used = 0;
};

struct DensityOptions {
    long k_min = 6;     // smallest truncation level tried
    long k_extra = 2;   // stabilization requires agreement over k, k+1, ..., k+k_extra
};

inline Rational qpow(long q, long k) {
    if (k >= 0) return Rational(boost::multiprecision::pow(Integer(q), static_cast<unsigned>(k)));
    return Rational(1) / Rational(boost::multiprecision::pow(Integer(q), static_cast<unsigned>(-k)));
}

inline std::string trace_string(const std::vector<Rational>& tr, long k0) {
    std::string s;
    for (size_t i = 0; i < tr.size(); ++i)
        s += (i ? ", " : "") + std::string("k=") + std::to_string(k0 + long(i)) + ":" + to_string(tr[i]);
    return s;
}

// Density polynomial for the coset mu + M at p, using the places listed. A
// single place gives the one-variable N_k; two places use N_{k1,k2}.
inline LocalFactor local_factor(const HermitianForm& h, const std::vector<LocalPlace>& places,
                                const W0Vector& mu, const QuadElem& t, const DensityOptions& opt = {},
                                const RootFilter& filter = {}) {
    if (places.empty()) throw InputError("local_factor: no places");
    const long p = places[0].P.p;
    VolumeSolver S(p);
    RationalPoly R = shifted_form(h, mu, t);
    long ordt = 0;
    for (auto& L : places) ordt = std::max<long>(ordt, std::max(0, L.ord(t) + L.diff_exp));
    long K = std::max(opt.k_min, ordt + 3);
    LocalFactor out;
    out.p = p;
    auto V = [&](const std::vector<long>& ks) {
        std::vector<PadicCondition> conds;
        Rational scale = 1;
        for (size_t i = 0; i < places.size(); ++i) {
            auto c = place_conditions(S, R, places[i], ks[i]);
            conds.insert(conds.end(), c.begin(), c.end());
            scale *= qpow(places[i].q, ks[i]);
        }
        return S.volume(conds, filter) * scale;
    };
    const long Kt = K + opt.k_extra;
    if (places.size() == 1) {
        std::vector<Rational> N(Kt + 1);
        for (long k = 0; k <= Kt; ++k) N[k] = V({k});
        for (long k = K; k <= Kt; ++k) out.trace.push_back(N[k]);
        for (long k = K + 1; k <= Kt; ++k)
            if (N[k] != N[K])
                throw InputError("local density at p = " + std::to_string(p) +
                                 " does not stabilize: " + trace_string(out.trace, K));
        for (long k = 0; k <= K; ++k) {
            Rational c = N[k] - (k ? N[k - 1] : Rational(0));
            if (c != 0) out.poly[k] = c;
        }
        out.value = N[K];
        Rational s = 0;
        for (auto& [k, c] : out.poly) s += Rational(k) * c;
        out.deriv_logp = -s * places[0].residue_degree;
    } else {
        std::vector<std::vector<Rational>> N(Kt + 1, std::vector<Rational>(Kt + 1));
        for (long a = 0; a <= Kt; ++a)
            for (long b = 0; b <= Kt; ++b) N[a][b] = V({a, b});
        for (long k = K; k <= Kt; ++k) out.trace.push_back(N[k][k]);
        for (long a = K; a <= Kt; ++a)
            for (long b = 0; b <= Kt; ++b)
                if (N[a][b] != N[K][std::min(b, K)] || N[b][a] != N[std::min(b, K)][K])
                    throw InputError("local density at p = " + std::to_string(p) +
                                     " does not stabilize: " + trace_string(out.trace, K));
        auto at = [&](long a, long b) { return (a < 0 || b < 0) ? Rational(0) : N[a][b]; };
        for (long a = 0; a <= K; ++a)
            for (long b = 0; b <= K; ++b) {
                Rational c = at(a, b) - at(a - 1, b) - at(a, b - 1) + at(a - 1, b - 1);
                if (c != 0) out.poly[a + b] += c;
            }
        for (auto it = out.poly.begin(); it != out.poly.end();)
            it = it->second == 0 ? out.poly.erase(it) : std::next(it);
        out.value = N[K][K];
        Rational s = 0;
        for (auto& [k, c] : out.poly) s += Rational(k) * c;
        out.deriv_logp = -s;
    }
    out.k_used = K;
    return out;
}

// ---------------------------------------------------------------- generic primes

struct LocalWhittaker {
    Rational value;
    Rational deriv;  // derivative = deriv * log(log_prime)
    long log_prime = 0;
};

// Closed form at an odd prime P of F~ unramified in F~ and E~, phi the
// characteristic function of a self-dual lattice.
inline LocalWhittaker whittaker_generic(int ord_t_sqrtD, const QuadPrime& P, SplitKind in_Et) {
    if (P.p == 2) throw InputError("whittaker_generic: p = 2 must use the local density path");
    if (P.kind == SplitKind::ramified || in_Et == SplitKind::ramified)
        throw InputError("whittaker_generic: ramified prime must use the local density path");
    LocalWhittaker w;
    w.log_prime = P.p;
    const int n = ord_t_sqrtD;
    if (n < 0) {
        w.value = 0;
        w.deriv = 0;
        return w;
    }
    if (in_Et == SplitKind::split) {
        w.value = 1 + n;
        w.deriv = 0;
        return w;
    }
    w.value = n % 2 == 0 ? 1 : 0;
    w.deriv = n % 2 == 0 ? Rational(0) : Rational(1 + n, 2) * (P.kind == SplitKind::inert ? 2 : 1);
    return w;
}

// ---------------------------------------------------------------- context

enum class TwoAdicKind { I, II, III, other };

inline const char* two_adic_name(TwoAdicKind k) {
    switch (k) {
        case TwoAdicKind::I: return "I";
        case TwoAdicKind::II: return "II";
        case TwoAdicKind::III: return "III";
        default: return "other";
    }
}

struct TwoAdicCase {
    TwoAdicKind kind = TwoAdicKind::other;
    int parity = 0;
};

struct DiffSet {
    std::vector<QuadPrime> primes;
    std::size_t size() const { return primes.size(); }
    std::string str() const {
        std::string s = "{";
        for (size_t i = 0; i < primes.size(); ++i) s += (i ? "," : "") + primes[i].str();
        return s + "}";
    }
};

inline int legendre(const Rational& x, long p) {
    Integer n = mod_floor(num(x) * den(x), p);
    if (n == 0) return 0;
    return pow_mod(n, (p - 1) / 2, p) == 1 ? 1 : -1;
}

struct EisensteinContext {
    CMInput cm;
    HermitianForm form;
    FieldData F;
    QuadElem Delta_t;  // E~ = F~(sqrt Delta_t)
    std::vector<long> bad;
    std::map<long, std::vector<LocalPlace>> places;
    std::array<int, 4> parity_class{};  // class of Tr kappa(e_i) in O/2O as a 2-bit code
    std::vector<int> parity_image;      // sorted classes occurring on M
    DensityOptions opt;

    const std::vector<LocalPlace>& places_at(long p) {
        auto it = places.find(p);
        if (it != places.end()) return it->second;
        return places[p] = local_places(p, F);
    }
    bool is_bad(long p) const { return std::binary_search(bad.begin(), bad.end(), p); }
};

// Local splitting of P in E~/F~.
inline SplitKind reflex_kind(EisensteinContext& ctx, const LocalPlace& L) {
    const QuadElem& x = ctx.Delta_t;
    const long p = L.P.p;
    int o = L.ord(x);
    if (o % 2) return SplitKind::ramified;
    if (p != 2) {
        if (L.P.kind == SplitKind::split) {
            Rational v = L.fns[0].l0 * x.a + L.fns[0].l1 * x.b;
            return legendre(v / qpow(p, o), p) == 1 ? SplitKind::split : SplitKind::inert;
        }
        if (L.P.kind == SplitKind::inert) {
            Rational n = x.norm() / qpow(p, 2 * o);
            return legendre(n, p) == 1 ? SplitKind::split : SplitKind::inert;
        }
        // ramified, uniformizer sqrt(d0): x = pi^o u with residue of u in F_p
        long m = o / 2;
        Rational r = x.a / qpow(p, m);
        Rational dprime = Rational(ctx.F.d0) / p;
        Rational unit = r;
        for (long i = 0; i < m; ++i) unit /= dprime;
        return legendre(unit, p) == 1 ? SplitKind::split : SplitKind::inert;
    }
    if (L.P.kind == SplitKind::ramified) throw InputError("reflex_kind: 2 ramified in F~ is not handled");
    // unramified over 2: x = 2^o u; split iff u is a square mod 8, inert iff mod 4
    Rational s = qpow(2, -o);
    if (L.P.kind == SplitKind::split) {
        Rational v = (L.fns[0].l0 * x.a + L.fns[0].l1 * x.b) * s;
        Integer u = mod_floor(num(v) * inv_mod(den(v), 8), 8);
        if (u == 1) return SplitKind::split;
        if (u == 5) return SplitKind::inert;
        return SplitKind::ramified;
    }
    Rational c1 = (L.fns[0].l0 * x.a + L.fns[0].l1 * x.b) * s;
    Rational c2 = (L.fns[1].l0 * x.a + L.fns[1].l1 * x.b) * s / 2;  // coefficient of w
    auto res = [](const Rational& v, long m) { return mod_floor(num(v) * inv_mod(den(v), m), m); };
    Integer u1 = res(c1, 8), u2 = res(c2, 8);
    Integer k = mod_floor((ctx.F.d0 - 1) / 4, 8);
    bool sq8 = false, sq4 = false;
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) {
            Integer s1 = mod_floor(Integer(a * a) + k * b * b, 8);
            Integer s2 = mod_floor(Integer(2 * a * b + b * b), 8);
            if (s1 == u1 && s2 == u2) sq8 = true;
            if (mod_floor(s1 - u1, 4) == 0 && mod_floor(s2 - u2, 4) == 0) sq4 = true;
        }
    if (sq8) return SplitKind::split;
    if (sq4) return SplitKind::inert;
    return SplitKind::ramified;
}

inline TwoAdicKind two_adic_kind(EisensteinContext& ctx) {
    const auto& P2 = ctx.places_at(2);
    if (P2[0].P.kind == SplitKind::ramified) return TwoAdicKind::other;
    if (P2[0].P.kind == SplitKind::inert)
        return reflex_kind(ctx, P2[0]) == SplitKind::split ? TwoAdicKind::III : TwoAdicKind::other;
    int ns = 0, ni = 0;
    for (auto& L : P2) {
        auto k = reflex_kind(ctx, L);
        ns += k == SplitKind::split;
        ni += k == SplitKind::inert;
    }
    if (ns == 2) return TwoAdicKind::I;
    if (ns == 1 && ni == 1) return TwoAdicKind::II;
    return TwoAdicKind::other;
}

// 2-bit class of an element of F~ in O/2O (basis 1, w).
inline int class_mod_two(const FieldData& F, const QuadElem& x) {
    Rational B = x.b * F.f;
    Rational c1, c2;
    if (mod_floor(F.d0, 4) == 1) {
        c1 = x.a - B;
        c2 = 2 * B;
    } else {
        c1 = x.a;
        c2 = B;
    }
    if (ord_p(c1, 2) < 0 || ord_p(c2, 2) < 0)
        throw InputError("parity map: trace is not 2-integral");
    auto bit = [](const Rational& v) {
        return static_cast<int>(mod_floor(num(v) * inv_mod(den(v), 2), 2).convert_to<long>());
    };
    return bit(c1) | (bit(c2) << 1);
}

inline EisensteinContext make_context(const CMInput& cm, DensityOptions opt = {}) {
    EisensteinContext ctx;
    ctx.cm = cm;
    ctx.opt = opt;
    ctx.form = hermitian_form(cm);
    ctx.F = field_data(cm.Dtilde());
    ctx.Delta_t = QuadElem(ctx.F.Dt, cm.Delta.trace(), 2);
    std::set<long> bad = {2};
    auto add = [&](const Rational& x) {
        if (x == 0) return;
        for (long p : prime_divisors(x)) bad.insert(p);
    };
    add(Rational(cm.D));
    add(ctx.F.Dt);
    add(4 * cm.Delta.b * cm.Delta.b * cm.D);
    add(ctx.Delta_t.norm());
    add(ideal_norm_squared(cm.alpha, cm.beta, 1));
    std::vector<std::vector<Rational>> G(4, std::vector<Rational>(4));
    const auto& e = w0_basis();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) G[i][j] = bform_W0(e[i], e[j], cm.D);
    add(det4(G));
    ctx.bad.assign(bad.begin(), bad.end());
    std::set<int> img = {0};
    for (int i = 0; i < 4; ++i) {
        auto k = kappa_exact(cm.alpha, cm.beta, e[i]);
        ctx.parity_class[i] = class_mod_two(ctx.F, QuadElem(ctx.F.Dt, k.trace_u, k.trace_v));
        std::set<int> nxt = img;
        for (int c : img) nxt.insert(c ^ ctx.parity_class[i]);
        img = nxt;
    }
    ctx.parity_image.assign(img.begin(), img.end());
    return ctx;
}

// Filter on y mod 2 selecting the parity piece i.
inline RootFilter parity_filter(const EisensteinContext& ctx, int i) {
    if (i < 0 || i >= static_cast<int>(ctx.parity_image.size()))
        throw InputError("parity index " + std::to_string(i) + " out of range");
    int cls = ctx.parity_image[i];
    auto pc = ctx.parity_class;
    return [pc, cls](const std::array<long, 4>& y) {
        int c = 0;
        for (int k = 0; k < 4; ++k)
            if (y[k] & 1) c ^= pc[k];
        return c == cls;
    };
}

// 2-adic local factor for one parity piece of mu + M.
inline LocalFactor whittaker_two(EisensteinContext& ctx, const QuadElem& t, const CosetM& mu1,
                                 const TwoAdicCase& c) {
    TwoAdicKind actual = two_adic_kind(ctx);
    if (c.kind != actual)
        throw InputError(std::string("whittaker_two: case ") + two_adic_name(c.kind) +
                         " does not match the splitting of 2 (" + two_adic_name(actual) + ")");
    return local_factor(ctx.form, ctx.places_at(2), mu1.vec(), t, ctx.opt, parity_filter(ctx, c.parity));
}

// ---------------------------------------------------------------- Diff and a(t)

inline std::vector<long> relevant_primes(const EisensteinContext& ctx, const QuadElem& t) {
    std::set<long> ps(ctx.bad.begin(), ctx.bad.end());
    Rational n = t.norm();
    if (n != 0)
        for (long p : prime_divisors(n)) ps.insert(p);
    return {ps.begin(), ps.end()};
}

// Element of F~ with ord_P = 1.
inline QuadElem local_uniformizer(const FieldData& F, const LocalPlace& L) {
    if (L.P.kind != SplitKind::ramified) return QuadElem(F.Dt, L.P.p, 0);
    QuadElem s(F.Dt, 0, Rational(1) / F.f);  // sqrt(d0)
    if (L.P.p == 2 && mod_floor(F.d0, 4) == 3) return s + QuadElem(F.Dt, 1, 0);
    return s;
}

// Rational polynomial of x^2 - delta y^2 - u in the coordinates of x, y on
// the basis (1, w) of the maximal order.
inline RationalPoly norm_form_poly(const FieldData& F, const QuadElem& delta, const QuadElem& u) {
    QuadElem w = mod_floor(F.d0, 4) == 1 ? QuadElem(F.Dt, Rational(1, 2), Rational(1, 2) / F.f)
                                         : QuadElem(F.Dt, 0, Rational(1) / F.f);
    std::array<QuadElem, 4> basis = {QuadElem(F.Dt, 1), w, QuadElem(F.Dt, 1), w};
    std::array<QuadElem, 4> coef = {QuadElem(F.Dt, 1), QuadElem(F.Dt, 1), -delta, -delta};
    RationalPoly R;
    R.a[0] = -u.a;
    R.b[0] = -u.b;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            if ((i < 2) != (j < 2)) continue;
            QuadElem m = coef[i] * basis[i] * basis[j] * Rational(i == j ? 1 : 2);
            R.a[quad_index(i, j)] = m.a;
            R.b[quad_index(i, j)] = m.b;
        }
    return R;
}

// Does W_P represent t? W_P is a hermitian line, so it represents t iff
// t / Q_W(v) is a norm from E~_P; that is decided by counting solutions of
// x^2 - Delta~ y^2 = 4u over the maximal order after scaling u and Delta~ by
// even powers of a uniformizer.
inline bool represents_locally(EisensteinContext& ctx, const LocalPlace& L, const QuadElem& t) {
    if (t.is_zero()) return true;
    if (reflex_kind(ctx, L) == SplitKind::split) return true;
    QuadElem d;
    for (auto& e : w0_basis()) {
        d = ctx.form.value(e);
        if (!d.is_zero()) break;
    }
    if (d.is_zero()) throw InputError("represents_locally: form vanishes on the basis");
    QuadElem pi = local_uniformizer(ctx.F, L);
    auto reduce = [&](QuadElem x) {
        int o = L.ord(x);
        int m = o >= 0 ? o / 2 : -((-o + 1) / 2);
        QuadElem pi2 = pi * pi;
        for (int i = 0; i < m; ++i) x = x / pi2;
        for (int i = 0; i > m; --i) x = x * pi2;
        return x;
    };
    QuadElem u = reduce(t / d) * Rational(4);
    QuadElem delta = reduce(ctx.Delta_t);
    RationalPoly R = norm_form_poly(ctx.F, delta, u);
    VolumeSolver S(L.P.p);
    long K = std::max<long>(ctx.opt.k_min, L.ord(u) + L.diff_exp + 3);
    std::vector<Rational> tr;
    for (long k = K; k <= K + ctx.opt.k_extra; ++k)
        tr.push_back(S.volume(place_conditions(S, R, L, k)) * qpow(L.q, k));
    for (auto& v : tr)
        if (v != tr[0])
            throw InputError("local solvability at " + L.P.str() + " does not stabilize: " +
                             trace_string(tr, K));
    return tr[0] != 0;
}

// Finite places where W does not represent t (no positivity requirement).
inline DiffSet finite_diff(EisensteinContext& ctx, const QuadElem& t) {
    DiffSet d;
    QuadElem ts = t * QuadElem::sqrt_of(ctx.F.Dt);
    for (long p : relevant_primes(ctx, t)) {
        for (auto& L : ctx.places_at(p)) {
            bool in;
            if (ctx.is_bad(p)) {
                in = !represents_locally(ctx, L, t);
            } else {
                in = reflex_kind(ctx, L) == SplitKind::inert && (L.ord(ts) % 2 != 0);
            }
            if (in) d.primes.push_back(L.P);
        }
    }
    return d;
}

inline DiffSet diff_set(EisensteinContext& ctx, const QuadElem& t) {
    if (!is_totally_positive(t)) throw InputError("diff_set: t must be totally positive");
    return finite_diff(ctx, t);
}

// Lattice containing every value Q_W(y) - Q_W(mu1), y in mu1 + M.
inline TraceSupport coset_support(const EisensteinContext& ctx, const CosetM& mu1) {
    const auto& h = ctx.form;
    const auto& e = w0_basis();
    W0Vector mu = mu1.vec();
    std::vector<std::pair<Rational, Rational>> gens;
    for (int i = 0; i < 4; ++i) {
        auto q = h.value(e[i]);
        gens.push_back({q.a, q.b});
        auto bm = h.bilinear(mu, e[i]);
        gens.push_back({bm.a, bm.b});
        for (int j = i + 1; j < 4; ++j) {
            auto b = h.bilinear(e[i], e[j]);
            gens.push_back({b.a, b.b});
        }
    }
    QuadElem base = h.value(mu);
    return TraceSupport::from_generators(base.a, base.b, gens);
}

struct CoeffDetail {
    LogLinear a;
    std::vector<std::pair<long, LocalWhittaker>> factors;  // per rational prime
    int zeros = 0;
    bool in_support = true;
};

inline CoeffDetail coeff_a_detail(EisensteinContext& ctx, const QuadElem& t, const CosetM& mu1) {
    if (!is_totally_positive(t)) throw InputError("coeff_a: t must be totally positive");
    CoeffDetail out;
    if (!coset_support(ctx, mu1).contains(t.a, t.b)) {
        out.in_support = false;
        return out;
    }
    QuadElem ts = t * QuadElem::sqrt_of(ctx.F.Dt);
    for (long p : relevant_primes(ctx, t)) {
        LocalWhittaker w;
        w.log_prime = p;
        if (ctx.is_bad(p)) {
            auto lf = local_factor(ctx.form, ctx.places_at(p), mu1.vec(), t, ctx.opt);
            w.value = lf.value;
            w.deriv = lf.deriv_logp;
        } else {
            w.value = 1;
            w.deriv = 0;
            for (auto& L : ctx.places_at(p)) {
                auto g = whittaker_generic(L.ord(ts), L.P, reflex_kind(ctx, L));
                w.deriv = w.deriv * g.value + w.value * g.deriv;
                w.value *= g.value;
            }
        }
        if (w.value == 0) ++out.zeros;
        out.factors.push_back({p, w});
    }
    if (out.zeros == 0)
        throw InconsistencyError("coeff_a: no finite local factor vanishes for t = " + t.str() +
                                 " (the collection would be coherent)");
    if (out.zeros > 1) return out;
    for (auto& [p, w] : out.factors) {
        if (w.value != 0) continue;
        Rational prod = 1;
        for (auto& [q, v] : out.factors)
            if (q != p) prod *= v.value;
        out.a = LogLinear::log_of(p, Rational(-4) * w.deriv * prod);
    }
    return out;
}

inline LogLinear coeff_a(EisensteinContext& ctx, const QuadElem& t, const CosetM& mu1) {
    return coeff_a_detail(ctx, t, mu1).a;
}

inline LogLinear coeff_a(const QuadElem& t, const CosetM& mu1, const CMInput& cm) {
    auto ctx = make_context(cm);
    return coeff_a(ctx, t, mu1);
}

// ---------------------------------------------------------------- q-series

struct EisensteinFamily {
    CosetM mu1;
    FourierSeries positive;           // sum_{m > 0} a_m q^m
    std::optional<LogLinear> a0;      // from overrides; empty means uncomputed

    const LogLinear& constant() const {
        if (!a0) throw A0MissingError("a0 of the Eisenstein coset " + mu1.str() + " is uncomputed");
        return *a0;
    }
    bool a0_placeholder() const { return !a0.has_value(); }
};

// Exponents m = tr t of the support below trunc, ascending.
inline std::vector<Rational> support_traces(const TraceSupport& sup, const Rational& trunc) {
    std::vector<Rational> out;
    // tr t = 2x with x in x0 + h11 Z
    Rational step = 2 * sup.h11;
    Rational m0 = 2 * sup.x0;
    Integer kmin = floor_int(-m0 / step);
    for (Integer k = kmin;; ++k) {
        Rational m = m0 + Rational(k) * step;
        if (m >= trunc) break;
        if (m > 0) out.push_back(m);
    }
    return out;
}

inline EisensteinFamily eisenstein_family(EisensteinContext& ctx, const CosetM& mu1, const Rational& trunc) {
    if (trunc < Rational(1, 8)) throw InputError("eisenstein_family: trunc must be >= 1/8");
    EisensteinFamily fam;
    fam.mu1 = mu1;
    fam.positive = FourierSeries(1, trunc);
    auto sup = coset_support(ctx, mu1);
    for (const Rational& m : support_traces(sup, trunc)) {
        LogLinear am;
        for (const QuadElem& t : enumerate_trace_t(m, sup, ctx.F.Dt)) am += coeff_a(ctx, t, mu1);
        fam.positive.add_to(m, am);
    }
    auto it = ctx.cm.a0_overrides.find(mu1.str());
    if (it != ctx.cm.a0_overrides.end()) fam.a0 = it->second;
    return fam;
}

}  // namespace cmtheta
