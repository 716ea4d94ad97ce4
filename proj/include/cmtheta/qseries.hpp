#pragma once

#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "nfield.hpp"

namespace cmtheta {

// c0 + sum_p c_p log p, kept symbolic.
struct LogLinear {
    Rational c0{0};
    std::map<long, Rational> terms;

    LogLinear() = default;
    LogLinear(Rational c) : c0(std::move(c)) {}
    template <class I>
        requires std::is_integral_v<I>
    LogLinear(I c) : c0(Rational(c)) {}

    static LogLinear log_of(long p, Rational c = 1) {
        LogLinear x;
        if (c != 0) x.terms[p] = c;
        return x;
    }

    bool is_zero() const { return c0 == 0 && terms.empty(); }
    bool is_rational() const { return terms.empty(); }

    LogLinear& operator+=(const LogLinear& o) {
        c0 += o.c0;
        for (auto& [p, c] : o.terms) {
            auto& slot = terms[p];
            slot += c;
            if (slot == 0) terms.erase(p);
        }
        return *this;
    }
    LogLinear& operator-=(const LogLinear& o) { return *this += o * Rational(-1); }
    LogLinear operator*(const Rational& s) const {
        LogLinear r;
        if (s == 0) return r;
        r.c0 = c0 * s;
        for (auto& [p, c] : terms) r.terms[p] = c * s;
        return r;
    }
    friend LogLinear operator+(LogLinear a, const LogLinear& b) { return a += b; }
    friend LogLinear operator-(LogLinear a, const LogLinear& b) { return a -= b; }
    friend LogLinear operator-(const LogLinear& a) { return a * Rational(-1); }
    friend LogLinear operator*(const Rational& s, const LogLinear& a) { return a * s; }

    // Product defined when at least one factor is a plain rational.
    friend LogLinear operator*(const LogLinear& a, const LogLinear& b) {
        if (a.is_rational()) return b * a.c0;
        if (b.is_rational()) return a * b.c0;
        throw InputError("product of two logarithmic quantities is not log-linear");
    }

    bool operator==(const LogLinear& o) const { return c0 == o.c0 && terms == o.terms; }
    bool operator!=(const LogLinear& o) const { return !(*this == o); }
    friend std::ostream& operator<<(std::ostream& os, const LogLinear& x) { return os << x.str(); }

    template <class T = double>
    T evaluate() const {
        using std::log;
        T v = rational_to<T>(c0);
        for (auto& [p, c] : terms) v += rational_to<T>(c) * log(T(p));
        return v;
    }

    std::string str() const {
        std::ostringstream os;
        bool first = true;
        if (c0 != 0 || terms.empty()) {
            os << to_string(c0);
            first = false;
        }
        for (auto& [p, c] : terms) {
            if (!first) os << (c < 0 ? " - " : " + ");
            else if (c < 0) os << "-";
            Rational a = boost::multiprecision::abs(c);
            if (a != 1) os << to_string(a) << "*";
            os << "log" << p;
            first = false;
        }
        return os.str();
    }

    // "c0<TAB>p:c_p,..." serialization body.
    std::string serialize() const {
        std::string s = to_string(c0) + "\t";
        bool first = true;
        for (auto& [p, c] : terms) {
            if (!first) s += ",";
            s += std::to_string(p) + ":" + to_string(c);
            first = false;
        }
        return s;
    }
};

inline long lcm_long(long a, long b) { return std::lcm(a, b); }

// Truncated q-expansion with rational exponents in (1/denom) Z, all < trunc.
struct FourierSeries {
    long denom = 1;
    Rational trunc{3};
    std::map<Rational, LogLinear> coeffs;

    FourierSeries() = default;
    FourierSeries(long N, Rational T) : denom(N), trunc(std::move(T)) {}

    static FourierSeries monomial(const Rational& e, const LogLinear& c, const Rational& trunc) {
        FourierSeries f(den(e).convert_to<long>(), trunc);
        f.set(e, c);
        return f;
    }
    static FourierSeries constant(const LogLinear& c, const Rational& trunc) {
        return monomial(0, c, trunc);
    }

    void set(const Rational& e, const LogLinear& c) {
        long d = den(e).convert_to<long>();
        if (denom % d) denom = lcm_long(denom, d);
        if (e >= trunc) return;
        if (c.is_zero()) coeffs.erase(e);
        else coeffs[e] = c;
    }
    void add_to(const Rational& e, const LogLinear& c) {
        if (e >= trunc || c.is_zero()) return;
        long d = den(e).convert_to<long>();
        if (denom % d) denom = lcm_long(denom, d);
        auto& slot = coeffs[e];
        slot += c;
        if (slot.is_zero()) coeffs.erase(e);
    }
    LogLinear coeff(const Rational& e) const {
        auto it = coeffs.find(e);
        return it == coeffs.end() ? LogLinear() : it->second;
    }
    bool is_zero() const { return coeffs.empty(); }
    std::optional<Rational> leading_exponent() const {
        if (coeffs.empty()) return std::nullopt;
        return coeffs.begin()->first;
    }

    FourierSeries truncated(const Rational& T) const {
        FourierSeries r(denom, std::min(T, trunc));
        for (auto& [e, c] : coeffs)
            if (e < r.trunc) r.coeffs[e] = c;
        return r;
    }

    FourierSeries& operator+=(const FourierSeries& g) {
        Rational T = std::min(trunc, g.trunc);
        *this = truncated(T);
        denom = lcm_long(denom, g.denom);
        for (auto& [e, c] : g.coeffs) add_to(e, c);
        return *this;
    }
    FourierSeries operator-() const { return *this * Rational(-1); }
    FourierSeries& operator-=(const FourierSeries& g) { return *this += -g; }
    friend FourierSeries operator+(FourierSeries a, const FourierSeries& b) { return a += b; }
    friend FourierSeries operator-(FourierSeries a, const FourierSeries& b) { return a -= b; }

    FourierSeries operator*(const Rational& s) const {
        FourierSeries r(denom, trunc);
        if (s == 0) return r;
        for (auto& [e, c] : coeffs) r.coeffs[e] = c * s;
        return r;
    }
    friend FourierSeries operator*(const Rational& s, const FourierSeries& f) { return f * s; }

    // Truncation of a product: each factor is known below its own trunc, so
    // the product is known below min(T_f + v_g, T_g + v_f) with v the
    // leading exponents.
    friend FourierSeries operator*(const FourierSeries& f, const FourierSeries& g) {
        Rational vf = f.coeffs.empty() ? f.trunc : f.coeffs.begin()->first;
        Rational vg = g.coeffs.empty() ? g.trunc : g.coeffs.begin()->first;
        Rational T = std::min(f.trunc + vg, g.trunc + vf);
        FourierSeries r(lcm_long(f.denom, g.denom), T);
        for (auto& [e1, c1] : f.coeffs) {
            if (e1 + vg >= T) break;
            for (auto& [e2, c2] : g.coeffs) {
                Rational e = e1 + e2;
                if (e >= T) break;
                r.add_to(e, c1 * c2);
            }
        }
        return r;
    }

    // Multiplication by q^s.
    FourierSeries shift(const Rational& s) const {
        FourierSeries r(lcm_long(denom, den(s).convert_to<long>()), trunc + s);
        for (auto& [e, c] : coeffs) r.coeffs[e + s] = c;
        return r;
    }

    // 1/f for f with rational coefficients and nonzero leading term.
    FourierSeries reciprocal() const {
        if (coeffs.empty()) throw InputError("reciprocal of zero series");
        Rational v = coeffs.begin()->first;
        const LogLinear& lc = coeffs.begin()->second;
        if (!lc.is_rational()) throw InputError("reciprocal needs rational coefficients");
        Rational c = lc.c0;
        // f = c q^v (1 + g), g known below trunc - v; step 1/denom
        Rational T = trunc - v;
        long N = denom;
        long steps = (ceil_int(T * N)).convert_to<long>();
        std::vector<Rational> g(steps, Rational(0));
        for (auto& [e, cc] : coeffs) {
            if (!cc.is_rational()) throw InputError("reciprocal needs rational coefficients");
            long k = num((e - v) * N).convert_to<long>();
            if (k < steps) g[k] = cc.c0 / c;
        }
        std::vector<Rational> h(steps, Rational(0));
        if (steps > 0) h[0] = 1;
        for (long n = 1; n < steps; ++n) {
            Rational s = 0;
            for (long k = 1; k <= n; ++k)
                if (g[k] != 0) s += g[k] * h[n - k];
            h[n] = -s;
        }
        FourierSeries r(N, T - v);
        for (long n = 0; n < steps; ++n)
            if (h[n] != 0) r.set(Rational(n, N) - v, LogLinear(h[n] / c));
        return r;
    }

    bool operator==(const FourierSeries& o) const {
        return trunc == o.trunc && coeffs == o.coeffs;
    }

    // Lines "exponent<TAB>c0<TAB>p:c_p,...".
    std::string serialize() const {
        std::string s;
        for (auto& [e, c] : coeffs) s += to_string(e) + "\t" + c.serialize() + "\n";
        return s;
    }
};

inline LogLinear constant_term(const FourierSeries& f) { return f.coeff(0); }

enum class ThetaKind { theta, theta_tilde, theta_tilde2 };

// The one-variable thetas of weight 1/2 used for the input forms:
//   theta = sum q^{n^2/2}, theta_tilde = sum (-1)^n q^{n^2/2},
//   theta_tilde2 = sum q^{(n+1/2)^2/2}.
inline FourierSeries classical_theta(ThetaKind kind, const Rational& trunc) {
    if (trunc <= 0) throw InputError("classical_theta: trunc must be positive");
    FourierSeries f(kind == ThetaKind::theta_tilde2 ? 8 : 2, trunc);
    long nmax = (floor_int(trunc * 2) + 2).convert_to<long>();
    for (long n = -nmax; n <= nmax; ++n) {
        Rational x = kind == ThetaKind::theta_tilde2 ? Rational(2 * n + 1, 2) : Rational(n);
        Rational e = x * x / 2;
        if (e >= trunc) continue;
        long sign = (kind == ThetaKind::theta_tilde && (n % 2 != 0)) ? -1 : 1;
        f.add_to(e, LogLinear(Rational(sign)));
    }
    return f;
}

struct UVW {
    FourierSeries u, v, w;
};

// u = 1/(2 theta) + 1/(2 theta~), v = 1/(2 theta) - 1/(2 theta~), w = 2/theta~~,
// each exact below trunc.
inline UVW build_uvw(const Rational& trunc) {
    if (trunc < 1) throw InputError("build_uvw: trunc must be >= 1");
    auto th = classical_theta(ThetaKind::theta, trunc).reciprocal();
    auto tht = classical_theta(ThetaKind::theta_tilde, trunc).reciprocal();
    auto th2 = classical_theta(ThetaKind::theta_tilde2, trunc + Rational(1, 4)).reciprocal();
    UVW r;
    r.u = (th + tht) * Rational(1, 2);
    r.v = (th - tht) * Rational(1, 2);
    r.w = (th2 * Rational(2)).truncated(trunc);
    return r;
}

// theta_0 of the coset mu0 + Z in L0 = Z with Q0(t) = 2 D t^2: one q^{2Dm^2}
// per element m of the coset.
inline FourierSeries theta0_series(const Rational& mu0, long D, const Rational& trunc) {
    Rational t = frac(mu0);
    FourierSeries f(8 * D, trunc);
    long nmax = (floor_int(trunc / (2 * D)) + 2).convert_to<long>();
    for (long n = -nmax; n <= nmax; ++n) {
        Rational m = t + n;
        Rational e = 2 * D * m * m;
        if (e < trunc) f.add_to(e, LogLinear(1));
    }
    return f;
}

}  // namespace cmtheta
