#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cplx.hpp"

namespace cmtheta {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- rationals

inline Rational rat(long n, long d = 1) { return Rational(n, d); }

inline Integer num(const Rational& x) { return boost::multiprecision::numerator(x); }
inline Integer den(const Rational& x) { return boost::multiprecision::denominator(x); }

inline Integer floor_int(const Rational& x) {
    Integer n = num(x), d = den(x);
    Integer q = n / d;
    if (n % d != 0 && n < 0) q -= 1;
    return q;
}

inline Integer ceil_int(const Rational& x) { return -floor_int(-x); }

// Representative of x mod 1 in [0, 1).
inline Rational frac(const Rational& x) { return x - Rational(floor_int(x)); }

inline bool is_integral(const Rational& x) { return den(x) == 1; }

inline std::string to_string(const Rational& x) {
    if (den(x) == 1) return num(x).str();
    return num(x).str() + "/" + den(x).str();
}

inline Rational parse_rational(const std::string& s_in) {
    std::string s;
    for (char c : s_in)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw InputError("empty rational");
    auto slash = s.find('/');
    auto digits_ok = [](const std::string& t) {
        if (t.empty()) return false;
        size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
        if (i == t.size()) return false;
        for (; i < t.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
        return true;
    };
    std::string a = s.substr(0, slash);
    std::string b = slash == std::string::npos ? "1" : s.substr(slash + 1);
    if (!a.empty() && a[0] == '+') a = a.substr(1);
    if (!digits_ok(a) || !digits_ok(b)) throw InputError("malformed rational '" + s_in + "'");
    Integer d(b);
    if (d == 0) throw InputError("zero denominator in '" + s_in + "'");
    return Rational(Integer(a), d);
}

inline int ord_p(const Integer& n, long p) {
    if (n == 0) return 1 << 28;
    Integer m = boost::multiprecision::abs(n);
    int k = 0;
    while (m % p == 0) {
        m /= p;
        ++k;
    }
    return k;
}

// p-adic valuation of a rational; a large sentinel for zero.
inline int ord_p(const Rational& x, long p) {
    if (x == 0) return 1 << 28;
    return ord_p(num(x), p) - ord_p(den(x), p);
}

inline bool is_prime(long n) {
    if (n < 2) return false;
    for (long d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// Trial division; the integers met here are small (discriminants, norms).
inline std::vector<std::pair<long, int>> factor(Integer n) {
    std::vector<std::pair<long, int>> out;
    n = boost::multiprecision::abs(n);
    if (n == 0) return out;
    for (long p = 2; Integer(p) * p <= n; ++p) {
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e) out.push_back({p, e});
        if (p > 10000000) throw InputError("factor: integer too large for trial division");
    }
    if (n > 1) out.push_back({n.convert_to<long>(), 1});
    return out;
}

inline std::vector<long> prime_divisors(const Rational& x) {
    std::vector<long> ps;
    for (auto& [p, e] : factor(num(x))) ps.push_back(p);
    for (auto& [p, e] : factor(den(x))) ps.push_back(p);
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    return ps;
}

// x = f^2 * d with d a squarefree integer (sign kept in d) and f > 0 rational.
struct SquareClass {
    Integer d;
    Rational f;
};

inline SquareClass square_class(const Rational& x) {
    if (x == 0) throw InputError("square_class of zero");
    Integer n = num(x) * den(x);
    Integer d = n < 0 ? Integer(-1) : Integer(1);
    Integer g = 1;
    for (auto& [p, e] : factor(n)) {
        if (e % 2) d *= p;
        for (int i = 0; i < e / 2; ++i) g *= p;
    }
    // x = n / den^2 = d g^2 / den^2
    return {d, Rational(g, den(x))};
}

inline Integer fundamental_discriminant(const Rational& x) {
    Integer d = square_class(x).d;
    Integer r = d % 4;
    if (r < 0) r += 4;
    return r == 1 ? d : 4 * d;
}

inline Integer mod_floor(const Integer& a, const Integer& m) {
    Integer r = a % m;
    if (r < 0) r += m;
    return r;
}

inline Integer pow_mod(Integer b, Integer e, const Integer& m) {
    Integer r = 1;
    b = mod_floor(b, m);
    while (e > 0) {
        if (e & 1) r = r * b % m;
        b = b * b % m;
        e >>= 1;
    }
    return r;
}

inline Integer inv_mod(const Integer& a, const Integer& m) {
    Integer old_r = mod_floor(a, m), r = m, old_s = 1, s = 0;
    while (r != 0) {
        Integer q = old_r / r;
        Integer t = old_r - q * r;
        old_r = r;
        r = t;
        t = old_s - q * s;
        old_s = s;
        s = t;
    }
    if (old_r != 1) throw InputError("inv_mod: not invertible");
    return mod_floor(old_s, m);
}

// Kronecker symbol (d | p) for a prime p.
inline int kronecker(const Integer& d, long p) {
    if (p == 2) {
        if (d % 2 == 0) return 0;
        Integer r = mod_floor(d, 8);
        return (r == 1 || r == 7) ? 1 : -1;
    }
    Integer r = mod_floor(d, p);
    if (r == 0) return 0;
    return pow_mod(r, (p - 1) / 2, p) == 1 ? 1 : -1;
}

// Square root of a mod p^N for a unit square a; p odd, or p = 2 with a = 1 mod 8.
inline Integer sqrt_mod_prime_power(const Integer& a, long p, int N) {
    Integer pN = boost::multiprecision::pow(Integer(p), N);
    if (p == 2) {
        if (mod_floor(a, 8) != 1) throw InputError("sqrt mod 2^N: not a square unit");
        Integer x = 1;
        for (int k = 3; k < N; ++k) {
            Integer m = Integer(1) << (k + 1);
            if (mod_floor(x * x - a, m) != 0) x += Integer(1) << (k - 1);
        }
        return mod_floor(x, pN);
    }
    Integer am = mod_floor(a, p);
    Integer x = -1;
    for (long r = 0; r < p; ++r)
        if (mod_floor(Integer(r) * r - am, p) == 0) {
            x = r;
            break;
        }
    if (x < 0 || x == 0) throw InputError("sqrt mod p^N: not a square unit");
    Integer pk = p;
    for (int k = 1; k < N; ++k) {
        pk *= p;
        Integer fx = x * x - a;
        Integer corr = mod_floor(-fx * inv_mod(2 * x, pk), pk);
        x = mod_floor(x + corr, pk);
    }
    return mod_floor(x, pN);
}

// ---------------------------------------------------------------- Q(sqrt d)

template <class T>
T rational_to(const Rational& x) {
    if constexpr (std::is_same_v<T, double>) {
        return x.convert_to<double>();
    } else {
        return T(num(x).str()) / T(den(x).str());
    }
}

struct QuadElem {
    Rational disc{5};
    Rational a{0};
    Rational b{0};

    QuadElem() = default;
    QuadElem(Rational d, Rational a_, Rational b_ = 0)
        : disc(std::move(d)), a(std::move(a_)), b(std::move(b_)) {}

    static QuadElem sqrt_of(const Rational& d) { return QuadElem(d, 0, 1); }

    void same_field(const QuadElem& o) const {
        if (disc != o.disc)
            throw InputError("quadratic field tag mismatch: " + to_string(disc) + " vs " +
                             to_string(o.disc));
    }

    QuadElem operator+(const QuadElem& o) const { same_field(o); return {disc, a + o.a, b + o.b}; }
    QuadElem operator-(const QuadElem& o) const { same_field(o); return {disc, a - o.a, b - o.b}; }
    QuadElem operator-() const { return {disc, -a, -b}; }
    QuadElem operator*(const QuadElem& o) const {
        same_field(o);
        return {disc, a * o.a + disc * b * o.b, a * o.b + b * o.a};
    }
    QuadElem operator*(const Rational& s) const { return {disc, a * s, b * s}; }
    QuadElem operator/(const QuadElem& o) const {
        Rational n = o.norm();
        if (n == 0) throw InputError("division by zero in quadratic field");
        return (*this * o.conj()) * (Rational(1) / n);
    }
    QuadElem& operator+=(const QuadElem& o) { return *this = *this + o; }
    QuadElem& operator-=(const QuadElem& o) { return *this = *this - o; }
    QuadElem& operator*=(const QuadElem& o) { return *this = *this * o; }
    bool operator==(const QuadElem& o) const { return disc == o.disc && a == o.a && b == o.b; }
    bool operator!=(const QuadElem& o) const { return !(*this == o); }

    QuadElem conj() const { return {disc, a, -b}; }
    Rational trace() const { return 2 * a; }
    Rational norm() const { return a * a - disc * b * b; }
    bool is_zero() const { return a == 0 && b == 0; }
    bool is_rational() const { return b == 0; }

    // Real embedding j = 0 (sqrt d > 0) or j = 1 (sqrt d < 0).
    template <class T>
    T embed(int j) const {
        using std::sqrt;
        T s = sqrt(rational_to<T>(disc));
        T av = rational_to<T>(a);
        T bv = rational_to<T>(b);
        return j == 0 ? T(av + bv * s) : T(av - bv * s);
    }

    std::string str() const {
        std::string out;
        if (b == 0) return to_string(a);
        if (a != 0) out = to_string(a) + (b < 0 ? " - " : " + ");
        else if (b < 0) out = "-";
        Rational bb = boost::multiprecision::abs(b);
        if (bb != 1) out += to_string(bb) + " ";
        return out + "sqrt" + to_string(disc);
    }
};

inline QuadElem operator*(const Rational& s, const QuadElem& x) { return x * s; }

// Parses "a/b + c/d sqrtD" style strings.  "sqrt5", "sqrtD" and a bare
// "sqrt" all denote the generator of the field with the given discriminant.
inline QuadElem parse_quad(const std::string& in, const Rational& disc) {
    std::string s;
    for (char c : in)
        if (!std::isspace(static_cast<unsigned char>(c)) && c != '"' && c != '*') s += c;
    if (s.empty()) throw InputError("empty field element");
    std::vector<std::string> terms;
    std::string cur;
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if ((c == '+' || c == '-') && i > 0 && s[i - 1] != '/') {
            terms.push_back(cur);
            cur.clear();
        }
        cur += c;
    }
    terms.push_back(cur);
    QuadElem x(disc, 0, 0);
    for (auto t : terms) {
        if (t.empty()) continue;
        auto pos = t.find("sqrt");
        if (pos == std::string::npos) {
            x.a += parse_rational(t);
            continue;
        }
        std::string coef = t.substr(0, pos);
        std::string rad = t.substr(pos + 4);
        if (!rad.empty() && rad != "D") {
            if (parse_rational(rad) != disc)
                throw InputError("element '" + in + "' uses sqrt" + rad + " in a field of disc " +
                                 to_string(disc));
        }
        Rational c;
        if (coef.empty() || coef == "+") c = 1;
        else if (coef == "-") c = -1;
        else c = parse_rational(coef);
        x.b += c;
    }
    return x;
}

// Both real embeddings strictly positive, decided exactly.
inline bool is_totally_positive(const QuadElem& x) {
    if (x.a <= 0) return false;
    return x.a * x.a > x.disc * x.b * x.b;
}

// ---------------------------------------------------------------- E = F(sqrt Delta)

struct CMElem {
    QuadElem u;
    QuadElem v;
    QuadElem Delta;

    CMElem() = default;
    CMElem(QuadElem u_, QuadElem v_, QuadElem Delta_)
        : u(std::move(u_)), v(std::move(v_)), Delta(std::move(Delta_)) {
        u.same_field(Delta);
        v.same_field(Delta);
    }
    static CMElem from_base(const QuadElem& x, const QuadElem& Delta) {
        return CMElem(x, QuadElem(Delta.disc, 0, 0), Delta);
    }

    void same_field(const CMElem& o) const {
        if (Delta != o.Delta) throw InputError("CM field tag mismatch");
    }
    CMElem operator+(const CMElem& o) const { same_field(o); return {u + o.u, v + o.v, Delta}; }
    CMElem operator-(const CMElem& o) const { same_field(o); return {u - o.u, v - o.v, Delta}; }
    CMElem operator-() const { return {-u, -v, Delta}; }
    CMElem operator*(const CMElem& o) const {
        same_field(o);
        return {u * o.u + Delta * v * o.v, u * o.v + v * o.u, Delta};
    }
    CMElem operator*(const QuadElem& s) const { return {u * s, v * s, Delta}; }
    CMElem operator*(const Rational& s) const { return {u * s, v * s, Delta}; }
    CMElem conj() const { return {u, -v, Delta}; }
    QuadElem norm_EF() const { return u * u - Delta * v * v; }
    QuadElem trace_EF() const { return u * Rational(2); }
    bool is_zero() const { return u.is_zero() && v.is_zero(); }
    CMElem inverse() const {
        QuadElem n = norm_EF();
        if (n.is_zero()) throw InputError("inverse of zero in CM field");
        QuadElem ni = QuadElem(n.disc, 1, 0) / n;
        return conj() * ni;
    }
    CMElem operator/(const CMElem& o) const { return *this * o.inverse(); }
    bool operator==(const CMElem& o) const { return u == o.u && v == o.v && Delta == o.Delta; }

    // Complex embedding extending the real embedding j of F, with
    // Im(sqrt Delta) > 0; bar = true gives the complex conjugate embedding.
    template <class T>
    Cplx<T> embed(int j, bool bar = false) const {
        using std::sqrt;
        T d = Delta.embed<T>(j);
        T s = sqrt(-d);
        Cplx<T> z(u.embed<T>(j), v.embed<T>(j) * s);
        return bar ? z.conj() : z;
    }

    std::string str() const { return "(" + u.str() + ") + (" + v.str() + ") sqrtDelta"; }
};

struct ReflexData {
    Rational Dtilde;
    Integer discE;
};

// Dtilde = N_{F/Q}(Delta); d_E is reported as D^2 Dtilde (consistency relation).
inline ReflexData reflex_data(const QuadElem& Delta) {
    Rational Dt = Delta.norm();
    if (Dt <= 0) throw InputError("Delta must be totally negative (norm > 0)");
    if (!(Delta.a < 0 && is_totally_positive(-Delta)))
        throw InputError("Delta must be totally negative");
    Rational dE = Delta.disc * Delta.disc * Dt;
    return {Dt, is_integral(dE) ? num(dE) : Integer(0)};
}

// ---------------------------------------------------------------- primes

enum class SplitKind { split, inert, ramified };

inline const char* kind_name(SplitKind k) {
    switch (k) {
        case SplitKind::split: return "split";
        case SplitKind::inert: return "inert";
        default: return "ramified";
    }
}

struct PrimeSplit {
    long prime;
    SplitKind kind;
    int ord = 0;
};

inline PrimeSplit splitting_type(long p, const Rational& field_disc) {
    if (!is_prime(p)) throw InputError("splitting_type: " + std::to_string(p) + " is not prime");
    int k = kronecker(fundamental_discriminant(field_disc), p);
    SplitKind kind = k == 0 ? SplitKind::ramified : (k > 0 ? SplitKind::split : SplitKind::inert);
    return {p, kind, 0};
}

// A prime of Q(sqrt d): p with its splitting kind; branch selects one of the
// two primes above a split p (sqrt d maps to +delta or -delta in Z_p).
struct QuadPrime {
    long p;
    SplitKind kind;
    int branch = 0;

    Integer norm() const { return kind == SplitKind::inert ? Integer(p) * p : Integer(p); }
    bool operator<(const QuadPrime& o) const {
        return std::tie(p, branch) < std::tie(o.p, o.branch);
    }
    bool operator==(const QuadPrime& o) const { return p == o.p && branch == o.branch; }
    std::string str() const {
        std::string s = "p" + std::to_string(p);
        if (kind == SplitKind::split) s += branch == 0 ? "+" : "-";
        return s;
    }
};

inline std::vector<QuadPrime> primes_above(long p, const Rational& field_disc) {
    auto ps = splitting_type(p, field_disc);
    if (ps.kind == SplitKind::split) return {{p, ps.kind, 0}, {p, ps.kind, 1}};
    return {{p, ps.kind, 0}};
}

// Number of integral ideals of the quadratic extension with the given
// relative norm, from the valuation vector of that norm at odd primes.
inline Integer rho_ideal(const std::vector<std::pair<SplitKind, int>>& valuations) {
    Integer r = 1;
    for (auto& [k, o] : valuations) {
        if (o < 0) return 0;
        switch (k) {
            case SplitKind::split: r *= (o + 1); break;
            case SplitKind::inert: r *= (o % 2 == 0 ? 1 : 0); break;
            case SplitKind::ramified: break;
        }
    }
    return r;
}

// ---------------------------------------------------------------- trace enumeration

// The coset t0 + Lambda inside Q(sqrt d), Lambda a full Z-lattice in
// x + y sqrt d coordinates stored in echelon form {(h11, h12), (0, h22)}.
struct TraceSupport {
    Rational x0{0}, y0{0};
    Rational h11{1}, h12{0}, h22{1};

    // Lattice generated by arbitrary (x, y) vectors; at least one must have x != 0.
    static TraceSupport from_generators(const Rational& x0, const Rational& y0,
                                        const std::vector<std::pair<Rational, Rational>>& gens) {
        Integer N = 1;
        for (auto& [x, y] : gens) {
            N = boost::multiprecision::lcm(N, den(x));
            N = boost::multiprecision::lcm(N, den(y));
        }
        std::vector<std::pair<Integer, Integer>> v;
        for (auto& [x, y] : gens) v.push_back({num(x * N), num(y * N)});
        // Euclid on first coordinates
        auto absI = [](const Integer& z) { return boost::multiprecision::abs(z); };
        for (;;) {
            std::vector<std::pair<Integer, Integer>> nz;
            Integer g2 = 0;
            for (auto& w : v) {
                if (w.first != 0) nz.push_back(w);
                else g2 = boost::multiprecision::gcd(g2, w.second);
            }
            if (nz.size() <= 1) {
                if (nz.empty()) throw InputError("trace support lattice is degenerate");
                auto h = nz[0];
                if (h.first < 0) h = {-h.first, -h.second};
                if (g2 == 0) throw InputError("trace support lattice is degenerate");
                Integer h12 = mod_floor(h.second, g2);
                TraceSupport t;
                t.x0 = x0;
                t.y0 = y0;
                t.h11 = Rational(h.first, N);
                t.h12 = Rational(h12, N);
                t.h22 = Rational(absI(g2), N);
                return t;
            }
            size_t imin = 0;
            for (size_t i = 1; i < nz.size(); ++i)
                if (absI(nz[i].first) < absI(nz[imin].first)) imin = i;
            auto piv = nz[imin];
            std::vector<std::pair<Integer, Integer>> nv;
            for (size_t i = 0; i < nz.size(); ++i) {
                if (i == imin) continue;
                Integer q = nz[i].first / piv.first;
                nv.push_back({nz[i].first - q * piv.first, nz[i].second - q * piv.second});
            }
            nv.push_back(piv);
            if (g2 != 0) nv.push_back({0, g2});
            v = nv;
        }
    }

    // Plain grid x, y in (1/N) Z.
    static TraceSupport grid(long N) {
        TraceSupport t;
        t.h11 = Rational(1, N);
        t.h22 = Rational(1, N);
        return t;
    }

    bool contains(const Rational& x, const Rational& y) const {
        Rational k1 = (x - x0) / h11;
        if (!is_integral(k1)) return false;
        Rational k2 = (y - y0 - k1 * h12) / h22;
        return is_integral(k2);
    }
};

// All totally positive t = m/2 + s sqrt(d) in the support with trace m,
// ascending in s.
inline std::vector<QuadElem> enumerate_trace_t(const Rational& m, const TraceSupport& sup,
                                               const Rational& disc) {
    std::vector<QuadElem> out;
    if (m <= 0) return out;
    Rational x = m / 2;
    Rational k1 = (x - sup.x0) / sup.h11;
    if (!is_integral(k1)) return out;
    Rational ybase = sup.y0 + k1 * sup.h12;
    // total positivity: disc * y^2 < x^2; |y| <= ymax is a safe rational box
    Rational bound2 = x * x / disc;
    Rational ymax = disc < 1 ? x / disc : x;
    Integer kmin = floor_int((-ymax - ybase) / sup.h22) - 1;
    Integer kmax = ceil_int((ymax - ybase) / sup.h22) + 1;
    for (Integer k = kmin; k <= kmax; ++k) {
        Rational y = ybase + Rational(k) * sup.h22;
        if (y * y < bound2) out.emplace_back(disc, x, y);
    }
    return out;
}

}  // namespace cmtheta
