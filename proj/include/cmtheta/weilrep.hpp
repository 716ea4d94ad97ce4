#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lattices.hpp"
#include "qseries.hpp"

namespace cmtheta {

// ---------------------------------------------------------------- Z[zeta8]

// a0 + a1 z + a2 z^2 + a3 z^3 with z = e(1/8), z^4 = -1.
struct Z8 {
    std::array<long long, 4> c{0, 0, 0, 0};

    Z8() = default;
    Z8(long long a) : c{a, 0, 0, 0} {}
    // z^k for any integer k
    static Z8 zeta(long k) {
        long m = ((k % 8) + 8) % 8;
        Z8 r;
        r.c[m % 4] = m < 4 ? 1 : -1;
        return r;
    }
    Z8 operator+(const Z8& o) const {
        Z8 r;
        for (int i = 0; i < 4; ++i) r.c[i] = c[i] + o.c[i];
        return r;
    }
    Z8& operator+=(const Z8& o) { return *this = *this + o; }
    Z8 operator-() const {
        Z8 r;
        for (int i = 0; i < 4; ++i) r.c[i] = -c[i];
        return r;
    }
    Z8 operator-(const Z8& o) const { return *this + (-o); }
    Z8 operator*(const Z8& o) const {
        std::array<long long, 8> t{};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) t[i + j] += c[i] * o.c[j];
        Z8 r;
        for (int i = 0; i < 4; ++i) r.c[i] = t[i] - t[i + 4];
        return r;
    }
    Z8 operator*(long long s) const {
        Z8 r;
        for (int i = 0; i < 4; ++i) r.c[i] = c[i] * s;
        return r;
    }
    // complex conjugation: z -> z^-1 = -z^3
    Z8 conj() const { return Z8{{c[0], -c[3], -c[2], -c[1]}}; }
    bool operator==(const Z8& o) const { return c == o.c; }
    bool is_zero() const { return c == std::array<long long, 4>{0, 0, 0, 0}; }
    explicit Z8(std::array<long long, 4> v) : c(v) {}

    template <class T = double>
    Cplx<T> value() const {
        Cplx<T> z(T(0));
        for (int k = 0; k < 4; ++k) z += epi<T>(T(k) / T(4)) * T(c[k]);
        return z;
    }
    std::string str() const {
        std::ostringstream os;
        os << "[" << c[0] << "," << c[1] << "," << c[2] << "," << c[3] << "]";
        return os.str();
    }
};

// e(x) for x in (1/8)Z.
inline Z8 e8(const Rational& x) {
    Rational y = x * 8;
    if (!is_integral(y)) throw InputError("e8: argument not in (1/8)Z");
    return Z8::zeta(mod_floor(num(y), 8).convert_to<long>());
}

// 64 x 64 matrix with entries num(i,j) / denom, num in Z[zeta8].
struct CycloMatrix {
    static constexpr int N = 64;
    std::vector<Z8> num;
    long long denom = 1;

    CycloMatrix() : num(N * N) {}
    Z8& at(int i, int j) { return num[i * N + j]; }
    const Z8& at(int i, int j) const { return num[i * N + j]; }

    static CycloMatrix identity(long long scale = 1) {
        CycloMatrix m;
        for (int i = 0; i < N; ++i) m.at(i, i) = Z8(scale);
        return m;
    }
    CycloMatrix operator*(const CycloMatrix& o) const {
        CycloMatrix r;
        r.denom = denom * o.denom;
        for (int i = 0; i < N; ++i)
            for (int k = 0; k < N; ++k) {
                const Z8& a = at(i, k);
                if (a.is_zero()) continue;
                for (int j = 0; j < N; ++j)
                    if (!o.at(k, j).is_zero()) r.at(i, j) += a * o.at(k, j);
            }
        return r;
    }
    CycloMatrix adjoint() const {
        CycloMatrix r;
        r.denom = denom;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) r.at(j, i) = at(i, j).conj();
        return r;
    }
    CycloMatrix pow(int k) const {
        CycloMatrix r = identity();
        for (int i = 0; i < k; ++i) r = r * *this;
        return r;
    }
    // Exact equality of the represented rational-cyclotomic matrices;
    // returns the first differing (row, col) (1-based labels) or (0, 0).
    std::pair<int, int> first_difference(const CycloMatrix& o) const {
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                if (!(at(i, j) * o.denom == o.at(i, j) * denom)) return {i + 1, j + 1};
        return {0, 0};
    }
    bool operator==(const CycloMatrix& o) const { return first_difference(o).first == 0; }
};

// rho(T): diagonal e(Q(mu)).
inline CycloMatrix rho_T() {
    CycloMatrix m;
    for (int i = 1; i <= 64; ++i) m.at(i - 1, i - 1) = e8(qval(label(i)));
    return m;
}

// rho(S): entry (nu, mu) = e(-1/8)/8 * e(-B(mu, nu)), signature (2, 3).
inline CycloMatrix rho_S() {
    CycloMatrix m;
    m.denom = 8;
    for (int i = 1; i <= 64; ++i)
        for (int j = 1; j <= 64; ++j)
            m.at(j - 1, i - 1) = Z8::zeta(-1) * e8(-bval(label(i), label(j)));
    return m;
}

struct RelationReport {
    bool ok = true;
    std::vector<std::string> lines;
    void check(bool pass, const std::string& what) {
        lines.push_back(std::string(pass ? "ok   " : "FAIL ") + what);
        ok = ok && pass;
    }
};

inline std::string diff_message(const std::pair<int, int>& d) {
    if (d.first == 0) return "";
    return " (first violated entry " + std::to_string(d.first) + "," + std::to_string(d.second) + ")";
}

// Exact checks of unitarity and the Mp2(Z) relations.
inline RelationReport verify_mp2_relations() {
    RelationReport rep;
    CycloMatrix S = rho_S(), T = rho_T();
    auto d0 = (S * S.adjoint()).first_difference(CycloMatrix::identity());
    rep.check(d0.first == 0, "rho_S rho_S^* = I" + diff_message(d0));
    CycloMatrix S2 = S * S;
    auto d1 = S2.pow(4).first_difference(CycloMatrix::identity());
    rep.check(d1.first == 0, "rho_S^8 = I" + diff_message(d1));
    CycloMatrix ST = S * T;
    auto d2 = (ST * ST * ST).first_difference(S2);
    rep.check(d2.first == 0, "(rho_S rho_T)^3 = rho_S^2" + diff_message(d2));
    // rho_S^2 phi_mu is a multiple of phi_{-mu}
    bool inv = true;
    int bad = 0;
    for (int i = 1; i <= 64 && inv; ++i) {
        int mi = label_index(-label(i));
        for (int j = 1; j <= 64; ++j)
            if ((j == mi) == S2.at(j - 1, i - 1).is_zero()) {
                inv = false;
                bad = i;
                break;
            }
    }
    rep.check(inv, "rho_S^2 phi_mu in C phi_{-mu}" +
                       (inv ? std::string() : " (first violated label " + std::to_string(bad) + ")"));
    return rep;
}

// ---------------------------------------------------------------- input forms

// (x1, x2, y1, y2) in {0,1}^4; written x1x2y1y2.
struct CharQuadruple {
    std::array<int, 4> e{0, 0, 0, 0};

    CharQuadruple() = default;
    CharQuadruple(int x1, int x2, int y1, int y2) : e{x1 & 1, x2 & 1, y1 & 1, y2 & 1} {}
    static CharQuadruple parse(const std::string& s) {
        std::string t;
        for (char c : s)
            if (c == '0' || c == '1') t += c;
            else if (c != ',' && c != ' ' && c != '(' && c != ')')
                throw InputError("bad characteristic '" + s + "'");
        if (t.size() != 4) throw InputError("characteristic needs four bits: '" + s + "'");
        return {t[0] - '0', t[1] - '0', t[2] - '0', t[3] - '0'};
    }
    bool even() const { return (e[0] * e[2] + e[1] * e[3]) % 2 == 0; }
    std::string str() const {
        return std::to_string(e[0]) + std::to_string(e[1]) + std::to_string(e[2]) +
               std::to_string(e[3]);
    }
    bool operator<(const CharQuadruple& o) const { return e < o.e; }
    bool operator==(const CharQuadruple& o) const { return e == o.e; }
};

// The ten even characteristics, in the order of the input-form tables.
inline const std::vector<CharQuadruple>& even_characteristics() {
    static const std::vector<CharQuadruple> v = [] {
        std::vector<CharQuadruple> r;
        for (auto k : {"1111", "0110", "1001", "0011", "0010", "0001", "1100", "0100", "1000", "0000"})
            r.push_back(CharQuadruple::parse(k));
        return r;
    }();
    return v;
}

inline constexpr const char* kTableVersion = "input-forms/1";

// Components 1..64 of f_{x,y} as tokens 0, u, -u, v, -v, w.
inline const std::vector<std::pair<std::string, std::string>>& table_source() {
    static const std::vector<std::pair<std::string, std::string>> t = {
        {"1111", "u u u -u u u u -u u u u -u -u -u -u u 0 0 0 0 0 0 0 0 0 0 0 0 v v v -v v v v -v v v v -v -v -v -v v w w 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0"},
        {"0110", "u u -u u u u -u u u u -u u -u -u u -u 0 0 0 0 0 0 0 0 0 0 0 0 v v -v v v v -v v v v -v v -v -v v -v 0 0 w w 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0"},
        {"1001", "u -u u u u -u u u u -u u u -u u -u -u 0 0 0 0 0 0 0 0 0 0 0 0 v -v v v v -v v v v -v v v -v v -v -v 0 0 0 0 w w 0 0 0 0 0 0 0 0 0 0 0 0 0 0"},
        {"0011", "u u u -u u u u -u -u -u -u u u u u -u 0 0 0 0 0 0 0 0 0 0 0 0 v v v -v v v v -v -v -v -v v v v v -v 0 0 0 0 0 0 w w 0 0 0 0 0 0 0 0 0 0 0 0"},
        {"0010", "u u -u u u u -u u -u -u u u u u -u u 0 0 0 0 0 0 0 0 0 0 0 0 v v -v v v v -v v -v -v v -v v v -v v 0 0 0 0 0 0 0 0 w w 0 0 0 0 0 0 0 0 0 0"},
        {"0001", "u -u u u u -u u u -u u -u -u u -u u u 0 0 0 0 0 0 0 0 0 0 0 0 v -v v v v -v v v -v v -v -v v -v v v 0 0 0 0 0 0 0 0 0 0 w w 0 0 0 0 0 0 0 0"},
        {"1100", "u u u -u -u -u -u u u u u -u u u u -u 0 0 0 0 0 0 0 0 0 0 0 0 v v v -v -v -v -v v v v v -v v v v -v 0 0 0 0 0 0 0 0 0 0 0 0 w w 0 0 0 0 0 0"},
        {"0100", "u u -u u -u -u u -u u u -u u u u -u u 0 0 0 0 0 0 0 0 0 0 0 0 v v -v v -v -v v -v v v -v v v v -v v 0 0 0 0 0 0 0 0 0 0 0 0 0 0 w w 0 0 0 0"},
        {"1000", "u -u u u -u u -u -u u -u u u u -u u u 0 0 0 0 0 0 0 0 0 0 0 0 v -v v v -v v -v -v v -v v v v -v v v 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 w w 0 0"},
        {"0000", "u -u -u -u -u u u u -u u u u -u u u u 0 0 0 0 0 0 0 0 0 0 0 0 v -v -v -v -v v v v -v v v v -v v v v 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 0 w w"},
    };
    return t;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t table_checksum() {
    std::uint64_t h = fnv1a(kTableVersion);
    for (auto& [k, v] : table_source()) h = fnv1a(k + ":" + v + "\n", h);
    return h;
}

// Frozen at table creation; load_f refuses to run if the data drifted.
inline constexpr std::uint64_t kTableChecksum = 0xe0d7e48b0124d102ull;

struct TableToken {
    int sign = 0;   // 0 for a zero entry
    char sym = '0'; // u, v, w
};

inline std::array<TableToken, 64> table_tokens(const CharQuadruple& xy) {
    if (!xy.even()) throw InputError("odd characteristic " + xy.str() + " has no input form");
    if (table_checksum() != kTableChecksum) throw InputError("input-form table checksum mismatch");
    for (auto& [k, v] : table_source()) {
        if (k != xy.str()) continue;
        std::array<TableToken, 64> out;
        std::istringstream is(v);
        std::string tok;
        int i = 0;
        while (is >> tok) {
            if (i >= 64) throw InputError("table row too long for " + k);
            if (tok == "0") out[i] = {0, '0'};
            else if (tok[0] == '-') out[i] = {-1, tok[1]};
            else out[i] = {1, tok[0]};
            ++i;
        }
        if (i != 64) throw InputError("table row too short for " + k);
        return out;
    }
    throw InputError("no table for " + xy.str());
}

struct SLVector {
    std::array<FourierSeries, 64> comp;  // comp[i-1] is the mu(i) component

    FourierSeries& operator[](int label_i) { return comp.at(label_i - 1); }
    const FourierSeries& operator[](int label_i) const { return comp.at(label_i - 1); }

    SLVector& operator+=(const SLVector& o) {
        for (int i = 0; i < 64; ++i) comp[i] += o.comp[i];
        return *this;
    }
    SLVector operator*(const Rational& s) const {
        SLVector r;
        for (int i = 0; i < 64; ++i) r.comp[i] = comp[i] * s;
        return r;
    }
    friend SLVector operator+(SLVector a, const SLVector& b) { return a += b; }
    friend SLVector operator-(SLVector a, const SLVector& b) { return a += b * Rational(-1); }
};

inline const UVW& uvw_cached(const Rational& trunc) {
    static std::map<Rational, UVW> cache;
    auto it = cache.find(trunc);
    if (it == cache.end()) it = cache.emplace(trunc, build_uvw(trunc)).first;
    return it->second;
}

// f_{x,y} with components known below trunc.
inline SLVector load_f(const CharQuadruple& xy, const Rational& trunc = 3) {
    auto toks = table_tokens(xy);
    const UVW& b = uvw_cached(trunc);
    SLVector f;
    for (int i = 0; i < 64; ++i) {
        f.comp[i] = FourierSeries(8, trunc);
        const TableToken& t = toks[i];
        if (t.sign == 0) continue;
        const FourierSeries& s = t.sym == 'u' ? b.u : t.sym == 'v' ? b.v : b.w;
        f.comp[i] = s * Rational(t.sign);
    }
    return f;
}

struct ExponentReport {
    bool ok = true;
    std::vector<std::string> violations;
    std::vector<std::pair<int, Rational>> negative_terms;  // (label, exponent)
};

// exponent + Q(mu) in Z for every term; the principal part is q^{-1/8} in
// exactly the two w-components with Q(mu) = 1/8.
inline ExponentReport validate_exponents(const SLVector& f) {
    ExponentReport r;
    for (int i = 1; i <= 64; ++i) {
        Rational Q = qval(label(i));
        for (auto& [e, c] : f[i].coeffs) {
            if (!is_integral(e + Q)) {
                r.ok = false;
                r.violations.push_back("component " + std::to_string(i) + " exponent " +
                                       to_string(e) + " with Q = " + to_string(Q));
            }
            if (e < 0) r.negative_terms.emplace_back(i, e);
        }
    }
    bool shape = r.negative_terms.size() == 2;
    for (auto& [i, e] : r.negative_terms)
        shape = shape && e == Rational(-1, 8) && qval(label(i)) == Rational(1, 8);
    if (!shape) {
        r.ok = false;
        r.violations.push_back("principal part is not q^{-1/8} on two components with Q = 1/8");
    }
    return r;
}

// The Rosenhain combinations: f_k = sum of eps * f_i over the six
// characteristics i1..i6 = 0010, 1000, 0110, 0011, 1100, 1001.
inline const std::array<CharQuadruple, 6>& rosenhain_index_set() {
    static const std::array<CharQuadruple, 6> v = {
        CharQuadruple::parse("0010"), CharQuadruple::parse("1000"), CharQuadruple::parse("0110"),
        CharQuadruple::parse("0011"), CharQuadruple::parse("1100"), CharQuadruple::parse("1001")};
    return v;
}

inline const std::array<int, 6>& rosenhain_signs(int k) {
    static const std::array<std::array<int, 6>, 3> eps = {{
        {-1, 0, -1, 1, 0, 1},
        {0, -1, -1, 0, 1, 1},
        {-1, -1, 0, 1, 1, 0},
    }};
    if (k < 1 || k > 3) throw InputError("Rosenhain index must be 1, 2 or 3");
    return eps[k - 1];
}

inline SLVector rosenhain_inputs(int k, const Rational& trunc = 3) {
    const auto& eps = rosenhain_signs(k);
    SLVector f;
    for (auto& c : f.comp) c = FourierSeries(8, trunc);
    for (int j = 0; j < 6; ++j)
        if (eps[j] != 0) f += load_f(rosenhain_index_set()[j], trunc) * Rational(eps[j]);
    return f;
}

// Seesaw contraction: g_{mu1} = sum over fiber pairs (mu0, mu1) above any mu
// of f_mu * theta0_{mu0}.
inline std::map<CosetM, FourierSeries> build_hilbert_input(const SLVector& f, long D,
                                                           const Rational& trunc) {
    std::map<CosetM, FourierSeries> g;
    std::map<Rational, FourierSeries> th;
    for (int i = 1; i <= 64; ++i) {
        if (f[i].is_zero()) continue;
        for (auto& [m0, m1] : fiber_decompose(label(i), D)) {
            auto it = th.find(m0.t);
            if (it == th.end()) it = th.emplace(m0.t, theta0_series(m0.t, D, trunc + 1)).first;
            FourierSeries p = (f[i] * it->second).truncated(trunc);
            auto gi = g.find(m1);
            if (gi == g.end()) g.emplace(m1, p);
            else gi->second += p;
        }
    }
    for (auto it = g.begin(); it != g.end();)
        it = it->second.is_zero() ? g.erase(it) : std::next(it);
    return g;
}

// Serialization of all ten tables for diffing: a header, then per table the
// nonzero components and the three basic series.
inline std::string dump_tables(const Rational& trunc) {
    std::ostringstream os;
    os << "# " << kTableVersion << " checksum " << std::hex << table_checksum() << std::dec << "\n";
    const UVW& b = uvw_cached(trunc);
    os << "[u]\n" << b.u.serialize() << "[v]\n" << b.v.serialize() << "[w]\n" << b.w.serialize();
    for (auto& xy : even_characteristics()) {
        os << "[f " << xy.str() << "]\n";
        auto toks = table_tokens(xy);
        for (int i = 0; i < 64; ++i)
            if (toks[i].sign != 0)
                os << (i + 1) << "\t" << (toks[i].sign < 0 ? "-" : "") << toks[i].sym << "\n";
    }
    return os.str();
}

}  // namespace cmtheta
