#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "eisenstein.hpp"
#include "thetanum.hpp"
#include "weilrep.hpp"

namespace cmtheta {

// ---------------------------------------------------------------- configuration

struct ConfigError : InputError {
    std::string key;
    int line = 0;
    ConfigError(const std::string& k, int ln, const std::string& msg)
        : InputError("config line " + std::to_string(ln) + ": key '" + k + "': " + msg), key(k), line(ln) {}
};

enum class TraceField { F, Ftilde };

struct RunConfig {
    CMInput cm;
    Rational trunc{3};
    unsigned precision_bits = 160;
    std::string mode = "lambda";
    std::optional<CharQuadruple> calibration_char;
    TraceField trace_field = TraceField::Ftilde;
    OraclePoint oracle = OraclePoint::lattice;
};

// "c0 p:c p:c ..." (whitespace separated); the bare rational may be omitted.
inline LogLinear parse_loglinear(const std::string& s) {
    std::istringstream is(s);
    std::string tok;
    LogLinear x;
    while (is >> tok) {
        auto colon = tok.find(':');
        if (colon == std::string::npos) {
            x.c0 += parse_rational(tok);
        } else {
            long p = std::stol(tok.substr(0, colon));
            if (!is_prime(p)) throw InputError("log term needs a prime: '" + tok + "'");
            x += LogLinear::log_of(p, parse_rational(tok.substr(colon + 1)));
        }
    }
    return x;
}

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    std::string t = s.substr(a, b - a + 1);
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
    return t;
}

inline CharQuadruple parse_calibration(const std::string& v) {
    CharQuadruple xy = CharQuadruple::parse(v);
    if (!xy.even()) throw InputError("calibration characteristic " + xy.str() + " is odd");
    return xy;
}

// Flat "key = value" text. Field elements are written "a/b + c/d sqrtD";
// a0 overrides use the key "a0(a,b,r,s)".
inline RunConfig parse_config(std::istream& in) {
    std::map<std::string, std::pair<std::string, int>> kv;
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (trim(line).empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(trim(line), ln, "expected 'key = value'");
        std::string k = trim(line.substr(0, eq));
        if (kv.count(k)) throw ConfigError(k, ln, "duplicate key");
        kv[k] = {trim(line.substr(eq + 1)), ln};
    }
    static const std::set<std::string> known = {
        "D", "Delta", "alpha.u", "alpha.v", "beta.u", "beta.v", "xi.u", "xi.v", "omega_E", "cT",
        "Lambda0chi", "trace_field", "oracle_point", "precision", "trunc", "calibrate", "mode"};
    RunConfig cfg;
    auto get = [&](const std::string& k) -> const std::pair<std::string, int>& {
        auto it = kv.find(k);
        if (it == kv.end()) throw ConfigError(k, ln, "missing required key");
        return it->second;
    };
    auto wrap = [&](const std::string& k, auto&& fn) {
        auto it = kv.find(k);
        int l = it == kv.end() ? ln : it->second.second;
        try {
            fn();
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(k, l, e.what());
        }
    };
    for (auto& [k, v] : kv)
        if (!known.count(k) && k.rfind("a0(", 0) != 0) throw ConfigError(k, v.second, "unknown key");
    wrap("D", [&] {
        cfg.cm.D = std::stol(get("D").first);
        if (cfg.cm.D < 2 || square_class(Rational(cfg.cm.D)).f != 1)
            throw InputError("D must be a squarefree integer >= 2");
    });
    const Rational Dq(cfg.cm.D);
    wrap("Delta", [&] { cfg.cm.Delta = parse_quad(get("Delta").first, Dq); });
    auto cmelem = [&](const std::string& name) {
        CMElem x;
        wrap(name + ".u", [&] { x.u = parse_quad(get(name + ".u").first, Dq); });
        wrap(name + ".v", [&] { x.v = parse_quad(get(name + ".v").first, Dq); });
        x.Delta = cfg.cm.Delta;
        return x;
    };
    cfg.cm.alpha = cmelem("alpha");
    cfg.cm.beta = cmelem("beta");
    cfg.cm.xi = cmelem("xi");
    auto opt = [&](const std::string& k, auto&& fn) {
        if (kv.count(k)) wrap(k, [&] { fn(kv[k].first); });
    };
    wrap("omega_E", [&] { cfg.cm.omega_E = std::stol(get("omega_E").first); });
    wrap("cT", [&] { cfg.cm.cT = std::stol(get("cT").first); });
    opt("Lambda0chi", [&](const std::string& v) { cfg.cm.Lambda0chi = parse_rational(v); });
    opt("trunc", [&](const std::string& v) { cfg.trunc = parse_rational(v); });
    opt("precision", [&](const std::string& v) {
        long b = std::stol(v);
        if (b < 53 || b > 4096) throw InputError("precision must be in [53, 4096] bits");
        cfg.precision_bits = static_cast<unsigned>(b);
    });
    opt("mode", [&](const std::string& v) {
        if (v != "lambda" && v != "theta" && v != "verify" && v != "dump")
            throw InputError("mode must be lambda, theta, verify or dump");
        cfg.mode = v;
    });
    opt("calibrate", [&](const std::string& v) { cfg.calibration_char = parse_calibration(v); });
    opt("oracle_point", [&](const std::string& v) { cfg.oracle = parse_oracle_point(v); });
    opt("trace_field", [&](const std::string& v) {
        if (v == "F") cfg.trace_field = TraceField::F;
        else if (v == "Ftilde") cfg.trace_field = TraceField::Ftilde;
        else throw InputError("trace_field must be F or Ftilde");
    });
    for (auto& [k, v] : kv) {
        if (k.rfind("a0(", 0) != 0) continue;
        wrap(k, [&] {
            std::string inner = k.substr(3, k.size() - 4);
            if (k.back() != ')') throw InputError("a0 key must look like a0(a,b,r,s)");
            std::vector<Rational> c;
            std::stringstream ss(inner);
            std::string part;
            while (std::getline(ss, part, ',')) c.push_back(parse_rational(trim(part)));
            if (c.size() != 4) throw InputError("a0 key needs four coordinates");
            cfg.cm.a0_overrides[CosetM(c[0], c[1], c[2], c[3]).str()] = parse_loglinear(v.first);
        });
    }
    auto val = validate(cfg.cm);
    if (!val.ok) throw ConfigError("alpha", get("alpha.u").second, val.errors.front());
    if (cfg.trace_field == TraceField::F &&
        square_class(Rational(cfg.cm.D)).d != square_class(cfg.cm.Dtilde()).d)
        throw ConfigError("trace_field", kv["trace_field"].second,
                          "trace_field = F needs F = F~ (local data live in F~)");
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("--config", 0, "cannot open '" + path + "'");
    return parse_config(f);
}

// ---------------------------------------------------------------- CT pairing

struct CTTerm {
    int label = 0;
    CosetL0 mu0;
    CosetM mu1;
    Rational e_f, e_theta, e_E;
    LogLinear contribution;  // rational coefficient times a0 when e_E = 0
    bool uses_a0 = false;
};

// Constant term split into an a0-free part and a formal combination of the
// unknown constants a0(mu1).
struct CTResult {
    LogLinear value;
    std::map<CosetM, Rational> a0;
    std::vector<CTTerm> terms;

    CTResult& operator+=(const CTResult& o) {
        value += o.value;
        for (auto& [m, c] : o.a0) add_a0(m, c);
        terms.insert(terms.end(), o.terms.begin(), o.terms.end());
        return *this;
    }
    CTResult scaled(const Rational& s) const {
        CTResult r;
        r.value = value * s;
        for (auto& [m, c] : a0) r.add_a0(m, c * s);
        for (auto t : terms) {
            t.contribution = t.contribution * s;
            r.terms.push_back(t);
        }
        return r;
    }
    void add_a0(const CosetM& m, const Rational& c) {
        auto& slot = a0[m];
        slot += c;
        if (slot == 0) a0.erase(m);
    }
    bool a0_free() const { return a0.empty(); }
    std::string a0_str() const {
        if (a0.empty()) return "0";
        std::string s;
        for (auto& [m, c] : a0) s += (s.empty() ? "" : " + ") + to_string(c) + "*a0" + m.str();
        return s;
    }
    // Value with a0 taken from overrides; throws if one is missing.
    LogLinear resolved(const CMInput& cm) const {
        LogLinear v = value;
        for (auto& [m, c] : a0) {
            auto it = cm.a0_overrides.find(m.str());
            if (it == cm.a0_overrides.end())
                throw A0MissingError("a0 of the Eisenstein coset " + m.str() + " is uncomputed");
            v += it->second * c;
        }
        return v;
    }
};

class Engine {
public:
    explicit Engine(RunConfig cfg) : cfg_(std::move(cfg)), ctx_(make_context(cfg_.cm)) {}

    const RunConfig& config() const { return cfg_; }
    EisensteinContext& context() { return ctx_; }

    // E(mu1) with positive part known below trunc.
    const EisensteinFamily& family(const CosetM& mu1, const Rational& trunc) {
        auto it = fam_.find(mu1);
        if (it == fam_.end() || it->second.positive.trunc < trunc)
            it = fam_.insert_or_assign(mu1, eisenstein_family(ctx_, mu1, trunc)).first;
        return it->second;
    }

    // sum over e = tr t of a(t, mu1) for a single exponent.
    LogLinear coefficient(const CosetM& mu1, const Rational& m) {
        return family(mu1, std::max(m, Rational(1, 8)) + Rational(1, 1000)).positive.coeff(m);
    }

    // CT[ sum_mu sum_{(mu0, mu1) over mu} f_mu theta0(mu0) E(mu1) ] over the full fibers.
    CTResult ct_pairing(const SLVector& f) {
        CTResult r;
        for (int i = 1; i <= 64; ++i) {
            const FourierSeries& fi = f[i];
            if (fi.is_zero()) continue;
            auto lead = fi.leading_exponent();
            if (*lead > 0) continue;
            Rational need = -*lead;
            for (auto& fp : fiber_decompose(label(i), cfg_.cm.D)) {
                FourierSeries th = theta0_series(fp.mu0.t, cfg_.cm.D, need + 1);
                for (auto& [ef, cf] : fi.coeffs) {
                    if (ef > 0) break;
                    if (!cf.is_rational()) throw InputError("ct_pairing: input form must be rational");
                    for (auto& [et, ct] : th.coeffs) {
                        Rational eE = -ef - et;
                        if (eE < 0) break;
                        Rational c = cf.c0 * ct.c0;
                        CTTerm term{i, fp.mu0, fp.mu1, ef, et, eE, {}, eE == 0};
                        if (eE == 0) {
                            r.add_a0(fp.mu1, c);
                            term.contribution = LogLinear(c);
                        } else {
                            LogLinear a = coefficient(fp.mu1, eE);
                            if (a.is_zero()) continue;
                            term.contribution = a * c;
                            r.value += term.contribution;
                        }
                        r.terms.push_back(term);
                    }
                }
            }
        }
        return r;
    }

    // The bookkeeping of the tabulated theorem: constant terms on labels
    // 1, 5, 9, 13, and the two w-components through delta / delta'.
    CTResult tabulated_theta(const CharQuadruple& xy) {
        SLVector f = load_f(xy, cfg_.trunc);
        const UVW& b = uvw_cached(cfg_.trunc);
        const long D = cfg_.cm.D;
        CTResult r;
        for (int i : {1, 5, 9, 13}) {
            CosetL mu = label(i);
            if (mu.c != 0 || mu.d != 0) throw InputError("label " + std::to_string(i) + " is not of shape (a,b,0,0,r)");
            Rational eps = f[i].coeff(0).c0;
            if (f[i] != b.u * eps || (eps != 1 && eps != -1))
                throw InputError("f_" + xy.str() + " component " + std::to_string(i) + " is not +-u");
            r.add_a0(CosetM(mu.a, mu.b, mu.r, 0), eps);
        }
        auto rep = validate_exponents(f);
        for (auto& [i, e] : rep.negative_terms) {
            CosetL mu = label(i);
            if (mu.d != 0) continue;
            if (mu.c == 0) {
                CosetM mu1(mu.a, mu.b, mu.r, 0);
                LogLinear a = coefficient(mu1, Rational(1, 8));
                r.value += a;
                r.terms.push_back({i, CosetL0(0), mu1, e, 0, Rational(1, 8), a, false});
            } else if (mu.c == Rational(1, 2)) {
                CosetM mu1(mu.a, mu.b, mu.r, Rational(1, 4 * D));
                Rational m = Rational(1, 8) - Rational(1, 8 * D);
                LogLinear a = coefficient(mu1, m) * Rational(2);
                r.value += a;
                r.terms.push_back({i, CosetL0(Rational(-1, 4 * D)), mu1, e, Rational(1, 8 * D), m, a, false});
            }
        }
        return r;
    }

    CTResult tabulated_lambda(int k) {
        const auto& eps = rosenhain_signs(k);
        CTResult r;
        for (int j = 0; j < 6; ++j)
            if (eps[j] != 0) r += tabulated_theta(rosenhain_index_set()[j]).scaled(eps[j]);
        return r;
    }

    CTResult ct_theta(const CharQuadruple& xy) { return ct_pairing(load_f(xy, cfg_.trunc)); }
    CTResult ct_lambda(int k) { return ct_pairing(rosenhain_inputs(k, cfg_.trunc)); }

private:
    RunConfig cfg_;
    EisensteinContext ctx_;
    std::map<CosetM, EisensteinFamily> fam_;
};

// Difference of two routes: value and a0 parts.
struct RouteComparison {
    bool agree = true;
    LogLinear value_diff;
    CTResult diff;
    std::vector<CTTerm> extra_terms;  // CT-route terms outside the tabulated cases
};

inline bool tabulated_case(const CTTerm& t, long D) {
    CosetL mu = label(t.label);
    if (t.e_E == 0) return (t.label - 1) % 4 == 0 && t.label <= 13 && t.mu0.t == 0 && t.mu1.s == 0;
    if (t.e_f != Rational(-1, 8)) return false;
    if (mu.d != 0) return false;
    if (mu.c == 0) return t.mu0.t == 0 && t.e_E == Rational(1, 8);
    return mu.c == Rational(1, 2) && t.mu1.s == Rational(1, 4 * D) &&
           t.e_E == Rational(1, 8) - Rational(1, 8 * D);
}

inline RouteComparison compare_routes(const CTResult& tab, const CTResult& ct, long D) {
    RouteComparison c;
    c.diff = ct;
    c.diff += tab.scaled(-1);
    c.diff.terms.clear();
    c.value_diff = c.diff.value;
    c.agree = c.diff.value.is_zero() && c.diff.a0_free();
    for (auto& t : ct.terms)
        if (!tabulated_case(t, D)) c.extra_terms.push_back(t);
    return c;
}

// ---------------------------------------------------------------- oracle

struct OracleValues {
    std::map<CharQuadruple, double> neg_log_pet;  // -log ||theta||^2_Pet
    std::array<double, 3> log_abs_lambda{};
    SiegelPoint<double> tau;
};

inline OracleValues compute_oracle(const RunConfig& cfg) {
    set_precision_bits(cfg.precision_bits);
    SiegelPoint<Real> tau = oracle_point<Real>(cfg.cm, cfg.oracle);
    OracleValues o;
    o.tau = {{to_double(tau.t1.re), to_double(tau.t1.im)},
             {to_double(tau.t2.re), to_double(tau.t2.im)},
             {to_double(tau.t12.re), to_double(tau.t12.im)}};
    double eps = std::pow(10.0, -0.25 * cfg.precision_bits);
    for (auto& xy : even_characteristics()) {
        auto th = siegel_theta<Real>(xy, tau, eps);
        Real n = pet_norm<Real>(th.value, tau, Rational(1, 2));
        if (n == 0) throw InputError("oracle: theta_" + xy.str() + " vanishes at the CM point");
        o.neg_log_pet[xy] = -to_double(Real(log(n)));
    }
    auto rv = rosenhain_numeric<Real>(tau, eps);
    for (int k = 0; k < 3; ++k) o.log_abs_lambda[k] = to_double(Real(log(rv.lambda[k].abs())));
    return o;
}

// ---------------------------------------------------------------- results

struct FormulaResult {
    std::string quantity;
    LogLinear loglinear;
    double float_value = 0;  // C * loglinear when calibrated, else the bare loglinear
    std::optional<double> oracle_value;
    std::optional<double> abs_diff;
    bool calibrated = false;
};

inline std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(12) << x;
    return os.str();
}

inline std::string csv_header() { return "quantity,loglinear,float,oracle,absdiff"; }

inline std::string csv_line(const FormulaResult& r) {
    return r.quantity + "," + r.loglinear.str() + "," + fmt(r.float_value) + "," +
           (r.oracle_value ? fmt(*r.oracle_value) : "") + "," + (r.abs_diff ? fmt(*r.abs_diff) : "");
}

// C_E = (4 / omega_E) |C(T)| / Lambda(0, chi) when every input is configured.
inline std::optional<double> configured_CE(const CMInput& cm) {
    if (!cm.Lambda0chi || *cm.Lambda0chi == 0) return std::nullopt;
    return 4.0 / double(cm.omega_E) * double(cm.cT) / rational_to<double>(*cm.Lambda0chi);
}

struct CalibrationError : InputError {
    using InputError::InputError;
};

// Single constant C with oracle = C * formula on the calibration quantity.
inline double calibrate_constant(double formula, double oracle) {
    if (std::abs(oracle) < 1e-12) throw CalibrationError("calibration: oracle value is ~0; pick a different calibration quantity");
    if (std::abs(formula) < 1e-300) throw CalibrationError("calibration: formula value is 0; pick a different calibration quantity");
    return oracle / formula;
}

}  // namespace cmtheta
