#pragma once

#include <iostream>

#include "checks.hpp"

namespace cmtheta {

struct CliOptions {
    std::string config_path;
    std::optional<std::string> trunc, precision, mode, calibrate;
    std::optional<std::string> csv_path;
};

struct Report {
    std::vector<FormulaResult> rows;
    std::vector<std::string> notes;
    bool failed = false;
};

// How the formula is turned into a number comparable with the oracle.
struct Scaling {
    std::optional<double> C;
    std::string how = "uncalibrated (ratios only)";
};

inline void apply_overrides(RunConfig& cfg, const CliOptions& o) {
    auto wrap = [](const std::string& flag, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            throw ConfigError(flag, 0, e.what());
        }
    };
    if (o.trunc) wrap("--trunc", [&] {
        cfg.trunc = parse_rational(*o.trunc);
        if (cfg.trunc < 1) throw InputError("trunc must be >= 1");
    });
    if (o.precision) wrap("--precision", [&] {
        long b = std::stol(*o.precision);
        if (b < 53 || b > 4096) throw InputError("precision must be in [53, 4096] bits");
        cfg.precision_bits = unsigned(b);
    });
    if (o.mode) wrap("--mode", [&] {
        if (*o.mode != "lambda" && *o.mode != "theta" && *o.mode != "verify" && *o.mode != "dump")
            throw InputError("mode must be lambda, theta, verify or dump");
        cfg.mode = *o.mode;
    });
    if (o.calibrate) wrap("--calibrate", [&] { cfg.calibration_char = parse_calibration(*o.calibrate); });
}

inline Scaling choose_scaling(Engine& E, const OracleValues& oracle) {
    const RunConfig& cfg = E.config();
    Scaling s;
    if (cfg.calibration_char) {
        CharQuadruple xy = *cfg.calibration_char;
        double f = E.tabulated_theta(xy).resolved(cfg.cm).evaluate();
        s.C = calibrate_constant(f, oracle.neg_log_pet.at(xy));
        s.how = "calibrated on theta(" + xy.str() + ")";
    } else if (auto ce = configured_CE(cfg.cm)) {
        s.C = *ce;
        s.how = "C_E from omega_E, |C(T)|, Lambda(0,chi)";
    }
    return s;
}

inline FormulaResult make_row(const std::string& q, const LogLinear& f, const Scaling& s, double oracle) {
    FormulaResult r;
    r.quantity = q;
    r.loglinear = f;
    r.float_value = f.evaluate();
    r.calibrated = s.C.has_value();
    r.oracle_value = oracle;
    r.abs_diff = std::abs((s.C ? *s.C : 1.0) * r.float_value - oracle);
    return r;
}

inline Report run_lambda(Engine& E, const OracleValues& oracle) {
    Report rep;
    Scaling s = choose_scaling(E, oracle);
    rep.notes.push_back("scaling: " + s.how);
    for (int k = 1; k <= 3; ++k) {
        CTResult tab = E.tabulated_lambda(k);
        CTResult ct = E.ct_lambda(k);
        auto cmp = compare_routes(tab, ct, E.config().cm.D);
        if (!cmp.agree)
            rep.notes.push_back("lambda(" + std::to_string(k) + "): CT route differs by " + cmp.value_diff.str() +
                                " + " + cmp.diff.a0_str() + " (full-fiber terms)");
        auto row = make_row("lambda(" + std::to_string(k) + ")", tab.resolved(E.config().cm), s,
                            oracle.log_abs_lambda[k - 1]);
        if (s.C && rel_err(*s.C * row.float_value, *row.oracle_value) > 1e-4) rep.failed = true;
        rep.rows.push_back(row);
    }
    return rep;
}

inline Report run_theta(Engine& E, const OracleValues& oracle) {
    Report rep;
    Scaling s = choose_scaling(E, oracle);
    rep.notes.push_back("scaling: " + s.how);
    for (auto& xy : even_characteristics()) {
        CTResult tab = E.tabulated_theta(xy);
        auto row = make_row("theta(" + xy.str() + ")", tab.resolved(E.config().cm), s, oracle.neg_log_pet.at(xy));
        if (s.C && rel_err(*s.C * row.float_value, *row.oracle_value) > 1e-4) rep.failed = true;
        rep.rows.push_back(row);
    }
    return rep;
}

inline void print_table(std::ostream& os, const Report& rep) {
    os << std::left << std::setw(14) << "quantity" << std::setw(44) << "formula" << std::setw(18) << "value"
       << std::setw(18) << "oracle" << "abs diff\n";
    for (auto& r : rep.rows)
        os << std::setw(14) << r.quantity << std::setw(44) << r.loglinear.str() << std::setw(18) << fmt(r.float_value)
           << std::setw(18) << (r.oracle_value ? fmt(*r.oracle_value) : "-") << (r.abs_diff ? fmt(*r.abs_diff) : "-")
           << "\n";
    for (auto& n : rep.notes) os << "note: " << n << "\n";
}

inline std::string csv_text(const Report& rep) {
    std::string s = csv_header() + "\n";
    for (auto& r : rep.rows) s += csv_line(r) + "\n";
    return s;
}

inline int run_verify(const RunConfig& cfg, std::ostream& out) {
    std::vector<CheckResult> res = {check_series(), check_weil(), check_tables(), check_geometry(),
                                    check_theta(), check_lattices(), check_eisenstein(cfg.cm)};
    bool ok = true;
    for (auto& r : res) {
        out << (r.pass ? "ok   " : "FAIL ") << r.name << " (" << fmt(r.seconds) << " s)\n";
        for (auto& d : r.detail) out << "       " << d << "\n";
        ok = ok && r.pass;
    }
    return ok ? 0 : 1;
}

inline int run_dump(Engine& E, std::ostream& out) {
    const RunConfig& cfg = E.config();
    out << dump_tables(cfg.trunc);
    const UVW& b = uvw_cached(cfg.trunc);
    out << "u = " << b.u.serialize() << "\nv = " << b.v.serialize() << "\nw = " << b.w.serialize() << "\n";
    for (auto& row : route_rows(E)) {
        out << row.quantity << ": tabulated " << row.tab.value.str() << " + [" << row.tab.a0_str() << "]; ct "
            << row.ct.value.str() << " + [" << row.ct.a0_str() << "]\n";
    }
    return 0;
}

// Returns the process exit code: 0 ok, 1 failed check, 2 configuration error.
inline int run_cli(const CliOptions& opt, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_config(opt.config_path);
        apply_overrides(cfg, opt);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    if (cfg.cm.cT != 1)
        err << "warning: |C(T)| = " << cfg.cm.cT << " > 1; the oracle evaluates a single orbit point\n";
    try {
        if (cfg.mode == "verify") return run_verify(cfg, out);
        Engine E(cfg);
        if (cfg.mode == "dump") return run_dump(E, out);
        OracleValues oracle = compute_oracle(cfg);
        Report rep = cfg.mode == "lambda" ? run_lambda(E, oracle) : run_theta(E, oracle);
        print_table(out, rep);
        std::string csv = csv_text(rep);
        if (opt.csv_path) {
            std::ofstream f(*opt.csv_path);
            if (!f) {
                err << "error: cannot write " << *opt.csv_path << "\n";
                return 2;
            }
            f << csv;
        } else {
            out << csv;
        }
        return rep.failed ? 1 : 0;
    } catch (const A0MissingError& e) {
        err << "error: " << e.what() << "; supply a0(...) overrides in the config\n";
        return 2;
    } catch (const CalibrationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace cmtheta
