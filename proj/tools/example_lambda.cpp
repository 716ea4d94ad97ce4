// Minimal library use: load a config, print the Rosenhain formulas from both
// routes and the oracle values.
#include <iostream>

#include <cmtheta/engine.hpp>

int main(int argc, char** argv) {
    using namespace cmtheta;
    if (argc != 2) {
        std::cerr << "usage: example_lambda <config>\n";
        return 2;
    }
    RunConfig cfg = load_config(argv[1]);
    Engine E(cfg);
    OracleValues oracle = compute_oracle(cfg);
    for (int k = 1; k <= 3; ++k) {
        CTResult tab = E.tabulated_lambda(k), ct = E.ct_lambda(k);
        std::cout << "lambda(" << k << ")\n"
                  << "  tabulated  " << tab.value << " + [" << tab.a0_str() << "]\n"
                  << "  ct route   " << ct.value << " + [" << ct.a0_str() << "]\n"
                  << "  log|lambda| at the CM point  " << fmt(oracle.log_abs_lambda[k - 1]) << "\n";
    }
}
