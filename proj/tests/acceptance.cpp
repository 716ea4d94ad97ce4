#include <cmtheta/checks.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace cmtheta;
    bool verbose = argc > 1 && std::string(argv[1]) == "-v";
    RunConfig cfg = default_run_config();
    int failed = 0;
    for (const CheckResult& r : run_all_checks(cfg)) {
        std::cout << "criterion " << r.id << ": " << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  ("
                  << fmt(r.seconds) << " s)\n";
        if (verbose || !r.pass)
            for (auto& d : r.detail) std::cout << "    " << d << "\n";
        failed += !r.pass;
    }
    std::cout << (10 - failed) << "/10 criteria passed\n";
    return failed == 0 ? 0 : 1;
}
