#include <CLI11.hpp>

#include <cmtheta/cli.hpp>

int main(int argc, char** argv) {
    CLI::App app{"CM values of Siegel theta constants and Rosenhain invariants"};
    cmtheta::CliOptions opt;
    std::string trunc, precision, mode, calibrate, csv;
    app.add_option("--config", opt.config_path, "configuration file")->required();
    auto* t = app.add_option("--trunc", trunc, "q-expansion truncation (rational)");
    auto* p = app.add_option("--precision", precision, "working precision in bits");
    auto* m = app.add_option("--mode", mode, "lambda | theta | verify | dump");
    auto* c = app.add_option("--calibrate", calibrate, "calibrate on theta of this even characteristic");
    auto* o = app.add_option("--csv", csv, "write CSV rows to this path");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    if (*t) opt.trunc = trunc;
    if (*p) opt.precision = precision;
    if (*m) opt.mode = mode;
    if (*c) opt.calibrate = calibrate;
    if (*o) opt.csv_path = csv;
    return cmtheta::run_cli(opt, std::cout, std::cerr);
}
