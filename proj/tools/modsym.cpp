// modsym: modular symbol tables, scans and statistical reports.

#include "modsym/shell.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

using namespace modsym;

int main(int argc, char** argv) {
    CLI::App app{"Modular symbols of weight-2 newforms of squarefree level"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", kVersion);

    std::string config_path;
    app.add_option("--config", config_path, "key=value configuration file; flags override it");

    // Flags mapped onto configuration keys.
    std::map<std::string, std::string> values;
    const std::vector<std::pair<std::string, std::string>> flags = {
        {"--q", "q"},
        {"--curve", "curve"},
        {"--label", "label"},
        {"--M", "M"},
        {"--d", "d"},
        {"--interval", "interval"},
        {"--k-max", "k_max"},
        {"--weyl", "weyl"},
        {"--tol", "tol"},
        {"--memo", "memo_threshold"},
        {"--shards", "shards"},
        {"--N", "N"},
        {"--cache-dir", "cache_dir"},
        {"--out-dir", "out_dir"},
        {"--fixture", "fixture"},
        {"--seed", "seed"},
        {"--standardize", "standardize"},
        {"--flip-al-sign", "flip_al_sign"},
    };
    const std::map<std::string, std::string> help = {
        {"q", "level (squarefree)"},
        {"curve", "Weierstrass coefficients a1,a2,a3,a4,a6"},
        {"label", "curve label used in reports"},
        {"M", "largest denominator"},
        {"d", "restrict to gcd(c, q) = d (0 or 'all' for every class)"},
        {"interval", "x0:x1, half-open subinterval of [0, 1)"},
        {"k_max", "moment depth of the aggregates"},
        {"weyl", "comma-separated Weyl modes"},
        {"tol", "truncation tolerance"},
        {"memo_threshold", "memoise symbol values for c up to this bound"},
        {"shards", "scan shards (0: one per thread)"},
        {"N", "number of Fourier coefficients"},
        {"cache_dir", "cache directory"},
        {"out_dir", "report directory"},
        {"fixture", "L-value fixture file"},
        {"seed", "seed for sampled checks"},
        {"standardize", "slope or shifted"},
        {"flip_al_sign", "diagnostic: flip the Atkin-Lehner sign at this prime"},
    };
    for (const auto& [flag, key] : flags) app.add_option(flag, values[key], help.at(key));
    bool paper_sign = false;
    app.add_flag("--paper-sign", paper_sign, "show paper-convention values first");

    auto* coeffs = app.add_subcommand("coeffs", "build or refresh the coefficient cache");
    auto* table = app.add_subcommand("table", "build the period table and report relation residuals");
    auto* symbol = app.add_subcommand("symbol", "print the symbol of a/c");
    int64_t sa = 0, sc = 1;
    symbol->add_option("a", sa, "numerator")->required();
    symbol->add_option("c", sc, "denominator")->required();
    auto* scan = app.add_subcommand("scan", "moment aggregates per denominator (aggregates.csv)");
    auto* fit = app.add_subcommand("fit", "variance slope and shift fit (fit.csv)");
    auto* dist = app.add_subcommand("dist", "standardised distribution (dist.csv)");
    auto* contig = app.add_subcommand("contig", "contiguous averages against the limit profile (contig.csv)");
    auto* weyl = app.add_subcommand("weyl", "Weyl sums (weyl.csv)");
    auto* theory = app.add_subcommand("theory", "closed-form constants as JSON");
    auto* verify = app.add_subcommand("verify", "run every gate and emit a JSON verdict");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    return guarded(std::cerr, [&]() -> int {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_config_file(config_path, cfg);
        for (const auto& [flag, key] : flags)
            if (app.count(flag) > 0) cfg.set(key, values[key]);
        if (paper_sign) cfg.paper_sign = true;
        // verify reports an infeasible tolerance itself
        if (!verify->parsed()) cfg.validate();

        std::ostream& out = std::cout;
        std::ostream& log = std::cerr;
        if (coeffs->parsed()) return cmd_coeffs(cfg, out, log);
        if (table->parsed()) return cmd_table(cfg, out, log);
        if (symbol->parsed()) return cmd_symbol(cfg, sa, sc, out, log);
        if (scan->parsed()) return cmd_scan(cfg, out, log);
        if (fit->parsed()) return cmd_fit(cfg, out, log);
        if (dist->parsed()) return cmd_dist(cfg, out, log);
        if (contig->parsed()) return cmd_contig(cfg, out, log);
        if (weyl->parsed()) return cmd_weyl(cfg, out, log);
        if (theory->parsed()) return cmd_theory(cfg, out, log);
        return cmd_verify(cfg, out, log);
    });
}
