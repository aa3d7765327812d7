// shell.hpp
//
// Run configuration, caches and the report commands behind the modsym CLI.
// Configuration is a flat key=value text file; command-line flags override
// file values. Every output carries the code version and a fingerprint of
// the effective configuration.

#pragma once

#include "modsym/periods.hpp"
#include "modsym/scanstats.hpp"
#include "modsym/theory.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace modsym {

inline constexpr const char* kVersion = "0.1.0";

// Below this the truncation certificates cannot be met in double precision.
inline constexpr double kMinTol = 1e-15;

enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 2,
    kExitGate = 3,
};

// A verification gate tripped (relation residual, oracle mismatch, ...).
struct GateFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    CurveSpec curve = curve_15a1();
    int64_t M = 1000;
    int64_t d_filter = 0;  // 0 = all
    Interval interval;
    int k_max = 6;
    std::vector<int64_t> weyl_modes{0, 1, 2, 3, 4, 5};
    double tol = 1e-12;
    int64_t memo_threshold = 4096;
    int shards = 0;
    int64_t n_max = 100000;
    std::filesystem::path cache_dir = ".modsym-cache";
    std::filesystem::path out_dir = ".";
    std::optional<std::filesystem::path> fixture;
    uint64_t seed = 20240601;
    bool paper_sign = false;
    Standardization standardization = Standardization::Slope;
    int64_t flip_al_sign = 0;  // diagnostic: flip e_{f,p} for this p

    // Sets one key from its text form; throws DomainError on bad input.
    void set(const std::string& key, const std::string& value);
    void validate() const;
    std::string canonical() const;
    std::string fingerprint() const;  // 16 hex digits
    ScanSpec scan_spec() const;
};

RunConfig parse_config_text(const std::string& text, RunConfig base = {});
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = {});

// Header comment line embedded in every report.
std::string report_banner(const RunConfig& cfg, const std::string& what);

// Loads the coefficient cache for cfg.curve or rebuilds it. A corrupted cache
// is regenerated with a warning on `log`.
Eigenform load_or_build_eigenform(const RunConfig& cfg, std::ostream& log);
// Same for the period table. The Manin relation gate (residuals <= 10 tol) is
// applied both before persisting and after loading.
PeriodTable load_or_build_table(const RunConfig& cfg, const Eigenform& f, std::ostream& log);

std::filesystem::path coeff_cache_path(const RunConfig& cfg);
std::filesystem::path table_cache_path(const RunConfig& cfg);

// c_f from the fixture when given, otherwise from the Petersson quadrature.
TheoryConstants theory_for(const RunConfig& cfg, const Eigenform& f);

struct Gate {
    std::string name;
    std::string module;
    double residual = 0;
    double threshold = 0;
    bool pass = false;
    std::string note;
};
struct VerifyReport {
    std::vector<Gate> gates;
    bool pass() const;
    std::string to_json(const RunConfig& cfg) const;
};
VerifyReport run_gates(const RunConfig& cfg, const Eigenform& f, const PeriodTable& table, std::ostream& log);

// Subcommands. Each returns an ExitCode; CSV files go to cfg.out_dir.
int cmd_coeffs(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_table(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_symbol(const RunConfig& cfg, int64_t a, int64_t c, std::ostream& out, std::ostream& log);
int cmd_scan(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_dist(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_contig(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_weyl(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_theory(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& log);

// Runs `fn`, mapping GateFailure to kExitGate and input, IO and truncation
// errors to kExitValidation, with a message on `log`.
template <typename Fn>
int guarded(std::ostream& log, Fn&& fn) {
    try {
        return fn();
    } catch (const GateFailure& e) {
        log << "gate failure: " << e.what() << '\n';
        return kExitGate;
    } catch (const DomainError& e) {
        log << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const TruncationError& e) {
        log << "infeasible: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::runtime_error& e) {
        log << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}

// %.17g
std::string fmt17(double x);

}  // namespace modsym
