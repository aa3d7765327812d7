// Serial reference scan against the OpenMP kernel on 15.a1.

#include "modsym/scanstats.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>

using namespace modsym;

namespace {

template <typename Fn>
double seconds(Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool identical(const std::vector<AggregateRow>& x, const std::vector<AggregateRow>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i].count != y[i].count || std::memcmp(x[i].S.data(), y[i].S.data(), sizeof(x[i].S)) != 0) return false;
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scan benchmark: serial reference vs OpenMP kernel"};
    int64_t M = 3000;
    int reps = 3;
    std::vector<int> shard_counts{1, 4, 16};
    app.add_option("--M", M, "largest denominator");
    app.add_option("--reps", reps, "repetitions per variant (best time is reported)");
    app.add_option("--shards", shard_counts, "shard counts for the parallel kernel");
    CLI11_PARSE(app, argc, argv);

    const Eigenform f = make_eigenform(curve_15a1(), 2000);
    const PeriodTable table = build_period_table(f, TruncationPlan{1e-12, 0.0});
    ScanSpec spec;
    spec.q = 15;
    spec.M = M;
    spec.k_max = 6;
    spec.weyl_modes = {0, 1, 2};
    const int64_t n = enumerate_count(spec);

    std::vector<AggregateRow> ref;
    double best_ref = 1e300;
    for (int r = 0; r < reps; ++r) best_ref = std::min(best_ref, seconds([&] { ref = scan_reference(spec, table); }));
    std::printf("threads %d  M %lld  symbols %lld\n", omp_get_max_threads(), static_cast<long long>(M),
                static_cast<long long>(n));
    std::printf("%-22s %10.4f s  %8.2f Msym/s\n", "serial reference", best_ref, n / best_ref / 1e6);

    bool ok = true;
    for (int shards : shard_counts) {
        std::vector<AggregateRow> rows;
        double best = 1e300;
        for (int r = 0; r < reps; ++r) best = std::min(best, seconds([&] { rows = scan(spec, table, shards); }));
        const bool same = identical(rows, ref);
        ok = ok && same;
        char label[32];
        std::snprintf(label, sizeof label, "openmp shards=%d", shards);
        std::printf("%-22s %10.4f s  %8.2f Msym/s  speedup %5.2fx  %s\n", label, best, n / best / 1e6, best_ref / best,
                    same ? "bitwise equal" : "MISMATCH");
    }
    return ok ? 0 : 1;
}
