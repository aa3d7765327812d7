// scanstats.hpp
//
// Enumeration of T_{inf,1/d}(M) = { a/c : c <= M, (c, q) = d, 0 <= a < c,
// (a, c) = 1 } in (c, a) lexicographic order, streaming moment aggregation of
// m(a/c) per denominator, and the reports built on those aggregates.
//
// Values are in the real convention <r> = i m(r). Paper-convention even
// moments are the negatives of the real ones; both are reported.

#pragma once

#include "modsym/periods.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace modsym {

inline constexpr int kMaxMomentDepth = 8;

// Half-open [x0, x1) on R/Z, applied to the representative a/c in [0, 1).
struct Interval {
    double x0 = 0.0;
    double x1 = 1.0;

    bool is_full() const { return x0 <= 0.0 && x1 >= 1.0; }
    bool contains(int64_t a, int64_t c) const {
        const double x = static_cast<double>(a) / static_cast<double>(c);
        return x >= x0 && x < x1;
    }
};

struct ScanSpec {
    int64_t q = 15;
    int64_t M = 100;
    int64_t d_filter = 0;  // 0 = every divisor
    Interval interval;
    int k_max = 4;
    std::vector<int64_t> weyl_modes;

    void validate() const;
    bool accepts_c(int64_t c) const { return d_filter == 0 || gcd64(c, q) == d_filter; }
};

// Calls fn(c, a) for every element of the scan set, c ascending then a
// ascending.
template <typename Fn>
void enumerate(const ScanSpec& spec, Fn&& fn) {
    for (int64_t c = 1; c <= spec.M; ++c) {
        if (!spec.accepts_c(c)) continue;
        for (int64_t a = 0; a < c; ++a)
            if (gcd64(a, c) == 1) fn(c, a);
    }
}

int64_t enumerate_count(const ScanSpec& spec);

struct AggregateRow {
    int64_t c = 0;
    int64_t d = 0;
    int64_t count = 0;                          // phi(c) once complete
    std::array<double, kMaxMomentDepth + 1> S{};   // sum m^k
    int64_t count_in = 0;                       // elements with a/c in the interval
    std::array<double, kMaxMomentDepth + 1> SI{};  // interval-restricted sum m^k
    std::vector<cplx> weyl;                     // sum e(n a/c) per ScanSpec mode

    double mean() const { return S[1] / static_cast<double>(count); }
    double var_real() const {
        const double mu = mean();
        return S[2] / static_cast<double>(count) - mu * mu;
    }

    // Folds one symbol value into the row.
    void add(int64_t a, double m, const ScanSpec& spec);
    // Combines partial rows of the same c over disjoint a-ranges.
    void merge(const AggregateRow& other);
};

// e(k/c) for integer k, reduced exactly.
cplx unit_root(int64_t k, int64_t c);

// OpenMP kernel: contiguous shards of c, rows computed with the table's
// 64-bit fast path. The result does not depend on the shard count.
std::vector<AggregateRow> scan(const ScanSpec& spec, const PeriodTable& table, int shards = 0);

// Serial reference: enumerate() and symbol() through the exact Mat2 route.
std::vector<AggregateRow> scan_reference(const ScanSpec& spec, const PeriodTable& table);

// ---------------------------------------------------------------------------
// Memoised symbol values
// ---------------------------------------------------------------------------

// m(a/c) for every 0 <= a < c <= threshold (unreduced a via the reduced
// fraction); values above the threshold are recomputed on each call.
class SymbolStore {
public:
    SymbolStore(const PeriodTable& table, int64_t threshold);

    int64_t threshold() const { return threshold_; }
    double m(int64_t a, int64_t c) const;

private:
    const PeriodTable* table_;
    int64_t threshold_;
    std::vector<std::size_t> offset_;
    std::vector<double> values_;
};

// m(a/c) for arbitrary a, c >= 1, without memoisation.
double m_value(const PeriodTable& table, int64_t a, int64_t c);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct MeanDecayPoint {
    int64_t c;
    double normalized;  // |E[f,c]| sqrt(c)
};
struct DyadicMax {
    int64_t lo;  // exclusive
    int64_t hi;  // inclusive
    double max;
    double median;
};
struct MeanDecayReport {
    std::vector<MeanDecayPoint> points;
    std::vector<DyadicMax> dyadic;
};
MeanDecayReport mean_decay_report(const std::vector<AggregateRow>& rows);

struct ContigResult {
    std::vector<double> x;
    std::vector<double> avg_real;  // A_M(x), real convention
};
// A_M(x) = (1/M) sum_{c <= M} (1/c) sum_{0 <= a <= floor(c x)} m(a/c), every c.
ContigResult contiguous_avg(const SymbolStore& store, int64_t M, const std::vector<double>& x_grid);
// floor(c x) with ties at integers resolved inclusively.
int64_t floor_cx(int64_t c, double x);

struct WeylEntry {
    int64_t n;
    cplx sum;
    int64_t count;
    double ratio;  // |sum| / count
};
std::vector<WeylEntry> weyl_report(const std::vector<AggregateRow>& rows, const std::vector<int64_t>& modes);

struct FitRow {
    int64_t d;
    int64_t n_rows;
    double weight;             // sum phi(c)
    double fixed_shift_real;   // sum phi (Var_real - c_f log c) / sum phi
    double slope_real;         // weighted least squares in log c (c >= 2)
    double intercept_real;
    double residual_rms;       // weighted rms of the free fit
    double fixed_shift_paper() const { return -fixed_shift_real; }
    double slope_paper() const { return -slope_real; }
    double intercept_paper() const { return -intercept_real; }
};
struct FitResult {
    std::vector<FitRow> rows;  // one per divisor class present
    // common slope with a separate intercept per class (c >= 2)
    double pooled_slope_real = 0;
    double pooled_slope_paper() const { return -pooled_slope_real; }
};
FitResult variance_fit(const std::vector<AggregateRow>& rows, int64_t q, double c_f);

enum class Standardization {
    Slope,        // m / sqrt(c_f log c)
    ShiftedLaw,   // m / sqrt(c_f log c + shift_real)
};

struct DistributionReport {
    int64_t d_filter = 0;
    Interval interval;
    int64_t c_min = 2, c_max = 0;
    int64_t n = 0;
    std::vector<double> bin_edges;
    std::vector<int64_t> bin_counts;
    double ks = 0;
    std::array<double, 7> moments{};  // k = 0..6
};

struct DistributionOptions {
    Standardization mode = Standardization::Slope;
    double c_f = 0;
    double shift_real = 0;  // used by ShiftedLaw
    int bins = 48;
    double range = 6.0;     // histogram over [-range, range]
};

// Standardised sample over c in [2, M] selected by spec.d_filter and
// spec.interval; values computed in parallel over c.
std::vector<double> standardized_sample(const ScanSpec& spec, const PeriodTable& table, const DistributionOptions& opt);
DistributionReport distribution_report(const ScanSpec& spec, const PeriodTable& table, const DistributionOptions& opt);

// One-sample Kolmogorov-Smirnov sup distance to the standard normal; sorts x.
double ks_normal(std::vector<double>& x);
double normal_cdf(double x);

}  // namespace modsym
