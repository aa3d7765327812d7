#include "common.hpp"
#include "modsym/scanstats.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>

using namespace modsym;
using testing15::table;

namespace {

bool same_bits(double x, double y) { return std::memcmp(&x, &y, sizeof x) == 0; }

void require_rows_identical(const std::vector<AggregateRow>& x, const std::vector<AggregateRow>& y) {
    REQUIRE(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        REQUIRE(x[i].c == y[i].c);
        REQUIRE(x[i].count == y[i].count);
        REQUIRE(x[i].count_in == y[i].count_in);
        for (int k = 0; k <= kMaxMomentDepth; ++k) {
            REQUIRE(same_bits(x[i].S[k], y[i].S[k]));
            REQUIRE(same_bits(x[i].SI[k], y[i].SI[k]));
        }
        REQUIRE(x[i].weyl.size() == y[i].weyl.size());
        for (std::size_t j = 0; j < x[i].weyl.size(); ++j) {
            REQUIRE(same_bits(x[i].weyl[j].real(), y[i].weyl[j].real()));
            REQUIRE(same_bits(x[i].weyl[j].imag(), y[i].weyl[j].imag()));
        }
    }
}

ScanSpec spec15(int64_t M, int64_t d = 0) {
    ScanSpec s;
    s.q = 15;
    s.M = M;
    s.d_filter = d;
    s.k_max = 6;
    return s;
}

}  // namespace

TEST_CASE("enumerate") {
    std::vector<std::pair<int64_t, int64_t>> got;
    enumerate(spec15(5, 1), [&](int64_t c, int64_t a) { got.emplace_back(c, a); });
    CHECK(got == std::vector<std::pair<int64_t, int64_t>>{{1, 0}, {2, 1}, {4, 1}, {4, 3}});

    const auto phi = totients_up_to(300);
    int64_t total = 0;
    for (int64_t c = 1; c <= 300; ++c) total += phi[c];
    CHECK(enumerate_count(spec15(300)) == total);

    int64_t brute = 0;
    for (int64_t c = 1; c <= 100; ++c)
        for (int64_t a = 0; a < c; ++a)
            if (gcd64(c, 15) == 1 && gcd64(a, c) == 1) ++brute;
    CHECK(enumerate_count(spec15(100, 1)) == brute);

    ScanSpec bad = spec15(10);
    bad.interval = {0.5, 0.2};
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = spec15(10, 4);
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("scan basics") {
    const auto rows = scan(spec15(1), table());
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].c == 1);
    CHECK(rows[0].count == 1);
    CHECK(rows[0].S[1] == 0.0);

    const auto more = scan(spec15(200), table());
    const auto phi = totients_up_to(200);
    for (const auto& r : more) {
        REQUIRE(r.count == phi[r.c]);
        const double n = static_cast<double>(r.count);
        REQUIRE(r.var_real() == doctest::Approx(r.S[2] / n - (r.S[1] / n) * (r.S[1] / n)));
        REQUIRE(r.var_real() >= 0.0);
    }
}

TEST_CASE("odd symmetry m(-r) = -m(r)") {
    const auto& t = table();
    for (int64_t c = 2; c <= 400; ++c)
        for (int64_t a = 1; a < c; ++a)
            if (gcd64(a, c) == 1) REQUIRE(std::abs(m_value(t, c - a, c) + m_value(t, a, c)) < 1e-11);
}

TEST_CASE("parallel scan matches the serial reference bitwise") {
    ScanSpec s = spec15(400);
    s.k_max = 8;
    s.interval = {0.1, 0.35};
    s.weyl_modes = {0, 1, -1, 2, 5};
    const auto ref = scan_reference(s, table());
    require_rows_identical(scan(s, table(), 0), ref);
    require_rows_identical(scan(s, table(), 1), ref);
    require_rows_identical(scan(s, table(), 8), ref);
    require_rows_identical(scan(s, table(), 1), scan(s, table(), 8));
    s.d_filter = 5;
    require_rows_identical(scan(s, table(), 3), scan_reference(s, table()));
}

TEST_CASE("merge folds disjoint a-ranges") {
    const ScanSpec s = spec15(97);
    AggregateRow full, lo, hi;
    full.c = lo.c = hi.c = 97;
    full.d = lo.d = hi.d = 1;
    for (int64_t a = 1; a < 97; ++a) {
        const double m = m_value(table(), a, 97);
        full.add(a, m, s);
        (a < 40 ? lo : hi).add(a, m, s);
    }
    lo.merge(hi);
    CHECK(lo.count == full.count);
    for (int k = 0; k <= s.k_max; ++k) CHECK(lo.S[k] == doctest::Approx(full.S[k]).epsilon(1e-12));
    AggregateRow other;
    other.c = 96;
    CHECK_THROWS_AS(lo.merge(other), DomainError);
}

TEST_CASE("SymbolStore") {
    const auto& t = table();
    const SymbolStore memo(t, 300), none(t, 0);
    for (int64_t c = 1; c <= 400; c += 7)
        for (int64_t a = 0; a < c; ++a) REQUIRE(same_bits(memo.m(a, c), none.m(a, c)));
    CHECK(memo.m(2, 4) == memo.m(1, 2));
    CHECK(memo.m(10, 15) == memo.m(2, 3));
}

TEST_CASE("Weyl sums") {
    ScanSpec s = spec15(300, 1);
    s.weyl_modes = {0, 1, -1, 3, -3};
    const auto rows = scan(s, table());
    const auto w = weyl_report(rows, s.weyl_modes);
    REQUIRE(w.size() == 5);
    CHECK(w[0].sum.real() == static_cast<double>(enumerate_count(s)));
    CHECK(w[0].ratio == 1.0);
    CHECK(std::abs(w[1].sum - std::conj(w[2].sum)) < 1e-9);
    CHECK(std::abs(w[3].sum - std::conj(w[4].sum)) < 1e-9);
    CHECK(std::abs(unit_root(3, 12) - cplx(0, 1)) < 1e-15);
}

TEST_CASE("contiguous averages") {
    CHECK(floor_cx(10, 0.3) == 3);
    CHECK(floor_cx(7, 1.0) == 7);
    CHECK(floor_cx(7, 0.0) == 0);
    const SymbolStore store(table(), 200);
    const auto res = contiguous_avg(store, 200, {0.0, 0.5, 1.0});
    CHECK(res.avg_real[0] == 0.0);
    CHECK(std::isfinite(res.avg_real[2]));
    CHECK_THROWS_AS(contiguous_avg(store, 10, {1.5}), DomainError);
}

TEST_CASE("mean decay report") {
    const auto rows = scan(spec15(600), table());
    const auto rep = mean_decay_report(rows);
    REQUIRE(!rep.points.empty());
    CHECK(rep.points[0].c == 1);
    CHECK(rep.points[0].normalized == 0.0);
}

TEST_CASE("variance fit on synthetic rows") {
    const double c_f = 0.3558, D = 0.44;
    std::vector<AggregateRow> rows;
    const auto phi = totients_up_to(2000);
    for (int64_t c = 1; c <= 2000; ++c) {
        AggregateRow r;
        r.c = c;
        r.d = gcd64(c, 15);
        r.count = phi[c];
        const double n = static_cast<double>(r.count);
        const double shift = D + 0.01 * static_cast<double>(r.d);
        r.S[0] = n;
        r.S[2] = n * (c_f * std::log(static_cast<double>(c)) + shift);
        rows.push_back(r);
    }
    const FitResult fit = variance_fit(rows, 15, c_f);
    REQUIRE(fit.rows.size() == 4);
    for (const auto& fr : fit.rows) {
        const double shift = D + 0.01 * static_cast<double>(fr.d);
        CHECK(fr.fixed_shift_real == doctest::Approx(shift).epsilon(1e-13));
        CHECK(fr.slope_real == doctest::Approx(c_f).epsilon(1e-10));
        CHECK(fr.intercept_real == doctest::Approx(shift).epsilon(1e-10));
        CHECK(fr.fixed_shift_paper() == -fr.fixed_shift_real);
    }
    CHECK(fit.pooled_slope_real == doctest::Approx(c_f).epsilon(1e-10));
}

TEST_CASE("normal helpers and distribution report") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021).epsilon(1e-6));
    std::vector<double> x;
    for (int i = 1; i < 2000; ++i) {
        // inverse cdf by bisection
        double lo = -10, hi = 10, p = i / 2000.0;
        for (int it = 0; it < 80; ++it) (normal_cdf(0.5 * (lo + hi)) < p ? lo : hi) = 0.5 * (lo + hi);
        x.push_back(0.5 * (lo + hi));
    }
    CHECK(ks_normal(x) < 1e-3);

    ScanSpec s = spec15(300, 1);
    DistributionOptions opt;
    opt.c_f = 0.35582;
    const DistributionReport rep = distribution_report(s, table(), opt);
    int64_t total = 0;
    for (auto n : rep.bin_counts) total += n;
    CHECK(total == rep.n);
    CHECK(rep.moments[0] == doctest::Approx(1.0));
    CHECK(std::abs(rep.moments[1]) < 1e-9);
    CHECK(rep.bin_edges.front() == -INFINITY);
    opt.c_f = 0;
    CHECK_THROWS_AS(distribution_report(s, table(), opt), DomainError);
}
