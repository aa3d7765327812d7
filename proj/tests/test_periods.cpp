#include "common.hpp"
#include "modsym/periods.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

using namespace modsym;
using testing15::form;
using testing15::table;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Fraction random_fraction(std::mt19937_64& rng, int64_t c_max) {
    const int64_t c = std::uniform_int_distribution<int64_t>(1, c_max)(rng);
    int64_t a = std::uniform_int_distribution<int64_t>(0, c - 1)(rng);
    while (gcd64(a, c) != 1) a = (a + 1) % c;
    return {a, c};
}

}  // namespace

TEST_CASE("cusp_shift") {
    const auto& f = form();
    const ExpansionShift id = cusp_shift(Mat2::identity(), f);
    CHECK(id.e == 1);
    CHECK(id.k1 == 1);
    CHECK(id.k2 == 1);
    CHECK(id.m == 0);

    const ExpansionShift s = cusp_shift(Mat2::S(), f);
    CHECK(s.e == al_sign(f, 15));
    CHECK(s.k1 == 1);
    CHECK(s.k2 == 15);
    CHECK(s.m == 0);

    const P1Space space(15);
    for (std::size_t j = 0; j < space.size(); ++j) {
        const Mat2& g = space.lift(j);
        const ExpansionShift x = cusp_shift(g, f);
        const int64_t v = 15 / gcd64(static_cast<int64_t>(g.c), 15);
        REQUIRE(x.k1 * x.k2 == v);
        REQUIRE(x.v == v);
        REQUIRE(x.m >= 0);
        REQUIRE(x.m < x.k2);
        REQUIRE(x.e == al_sign(f, v));
    }
}

TEST_CASE("period table relations") {
    const auto& t = table();
    CHECK(t.size() == 24);
    const auto r = manin_residuals(t);
    CHECK(r.two_term < 2e-12);
    CHECK(r.three_term < 3e-12);
}

TEST_CASE("Birch-Stevens at r = 0") {
    const SymbolValue s = symbol(Fraction{0, 1}, table());
    CHECK(std::abs(s.m_minus) < 1e-12);
    CHECK(std::abs(s.m_plus - lfun1(form())) < 1e-8);
    CHECK(s.d == 1);
}

TEST_CASE("periodicity, reduction and the fast path") {
    const auto& t = table();
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i) {
        const Fraction r = random_fraction(rng, 1000000);
        const cplx p = t.path_sum(r);
        const cplx p1 = t.path_sum(Fraction{r.a + r.c, r.c});
        const cplx pm = t.path_sum(Fraction{r.a - 3 * r.c, r.c});
        REQUIRE(std::abs(p - p1) < 1e-12);
        REQUIRE(std::abs(p - pm) < 1e-12);
        const double fast = t.real_sum(r.a, r.c);
        const double slow = p.real();
        REQUIRE(std::memcmp(&fast, &slow, sizeof(double)) == 0);
    }
    CHECK(symbol(Fraction{1, 2}, t).m_minus == symbol(Fraction::reduced(3, 2).mod1(), t).m_minus);
}

TEST_CASE("Hecke identity for p = 2, 7") {
    const auto& t = table();
    const auto& f = form();
    std::mt19937_64 rng(20240601);
    for (int64_t p : {2, 7}) {
        double worst = 0;
        for (int i = 0; i < 100; ++i) {
            const Fraction r = random_fraction(rng, 1000000);
            cplx rhs = t.path_sum(Fraction::reduced(r.a * p, r.c));
            for (int64_t b = 0; b < p; ++b) rhs += t.path_sum(Fraction::reduced(r.a + b * r.c, r.c * p));
            worst = std::max(worst, kTwoPi * std::abs(static_cast<double>(f.a(p)) * t.path_sum(r) - rhs));
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("direct single-split oracle") {
    const auto& t = table();
    const auto& f = form();
    const TruncationPlan plan{1e-13, 0.0};
    CHECK(std::abs(direct_symbol_oracle(Fraction{0, 1}, f, plan) - t.path_sum(Fraction{0, 1})) * kTwoPi < 1e-10);

    std::mt19937_64 rng(99);
    double worst = 0;
    int per_d[16] = {};
    for (int i = 0; i < 50; ++i) {
        const Fraction r = random_fraction(rng, 100);
        ++per_d[gcd64(r.c, 15)];
        worst = std::max(worst, kTwoPi * std::abs(direct_symbol_oracle(r, f, plan) - t.path_sum(r)));
    }
    CHECK(worst < 1e-8);
    // every cusp class, including gcd(c, 15) = 3 and 5
    for (const Fraction r : {Fraction{1, 3}, Fraction{2, 9}, Fraction{7, 12}, Fraction{1, 5}, Fraction{3, 10},
                             Fraction{4, 25}, Fraction{1, 15}, Fraction{7, 30}, Fraction{13, 90}, Fraction{1, 7}}) {
        INFO("r = " << r.a << "/" << r.c);
        CHECK(kTwoPi * std::abs(direct_symbol_oracle(r, f, plan) - t.path_sum(r)) < 1e-8);
    }
    CHECK_THROWS_AS(direct_symbol_oracle(Fraction{1, 201}, f, plan), DomainError);
}

TEST_CASE("table cache") {
    const auto& t = table();
    const auto dir = std::filesystem::temp_directory_path() / "modsym_test_table";
    std::filesystem::create_directories(dir);
    const auto path = dir / "t.txt";
    write_table_cache(path, t);
    const PeriodTable u = read_table_cache(path);
    REQUIRE(u.size() == t.size());
    CHECK(u.tol() == t.tol());
    for (std::size_t i = 0; i < t.size(); ++i) {
        REQUIRE(std::memcmp(&u.period(i), &t.period(i), sizeof(cplx)) == 0);
    }

    // tamper with one entry: the relation residuals expose it
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    in.close();
    std::string text = ss.str();
    const auto line2 = text.find('\n', text.find('\n') + 1) + 1;
    const auto sp = text.find(' ', line2);
    text.replace(sp + 1, text.find(' ', sp + 1) - sp - 1, "0.5");
    std::ofstream(path) << text;
    const PeriodTable bad = read_table_cache(path);
    const auto r = manin_residuals(bad);
    CHECK(std::max(r.two_term, r.three_term) > 1e-3);

    std::ofstream(path) << "modsym-table v1 q=15 tol=1e-12\n0:1 0 0\n";
    CHECK_THROWS(read_table_cache(path));
    std::filesystem::remove_all(dir);
}
