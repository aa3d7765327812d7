#include "modsym/periods.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace modsym {

namespace {

int64_t narrow(i128 x, const char* what) {
    if (x > INT64_MAX || x < INT64_MIN) throw OverflowError(std::string(what) + ": entry exceeds 64 bits");
    return static_cast<int64_t>(x);
}

}  // namespace

cplx ExpansionShift::argument() const {
    return {static_cast<double>(m) / static_cast<double>(k2), static_cast<double>(k1) / static_cast<double>(k2)};
}

ExpansionShift cusp_shift(const Mat2& h_in, const Eigenform& f) {
    if (h_in.det() != 1) throw DomainError("cusp_shift: det h must be 1");
    const int64_t q = f.level();
    // f|(-I) = f, so h may be replaced by -h
    const Mat2 h = (h_in.c < 0 || (h_in.c == 0 && h_in.d < 0)) ? -h_in : h_in;
    if (h.c == 0) return {1, 1, 1, 0, q, 1};

    const int64_t alpha = narrow(h.a, "cusp_shift");
    const int64_t gamma = narrow(h.c, "cusp_shift");
    const int64_t d = gcd64(gamma, q);
    const int64_t v = q / d;
    const Mat2 gt = solve_gamma_tilde(alpha, gamma, q);
    const Mat2 w = atkin_lehner_matrix(v, q);
    Mat2 k = w.adjugate() * gt.adjugate() * h;
    if (k.c != 0) throw std::logic_error("cusp_shift: K not upper triangular for h = " + h.str());
    if (k.a < 0) k = -k;
    if (k.a * k.d != v || k.d <= 0) throw std::logic_error("cusp_shift: bad diagonal for h = " + h.str());
    ExpansionShift s;
    s.e = al_sign(f, v);
    s.k1 = static_cast<int64_t>(k.a);
    s.k2 = static_cast<int64_t>(k.d);
    s.m = static_cast<int64_t>(((k.b % k.d) + k.d) % k.d);
    s.d = d;
    s.v = v;
    return s;
}

cplx half_period(const Mat2& h, const Eigenform& f, const TruncationPlan& plan) {
    const ExpansionShift s = cusp_shift(h, f);
    return -static_cast<double>(s.e) * antiderivative_F(f, s.argument(), plan);
}

// ---------------------------------------------------------------------------

PeriodTable::PeriodTable(P1Space space, std::vector<cplx> periods, double tol, int64_t n_terms)
    : space_(std::move(space)), periods_(std::move(periods)), tol_(tol), n_terms_(n_terms) {
    if (periods_.size() != space_.size()) throw DomainError("PeriodTable: one period per P^1 class required");
    re_.reserve(periods_.size());
    for (const auto& w : periods_) re_.push_back(w.real());
}

cplx PeriodTable::path_sum(const Fraction& r) const {
    cplx s = 0;
    for (const Mat2& g : cf_decompose(r)) s += periods_[space_.index_of(g)];
    return s;
}

PeriodTable build_period_table(const Eigenform& f, const TruncationPlan& plan) {
    P1Space space(f.level());
    const std::size_t n = space.size();
    std::vector<cplx> w(n);
    std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < n; ++i) {
        try {
            const Mat2& g = space.lift(i);
            w[i] = half_period(g, f, plan) - half_period(g * Mat2::S(), f, plan);
        } catch (const std::exception& ex) {
            errors[i] = ex.what();
        }
    }
    for (const auto& e : errors)
        if (!e.empty()) throw TruncationError("build_period_table: " + e);
    const int64_t n_terms = plan.terms_F(1.0 / static_cast<double>(f.level()));
    return PeriodTable(std::move(space), std::move(w), plan.tol, n_terms);
}

RelationResiduals manin_residuals(const PeriodTable& t) {
    RelationResiduals r;
    const auto& sp = t.space();
    const Mat2 U = Mat2::U();
    const Mat2 U2 = U * U;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const Mat2& g = sp.lift(i);
        const cplx two = t.period(i) + t.period(sp.index_of(g * Mat2::S()));
        const cplx three = t.period(i) + t.period(sp.index_of(g * U)) + t.period(sp.index_of(g * U2));
        r.two_term = std::max(r.two_term, std::abs(two));
        r.three_term = std::max(r.three_term, std::abs(three));
    }
    return r;
}

SymbolValue symbol(const Fraction& r_in, const PeriodTable& table) {
    const Fraction r = Fraction::reduced(r_in.a, r_in.c);
    SymbolValue v;
    v.r = r;
    v.d = gcd64(r.c, table.level());
    v.period = table.path_sum(r);
    v.m_minus = 2.0 * std::numbers::pi * v.period.real();
    v.m_plus = -2.0 * std::numbers::pi * v.period.imag();
    return v;
}

cplx direct_symbol_oracle(const Fraction& r_in, const Eigenform& f, const TruncationPlan& plan) {
    const Fraction r = r_in.mod1();
    const int64_t q = f.level();
    const int64_t a = r.a, c = r.c;
    if (c > 200) throw DomainError("direct_symbol_oracle: c must be <= 200");
    const int64_t d = gcd64(c, q);
    const int64_t v = q / d;
    const int64_t D = crt_pair(mod_inverse(a, c), c, mod_pos(c / d, v), v);
    const Mat2 wv = atkin_lehner_matrix(v, q);
    const int64_t y = static_cast<int64_t>(wv.b);
    const double height = 1.0 / (static_cast<double>(c) * std::sqrt(static_cast<double>(v)));
    if (plan.terms_F(height) > f.n_max())
        throw TruncationError("direct_symbol_oracle: insufficient height for certified truncation");

    // z* = a/c + i h;  g^-1 z* = -D/c + i/(c^2 h);  K(w) = (w - y)/v
    const cplx zs(static_cast<double>(a) / static_cast<double>(c), height);
    const int64_t num = mod_pos(-(D + y * c), c * v);
    const cplx kw(static_cast<double>(num) / static_cast<double>(c * v),
                  1.0 / (static_cast<double>(c) * static_cast<double>(c) * height * static_cast<double>(v)));
    return antiderivative_F(f, zs, plan) - static_cast<double>(al_sign(f, v)) * antiderivative_F(f, kw, plan);
}

// ---------------------------------------------------------------------------

void write_table_cache(const std::filesystem::path& path, const PeriodTable& t) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot write " + path.string());
    std::fprintf(fp, "modsym-table v1 q=%lld tol=%.17g\n", static_cast<long long>(t.level()), t.tol());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const P1Class& k = t.space().at(i);
        std::fprintf(fp, "%lld:%lld %.17g %.17g\n", static_cast<long long>(k.c), static_cast<long long>(k.d),
                     t.period(i).real(), t.period(i).imag());
    }
    if (std::fclose(fp) != 0) throw std::runtime_error("write failed: " + path.string());
}

PeriodTable read_table_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    long long q = 0;
    double tol = 0;
    if (std::sscanf(line.c_str(), "modsym-table v1 q=%lld tol=%lf", &q, &tol) != 2 || q < 1 || tol <= 0)
        throw std::runtime_error("malformed period table header in " + path.string());
    P1Space space(q);
    std::vector<cplx> w(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (!std::getline(in, line)) throw std::runtime_error("period table truncated: " + path.string());
        long long c = 0, d = 0;
        char re[64] = {0}, im[64] = {0};
        if (std::sscanf(line.c_str(), "%lld:%lld %63s %63s", &c, &d, re, im) != 4 || c != space.at(i).c ||
            d != space.at(i).d)
            throw std::runtime_error("malformed period table entry " + std::to_string(i) + " in " + path.string());
        w[i] = {std::strtod(re, nullptr), std::strtod(im, nullptr)};
    }
    const int64_t n_terms = TruncationPlan{tol, 0.0}.terms_F(1.0 / static_cast<double>(q));
    return PeriodTable(std::move(space), std::move(w), tol, n_terms);
}

}  // namespace modsym
