#include "modsym/eigenform.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <omp.h>

namespace modsym {

i128 CurveSpec::discriminant() const {
    const i128 b2 = static_cast<i128>(a1) * a1 + 4 * static_cast<i128>(a2);
    const i128 b4 = 2 * static_cast<i128>(a4) + static_cast<i128>(a1) * a3;
    const i128 b6 = static_cast<i128>(a3) * a3 + 4 * static_cast<i128>(a6);
    const i128 b8 = static_cast<i128>(a1) * a1 * a6 + 4 * static_cast<i128>(a2) * a6 -
                    static_cast<i128>(a1) * a3 * a4 + static_cast<i128>(a2) * a3 * a3 -
                    static_cast<i128>(a4) * a4;
    return -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6;
}

CurveSpec curve_15a1() {
    return {1, 1, 1, -10, -10, 15, "15.a1"};
}

Eigenform::Eigenform(int64_t q, std::vector<int64_t> coeffs) : q_(q), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() < 2 || coeffs_[1] != 1) throw DomainError("Eigenform: a(1) must be 1");
    for (int64_t p : prime_divisors(q)) {
        if (p > n_max()) throw DomainError("Eigenform: coefficients must cover every prime dividing the level");
        al_signs_[p] = coeffs_[p] == -1 ? 1 : -1;
    }
}

Eigenform Eigenform::with_flipped_sign(int64_t p) const {
    Eigenform g = *this;
    auto it = g.al_signs_.find(p);
    if (it == g.al_signs_.end()) throw DomainError("with_flipped_sign: p does not divide the level");
    it->second = -it->second;
    return g;
}

// ---------------------------------------------------------------------------

int64_t TruncationPlan::terms_F(double y) const {
    if (y <= 0) throw TruncationError("terms_F: non-positive height");
    const double twopiy = 2.0 * std::numbers::pi * y;
    const double rhs = tol * std::numbers::pi * -std::expm1(-twopiy);
    auto n = static_cast<int64_t>(std::ceil(-std::log(rhs) / twopiy)) - 1;
    return std::max<int64_t>(n, 1);
}

int64_t TruncationPlan::terms_f(double y) const {
    if (y <= 0) throw TruncationError("terms_f: non-positive height");
    const double twopiy = 2.0 * std::numbers::pi * y;
    const double r = std::exp(-twopiy);
    const double om = -std::expm1(-twopiy);
    auto tail = [&](double n) { return 2.0 * std::exp(-twopiy * (n + 1)) * ((n + 1) - n * r) / (om * om); };
    double n = std::max(1.0, std::ceil(-std::log(tol * om * om / 2.0) / twopiy));
    while (tail(n) >= tol) n = std::ceil(n * 1.05 + 1);
    return static_cast<int64_t>(n);
}

// ---------------------------------------------------------------------------

int64_t count_points(const CurveSpec& e, int64_t p) {
    if (!is_prime(p)) throw DomainError("count_points: p must be prime");
    auto m = [p](int64_t x) { return mod_pos(x, p); };
    const int64_t a1 = m(e.a1), a2 = m(e.a2), a3 = m(e.a3), a4 = m(e.a4), a6 = m(e.a6);
    int64_t affine = 0;
    if (p <= 3) {
        for (int64_t x = 0; x < p; ++x)
            for (int64_t y = 0; y < p; ++y) {
                int64_t lhs = y * y + a1 * x * y + a3 * y;
                int64_t rhs = x * x * x + a2 * x * x + a4 * x + a6;
                if ((lhs - rhs) % p == 0) ++affine;
            }
        return p - affine;
    }
    // (2y + a1 x + a3)^2 = P(x) = 4(x^3 + a2 x^2 + a4 x + a6) + (a1 x + a3)^2,
    // stepped through x = 0..p-1 by forward differences
    std::vector<signed char> chi(static_cast<std::size_t>(p), -1);
    chi[0] = 0;
    for (int64_t t = 1; t <= p / 2; ++t) chi[t * t % p] = 1;
    auto P = [&](int64_t x) {
        const int64_t lin = (a1 * x + a3) % p;
        return (4 * (((x * x % p) * x + a2 * (x * x % p) + a4 * x + a6) % p) + lin * lin) % p;
    };
    const int64_t p0 = P(0), p1 = P(1), p2 = P(2);
    int64_t v = p0;
    int64_t d1 = mod_pos(p1 - p0, p);
    int64_t d2 = mod_pos(p2 - 2 * p1 + p0, p);
    const int64_t d3 = 24 % p;
    int64_t s = 0;
    for (int64_t x = 0; x < p; ++x) {
        s += chi[v];
        v += d1;
        if (v >= p) v -= p;
        d1 += d2;
        if (d1 >= p) d1 -= p;
        d2 += d3;
        if (d2 >= p) d2 -= p;
    }
    return -s;
}

std::vector<int64_t> hecke_extend(const std::map<int64_t, int64_t>& ap, int64_t q, int64_t n_max) {
    if (n_max < 1) throw DomainError("hecke_extend: N_max must be >= 1");
    std::vector<int64_t> spf(static_cast<std::size_t>(n_max) + 1, 0);
    for (int64_t i = 2; i <= n_max; ++i) {
        if (spf[i] != 0) continue;
        for (int64_t j = i; j <= n_max; j += i)
            if (spf[j] == 0) spf[j] = i;
    }
    std::vector<int64_t> a(static_cast<std::size_t>(n_max) + 1, 0);
    a[1] = 1;
    for (int64_t n = 2; n <= n_max; ++n) {
        const int64_t p = spf[n];
        int64_t rest = n;
        while (rest % p == 0) rest /= p;
        if (rest > 1) {
            a[n] = a[n / rest] * a[rest];
            continue;
        }
        if (n == p) {
            auto it = ap.find(p);
            if (it == ap.end()) throw DomainError("hecke_extend: missing a_p for p = " + std::to_string(p));
            a[n] = it->second;
        } else if (q % p == 0) {
            a[n] = a[p] * a[n / p];
        } else {
            a[n] = a[p] * a[n / p] - p * a[n / p / p];
        }
    }
    return a;
}

Eigenform make_eigenform(const CurveSpec& curve, int64_t n_max) {
    if (curve.q <= 1 || !is_squarefree(curve.q)) throw DomainError("curve: conductor must be squarefree and > 1");
    const i128 disc = curve.discriminant();
    if (disc == 0) throw DomainError("curve: singular Weierstrass model");
    for (int64_t p : prime_divisors(curve.q))
        if (disc % p != 0)
            throw DomainError("conductor mismatch: p = " + std::to_string(p) + " divides q but not the discriminant");

    const auto primes = primes_up_to(n_max);
    std::vector<int64_t> ap(primes.size());
    std::vector<int> bad(primes.size(), 0);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t i = 0; i < primes.size(); ++i) {
        const int64_t p = primes[i];
        if (curve.q % p != 0 && disc % p == 0) {
            bad[i] = 1;
            continue;
        }
        ap[i] = count_points(curve, p);
    }
    std::map<int64_t, int64_t> table;
    for (std::size_t i = 0; i < primes.size(); ++i) {
        const int64_t p = primes[i];
        if (bad[i])
            throw DomainError("conductor mismatch: bad reduction at p = " + std::to_string(p) +
                              " which does not divide q (or non-minimal model)");
        if (curve.q % p == 0) {
            if (ap[i] != 1 && ap[i] != -1)
                throw DomainError("conductor mismatch: a_" + std::to_string(p) + " = " + std::to_string(ap[i]) +
                                  " (reduction is not multiplicative)");
        } else if (ap[i] * ap[i] > 4 * p) {
            throw std::logic_error("Hasse bound violated at p = " + std::to_string(p));
        }
        table[p] = ap[i];
    }
    for (int64_t p : prime_divisors(curve.q)) {
        if (p > n_max) table[p] = count_points(curve, p);
    }
    auto coeffs = hecke_extend(table, curve.q, std::max(n_max, prime_divisors(curve.q).back()));
    return Eigenform(curve.q, std::move(coeffs));
}

int al_sign(const Eigenform& f, int64_t d) {
    if (d < 1 || f.level() % d != 0) throw DomainError("al_sign: d must divide q");
    int e = 1;
    for (int64_t p : prime_divisors(d)) e *= f.al_signs().at(p);
    return e;
}

// ---------------------------------------------------------------------------

namespace {

cplx unit_power_base(cplx z) {
    const double x = z.real() - std::floor(z.real());
    return std::polar(std::exp(-2.0 * std::numbers::pi * z.imag()), 2.0 * std::numbers::pi * x);
}

}  // namespace

cplx antiderivative_F(const Eigenform& f, cplx z, const TruncationPlan& plan) {
    if (z.imag() < plan.y_min || z.imag() <= 0)
        throw TruncationError("antiderivative_F: Im z = " + std::to_string(z.imag()) + " below plan floor");
    const int64_t n = plan.terms_F(z.imag());
    if (n > f.n_max())
        throw TruncationError("antiderivative_F: need " + std::to_string(n) + " coefficients, have " +
                              std::to_string(f.n_max()));
    const cplx w = unit_power_base(z);
    cplx pw = w;
    cplx s = 0;
    const auto& a = f.coeffs();
    for (int64_t k = 1; k <= n; ++k) {
        if (a[k] != 0) s += (static_cast<double>(a[k]) / static_cast<double>(k)) * pw;
        pw *= w;
    }
    return s * cplx(0.0, -1.0 / (2.0 * std::numbers::pi));
}

cplx eval_f(const Eigenform& f, cplx z, const TruncationPlan& plan) {
    if (z.imag() < plan.y_min || z.imag() <= 0)
        throw TruncationError("eval_f: Im z below plan floor");
    const int64_t n = plan.terms_f(z.imag());
    if (n > f.n_max()) throw TruncationError("eval_f: not enough coefficients for requested tolerance");
    const cplx w = unit_power_base(z);
    cplx pw = w;
    cplx s = 0;
    const auto& a = f.coeffs();
    for (int64_t k = 1; k <= n; ++k) {
        if (a[k] != 0) s += static_cast<double>(a[k]) * pw;
        pw *= w;
    }
    return s;
}

double lfun1(const Eigenform& f, int64_t cutoff) {
    if (al_sign(f, f.level()) == 1) return 0.0;
    const double r = std::exp(-2.0 * std::numbers::pi / std::sqrt(static_cast<double>(f.level())));
    if (cutoff <= 0) {
        // sum_{n > N} 2 r^n = 2 r^{N+1} / (1 - r) < 1e-15
        cutoff = static_cast<int64_t>(std::ceil(std::log(1e-15 * (1 - r) / 2) / std::log(r)));
    }
    if (cutoff > f.n_max()) throw TruncationError("lfun1: cutoff exceeds available coefficients");
    double s = 0;
    double rn = 1;
    for (int64_t n = 1; n <= cutoff; ++n) {
        rn *= r;
        s += static_cast<double>(f.a(n)) / static_cast<double>(n) * rn;
    }
    return 2.0 * s;
}

// ---------------------------------------------------------------------------

void write_coeff_cache(const std::filesystem::path& path, const Eigenform& f) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "modsym-coeffs v1 q=" << f.level() << " N=" << f.n_max() << '\n';
    for (int64_t n = 1; n <= f.n_max(); ++n) out << n << ' ' << f.a(n) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Eigenform read_coeff_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string header;
    std::getline(in, header);
    long long q = 0, N = 0;
    char tail = 0;
    if (std::sscanf(header.c_str(), "modsym-coeffs v1 q=%lld N=%lld%c", &q, &N, &tail) != 2 || q < 1 || N < 1)
        throw std::runtime_error("malformed coefficient cache header in " + path.string());
    std::vector<int64_t> a(static_cast<std::size_t>(N) + 1, 0);
    for (long long n = 1; n <= N; ++n) {
        long long idx = 0, val = 0;
        if (!(in >> idx >> val) || idx != n) throw std::runtime_error("malformed coefficient cache body in " + path.string());
        a[n] = val;
    }
    return Eigenform(q, std::move(a));
}

}  // namespace modsym
