#include "modsym/exactmath.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>

namespace modsym {

int64_t gcd64(int64_t a, int64_t b) {
    return std::gcd(a, b);
}

int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

int64_t mod_pos(int64_t a, int64_t m) {
    int64_t r = a % m;
    return r < 0 ? r + m : r;
}

namespace {

// Returns g = gcd(a, b) >= 0 and x, y with a*x + b*y = g.
i128 ext_gcd(i128 a, i128 b, i128& x, i128& y) {
    i128 x0 = 1, y0 = 0, x1 = 0, y1 = 1;
    while (b != 0) {
        i128 t = a / b;
        i128 r = a - t * b;
        a = b;
        b = r;
        i128 nx = x0 - t * x1;
        i128 ny = y0 - t * y1;
        x0 = x1;
        y0 = y1;
        x1 = nx;
        y1 = ny;
    }
    if (a < 0) {
        a = -a;
        x0 = -x0;
        y0 = -y0;
    }
    x = x0;
    y = y0;
    return a;
}

i128 mod_pos128(i128 a, i128 m) {
    i128 r = a % m;
    return r < 0 ? r + m : r;
}

}  // namespace

int64_t mod_inverse(int64_t a, int64_t m) {
    if (m < 1) throw DomainError("mod_inverse: modulus must be >= 1");
    if (m == 1) return 0;
    i128 x, y;
    i128 g = ext_gcd(mod_pos(a, m), m, x, y);
    if (g != 1) throw DomainError("mod_inverse: " + std::to_string(a) + " not invertible mod " + std::to_string(m));
    return static_cast<int64_t>(mod_pos128(x, m));
}

int64_t crt_pair(int64_t r1, int64_t m1, int64_t r2, int64_t m2) {
    if (gcd64(m1, m2) != 1) throw DomainError("crt_pair: moduli not coprime");
    // x = r1 + m1 * t, m1 * t = r2 - r1 (mod m2)
    i128 t = mod_pos128(static_cast<i128>(r2 - r1) * mod_inverse(m1, m2), m2);
    i128 x = mod_pos128(static_cast<i128>(r1) + static_cast<i128>(m1) * t, static_cast<i128>(m1) * m2);
    if (x > INT64_MAX) throw OverflowError("crt_pair: result exceeds 64 bits");
    return static_cast<int64_t>(x);
}

std::vector<int64_t> factorize(int64_t n) {
    if (n < 1) throw DomainError("factorize: n must be positive");
    std::vector<int64_t> out;
    for (int64_t p = 2; p * p <= n; ++p) {
        while (n % p == 0) {
            out.push_back(p);
            n /= p;
        }
    }
    if (n > 1) out.push_back(n);
    return out;
}

std::vector<int64_t> prime_divisors(int64_t n) {
    auto f = factorize(n);
    f.erase(std::unique(f.begin(), f.end()), f.end());
    return f;
}

std::vector<int64_t> divisors(int64_t n) {
    std::vector<int64_t> out{1};
    auto f = factorize(n);
    std::size_t i = 0;
    while (i < f.size()) {
        int64_t p = f[i];
        int mult = 0;
        while (i < f.size() && f[i] == p) {
            ++mult;
            ++i;
        }
        std::size_t base = out.size();
        int64_t pk = 1;
        for (int k = 1; k <= mult; ++k) {
            pk *= p;
            for (std::size_t j = 0; j < base; ++j) out.push_back(out[j] * pk);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool is_squarefree(int64_t n) {
    auto f = factorize(n);
    return std::adjacent_find(f.begin(), f.end()) == f.end();
}

bool is_prime(int64_t n) {
    if (n < 2) return false;
    for (int64_t p = 2; p * p <= n; ++p)
        if (n % p == 0) return false;
    return true;
}

std::vector<int64_t> primes_up_to(int64_t n) {
    std::vector<int64_t> out;
    if (n < 2) return out;
    std::vector<bool> composite(static_cast<std::size_t>(n) + 1, false);
    for (int64_t i = 2; i <= n; ++i) {
        if (composite[i]) continue;
        out.push_back(i);
        for (int64_t j = i * i; j <= n; j += i) composite[j] = true;
    }
    return out;
}

std::vector<int64_t> totients_up_to(int64_t n) {
    std::vector<int64_t> phi(static_cast<std::size_t>(std::max<int64_t>(n, 0)) + 1);
    std::iota(phi.begin(), phi.end(), 0);
    for (int64_t i = 2; i <= n; ++i) {
        if (phi[i] != i) continue;
        for (int64_t j = i; j <= n; j += i) phi[j] -= phi[j] / i;
    }
    return phi;
}

std::string to_string(i128 x) {
    if (x == 0) return "0";
    bool neg = x < 0;
    std::string s;
    // works for INT128_MIN since each digit is taken from a negative remainder
    while (x != 0) {
        int digit = static_cast<int>(x % 10);
        s.push_back(static_cast<char>('0' + std::abs(digit)));
        x /= 10;
    }
    if (neg) s.push_back('-');
    std::reverse(s.begin(), s.end());
    return s;
}

// ---------------------------------------------------------------------------

Fraction Fraction::reduced(int64_t a, int64_t c) {
    if (c == 0) throw DomainError("Fraction: zero denominator");
    if (c < 0) {
        a = -a;
        c = -c;
    }
    int64_t g = gcd64(a, c);
    return {a / g, c / g};
}

Fraction Fraction::mod1() const {
    Fraction r = reduced(a, c);
    return {mod_pos(r.a, r.c), r.c};
}

// ---------------------------------------------------------------------------

i128 checked_mul(i128 x, i128 y) {
    i128 r;
    if (__builtin_mul_overflow(x, y, &r)) throw OverflowError("Mat2: 128-bit multiplication overflow");
    return r;
}

i128 checked_add(i128 x, i128 y) {
    i128 r;
    if (__builtin_add_overflow(x, y, &r)) throw OverflowError("Mat2: 128-bit addition overflow");
    return r;
}

i128 Mat2::det() const {
    return checked_add(checked_mul(a, d), -checked_mul(b, c));
}

Mat2 Mat2::adjugate() const {
    return {d, -b, -c, a};
}

Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {checked_add(checked_mul(x.a, y.a), checked_mul(x.b, y.c)),
            checked_add(checked_mul(x.a, y.b), checked_mul(x.b, y.d)),
            checked_add(checked_mul(x.c, y.a), checked_mul(x.d, y.c)),
            checked_add(checked_mul(x.c, y.b), checked_mul(x.d, y.d))};
}

std::string Mat2::str() const {
    return "(" + to_string(a) + "," + to_string(b) + ";" + to_string(c) + "," + to_string(d) + ")";
}

CuspPair apply_to_cusp(const Mat2& g, const CuspPair& x) {
    return {checked_add(checked_mul(g.a, x.num), checked_mul(g.b, x.den)),
            checked_add(checked_mul(g.c, x.num), checked_mul(g.d, x.den))};
}

bool same_cusp(const CuspPair& x, const CuspPair& y) {
    return checked_mul(x.num, y.den) == checked_mul(y.num, x.den);
}

// ---------------------------------------------------------------------------

std::vector<Mat2> cf_decompose(const Fraction& r) {
    if (r.c < 1 || gcd64(r.a, r.c) != 1) throw DomainError("cf_decompose: fraction must be reduced with c >= 1");
    std::vector<Mat2> out;
    // p_{j-1}/q_{j-1} and p_{j-2}/q_{j-2}
    i128 p1 = 1, q1 = 0, p2 = 0, q2 = 1;
    i128 num = r.a, den = r.c;
    i128 sign = -1;  // (-1)^(j-1) for j = 0
    while (true) {
        i128 t = num / den;
        i128 rem = num - t * den;
        if (rem < 0) {
            --t;
            rem += den;
        }
        i128 p = checked_add(checked_mul(t, p1), p2);
        i128 qq = checked_add(checked_mul(t, q1), q2);
        out.push_back({p, sign * p1, qq, sign * q1});
        p2 = p1;
        q2 = q1;
        p1 = p;
        q1 = qq;
        sign = -sign;
        if (rem == 0) break;
        num = den;
        den = rem;
    }
    return out;
}

// ---------------------------------------------------------------------------

bool p1_equivalent(int64_t c1, int64_t d1, int64_t c2, int64_t d2, int64_t q) {
    i128 x = static_cast<i128>(c1) * d2 - static_cast<i128>(c2) * d1;
    return x % q == 0;
}

int64_t p1_size(int64_t q) {
    int64_t n = q;
    for (int64_t p : prime_divisors(q)) n = n / p * (p + 1);
    return n;
}

P1Class normalize_p1(int64_t c, int64_t d, int64_t q) {
    if (q < 1) throw DomainError("normalize_p1: level must be >= 1");
    if (gcd64(gcd64(c, d), q) != 1)
        throw DomainError("normalize_p1: gcd(c, d, q) != 1 for (" + std::to_string(c) + ", " + std::to_string(d) + ")");
    if (q == 1) return {1, 0, 0};
    int64_t cr = mod_pos(c, q), dr = mod_pos(d, q);
    P1Class best{q, q, q};
    for (int64_t lam = 1; lam < q; ++lam) {
        if (gcd64(lam, q) != 1) continue;
        int64_t x = static_cast<int64_t>(static_cast<i128>(lam) * cr % q);
        int64_t y = static_cast<int64_t>(static_cast<i128>(lam) * dr % q);
        if (x < best.c || (x == best.c && y < best.d)) best = {q, x, y};
    }
    return best;
}

namespace {

Mat2 complete_bottom_row(int64_t C, int64_t D) {
    if (C == 0) return {1, 0, 0, 1};  // D == 1
    i128 x, y;
    ext_gcd(D, C, x, y);  // x*D + y*C = 1
    i128 A = mod_pos128(x, C);
    if (2 * A > C) A -= C;
    i128 B = (A * D - 1) / C;
    return {A, B, C, D};
}

}  // namespace

Mat2 lift_class(const P1Class& k) {
    const int64_t q = k.q;
    for (int64_t H = 1;; ++H) {
        for (int64_t C = 0; C <= H; ++C) {
            for (int64_t D = -H; D <= H; ++D) {
                if (std::max(C, std::abs(D)) != H) continue;
                if (C == 0 && D != 1) continue;
                if (gcd64(C, D) != 1) continue;
                if (!p1_equivalent(C, D, k.c, k.d, q)) continue;
                return complete_bottom_row(C, D);
            }
        }
    }
}

P1Space::P1Space(int64_t q) : q_(q) {
    if (q < 1) throw DomainError("P1Space: level must be >= 1");
    if (q > 2048) throw DomainError("P1Space: level above 2048 is not supported by the dense index");
    lookup_.assign(static_cast<std::size_t>(q * q), -1);
    std::vector<int64_t> units;
    for (int64_t l = 1; l <= q; ++l)
        if (gcd64(l, q) == 1) units.push_back(l % q);
    // The first unassigned pair met in lexicographic order is the smallest
    // member of its orbit, hence the canonical representative.
    for (int64_t x = 0; x < q; ++x) {
        for (int64_t y = 0; y < q; ++y) {
            if (lookup_[x * q + y] >= 0 || gcd64(gcd64(x, y), q) != 1) continue;
            auto idx = static_cast<int32_t>(classes_.size());
            classes_.push_back({q, q == 1 ? 0 : x, q == 1 ? 0 : y});
            for (int64_t l : units) lookup_[(l * x % q) * q + (l * y % q)] = idx;
        }
    }
    // q == 1: single class (0:0) ~ everything
    lifts_.reserve(classes_.size());
    for (const auto& k : classes_) lifts_.push_back(lift_class(k));
}

std::size_t P1Space::index(int64_t c, int64_t d) const {
    int32_t i = lookup_[mod_pos(c, q_) * q_ + mod_pos(d, q_)];
    if (i < 0) throw DomainError("P1Space: pair is not primitive modulo the level");
    return static_cast<std::size_t>(i);
}

std::size_t P1Space::index_of(const Mat2& g) const {
    return index(static_cast<int64_t>(g.c % q_), static_cast<int64_t>(g.d % q_));
}

// ---------------------------------------------------------------------------

Mat2 solve_gamma_tilde(int64_t alpha, int64_t gamma, int64_t q) {
    if (gamma < 1) throw DomainError("solve_gamma_tilde: gamma must be >= 1");
    if (gcd64(alpha, gamma) != 1) throw DomainError("solve_gamma_tilde: gcd(alpha, gamma) != 1");
    const int64_t d = gcd64(gamma, q);
    const int64_t v = q / d;
    const int64_t gp = gamma / d;
    // gcd(v, gamma) = 1 because q is squarefree
    if (gcd64(v, gamma) != 1) throw DomainError("solve_gamma_tilde: CRT infeasible (level not squarefree?)");
    const int64_t D = crt_pair(mod_pos(gp, v), v, mod_inverse(alpha, gamma), gamma);
    const i128 num = checked_add(checked_mul(alpha, D), -1);
    const i128 B = num / gamma;
    Mat2 g{checked_add(alpha, -checked_mul(B, d)), B, checked_add(gamma, -checked_mul(d, D)), D};
    return g;
}

Mat2 atkin_lehner_matrix(int64_t v, int64_t q) {
    if (v < 1 || q % v != 0) throw DomainError("atkin_lehner_matrix: v must divide q");
    const int64_t d = q / v;
    if (gcd64(v, d) != 1) throw DomainError("atkin_lehner_matrix: v and q/v must be coprime");
    const int64_t w = mod_inverse(v, d);
    const i128 y = (static_cast<i128>(v) * w - 1) / d;
    return {v, y, q, static_cast<i128>(v) * w};
}

}  // namespace modsym
