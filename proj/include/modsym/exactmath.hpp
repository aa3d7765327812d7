// exactmath.hpp
//
// Exact integer arithmetic for the symbol engine: 2x2 integer matrices with
// 128-bit entries, continued-fraction (Manin) decomposition of the path
// {i*inf, a/c}, the projective line P^1(Z/q) indexing the cosets of
// Gamma_0(q) in SL_2(Z), and the Bezout/CRT solvers used to move a rational
// cusp a/c back to its representative 1/d.
//
// All functions are pure. Overflow of 128-bit intermediates throws
// OverflowError instead of wrapping.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace modsym {

using i128 = __int128;

struct OverflowError : std::overflow_error {
    using std::overflow_error::overflow_error;
};

// Raised when inputs violate a documented precondition.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Elementary number theory
// ---------------------------------------------------------------------------

int64_t gcd64(int64_t a, int64_t b);
int64_t floor_div(int64_t a, int64_t b);
int64_t mod_pos(int64_t a, int64_t m);  // result in [0, m)

// Inverse of a modulo m (m >= 1); throws DomainError if gcd(a, m) != 1.
// Returns 0 for m == 1.
int64_t mod_inverse(int64_t a, int64_t m);

// x with x = r1 (mod m1), x = r2 (mod m2), 0 <= x < m1*m2, for coprime moduli.
int64_t crt_pair(int64_t r1, int64_t m1, int64_t r2, int64_t m2);

// Prime factorisation by trial division, ascending, with multiplicity.
std::vector<int64_t> factorize(int64_t n);
std::vector<int64_t> prime_divisors(int64_t n);
std::vector<int64_t> divisors(int64_t n);  // ascending
bool is_squarefree(int64_t n);
bool is_prime(int64_t n);

std::vector<int64_t> primes_up_to(int64_t n);
std::vector<int64_t> totients_up_to(int64_t n);  // phi[0..n], phi[0] = 0

std::string to_string(i128 x);

// ---------------------------------------------------------------------------
// Fraction a/c with c >= 1
// ---------------------------------------------------------------------------

struct Fraction {
    int64_t a = 0;
    int64_t c = 1;

    // gcd(a, c) = 1, c >= 1; a is not reduced mod 1.
    static Fraction reduced(int64_t a, int64_t c);
    // Representative with 0 <= a < c (and gcd = 1).
    Fraction mod1() const;
    bool is_reduced() const { return c >= 1 && gcd64(a, c) == 1; }

    friend bool operator==(const Fraction&, const Fraction&) = default;
};

// ---------------------------------------------------------------------------
// Mat2: (a b; c d) with 128-bit entries
// ---------------------------------------------------------------------------

struct Mat2 {
    i128 a = 1, b = 0, c = 0, d = 1;

    static Mat2 identity() { return {1, 0, 0, 1}; }
    static Mat2 S() { return {0, -1, 1, 0}; }
    static Mat2 U() { return {1, -1, 1, 0}; }
    static Mat2 T(i128 n = 1) { return {1, n, 0, 1}; }

    i128 det() const;
    // Adjugate (d -b; -c a); equals the inverse when det = 1.
    Mat2 adjugate() const;
    Mat2 operator-() const { return {-a, -b, -c, -d}; }

    friend Mat2 operator*(const Mat2& x, const Mat2& y);
    friend bool operator==(const Mat2&, const Mat2&) = default;

    std::string str() const;
};

i128 checked_mul(i128 x, i128 y);
i128 checked_add(i128 x, i128 y);

// Image of the cusp a/c under g as a projective pair (num, den); den == 0
// encodes infinity. pair for infinity input is (1, 0).
struct CuspPair {
    i128 num;
    i128 den;
};
CuspPair apply_to_cusp(const Mat2& g, const CuspPair& x);
bool same_cusp(const CuspPair& x, const CuspPair& y);

// ---------------------------------------------------------------------------
// Manin continued-fraction decomposition
// ---------------------------------------------------------------------------

// g_0..g_n in SL_2(Z) with g_j = (p_j, (-1)^(j-1) p_{j-1}; q_j, (-1)^(j-1) q_{j-1})
// built from the convergents p_j/q_j of a/c (p_{-1}/q_{-1} = 1/0), so the path
// i*inf -> a/c is the concatenation of g_j(0) -> g_j(inf). Requires c >= 1 and
// gcd(a, c) = 1.
std::vector<Mat2> cf_decompose(const Fraction& r);

// ---------------------------------------------------------------------------
// P^1(Z/q)
// ---------------------------------------------------------------------------

struct P1Class {
    int64_t q = 1;
    int64_t c = 0;
    int64_t d = 1;

    friend bool operator==(const P1Class&, const P1Class&) = default;
};

// Canonical representative: lexicographically smallest (lambda*c mod q,
// lambda*d mod q) over units lambda. Throws DomainError if gcd(c, d, q) != 1.
P1Class normalize_p1(int64_t c, int64_t d, int64_t q);

// (c1:d1) == (c2:d2) in P^1(Z/q) iff c1*d2 - c2*d1 = 0 mod q, for primitive pairs.
bool p1_equivalent(int64_t c1, int64_t d1, int64_t c2, int64_t d2, int64_t q);

// q * prod_{p | q} (1 + 1/p) for squarefree q.
int64_t p1_size(int64_t q);

// g in SL_2(Z) whose bottom row represents k. Search: bottom rows (C, D) by
// increasing height max(|C|, |D|), C ascending from 0 then D ascending from
// -H (C = 0 only with D = 1); the top row minimises |A| with ties to A >= 0.
Mat2 lift_class(const P1Class& k);

// Dense enumeration of P^1(Z/q) with O(1) lookup of a bottom row mod q.
class P1Space {
public:
    explicit P1Space(int64_t q);

    int64_t level() const { return q_; }
    std::size_t size() const { return classes_.size(); }
    const std::vector<P1Class>& classes() const { return classes_; }
    const P1Class& at(std::size_t i) const { return classes_[i]; }
    const Mat2& lift(std::size_t i) const { return lifts_[i]; }

    // Index of the class of (c : d); requires gcd(c, d, q) = 1.
    std::size_t index(int64_t c, int64_t d) const;
    std::size_t index_of(const Mat2& g) const;

    // Raw lookup on residues 0 <= cr, dr < q, for hot loops. Returns -1 for
    // non-primitive pairs.
    int32_t index_residues(int64_t cr, int64_t dr) const { return lookup_[cr * q_ + dr]; }

private:
    int64_t q_;
    std::vector<P1Class> classes_;
    std::vector<Mat2> lifts_;
    std::vector<int32_t> lookup_;
};

// ---------------------------------------------------------------------------
// Cusp machinery for squarefree q
// ---------------------------------------------------------------------------

// (A, B; C, D) in Gamma_0(q) mapping 1/d to alpha/gamma, d = gcd(gamma, q):
// A + B*d = alpha, C + D*d = gamma, AD - BC = 1, q | C. D is the least
// non-negative CRT solution of D = gamma/d (mod q/d), D = alpha^-1 (mod gamma).
Mat2 solve_gamma_tilde(int64_t alpha, int64_t gamma, int64_t q);

// W_v = (v, y; q, v*w) with v*w - y*(q/v) = 1, det W_v = v. w is the least
// non-negative inverse of v modulo q/v.
Mat2 atkin_lehner_matrix(int64_t v, int64_t q);

}  // namespace modsym
