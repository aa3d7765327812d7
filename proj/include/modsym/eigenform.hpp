// eigenform.hpp
//
// Weight-2 newform attached to an elliptic curve of squarefree conductor:
// a_p by point counting, a(n) by the Hecke recursions, Atkin-Lehner signs,
// and evaluation of f and of its antiderivative
//
//     F(z) = sum_{n >= 1} a(n) / (2 pi i n) e(nz),   F' = f,  F(i inf) = 0,
//
// with a closed-form tail certificate based on |a(n)| <= 2n.

#pragma once

#include "modsym/exactmath.hpp"

#include <complex>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace modsym {

using cplx = std::complex<double>;

// Requested accuracy cannot be certified with the available coefficients or
// the evaluation point is below the plan's floor.
struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CurveSpec {
    int64_t a1 = 0, a2 = 0, a3 = 0, a4 = 0, a6 = 0;
    int64_t q = 0;  // declared conductor
    std::string label;

    i128 discriminant() const;
};

// The LMFDB model of 15.a1: y^2 + xy + y = x^3 + x^2 - 10x - 10.
CurveSpec curve_15a1();

class Eigenform {
public:
    Eigenform() = default;
    // coeffs[n] = a(n) for 1 <= n <= N; coeffs[0] is ignored.
    Eigenform(int64_t q, std::vector<int64_t> coeffs);

    int64_t level() const { return q_; }
    int64_t n_max() const { return static_cast<int64_t>(coeffs_.size()) - 1; }
    int64_t a(int64_t n) const { return coeffs_.at(static_cast<std::size_t>(n)); }
    const std::vector<int64_t>& coeffs() const { return coeffs_; }
    const std::map<int64_t, int>& al_signs() const { return al_signs_; }

    // Copy with the Atkin-Lehner sign at p flipped; only for negative tests of
    // the gates that depend on the sign convention.
    Eigenform with_flipped_sign(int64_t p) const;

private:
    int64_t q_ = 0;
    std::vector<int64_t> coeffs_{0};
    std::map<int64_t, int> al_signs_;
};

struct TruncationPlan {
    double tol = 1e-12;
    double y_min = 0.0;

    // Smallest N with sum_{n > N} (1/pi) e^{-2 pi n y} < tol, i.e. the
    // certified term count for F at height y.
    int64_t terms_F(double y) const;
    // Same for f itself, using sum_{n > N} 2n e^{-2 pi n y} < tol.
    int64_t terms_f(double y) const;
};

// a_p = p + 1 - #W(F_p), counting every projective point of the Weierstrass
// model (a singular point included). Brute force for p <= 3, quadratic
// character table otherwise.
int64_t count_points(const CurveSpec& curve, int64_t p);

// a(1..N) from a_p by multiplicativity and
//   a(p^{k+1}) = a(p) a(p^k) - p a(p^{k-1})   (p does not divide q)
//   a(p^k)     = a(p)^k                       (p | q).
// Throws DomainError if some prime <= N is missing from ap.
std::vector<int64_t> hecke_extend(const std::map<int64_t, int64_t>& ap, int64_t q, int64_t n_max);

// Validates the curve against the declared conductor and builds a(1..n_max).
// Point counting runs in parallel over primes.
Eigenform make_eigenform(const CurveSpec& curve, int64_t n_max);

// e_{f,d} = prod_{p | d} (-a_p).
int al_sign(const Eigenform& f, int64_t d);

// F(z) to absolute accuracy plan.tol; throws TruncationError if Im z is
// below plan.y_min or more coefficients are needed than f carries.
cplx antiderivative_F(const Eigenform& f, cplx z, const TruncationPlan& plan);

// f(z) = sum a(n) e(nz) to absolute accuracy plan.tol.
cplx eval_f(const Eigenform& f, cplx z, const TruncationPlan& plan);

// L(f, 1) = (1 - e_{f,q}) sum_{n >= 1} a(n)/n exp(-2 pi n / sqrt q).
// cutoff <= 0 selects the number of terms for a 1e-15 tail.
double lfun1(const Eigenform& f, int64_t cutoff = 0);

// Coefficient cache: "modsym-coeffs v1 q=<q> N=<N>" then "<n> <a(n)>" lines.
void write_coeff_cache(const std::filesystem::path& path, const Eigenform& f);
Eigenform read_coeff_cache(const std::filesystem::path& path);

}  // namespace modsym
