// theory.hpp
//
// Closed-form constants for Gamma_0(q), q squarefree, and the limit profile of
// the contiguous averages:
//
//   vol      = (pi/3) q prod_{p|q} (1 + 1/p)
//   C_f      = -(6/pi^2) prod (1 + 1/p)^{-1} L(sym^2 f, 1)   (c_f = -C_f > 0)
//   A_{d,q}  = 6(-log(q/d)/2 - sum log p/(p+1) + (12/pi^2) zeta'(2) + log 2pi)
//              / (pi^2 prod (1 + 1/p))
//   B_q      = -6 / (pi^2 prod (1 + 1/p))
//   D_{f,d}  = A_{d,q} L(sym^2 f, 1) + B_q L'(sym^2 f, 1)
//
// and an independent route to L(sym^2 f, 1) through the Petersson norm,
// C_f = -16 pi^2 ||f||^2 / vol.

#pragma once

#include "modsym/eigenform.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace modsym {

// zeta'(2)
inline constexpr double kZetaPrime2 = -0.93754825431584375;

double volume(int64_t q);

struct Slope {
    double C_f;  // paper convention, negative
    double c_f;  // real convention, -C_f
};
Slope slope_from_L(int64_t q, double L1);

struct ShiftCoefficients {
    double A;
    double B;
};
ShiftCoefficients shift_coefficients(int64_t q, int64_t d);

struct LValueFixture {
    double L1 = 0;
    std::optional<double> L1p;
};
// Text lines "L1 <value>" and "L1p <value>"; '#' starts a comment.
LValueFixture load_lvalue_fixture(const std::filesystem::path& path);
LValueFixture parse_lvalue_fixture(const std::string& text);

struct ShiftPrediction {
    int64_t d;
    double A;
    double B;
    std::optional<double> D;  // paper convention; absent without L1p
};

struct TheoryConstants {
    int64_t q = 0;
    double vol = 0;
    double L1 = 0;
    std::optional<double> L1p;
    double C_f = 0;
    double c_f = 0;
    double zeta_p2 = kZetaPrime2;
    std::vector<ShiftPrediction> shifts;  // one per divisor of q
    std::optional<double> petersson;

    std::string to_json() const;
};
TheoryConstants make_theory(int64_t q, const LValueFixture& fixture);

// Limit profile ghat(x) = -(1/2pi) sum_{n <= N} a(n) (cos 2 pi n x - 1) / n^2,
// the real-convention form of g(x).
struct LimitProfile {
    std::vector<int64_t> a;  // a[0] unused
    int64_t N = 0;

    // Rigorous bound on the omitted tail from |a(n)| <= d(n) sqrt(n):
    // 3 (log N + 3) / (pi sqrt N).
    double tail_bound() const;
};
LimitProfile make_profile(const Eigenform& f, int64_t N = 0);  // N <= 0: all coefficients
double ghat(const LimitProfile& profile, double x);

// ||f||^2 = sum over coset lifts g_j of int_F |(f|g_j)(w)|^2 dx dy, F the
// standard fundamental domain of SL_2(Z). Composite Gauss-Legendre in x and y;
// level doubles the panel counts. Parallel over cosets.
struct PeterssonResult {
    double norm2 = 0;
    double error_estimate = 0;  // |Q(level) - Q(level - 1)|
    double min_sample = 0;      // smallest integrand value seen (>= 0)
};
PeterssonResult petersson_quadrature(const Eigenform& f, int level = 2);

// L(sym^2 f, 1) = 8 pi^3 ||f||^2 / q, the inverse of the slope identities.
double lsym2_from_petersson(int64_t q, double norm2);

// n-point Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace modsym
