// periods.hpp
//
// The symbol engine. For h in SL_2(Z) the pulled-back form f|h is expanded at
// infinity through the Atkin-Lehner involution of the cusp class of h(inf):
//
//     h = gamma~ * W_v * K / v,   K = (k1 m; 0 k2),  k1 k2 = v,
//     int_i^{i inf} (f|h)(w) dw = -e_{f,v} F((k1 i + m) / k2).
//
// Periods W(g) = int_{g0}^{g inf} f dz of the lifts of P^1(Z/q) are tabulated
// once; a symbol <a/c> is then the sum of W over the Manin matrices of a/c.
//
// Convention: <r> = 2 pi i int_{i inf}^r Re(f dz) = i * m_minus(r), so with
// P(r) = int_{i inf}^r f dz we have m_minus = 2 pi Re P and the raw plus
// symbol m_plus = -2 pi Im P.

#pragma once

#include "modsym/eigenform.hpp"
#include "modsym/exactmath.hpp"

#include <filesystem>
#include <vector>

namespace modsym {

struct ExpansionShift {
    int e = 1;
    int64_t k1 = 1;
    int64_t k2 = 1;
    int64_t m = 0;  // 0 <= m < k2
    int64_t d = 1;  // gcd(gamma, q), gamma the lower-left entry of h
    int64_t v = 1;  // q / d, the width of the cusp 1/d

    // (k1 i + m) / k2
    cplx argument() const;
};

ExpansionShift cusp_shift(const Mat2& h, const Eigenform& f);

// int_{h i}^{h inf} f dz = -e F(argument)
cplx half_period(const Mat2& h, const Eigenform& f, const TruncationPlan& plan);

class PeriodTable {
public:
    PeriodTable(P1Space space, std::vector<cplx> periods, double tol, int64_t n_terms);

    int64_t level() const { return space_.level(); }
    const P1Space& space() const { return space_; }
    std::size_t size() const { return periods_.size(); }
    const std::vector<cplx>& periods() const { return periods_; }
    const cplx& period(std::size_t i) const { return periods_[i]; }
    double tol() const { return tol_; }
    int64_t n_terms() const { return n_terms_; }

    // P(r) via cf_decompose and exact class lookup.
    cplx path_sum(const Fraction& r) const;

    // Re P(a/c) for 0 <= a < c, gcd(a, c) = 1, c < 2^62; 64-bit Euclid with
    // residue lookup. Bitwise equal to path_sum(r).real().
    double real_sum(int64_t a, int64_t c) const {
        const int64_t q = space_.level();
        int64_t qm2 = 1, qm1 = 0;
        int64_t num = a, den = c;
        bool neg = true;  // sign of (-1)^(j-1) for j = 0
        double s = 0.0;
        while (true) {
            const int64_t t = num / den;
            const int64_t rem = num - t * den;
            const int64_t qj = t * qm1 + qm2;
            int64_t lo = qm1 % q;
            if (neg && lo != 0) lo = q - lo;
            s += re_[static_cast<std::size_t>(space_.index_residues(qj % q, lo))];
            qm2 = qm1;
            qm1 = qj;
            neg = !neg;
            if (rem == 0) break;
            num = den;
            den = rem;
        }
        return s;
    }

private:
    P1Space space_;
    std::vector<cplx> periods_;
    std::vector<double> re_;
    double tol_;
    int64_t n_terms_;
};

// W(g) = -e_g F(arg_g) + e_{gS} F(arg_{gS}) for the lift g of every class.
// Parallel over classes.
PeriodTable build_period_table(const Eigenform& f, const TruncationPlan& plan);

struct RelationResiduals {
    double two_term = 0;    // max |W(g) + W(gS)|
    double three_term = 0;  // max |W(g) + W(gU) + W(gU^2)|
};
RelationResiduals manin_residuals(const PeriodTable& table);

struct SymbolValue {
    double m_minus = 0;
    double m_plus = 0;
    Fraction r;
    int64_t d = 1;  // gcd(c, q)
    cplx period;    // P(r)
};

SymbolValue symbol(const Fraction& r, const PeriodTable& table);

// Independent single-split evaluation of P(a/c) for c <= 200: with
// g = (a B; c D) in SL_2(Z), D = a^-1 (mod c), D = c/d (mod v),
//   P = F(z*) - e_{f,v} F((g^-1 z* - y) / v),   z* = a/c + i/(c sqrt v),
// y the upper-right entry of W_v. Both arguments sit at height 1/(c sqrt v).
cplx direct_symbol_oracle(const Fraction& r, const Eigenform& f, const TruncationPlan& plan);

// "modsym-table v1 q=<q> tol=<tol>" then "<c>:<d> <Re W> <Im W>" per class.
void write_table_cache(const std::filesystem::path& path, const PeriodTable& table);
PeriodTable read_table_cache(const std::filesystem::path& path);

}  // namespace modsym
