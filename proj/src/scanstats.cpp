#include "modsym/scanstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include <omp.h>

namespace modsym {

void ScanSpec::validate() const {
    if (q < 1) throw DomainError("scan: level must be >= 1");
    if (M < 1) throw DomainError("scan: M must be >= 1");
    if (d_filter != 0 && (d_filter < 1 || q % d_filter != 0)) throw DomainError("scan: d must divide q");
    if (!(interval.x0 >= 0.0 && interval.x0 < interval.x1 && interval.x1 <= 1.0))
        throw DomainError("scan: interval must satisfy 0 <= x0 < x1 <= 1");
    if (k_max < 2 || k_max > kMaxMomentDepth) throw DomainError("scan: moment depth must be in [2, 8]");
}

int64_t enumerate_count(const ScanSpec& spec) {
    const auto phi = totients_up_to(spec.M);
    int64_t n = 0;
    for (int64_t c = 1; c <= spec.M; ++c)
        if (spec.accepts_c(c)) n += phi[c];
    return n;
}

cplx unit_root(int64_t k, int64_t c) {
    const int64_t r = mod_pos(k, c);
    return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(c));
}

void AggregateRow::add(int64_t a, double m, const ScanSpec& spec) {
    ++count;
    double p = 1.0;
    for (int k = 0; k <= spec.k_max; ++k) {
        S[k] += p;
        p *= m;
    }
    if (spec.interval.contains(a, c)) {
        ++count_in;
        p = 1.0;
        for (int k = 0; k <= spec.k_max; ++k) {
            SI[k] += p;
            p *= m;
        }
    }
    for (std::size_t i = 0; i < spec.weyl_modes.size(); ++i) weyl[i] += unit_root(spec.weyl_modes[i] * a, c);
}

void AggregateRow::merge(const AggregateRow& o) {
    if (o.c != c) throw DomainError("AggregateRow::merge: rows for different c");
    count += o.count;
    count_in += o.count_in;
    for (std::size_t k = 0; k < S.size(); ++k) {
        S[k] += o.S[k];
        SI[k] += o.SI[k];
    }
    if (weyl.size() < o.weyl.size()) weyl.resize(o.weyl.size());
    for (std::size_t i = 0; i < o.weyl.size(); ++i) weyl[i] += o.weyl[i];
}

namespace {

AggregateRow empty_row(int64_t c, const ScanSpec& spec) {
    AggregateRow row;
    row.c = c;
    row.d = gcd64(c, spec.q);
    row.weyl.assign(spec.weyl_modes.size(), cplx(0.0, 0.0));
    return row;
}

void check_finite(const std::vector<AggregateRow>& rows) {
    for (const auto& r : rows)
        for (double s : r.S)
            if (!std::isfinite(s)) throw std::overflow_error("scan: moment accumulator is not finite at c = " + std::to_string(r.c));
}

// marks[a] = 1 iff gcd(a, c) > 1
void coprime_marks(int64_t c, std::vector<unsigned char>& marks) {
    marks.assign(static_cast<std::size_t>(c), 0);
    if (c == 1) return;
    int64_t n = c;
    for (int64_t p = 2; p * p <= n; ++p) {
        if (n % p != 0) continue;
        while (n % p == 0) n /= p;
        for (int64_t a = 0; a < c; a += p) marks[a] = 1;
    }
    if (n > 1)
        for (int64_t a = 0; a < c; a += n) marks[a] = 1;
}

std::vector<int64_t> accepted_cs(const ScanSpec& spec, int64_t c_min) {
    std::vector<int64_t> cs;
    for (int64_t c = c_min; c <= spec.M; ++c)
        if (spec.accepts_c(c)) cs.push_back(c);
    return cs;
}

}  // namespace

std::vector<AggregateRow> scan(const ScanSpec& spec, const PeriodTable& table, int shards) {
    spec.validate();
    if (table.level() != spec.q) throw DomainError("scan: table level does not match spec");
    const auto cs = accepted_cs(spec, 1);
    std::vector<AggregateRow> rows(cs.size());
    if (shards <= 0) shards = 4 * omp_get_max_threads();
    const auto n = static_cast<int64_t>(cs.size());
    const double two_pi = 2.0 * std::numbers::pi;
#pragma omp parallel for schedule(dynamic, 1)
    for (int s = 0; s < shards; ++s) {
        const int64_t lo = n * s / shards, hi = n * (s + 1) / shards;
        std::vector<unsigned char> marks;
        for (int64_t i = lo; i < hi; ++i) {
            const int64_t c = cs[i];
            AggregateRow row = empty_row(c, spec);
            coprime_marks(c, marks);
            for (int64_t a = 0; a < c; ++a)
                if (!marks[a]) row.add(a, two_pi * table.real_sum(a, c), spec);
            rows[i] = std::move(row);
        }
    }
    check_finite(rows);
    return rows;
}

std::vector<AggregateRow> scan_reference(const ScanSpec& spec, const PeriodTable& table) {
    spec.validate();
    if (table.level() != spec.q) throw DomainError("scan: table level does not match spec");
    std::vector<AggregateRow> rows;
    enumerate(spec, [&](int64_t c, int64_t a) {
        if (rows.empty() || rows.back().c != c) rows.push_back(empty_row(c, spec));
        rows.back().add(a, symbol(Fraction{a, c}, table).m_minus, spec);
    });
    check_finite(rows);
    return rows;
}

// ---------------------------------------------------------------------------

double m_value(const PeriodTable& table, int64_t a, int64_t c) {
    const Fraction r = Fraction::reduced(a, c).mod1();
    return 2.0 * std::numbers::pi * table.real_sum(r.a, r.c);
}

SymbolStore::SymbolStore(const PeriodTable& table, int64_t threshold)
    : table_(&table), threshold_(std::max<int64_t>(threshold, 0)) {
    offset_.assign(static_cast<std::size_t>(threshold_) + 2, 0);
    for (int64_t c = 1; c <= threshold_; ++c) offset_[c + 1] = offset_[c] + static_cast<std::size_t>(c);
    values_.assign(offset_[threshold_ + 1], 0.0);
#pragma omp parallel for schedule(dynamic, 16)
    for (int64_t c = 1; c <= threshold_; ++c)
        for (int64_t a = 0; a < c; ++a) values_[offset_[c] + a] = m_value(table, a, c);
}

double SymbolStore::m(int64_t a, int64_t c) const {
    const int64_t ar = mod_pos(a, c);
    if (c <= threshold_) return values_[offset_[c] + ar];
    return m_value(*table_, ar, c);
}

// ---------------------------------------------------------------------------

MeanDecayReport mean_decay_report(const std::vector<AggregateRow>& rows) {
    MeanDecayReport rep;
    for (const auto& r : rows) rep.points.push_back({r.c, std::abs(r.mean()) * std::sqrt(static_cast<double>(r.c))});
    if (rows.empty()) return rep;
    const int64_t cmax = rows.back().c;
    for (int64_t lo = 1; lo < cmax; lo *= 2) {
        std::vector<double> vals;
        for (const auto& p : rep.points)
            if (p.c > lo && p.c <= 2 * lo) vals.push_back(p.normalized);
        if (vals.empty()) continue;
        std::sort(vals.begin(), vals.end());
        rep.dyadic.push_back({lo, 2 * lo, vals.back(), vals[vals.size() / 2]});
    }
    return rep;
}

int64_t floor_cx(int64_t c, double x) {
    const double v = static_cast<double>(c) * x;
    auto k = static_cast<int64_t>(std::floor(v));
    if (static_cast<double>(k + 1) - v < 1e-9 * std::max(1.0, v)) ++k;
    return std::clamp<int64_t>(k, 0, c);
}

ContigResult contiguous_avg(const SymbolStore& store, int64_t M, const std::vector<double>& x_grid) {
    for (double x : x_grid)
        if (!(x >= 0.0 && x <= 1.0)) throw DomainError("contiguous_avg: grid points must lie in [0, 1]");
    const std::size_t nx = x_grid.size();
    std::vector<double> g(static_cast<std::size_t>(M) * nx, 0.0);
#pragma omp parallel for schedule(dynamic, 8)
    for (int64_t c = 1; c <= M; ++c) {
        std::vector<double> prefix(static_cast<std::size_t>(c) + 1);
        double s = 0.0;
        for (int64_t a = 0; a <= c; ++a) {
            s += store.m(a, c);
            prefix[a] = s;
        }
        for (std::size_t i = 0; i < nx; ++i)
            g[(c - 1) * nx + i] = prefix[floor_cx(c, x_grid[i])] / static_cast<double>(c);
    }
    ContigResult out{x_grid, std::vector<double>(nx, 0.0)};
    for (int64_t c = 1; c <= M; ++c)
        for (std::size_t i = 0; i < nx; ++i) out.avg_real[i] += g[(c - 1) * nx + i];
    for (double& v : out.avg_real) v /= static_cast<double>(M);
    return out;
}

std::vector<WeylEntry> weyl_report(const std::vector<AggregateRow>& rows, const std::vector<int64_t>& modes) {
    std::vector<WeylEntry> out;
    int64_t count = 0;
    for (const auto& r : rows) count += r.count;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        cplx s = 0;
        for (const auto& r : rows) s += r.weyl.at(i);
        if (modes[i] == 0) s = static_cast<double>(count);
        out.push_back({modes[i], s, count, count > 0 ? std::abs(s) / static_cast<double>(count) : 0.0});
    }
    return out;
}

FitResult variance_fit(const std::vector<AggregateRow>& rows, int64_t q, double c_f) {
    FitResult res;
    std::map<int64_t, std::vector<const AggregateRow*>> by_d;
    for (const auto& r : rows) by_d[gcd64(r.c, q)].push_back(&r);
    if (by_d.empty()) throw DomainError("variance_fit: no rows");
    double pooled_num = 0, pooled_den = 0;
    for (const auto& [d, list] : by_d) {
        FitRow fr{};
        fr.d = d;
        fr.n_rows = static_cast<int64_t>(list.size());
        double wsum = 0, acc = 0;
        for (const auto* r : list) {
            const double w = static_cast<double>(r->count);
            wsum += w;
            acc += w * (r->var_real() - c_f * std::log(static_cast<double>(r->c)));
        }
        fr.weight = wsum;
        fr.fixed_shift_real = acc / wsum;

        double W = 0, mx = 0, my = 0;
        for (const auto* r : list) {
            if (r->c < 2) continue;
            const double w = static_cast<double>(r->count);
            W += w;
            mx += w * std::log(static_cast<double>(r->c));
            my += w * r->var_real();
        }
        if (W > 0) {
            mx /= W;
            my /= W;
            double sxy = 0, sxx = 0;
            for (const auto* r : list) {
                if (r->c < 2) continue;
                const double w = static_cast<double>(r->count);
                const double dx = std::log(static_cast<double>(r->c)) - mx;
                sxy += w * dx * (r->var_real() - my);
                sxx += w * dx * dx;
            }
            fr.slope_real = sxx > 0 ? sxy / sxx : 0.0;
            fr.intercept_real = my - fr.slope_real * mx;
            pooled_num += sxy;
            pooled_den += sxx;
            double rss = 0;
            for (const auto* r : list) {
                if (r->c < 2) continue;
                const double e = r->var_real() - (fr.intercept_real + fr.slope_real * std::log(static_cast<double>(r->c)));
                rss += static_cast<double>(r->count) * e * e;
            }
            fr.residual_rms = std::sqrt(rss / W);
        }
        res.rows.push_back(fr);
    }
    res.pooled_slope_real = pooled_den > 0 ? pooled_num / pooled_den : 0.0;
    return res;
}

// ---------------------------------------------------------------------------

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double ks_normal(std::vector<double>& x) {
    if (x.empty()) throw DomainError("ks_normal: empty sample");
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double dmax = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double F = normal_cdf(x[i]);
        dmax = std::max({dmax, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
    }
    return dmax;
}

std::vector<double> standardized_sample(const ScanSpec& spec, const PeriodTable& table, const DistributionOptions& opt) {
    spec.validate();
    if (!(opt.c_f > 0)) throw DomainError("distribution: c_f must be positive");
    const auto cs = accepted_cs(spec, 2);
    std::vector<std::vector<double>> parts(cs.size());
    const double two_pi = 2.0 * std::numbers::pi;
#pragma omp parallel for schedule(dynamic, 4)
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const int64_t c = cs[i];
        double scale = opt.c_f * std::log(static_cast<double>(c));
        if (opt.mode == Standardization::ShiftedLaw) scale += opt.shift_real;
        const double inv = 1.0 / std::sqrt(scale);
        for (int64_t a = 0; a < c; ++a) {
            if (gcd64(a, c) != 1 || !spec.interval.contains(a, c)) continue;
            parts[i].push_back(two_pi * table.real_sum(a, c) * inv);
        }
    }
    std::vector<double> out;
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

DistributionReport distribution_report(const ScanSpec& spec, const PeriodTable& table, const DistributionOptions& opt) {
    auto z = standardized_sample(spec, table, opt);
    if (z.empty()) throw DomainError("distribution_report: empty sample");
    DistributionReport rep;
    rep.d_filter = spec.d_filter;
    rep.interval = spec.interval;
    rep.c_max = spec.M;
    rep.n = static_cast<int64_t>(z.size());
    for (double v : z) {
        double p = 1.0;
        for (std::size_t k = 0; k < rep.moments.size(); ++k) {
            rep.moments[k] += p;
            p *= v;
        }
    }
    for (double& mk : rep.moments) mk /= static_cast<double>(z.size());

    const double inf = std::numeric_limits<double>::infinity();
    rep.bin_edges.push_back(-inf);
    for (int b = 0; b <= opt.bins; ++b) rep.bin_edges.push_back(-opt.range + 2.0 * opt.range * b / opt.bins);
    rep.bin_edges.push_back(inf);
    rep.bin_counts.assign(rep.bin_edges.size() - 1, 0);
    for (double v : z) {
        auto it = std::upper_bound(rep.bin_edges.begin(), rep.bin_edges.end(), v);
        ++rep.bin_counts[static_cast<std::size_t>(it - rep.bin_edges.begin()) - 1];
    }
    rep.ks = ks_normal(z);
    return rep;
}

}  // namespace modsym
