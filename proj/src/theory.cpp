#include "modsym/theory.hpp"

#include "modsym/periods.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace modsym {

namespace {

double euler_factor(int64_t q) {
    double prod = 1.0;
    for (int64_t p : prime_divisors(q)) prod *= 1.0 + 1.0 / static_cast<double>(p);
    return prod;
}

void require_squarefree(int64_t q) {
    if (q < 1 || !is_squarefree(q)) throw DomainError("level must be squarefree");
}

}  // namespace

double volume(int64_t q) {
    require_squarefree(q);
    return std::numbers::pi / 3.0 * static_cast<double>(q) * euler_factor(q);
}

Slope slope_from_L(int64_t q, double L1) {
    require_squarefree(q);
    const double C = -6.0 / (std::numbers::pi * std::numbers::pi) / euler_factor(q) * L1;
    return {C, -C};
}

ShiftCoefficients shift_coefficients(int64_t q, int64_t d) {
    require_squarefree(q);
    if (d < 1 || q % d != 0) throw DomainError("shift_coefficients: d must divide q");
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double sum_p = 0;
    for (int64_t p : prime_divisors(q)) sum_p += std::log(static_cast<double>(p)) / static_cast<double>(p + 1);
    const double inner = -0.5 * std::log(static_cast<double>(q / d)) - sum_p + 12.0 / pi2 * kZetaPrime2 +
                         std::log(2.0 * std::numbers::pi);
    const double denom = pi2 * euler_factor(q);
    return {6.0 * inner / denom, -6.0 / denom};
}

// ---------------------------------------------------------------------------

LValueFixture parse_lvalue_fixture(const std::string& text) {
    LValueFixture fx;
    bool have_l1 = false;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string key, value, extra;
        if (!(ls >> key)) continue;
        if (!(ls >> value) || (ls >> extra))
            throw std::runtime_error("L-value fixture line " + std::to_string(lineno) + ": expected '<key> <value>'");
        char* end = nullptr;
        const double x = std::strtod(value.c_str(), &end);
        if (end == value.c_str() || *end != '\0' || !std::isfinite(x))
            throw std::runtime_error("L-value fixture line " + std::to_string(lineno) + ": bad number '" + value + "'");
        if (key == "L1") {
            fx.L1 = x;
            have_l1 = true;
        } else if (key == "L1p") {
            fx.L1p = x;
        } else {
            throw std::runtime_error("L-value fixture line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    if (!have_l1) throw std::runtime_error("L-value fixture: missing L1");
    return fx;
}

LValueFixture load_lvalue_fixture(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read L-value fixture " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_lvalue_fixture(ss.str());
}

TheoryConstants make_theory(int64_t q, const LValueFixture& fx) {
    TheoryConstants t;
    t.q = q;
    t.vol = volume(q);
    t.L1 = fx.L1;
    t.L1p = fx.L1p;
    const Slope s = slope_from_L(q, fx.L1);
    t.C_f = s.C_f;
    t.c_f = s.c_f;
    for (int64_t d : divisors(q)) {
        const auto [A, B] = shift_coefficients(q, d);
        ShiftPrediction sp{d, A, B, std::nullopt};
        if (fx.L1p) sp.D = A * fx.L1 + B * *fx.L1p;
        t.shifts.push_back(sp);
    }
    return t;
}

std::string TheoryConstants::to_json() const {
    nlohmann::ordered_json j;
    j["q"] = q;
    j["vol"] = vol;
    j["L1"] = L1;
    j["L1p"] = L1p ? nlohmann::ordered_json(*L1p) : nlohmann::ordered_json(nullptr);
    j["C_f"] = C_f;
    j["c_f"] = c_f;
    j["zeta_p2"] = zeta_p2;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& s : shifts) {
        nlohmann::ordered_json e;
        e["d"] = s.d;
        e["A"] = s.A;
        e["B"] = s.B;
        e["D"] = s.D ? nlohmann::ordered_json(*s.D) : nlohmann::ordered_json(nullptr);
        arr.push_back(e);
    }
    j["shifts"] = arr;
    j["petersson"] = petersson ? nlohmann::ordered_json(*petersson) : nlohmann::ordered_json(nullptr);
    return j.dump(2);
}

// ---------------------------------------------------------------------------

double LimitProfile::tail_bound() const {
    const double n = static_cast<double>(N);
    return 3.0 * (std::log(n) + 3.0) / (std::numbers::pi * std::sqrt(n));
}

LimitProfile make_profile(const Eigenform& f, int64_t N) {
    if (N <= 0 || N > f.n_max()) N = f.n_max();
    LimitProfile p;
    p.N = N;
    p.a.assign(f.coeffs().begin(), f.coeffs().begin() + N + 1);
    return p;
}

double ghat(const LimitProfile& profile, double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("ghat: x must lie in [0, 1]");
    // cos(2 pi n x) via the Chebyshev recurrence is too lossy for n ~ 1e5;
    // reduce n x modulo 1 instead.
    double s = 0;
    for (int64_t n = 1; n <= profile.N; ++n) {
        const int64_t an = profile.a[n];
        if (an == 0) continue;
        const double nx = static_cast<double>(n) * x;
        const double frac = nx - std::floor(nx);
        const double nn = static_cast<double>(n);
        s += static_cast<double>(an) * (std::cos(2.0 * std::numbers::pi * frac) - 1.0) / (nn * nn);
    }
    return 0.0 - s / (2.0 * std::numbers::pi);
}

// ---------------------------------------------------------------------------

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

namespace {

constexpr int kOrder = 12;

struct Rule {
    std::vector<double> x, w;
};

// Composite rule on [lo, hi] with `panels` equal panels.
void append_panels(const Rule& base, double lo, double hi, int panels, std::vector<double>& xs, std::vector<double>& ws) {
    const double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
        const double a = lo + p * h;
        for (std::size_t i = 0; i < base.x.size(); ++i) {
            xs.push_back(a + 0.5 * h * (base.x[i] + 1.0));
            ws.push_back(0.5 * h * base.w[i]);
        }
    }
}

struct CosetTerm {
    double value = 0;
    double min_sample = 0;
};

CosetTerm coset_integral(const Eigenform& f, const ExpansionShift& s, const Rule& base, int level,
                         const TruncationPlan& plan) {
    const double k1 = static_cast<double>(s.k1), k2 = static_cast<double>(s.k2), m = static_cast<double>(s.m);
    const double scale = k1 / k2;
    // |f(Kw)|^2 ~ exp(-4 pi scale y): cut off where it is below 1e-17
    const double Y = 1.0 + std::log(1e17) / (4.0 * std::numbers::pi * scale);
    const int xpanels = 2 << level;
    const double hy = 2.0 / static_cast<double>(1 << level);
    const int ypanels = std::max(1, static_cast<int>(std::ceil((Y - 1.0) / hy)));

    std::vector<double> xs, wx;
    append_panels(base, -0.5, 0.5, xpanels, xs, wx);
    std::vector<double> yu, wu;
    append_panels(base, 1.0, Y, ypanels, yu, wu);

    CosetTerm out;
    out.min_sample = INFINITY;
    auto integrand = [&](double x, double y) {
        const cplx u((k1 * x + m) / k2, k1 * y / k2);
        const double v = scale * scale * std::norm(eval_f(f, u, plan));
        out.min_sample = std::min(out.min_sample, v);
        return v;
    };
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        const double ylo = std::sqrt(1.0 - x * x);
        std::vector<double> yl, wl;
        append_panels(base, ylo, 1.0, std::max(1, 1 << (level - 1 > 0 ? level - 1 : 0)), yl, wl);
        double col = 0;
        for (std::size_t j = 0; j < yl.size(); ++j) col += wl[j] * integrand(x, yl[j]);
        for (std::size_t j = 0; j < yu.size(); ++j) col += wu[j] * integrand(x, yu[j]);
        out.value += wx[i] * col;
    }
    return out;
}

double petersson_at_level(const Eigenform& f, const P1Space& space, const std::vector<ExpansionShift>& shifts, int level,
                          double& min_sample) {
    Rule base;
    gauss_legendre(kOrder, base.x, base.w);
    const TruncationPlan plan{1e-15, 0.0};
    std::vector<CosetTerm> terms(space.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t j = 0; j < space.size(); ++j) terms[j] = coset_integral(f, shifts[j], base, level, plan);
    double total = 0;
    for (const auto& t : terms) {
        total += t.value;
        min_sample = std::min(min_sample, t.min_sample);
    }
    return total;
}

}  // namespace

PeterssonResult petersson_quadrature(const Eigenform& f, int level) {
    if (level < 1) throw DomainError("petersson_quadrature: level must be >= 1");
    P1Space space(f.level());
    std::vector<ExpansionShift> shifts;
    for (std::size_t j = 0; j < space.size(); ++j) shifts.push_back(cusp_shift(space.lift(j), f));
    PeterssonResult r;
    r.min_sample = INFINITY;
    const double coarse = petersson_at_level(f, space, shifts, level - 1, r.min_sample);
    r.norm2 = petersson_at_level(f, space, shifts, level, r.min_sample);
    r.error_estimate = std::abs(r.norm2 - coarse);
    return r;
}

double lsym2_from_petersson(int64_t q, double norm2) {
    return 8.0 * std::pow(std::numbers::pi, 3) * norm2 / static_cast<double>(q);
}

}  // namespace modsym
