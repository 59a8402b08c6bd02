#include "macrowig/macroscopicity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace macrowig {

double phi(int r, double d_factor)
{
    const double x = d_factor * r;
    return std::exp(-x * x);
}

double d_term(const ModelParams& params, int r, int r_prime)
{
    const int N = params.n_particles;
    if (r < 0 || r > N || r_prime < 0 || r_prime > N)
        throw std::domain_error("d_term indices must lie in [0, n_particles]");
    const double delta2 = static_cast<double>((r - r_prime) * (r - r_prime));
    const double expo = -(params.s * params.gamma * params.gamma +
                          params.d_factor * params.d_factor) * delta2;
    const double w = detail::binomial_as_double(N, r) * detail::binomial_as_double(N, r_prime);
    if (expo < -700.0) {
        // keep far-off-diagonal terms representable via the log domain
        return std::exp(std::log(w) + expo);
    }
    return w * std::exp(expo);
}

namespace {

// bracket of one quadruple-sum term, with the phi weights folded into the
// (always nonpositive) exponents
inline double bracket(double nbar, double s, double g2, double d2, int a, int b)
{
    const double apb = static_cast<double>(a + b);
    const double amb = static_cast<double>(a - b);
    const double phis = -d2 * (a * a + b * b);
    const double c1 = -8.0 * nbar / s + g2 * apb * apb;
    const double c2 = -8.0 * nbar / s + g2 * amb * amb;
    const double e1 = -0.5 * s * g2 * amb * amb + phis;
    const double e2 = -0.5 * s * g2 * apb * apb + phis;
    const std::array<std::pair<double, double>, 2> terms{{{c1, e1}, {c2, e2}}};
    return stable_weighted_exp_sum(terms);
}

// bracket(a, b) tabulated over a, b in [-N, N]
std::vector<double> bracket_table(const ModelParams& p)
{
    const int N = p.n_particles;
    const int w = 2 * N + 1;
    const double g2 = p.gamma * p.gamma;
    const double d2 = p.d_factor * p.d_factor;
    std::vector<double> table(static_cast<std::size_t>(w) * w);
    for (int a = -N; a <= N; ++a)
        for (int b = -N; b <= N; ++b)
            table[static_cast<std::size_t>(a + N) * w + (b + N)] =
                bracket(p.nbar, p.s, g2, d2, a, b);
    return table;
}

double denominator_sum(const ModelParams& p)
{
    const int N = p.n_particles;
    detail::KahanSum acc;
    for (int r = 0; r <= N; ++r)
        for (int rp = 0; rp <= N; ++rp)
            acc.add(d_term(p, r, rp));
    return acc.value();
}

MacroResult finish(const ModelParams& p, double num, std::int64_t n_terms)
{
    MacroResult res;
    const double sd = denominator_sum(p);
    res.numerator = num;
    res.denominator = 8.0 * p.s * p.s * sd * sd;
    res.raw_value = res.numerator / res.denominator;
    res.value = std::max(0.0, res.raw_value);
    res.n_terms = n_terms;
    return res;
}

void check_supported(const ModelParams& p)
{
    if (p.n_particles > max_particles)
        throw std::domain_error("macroscopicity supports n_particles <= 60");
}

} // namespace

double n_term(const ModelParams& params, int r, int r_prime, int R, int R_prime)
{
    const int N = params.n_particles;
    for (int idx : {r, r_prime, R, R_prime})
        if (idx < 0 || idx > N)
            throw std::domain_error("n_term indices must lie in [0, n_particles]");
    const double w = detail::binomial_as_double(N, r) * detail::binomial_as_double(N, r_prime) *
                     detail::binomial_as_double(N, R) * detail::binomial_as_double(N, R_prime);
    return w * bracket(params.nbar, params.s, params.gamma * params.gamma,
                       params.d_factor * params.d_factor, r - r_prime, R - R_prime);
}

std::vector<DeltaPair> delta_pairs(int n_particles)
{
    const int N = n_particles;
    std::vector<DeltaPair> classes;
    classes.reserve(static_cast<std::size_t>(2 * N + 1) * (2 * N + 1));
    for (int a = -N; a <= N; ++a)
        for (int b = -N; b <= N; ++b)
            classes.push_back({a, b,
                               static_cast<std::int64_t>(N + 1 - std::abs(a)) *
                                   (N + 1 - std::abs(b))});
    // dominant classes first: the larger bracket exponent is
    // -s g^2 min(|a-b|, |a+b|)^2 / 2
    std::stable_sort(classes.begin(), classes.end(), [](const DeltaPair& x, const DeltaPair& y) {
        const int mx = std::min(std::abs(x.a - x.b), std::abs(x.a + x.b));
        const int my = std::min(std::abs(y.a - y.b), std::abs(y.a + y.b));
        if (mx != my)
            return mx < my;
        const int sx = std::max(std::abs(x.a - x.b), std::abs(x.a + x.b));
        const int sy = std::max(std::abs(y.a - y.b), std::abs(y.a + y.b));
        if (sx != sy)
            return sx < sy;
        if (x.a != y.a)
            return x.a < y.a;
        return x.b < y.b;
    });
    return classes;
}

MacroResult macroscopicity_serial(const ModelParams& p)
{
    check_supported(p);
    const int N = p.n_particles;
    const double g2 = p.gamma * p.gamma;
    const double d2 = p.d_factor * p.d_factor;
    const auto binom = detail::binomial_row_as_double(N);
    detail::KahanSum num;
    std::int64_t count = 0;
    for (const DeltaPair& cls : delta_pairs(N)) {
        const double br = bracket(p.nbar, p.s, g2, d2, cls.a, cls.b);
        // every tuple of the class shares the bracket value; accumulating the
        // tuples one by one keeps this the plain quadruple sum, just visited
        // dominant-class first
        for (int r = std::max(0, cls.a); r <= std::min(N, N + cls.a); ++r) {
            const double wr = binom[static_cast<std::size_t>(r)] *
                              binom[static_cast<std::size_t>(r - cls.a)];
            for (int R = std::max(0, cls.b); R <= std::min(N, N + cls.b); ++R) {
                const double wR = binom[static_cast<std::size_t>(R)] *
                                  binom[static_cast<std::size_t>(R - cls.b)];
                num.add(wr * wR * br);
                ++count;
            }
        }
    }
    return finish(p, num.value(), count);
}

MacroResult macroscopicity(const ModelParams& p)
{
    check_supported(p);
    const int N = p.n_particles;
    const int w = 2 * N + 1;
    const auto binom = detail::binomial_row_as_double(N);
    const auto br = bracket_table(p);
    std::vector<double> slab(static_cast<std::size_t>(N) + 1, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int r = 0; r <= N; ++r) {
        detail::KahanSum acc;
        for (int rp = 0; rp <= N; ++rp) {
            const double wa = binom[static_cast<std::size_t>(r)] *
                              binom[static_cast<std::size_t>(rp)];
            const double* brow = br.data() + static_cast<std::size_t>(r - rp + N) * w + N;
            for (int R = 0; R <= N; ++R) {
                const double wb = wa * binom[static_cast<std::size_t>(R)];
                for (int Rp = 0; Rp <= N; ++Rp)
                    acc.add(wb * binom[static_cast<std::size_t>(Rp)] * brow[R - Rp]);
            }
        }
        slab[static_cast<std::size_t>(r)] = acc.value();
    }
    // slabs reduced in ascending r: identical result for any worker count
    detail::KahanSum num;
    for (int r = 0; r <= N; ++r)
        num.add(slab[static_cast<std::size_t>(r)]);
    const std::int64_t n1 = N + 1;
    return finish(p, num.value(), n1 * n1 * n1 * n1);
}

MacroResult macroscopicity_grouped(const ModelParams& p)
{
    check_supported(p);
    const int N = p.n_particles;
    const double g2 = p.gamma * p.gamma;
    const double d2 = p.d_factor * p.d_factor;
    // aggregated class weight via Vandermonde: sum over r-r' = a of
    // C(N,r) C(N,r') = C(2N, N+a)
    const auto wa = detail::binomial_row_as_double(2 * N);
    detail::KahanSum num;
    const auto classes = delta_pairs(N);
    for (const DeltaPair& cls : classes) {
        const double w = wa[static_cast<std::size_t>(N + cls.a)] *
                         wa[static_cast<std::size_t>(N + cls.b)];
        num.add(w * bracket(p.nbar, p.s, g2, d2, cls.a, cls.b));
    }
    return finish(p, num.value(), static_cast<std::int64_t>(classes.size()));
}

} // namespace macrowig
