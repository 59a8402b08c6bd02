#include "macrowig/core.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace macrowig {

ModelParams make_params(int n_particles, double gamma, double nbar, double d_factor)
{
    if (n_particles < 1 || n_particles > max_particles)
        throw std::domain_error("n_particles must be in [1, " + std::to_string(max_particles) +
                                "], got " + std::to_string(n_particles));
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        throw std::domain_error("gamma must be finite and >= 0");
    if (!(nbar >= 0.0) || !std::isfinite(nbar))
        throw std::domain_error("nbar must be finite and >= 0");
    if (!(d_factor >= 0.0) || !std::isfinite(d_factor))
        throw std::domain_error("d_factor must be finite and >= 0");
    ModelParams p;
    p.n_particles = n_particles;
    p.gamma = gamma;
    p.nbar = nbar;
    p.d_factor = d_factor;
    p.s = 2.0 * nbar + 1.0;
    return p;
}

double thermal_occupation(const BathSpec& bath)
{
    if (!(bath.omega_m > 0.0) || !std::isfinite(bath.omega_m))
        throw std::domain_error("omega_m must be finite and > 0");
    if (!(bath.temperature >= 0.0) || !std::isfinite(bath.temperature))
        throw std::domain_error("temperature must be finite and >= 0");
    if (bath.temperature == 0.0)
        return 0.0;
    return thermal_occupation(hbar * bath.omega_m / (k_boltzmann * bath.temperature));
}

double thermal_occupation(double hw_over_kt)
{
    if (!(hw_over_kt > 0.0) || !std::isfinite(hw_over_kt))
        throw std::domain_error("hw_over_kt must be finite and > 0");
    // 1/(e^x - 1), with expm1 keeping the small-x regime accurate.
    return 1.0 / std::expm1(hw_over_kt);
}

namespace {

void check_binomial_domain(int n, int k)
{
    if (n < 0 || k < 0 || k > n)
        throw std::domain_error("binomial requires 0 <= k <= n, got n=" + std::to_string(n) +
                                " k=" + std::to_string(k));
}

// One row of Pascal's triangle in unsigned __int128; exact through n = 126.
unsigned __int128 binomial_u128(int n, int k)
{
    if (k > n - k)
        k = n - k;
    std::vector<unsigned __int128> row(static_cast<std::size_t>(k) + 1, 0);
    row[0] = 1;
    for (int i = 1; i <= n; ++i)
        for (int j = std::min(i, k); j >= 1; --j)
            row[static_cast<std::size_t>(j)] += row[static_cast<std::size_t>(j) - 1];
    return row[static_cast<std::size_t>(k)];
}

} // namespace

std::int64_t binomial_exact(int n, int k)
{
    check_binomial_domain(n, k);
    if (n > 62)
        throw std::domain_error("binomial_exact supports n <= 62, got n=" + std::to_string(n));
    return static_cast<std::int64_t>(binomial_u128(n, k));
}

double log_binomial(int n, int k)
{
    check_binomial_domain(n, k);
    if (n <= 126)
        return std::log(detail::binomial_as_double(n, k));
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double detail::binomial_as_double(int n, int k)
{
    check_binomial_domain(n, k);
    if (n > 126)
        throw std::domain_error("binomial_as_double supports n <= 126, got n=" + std::to_string(n));
    unsigned __int128 v = binomial_u128(n, k);
    // split into two 64-bit halves for the conversion
    const double hi = static_cast<double>(static_cast<std::uint64_t>(v >> 64));
    const double lo = static_cast<double>(static_cast<std::uint64_t>(v));
    return hi * 18446744073709551616.0 + lo;
}

std::vector<double> detail::binomial_row_as_double(int n)
{
    std::vector<double> row(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k)
        row[static_cast<std::size_t>(k)] = binomial_as_double(n, k);
    return row;
}

double stable_weighted_exp_sum(std::span<const std::pair<double, double>> terms)
{
    if (terms.empty())
        return 0.0;
    double emax = -std::numeric_limits<double>::infinity();
    for (const auto& [c, e] : terms)
        if (c != 0.0 && e > emax)
            emax = e;
    if (emax == -std::numeric_limits<double>::infinity())
        return 0.0; // all coefficients zero
    detail::KahanSum acc;
    for (const auto& [c, e] : terms)
        if (c != 0.0)
            acc.add(c * std::exp(e - emax));
    const double scaled = acc.value();
    if (scaled == 0.0)
        return 0.0;
    if (emax > 700.0 || emax < -700.0) {
        // rescale through the log domain so exp(emax) alone can't overflow
        const double lg = emax + std::log(std::fabs(scaled));
        const double mag = std::exp(lg);
        return scaled > 0.0 ? mag : -mag;
    }
    return scaled * std::exp(emax);
}

} // namespace macrowig
