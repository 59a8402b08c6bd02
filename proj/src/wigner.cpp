#include "macrowig/wigner.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace macrowig {

namespace {

double wigner_sum(const ModelParams& p, const PhasePoint& pt, bool reversed)
{
    const int N = p.n_particles;
    const double g = p.gamma;
    const double s = p.s;
    const double inv_s2 = 2.0 / s;
    const double d2 = p.d_factor * p.d_factor;
    const double x12 = pt.a1_re * pt.a1_re + pt.a2_re * pt.a2_re;
    const double xdiff = pt.a1_re - pt.a2_re;

    detail::KahanSum acc;
    for (int i = 0; i <= N; ++i) {
        for (int j = 0; j <= N; ++j) {
            const int r = reversed ? j : i;
            const int rp = reversed ? i : j;
            const int delta = r - rp;
            const double c1 = g * (2 * N - r - rp) / 2.0;
            const double c2 = g * (r + rp) / 2.0;
            const double d3 = pt.a1_im - c1;
            const double d4 = pt.a2_im - c2;
            // Gaussian + dephasing exponents combined into one exp
            const double expo = -inv_s2 * (x12 + d3 * d3 + d4 * d4)
                                - d2 * static_cast<double>(delta * delta);
            const double w = detail::binomial_as_double(N, r) * detail::binomial_as_double(N, rp);
            acc.add(w * std::exp(expo) * std::cos(2.0 * g * delta * xdiff));
        }
    }
    const double pref = 4.0 / (std::numbers::pi * std::numbers::pi * s * s *
                               detail::binomial_as_double(2 * N, N));
    return pref * acc.value();
}

} // namespace

double wigner_raw(const ModelParams& params, const PhasePoint& point)
{
    return wigner_sum(params, point, false);
}

double detail::wigner_raw_reversed(const ModelParams& params, const PhasePoint& point)
{
    return wigner_sum(params, point, true);
}

double normalization(const ModelParams& params)
{
    const int N = params.n_particles;
    const double sg2 = params.s * params.gamma * params.gamma;
    const double d2 = params.d_factor * params.d_factor;
    detail::KahanSum acc;
    for (int r = 0; r <= N; ++r) {
        for (int rp = 0; rp <= N; ++rp) {
            const double delta2 = static_cast<double>((r - rp) * (r - rp));
            acc.add(detail::binomial_as_double(N, r) * detail::binomial_as_double(N, rp) *
                    std::exp(-(sg2 + d2) * delta2));
        }
    }
    return acc.value() / detail::binomial_as_double(2 * N, N);
}

double wigner_normalized(const ModelParams& params, const PhasePoint& point)
{
    return wigner_raw(params, point) / normalization(params);
}

double phonon_number(const ModelParams& params)
{
    const int N = params.n_particles;
    const double g = params.gamma;
    const double s = params.s;
    const double sg2 = s * g * g;
    const double d2 = params.d_factor * params.d_factor;
    detail::KahanSum num, den;
    for (int r = 0; r <= N; ++r) {
        for (int rp = 0; rp <= N; ++rp) {
            const double delta2 = static_cast<double>((r - rp) * (r - rp));
            const double w = detail::binomial_as_double(N, r) * detail::binomial_as_double(N, rp) *
                             std::exp(-(sg2 + d2) * delta2);
            const double c1 = g * (2 * N - r - rp) / 2.0;
            const double c2 = g * (r + rp) / 2.0;
            num.add(w * (c1 * c1 + c2 * c2 - 0.5 * s * sg2 * delta2));
            den.add(w);
        }
    }
    return (s - 1.0) + num.value() / den.value();
}

std::vector<PeakCenter> peak_centers(const ModelParams& params)
{
    const int N = params.n_particles;
    const double g = params.gamma;
    std::vector<PeakCenter> centers;
    centers.reserve(static_cast<std::size_t>(N + 1) * (N + 1));
    for (int r = 0; r <= N; ++r)
        for (int rp = 0; rp <= N; ++rp)
            centers.push_back({g * (2 * N - r - rp) / 2.0, g * (r + rp) / 2.0});
    return centers;
}

} // namespace macrowig
