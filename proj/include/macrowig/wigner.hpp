#pragma once

#include "macrowig/core.hpp"

#include <vector>

// Two-mirror Wigner function: a double sum over kick indices (r, r') of
// displaced Gaussians times interference cosines,
//
//   W = 4/(pi^2 s^2 C(2N,N)) * sum_{r,r'} C(N,r) C(N,r') phi(r-r')
//       * exp(-(2/s)[x1^2 + x2^2 + (x3 - g(2N-r-r')/2)^2 + (x4 - g(r+r')/2)^2])
//       * cos(2 g (r-r') (x1 - x2)),
//
// where s = 2 nbar + 1 and every off-diagonal term carries the dephasing
// weight phi(r-r') = exp[-(d (r-r'))^2] so that the state, its norm and its
// moments stay mutually consistent at d > 0.
namespace macrowig {

struct PhasePoint {
    double a1_re = 0.0;
    double a1_im = 0.0;
    double a2_re = 0.0;
    double a2_im = 0.0;
};

struct TermIndex {
    int r = 0;
    int r_prime = 0;
};

struct PeakCenter {
    double c1_im = 0.0;
    double c2_im = 0.0;
};

// The double sum as written above (not unit-normalized: its gamma=0 integral
// is 4^N / C(2N,N)).  Gaussian and dephasing exponents of each term are
// combined before the single exponentiation.
double wigner_raw(const ModelParams& params, const PhasePoint& point);

// Z = [sum_{r,r'} C(N,r) C(N,r') phi(r-r') exp(-s g^2 (r-r')^2)] / C(2N,N);
// equals the analytic integral of wigner_raw.
double normalization(const ModelParams& params);

// wigner_raw / normalization; integrates to 1.
double wigner_normalized(const ModelParams& params, const PhasePoint& point);

// n_ph = <|a1|^2 + |a2|^2> - 1 over the normalized field, reduced to a
// closed form by Gaussian moment integration (locked against the quadrature
// oracle):
//   n_ph = (s-1) + [sum w (c1^2 + c2^2 - s^2 g^2 (r-r')^2 / 2)] / [sum w],
// with w = C(N,r) C(N,r') phi(r-r') exp(-s g^2 (r-r')^2) and c1, c2 the term
// centers.
double phonon_number(const ModelParams& params);

// The (N+1)^2 Gaussian peak centers (imaginary quadratures), row-major in
// (r, r'); used for quadrature extent planning.  c1_im + c2_im = N*gamma for
// every entry.
std::vector<PeakCenter> peak_centers(const ModelParams& params);

namespace detail {
// Same sum with the (r, r') loops exchanged; exposed for the
// order-independence check.
double wigner_raw_reversed(const ModelParams& params, const PhasePoint& point);
} // namespace detail

} // namespace macrowig
