#pragma once

#include "macrowig/core.hpp"

#include <cstdint>
#include <vector>

// Closed-form interference measure of the two-mirror state,
//
//   I = max(0, [sum_{r,r',R,R'} n_term] / [8 s^2 (sum_{r,r'} d_term)^2]),
//
// engineered so no exponential is ever evaluated at a large positive
// argument: with a = r-r', b = R-R' the bracket of each quadruple-sum term is
// rewritten as
//
//   [-8 nbar/s + g^2 (a+b)^2] e^{-s g^2 (a-b)^2 / 2}
// + [-8 nbar/s + g^2 (a-b)^2] e^{-s g^2 (a+b)^2 / 2},
//
// whose exponents are always <= 0.  The naive form contains
// exp[+2 s g^2 a b], which alone overflows at the operating points this tool
// targets (g = 10, N = 5 gives exp(5000)); the rewrite is mandatory, not an
// optimization.
namespace macrowig {

struct MacroResult {
    double raw_value = 0.0;    // numerator / denominator, before the clamp
    double value = 0.0;        // max(0, raw_value)
    double numerator = 0.0;    // quadruple sum
    double denominator = 0.0;  // 8 s^2 (double sum)^2, > 0
    std::int64_t n_terms = 0;  // quadruple-sum terms (or grouped classes) evaluated
};

// Grouped-summation class: all index tuples sharing (a, b) = (r-r', R-R')
// have identical bracket value; multiplicity counts the tuples, binomial
// weights are aggregated separately (Vandermonde: sum_r C(N,r) C(N,r-a)
// = C(2N, N+a)).
struct DeltaPair {
    int a = 0;
    int b = 0;
    std::int64_t multiplicity = 0;
};

// Dephasing weight phi(r) = exp[-(d r)^2].
double phi(int r, double d_factor);

// C(N,r) C(N,r') exp[-s g^2 (r-r')^2] phi(r-r')
double d_term(const ModelParams& params, int r, int r_prime);

// One quadruple-sum term (stable rewrite above) including phi(a) phi(b).
double n_term(const ModelParams& params, int r, int r_prime, int R, int R_prime);

// Quadruple sum partitioned by the leading index r across OpenMP workers,
// each slab compensated serially, slabs reduced in ascending r — results are
// identical for any worker count.
MacroResult macroscopicity(const ModelParams& params);

// Serial reference: terms accumulated class-by-class in descending-exponent
// order (dominant terms first under compensation).
MacroResult macroscopicity_serial(const ModelParams& params);

// O(N^2) route summing once per DeltaPair class with aggregated binomial
// weights; agrees with the quadruple sum to 1e-12 relative.
MacroResult macroscopicity_grouped(const ModelParams& params);

// The (2N+1)^2 classes in the deterministic accumulation order used by the
// serial and grouped routes.
std::vector<DeltaPair> delta_pairs(int n_particles);

} // namespace macrowig
