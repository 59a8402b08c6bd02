#pragma once

#include "macrowig/core.hpp"
#include "macrowig/wigner.hpp"

#include <functional>
#include <vector>

// Brute-force adjudication of the closed-form measure: evaluates the defining
// functional
//
//   max[0, -(pi^2/2) Int W~ sum_m (d^2/d a^(m) d a^(m)* + 1) W~ d^4 alpha]
//
// on the normalized field W~ by tensor-grid trapezoid quadrature, with
// second derivatives taken by central finite differences of W~ values only
// (no analytic term derivatives are reused, so the oracle shares nothing
// with the closed form beyond the field definition itself).
namespace macrowig {

struct QuadratureSpec {
    int points_per_axis = 121;  // odd, >= 41
    double extent_sigma = 7.0;  // margin beyond the peak-center span, in units
                                // of the Gaussian width sqrt(s)/2; >= 4
    double fd_step = 0.0;       // central-difference step; 0 = spacing/4
    int fd_order = 4;           // 2 or 4
};

struct ConsistencyRow {
    ModelParams params;
    double i_closed = 0.0;
    double i_quad = 0.0;
    double ratio = 0.0;         // i_closed/i_quad; NaN when both clamp to zero
    double nph_closed = 0.0;
    double nph_quad = 0.0;
    double norm_closed = 0.0;
    double norm_quad = 0.0;
    bool indeterminate = false; // 0/0 ratio
};

struct ConsistencyReport {
    std::vector<ConsistencyRow> rows;
    bool summary_defined = false; // false for an empty grid or all-indeterminate rows
    int n_included = 0;           // rows entering the ratio statistics
    int n_indeterminate = 0;
    double mean_ratio = 0.0;
    double cv = 0.0;              // coefficient of variation of the ratio
    bool constant_ratio = false;  // cv < 1e-4
};

struct CatCalibration {
    double i_one_mode = 0.0;
    double mean_excitation = 0.0;
};

// Defining functional on the normalized field, clamped at zero.
// Feasible regime: N <= 3, gamma <= 3, nbar <= 2.  Throws a domain error
// outside it, and a diagnostic domain error if the grid misses more than
// 1e-8 of the normalization mass.
double measure_by_quadrature(const ModelParams& params, const QuadratureSpec& spec);

// <|a1|^2 + |a2|^2> - 1 on the same grid.  The moment integrals carry no
// finite differences, so the feasible gamma range extends to 5.
double phonons_by_quadrature(const ModelParams& params, const QuadratureSpec& spec);

// Grid integral of wigner_raw; validates the analytic normalization.
double norm_by_quadrature(const ModelParams& params, const QuadratureSpec& spec);

// Single-mode even-cat calibration of the prefactor convention: evaluates
// -(pi/2) Int W (d^2/d a d a* + 1) W on the analytic cat Wigner function and
// pairs it with the mean excitation from the Fock expansion (the two agree
// within 1% when the conventions are right).  alpha in [0.5, 3].
CatCalibration single_mode_cat_calibration(double alpha, const QuadratureSpec& spec);

// One row per params plus ratio statistics.  Per-point failures are rethrown
// with the offending params identified.
ConsistencyReport consistency_report(const std::vector<ModelParams>& grid,
                                     const QuadratureSpec& spec);

namespace detail {

// All grid quantities from one pass: the unclamped functional, its clamped
// value, the phonon moment and the raw-field mass.
struct QuadratureEval {
    double raw = 0.0;
    double value = 0.0;
    double n_ph = 0.0;
    double norm = 0.0;
};

QuadratureEval evaluate_by_quadrature(const ModelParams& params,
                                      const QuadratureSpec& spec);

// Unclamped functional value (the bracket before the outer max).
double functional_by_quadrature(const ModelParams& params, const QuadratureSpec& spec);

// Central second derivative of f at x with step h, order 2 or 4; the same
// stencil the grid engine applies.
double fd_second_derivative(const std::function<double(double)>& f, double x,
                            double h, int order);

} // namespace detail

} // namespace macrowig
