#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

// Parameter records, binomial helpers and stable summation primitives shared
// by every other component.
namespace macrowig {

inline constexpr double hbar = 1.054571817e-34;        // J s
inline constexpr double k_boltzmann = 1.380649e-23;    // J / K

inline constexpr int max_particles = 60;

// Immutable model parameters: N emitters, kick strength gamma, thermal
// occupation nbar, dephasing factor d.  s = 2*nbar + 1 is cached because it
// appears in every exponent.
struct ModelParams {
    int n_particles = 1;
    double gamma = 0.0;
    double nbar = 0.0;
    double d_factor = 0.0;
    double s = 1.0;
};

// Validates ranges and caches s; throws std::domain_error naming the
// offending field.
ModelParams make_params(int n_particles, double gamma, double nbar, double d_factor);

struct BathSpec {
    double omega_m = 0.0;       // mechanical angular frequency, rad/s
    double temperature = 0.0;   // bath temperature, K
};

// Bose occupation 1/(exp(hbar*omega/(kB*T)) - 1); returns 0 at T = 0.
double thermal_occupation(const BathSpec& bath);
// Dimensionless variant taking hw_over_kt = hbar*omega/(kB*T) directly.
double thermal_occupation(double hw_over_kt);

// Exact binomial coefficient via the Pascal recurrence; guaranteed exact for
// n <= 60 (values up to C(60,30) ~ 1.18e17 fit in int64).
std::int64_t binomial_exact(int n, int k);

// log C(n,k); usable far past the exact-integer range (the grouped sums need
// n = 2N up to 120).
double log_binomial(int n, int k);

// sum of c_i * exp(e_i) with the largest exponent factored out so no
// intermediate overflows, compensated (Kahan) accumulation in input order.
double stable_weighted_exp_sum(std::span<const std::pair<double, double>> terms);

namespace detail {

// Exact binomials through n = 126 (C(120,60) ~ 9.7e34 still fits __int128);
// returned as double, exact up to the 53-bit rounding of the conversion.
double binomial_as_double(int n, int k);

// Whole row C(n, 0..n) at once; inner loops index this instead of paying the
// Pascal recurrence per term.
std::vector<double> binomial_row_as_double(int n);

// Kahan-compensated accumulator, used wherever a deterministic serial sum
// order matters.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum - carry; } // fold in pending compensation
};

} // namespace detail

} // namespace macrowig
