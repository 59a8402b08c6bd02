#include "macrowig/quadrature.hpp"

#include "macrowig/macroscopicity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace macrowig {

namespace {

constexpr double pi = 3.14159265358979323846;

// FD stencil coefficients for f'' (to be divided by h^2).
struct Stencil {
    int n_off = 0;                    // one-sided offset count times two
    std::array<int, 4> off{};         // +1,-1[,+2,-2] in units of h
    std::array<double, 4> c{};        // matching coefficients
    double c0 = 0.0;                  // center coefficient
};

Stencil make_stencil(int order) {
    Stencil st;
    if (order == 2) {
        st.n_off = 2;
        st.off = {1, -1, 0, 0};
        st.c = {1.0, 1.0, 0.0, 0.0};
        st.c0 = -2.0;
    } else {
        st.n_off = 4;
        st.off = {1, -1, 2, -2};
        st.c = {4.0 / 3.0, 4.0 / 3.0, -1.0 / 12.0, -1.0 / 12.0};
        st.c0 = -5.0 / 2.0;
    }
    return st;
}

void validate_spec(const QuadratureSpec& spec) {
    if (spec.points_per_axis < 41 || spec.points_per_axis % 2 == 0)
        throw std::domain_error("points_per_axis must be odd and at least 41");
    if (!(spec.extent_sigma >= 4.0))
        throw std::domain_error("extent_sigma must be at least 4");
    if (spec.fd_order != 2 && spec.fd_order != 4)
        throw std::domain_error("fd_order must be 2 or 4");
    if (!(spec.fd_step >= 0.0) || !std::isfinite(spec.fd_step))
        throw std::domain_error("fd_step must be finite and non-negative");
}

// fd_step may not exceed a quarter of the finest grid spacing.
double resolve_fd_step(const QuadratureSpec& spec, double min_spacing) {
    double cap = min_spacing / 4.0;
    if (spec.fd_step == 0.0) return cap;
    if (spec.fd_step > cap * (1.0 + 1e-12))
        throw std::domain_error("fd_step must not exceed grid spacing / 4");
    return spec.fd_step;
}

void check_feasible(const ModelParams& p, bool with_derivatives) {
    // The closed form stays cheap far beyond this window; the grid oracle does
    // not.  Derivative-free integrals (norm, moment) tolerate larger gamma
    // because only the peak span grows, not the oscillation density.
    double gamma_cap = with_derivatives ? 3.0 : 5.0;
    if (p.n_particles > 3)
        throw std::domain_error("quadrature supports n_particles <= 3");
    if (p.gamma > gamma_cap)
        throw std::domain_error(with_derivatives
                                    ? "quadrature measure supports gamma <= 3"
                                    : "quadrature supports gamma <= 5");
    if (p.nbar > 2.0 && with_derivatives)
        throw std::domain_error("quadrature measure supports nbar <= 2");
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    double h = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = lo + h * i;
    x.back() = hi;
    return x;
}

std::vector<double> trapezoid_weights(int n) {
    std::vector<double> w(static_cast<std::size_t>(n), 1.0);
    w.front() = 0.5;
    w.back() = 0.5;
    return w;
}

struct GridIntegrals {
    double norm = 0.0;       // Int W
    double moment = 0.0;     // Int W (x1^2+x2^2+x3^2+x4^2)
    double functional = 0.0; // Int W (lap W / 4 + 2 W)
};

// One pass over the 4D tensor grid.  The interference factor
// cos(2 gamma d (x1-x2)) is expanded over cos/sin tables per frequency so the
// inner loop touches precomputed 1D arrays only; the two Gaussian axes that
// carry the peak ladder (axes 3 and 4) are folded into per-class slab factors
// outside the (x1, x2) loops.  Offsets required by the FD stencil reuse the
// same tables shifted by the step.
GridIntegrals integrate_grid(const ModelParams& p, const QuadratureSpec& spec) {
    validate_spec(spec);
    const int N = p.n_particles;
    if (N > 3) throw std::domain_error("grid engine supports n_particles <= 3");

    const int n = spec.points_per_axis;
    const double s = p.s;
    const double sigma_g = std::sqrt(s) / 2.0;
    const double half = spec.extent_sigma * sigma_g;
    const double span = p.gamma * N; // peak centers c1, c2 range over [0, N gamma]

    const std::vector<double> x12 = linspace(-half, half, n);
    const std::vector<double> x34 = linspace(-half, span + half, n);
    const double h12 = x12[1] - x12[0];
    const double h34 = x34[1] - x34[0];
    const double hfd = resolve_fd_step(spec, std::min(h12, h34));
    const Stencil st = make_stencil(spec.fd_order);
    const int n_off = st.n_off;

    // Class weights A[sigma][|delta|], sigma = r + r', delta = r - r'; the
    // delta < 0 half is folded in (cos is even, the binomial product is
    // symmetric), so positive-delta weights carry a factor 2.  The overall
    // prefactor rides along here.
    const std::vector<double> binom = detail::binomial_row_as_double(N);
    const double pref =
        4.0 / (pi * pi * s * s * detail::binomial_as_double(2 * N, N));
    const int n_delta = N + 1;
    const int n_sigma = 2 * N + 1;
    std::vector<std::vector<double>> cw(
        static_cast<std::size_t>(n_sigma),
        std::vector<double>(static_cast<std::size_t>(n_delta), 0.0));
    for (int r = 0; r <= N; ++r)
        for (int rp = 0; rp <= N; ++rp) {
            int sigma = r + rp;
            int delta = r - rp;
            if (delta < 0) continue;
            double fold = (delta > 0) ? 2.0 : 1.0;
            double dephase = std::exp(-(p.d_factor * delta) * (p.d_factor * delta));
            cw[static_cast<std::size_t>(sigma)][static_cast<std::size_t>(delta)] +=
                fold * pref * binom[static_cast<std::size_t>(r)] *
                binom[static_cast<std::size_t>(rp)] * dephase;
        }

    // 1D tables.  Offset slot 0 is the unshifted grid; slots 1..n_off follow
    // st.off.  Layout [slot][delta][i] / [slot][sigma][i], contiguous in i.
    const int n_slot = n_off + 1;
    auto idx3 = [n](int slot, int band, int i) {
        return (static_cast<std::size_t>(slot) * 8 + static_cast<std::size_t>(band)) *
                   static_cast<std::size_t>(n) +
               static_cast<std::size_t>(i);
    };
    std::vector<double> ctab(static_cast<std::size_t>(n_slot) * 8 * n, 0.0);
    std::vector<double> stab(static_cast<std::size_t>(n_slot) * 8 * n, 0.0);
    std::vector<double> etab(static_cast<std::size_t>(n_slot) * n, 0.0);
    std::vector<double> g3(static_cast<std::size_t>(n_slot) * 8 * n, 0.0);
    std::vector<double> g4(static_cast<std::size_t>(n_slot) * 8 * n, 0.0);
    for (int slot = 0; slot < n_slot; ++slot) {
        double off = (slot == 0) ? 0.0 : st.off[static_cast<std::size_t>(slot - 1)] * hfd;
        for (int i = 0; i < n; ++i) {
            double x = x12[static_cast<std::size_t>(i)] + off;
            etab[static_cast<std::size_t>(slot) * n + i] = std::exp(-(2.0 / s) * x * x);
            for (int dl = 0; dl < n_delta; ++dl) {
                double arg = 2.0 * p.gamma * dl * x;
                ctab[idx3(slot, dl, i)] = std::cos(arg);
                stab[idx3(slot, dl, i)] = std::sin(arg);
            }
        }
        for (int k = 0; k < n; ++k) {
            double x = x34[static_cast<std::size_t>(k)] + off;
            for (int sg = 0; sg < n_sigma; ++sg) {
                double c1 = p.gamma * (2 * N - sg) / 2.0;
                double c2 = p.gamma * sg / 2.0;
                double u3 = x - c1;
                double u4 = x - c2;
                g3[idx3(slot, sg, k)] = std::exp(-(2.0 / s) * u3 * u3);
                g4[idx3(slot, sg, k)] = std::exp(-(2.0 / s) * u4 * u4);
            }
        }
    }

    const std::vector<double> wt12 = trapezoid_weights(n);
    const std::vector<double> wt34 = trapezoid_weights(n);
    std::vector<double> x12sq(static_cast<std::size_t>(n));
    std::vector<double> x34sq(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        x12sq[static_cast<std::size_t>(i)] =
            x12[static_cast<std::size_t>(i)] * x12[static_cast<std::size_t>(i)];
        x34sq[static_cast<std::size_t>(i)] =
            x34[static_cast<std::size_t>(i)] * x34[static_cast<std::size_t>(i)];
    }

    const double inv_h2 = 1.0 / (hfd * hfd);
    std::vector<std::array<double, 3>> slab(static_cast<std::size_t>(n),
                                            {0.0, 0.0, 0.0});

    // Axis-3 slabs are independent; each accumulates compensated partial sums
    // and the slab results are reduced in ascending order afterwards, so the
    // totals do not depend on the worker count.
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int k = 0; k < n; ++k) {
        detail::KahanSum fn, fm, fi;
        // Per-(k, l) slab factors: for each delta, the class sum over sigma of
        // A * g3 * g4, once per FD slot on axes 3 and 4.
        std::array<double, 4> p0{};
        std::array<std::array<double, 4>, 4> p3{}, p4{};
        for (int l = 0; l < n; ++l) {
            for (int dl = 0; dl < n_delta; ++dl) {
                double a0 = 0.0;
                std::array<double, 4> a3{}, a4{};
                for (int sg = dl; sg < n_sigma; sg += 2) {
                    double w = cw[static_cast<std::size_t>(sg)][static_cast<std::size_t>(dl)];
                    if (w == 0.0) continue;
                    double v3 = g3[idx3(0, sg, k)];
                    double v4 = g4[idx3(0, sg, l)];
                    a0 += w * v3 * v4;
                    for (int m = 0; m < n_off; ++m) {
                        a3[static_cast<std::size_t>(m)] += w * g3[idx3(m + 1, sg, k)] * v4;
                        a4[static_cast<std::size_t>(m)] += w * v3 * g4[idx3(m + 1, sg, l)];
                    }
                }
                p0[static_cast<std::size_t>(dl)] = a0;
                for (int m = 0; m < n_off; ++m) {
                    p3[static_cast<std::size_t>(m)][static_cast<std::size_t>(dl)] =
                        a3[static_cast<std::size_t>(m)];
                    p4[static_cast<std::size_t>(m)][static_cast<std::size_t>(dl)] =
                        a4[static_cast<std::size_t>(m)];
                }
            }
            const double wkl =
                wt34[static_cast<std::size_t>(k)] * wt34[static_cast<std::size_t>(l)];
            const double r34 =
                x34sq[static_cast<std::size_t>(k)] + x34sq[static_cast<std::size_t>(l)];
            for (int i = 0; i < n; ++i) {
                // Hoist the axis-1 trig values for this i.
                std::array<double, 4> ci{}, si{};
                std::array<std::array<double, 4>, 4> cio{}, sio{};
                for (int dl = 0; dl < n_delta; ++dl) {
                    ci[static_cast<std::size_t>(dl)] = ctab[idx3(0, dl, i)];
                    si[static_cast<std::size_t>(dl)] = stab[idx3(0, dl, i)];
                    for (int m = 0; m < n_off; ++m) {
                        cio[static_cast<std::size_t>(m)][static_cast<std::size_t>(dl)] =
                            ctab[idx3(m + 1, dl, i)];
                        sio[static_cast<std::size_t>(m)][static_cast<std::size_t>(dl)] =
                            stab[idx3(m + 1, dl, i)];
                    }
                }
                const double e0i = etab[static_cast<std::size_t>(i)];
                const double wti = wt12[static_cast<std::size_t>(i)] * wkl;
                const double r34i = r34 + x12sq[static_cast<std::size_t>(i)];
                for (int j = 0; j < n; ++j) {
                    double acc0 = 0.0;
                    std::array<double, 4> acc1{}, acc2{}, acc3{}, acc4{};
                    for (int dl = 0; dl < n_delta; ++dl) {
                        const double cj = ctab[idx3(0, dl, j)];
                        const double sj = stab[idx3(0, dl, j)];
                        // cos(2 gamma dl (x1 - x2)) via the angle-difference
                        // identity; offsets shift one argument at a time.
                        const double q =
                            ci[static_cast<std::size_t>(dl)] * cj +
                            si[static_cast<std::size_t>(dl)] * sj;
                        const double pv = p0[static_cast<std::size_t>(dl)];
                        acc0 += pv * q;
                        for (int m = 0; m < n_off; ++m) {
                            acc3[static_cast<std::size_t>(m)] +=
                                p3[static_cast<std::size_t>(m)][static_cast<std::size_t>(dl)] * q;
                            acc4[static_cast<std::size_t>(m)] +=
                                p4[static_cast<std::size_t>(m)][static_cast<std::size_t>(dl)] * q;
                            acc1[static_cast<std::size_t>(m)] +=
                                pv * (cio[static_cast<std::size_t>(m)][static_cast<std::size_t>(dl)] * cj +
                                      sio[static_cast<std::size_t>(m)][static_cast<std::size_t>(dl)] * sj);
                            acc2[static_cast<std::size_t>(m)] +=
                                pv * (ci[static_cast<std::size_t>(dl)] * ctab[idx3(m + 1, dl, j)] +
                                      si[static_cast<std::size_t>(dl)] * stab[idx3(m + 1, dl, j)]);
                        }
                    }
                    const double e0j = etab[static_cast<std::size_t>(j)];
                    const double e00 = e0i * e0j;
                    const double w0 = e00 * acc0;
                    double lap = st.c0 * 4.0 * w0;
                    for (int m = 0; m < n_off; ++m) {
                        const double em = etab[static_cast<std::size_t>(m + 1) * n + i];
                        const double emj = etab[static_cast<std::size_t>(m + 1) * n + j];
                        lap += st.c[static_cast<std::size_t>(m)] *
                               (em * e0j * acc1[static_cast<std::size_t>(m)] +
                                e0i * emj * acc2[static_cast<std::size_t>(m)] +
                                e00 * acc3[static_cast<std::size_t>(m)] +
                                e00 * acc4[static_cast<std::size_t>(m)]);
                    }
                    lap *= inv_h2;
                    const double wt = wti * wt12[static_cast<std::size_t>(j)];
                    fn.add(w0 * wt);
                    fm.add(w0 * (r34i + x12sq[static_cast<std::size_t>(j)]) * wt);
                    fi.add(w0 * (0.25 * lap + 2.0 * w0) * wt);
                }
            }
        }
        slab[static_cast<std::size_t>(k)] = {fn.value(), fm.value(), fi.value()};
    }

    detail::KahanSum tn, tm, ti;
    for (int k = 0; k < n; ++k) {
        tn.add(slab[static_cast<std::size_t>(k)][0]);
        tm.add(slab[static_cast<std::size_t>(k)][1]);
        ti.add(slab[static_cast<std::size_t>(k)][2]);
    }
    const double vol = h12 * h12 * h34 * h34;
    return {tn.value() * vol, tm.value() * vol, ti.value() * vol};
}

void check_mass(const ModelParams& p, double norm_quad) {
    double z = normalization(p);
    if (std::abs(norm_quad / z - 1.0) > 1e-8) {
        std::ostringstream msg;
        msg << "grid misses normalization mass: quadrature " << norm_quad
            << " vs analytic " << z << "; widen extent_sigma or refine the grid";
        throw std::domain_error(msg.str());
    }
}

} // namespace

detail::QuadratureEval detail::evaluate_by_quadrature(const ModelParams& p,
                                                      const QuadratureSpec& spec) {
    GridIntegrals g = integrate_grid(p, spec);
    check_mass(p, g.norm);
    double z = normalization(p);
    QuadratureEval out;
    out.raw = -(pi * pi / 2.0) * g.functional / (z * z);
    out.value = std::max(0.0, out.raw);
    out.n_ph = g.moment / z - 1.0;
    out.norm = g.norm;
    return out;
}

double detail::functional_by_quadrature(const ModelParams& p,
                                        const QuadratureSpec& spec) {
    return evaluate_by_quadrature(p, spec).raw;
}

double measure_by_quadrature(const ModelParams& p, const QuadratureSpec& spec) {
    check_feasible(p, true);
    return detail::evaluate_by_quadrature(p, spec).value;
}

double phonons_by_quadrature(const ModelParams& p, const QuadratureSpec& spec) {
    check_feasible(p, false);
    return detail::evaluate_by_quadrature(p, spec).n_ph;
}

double norm_by_quadrature(const ModelParams& p, const QuadratureSpec& spec) {
    check_feasible(p, false);
    return detail::evaluate_by_quadrature(p, spec).norm;
}

double detail::fd_second_derivative(const std::function<double(double)>& f,
                                    double x, double h, int order) {
    if (!(h > 0.0)) throw std::domain_error("fd step must be positive");
    Stencil st = make_stencil(order);
    double acc = st.c0 * f(x);
    for (int m = 0; m < st.n_off; ++m)
        acc += st.c[static_cast<std::size_t>(m)] *
               f(x + st.off[static_cast<std::size_t>(m)] * h);
    return acc / (h * h);
}

CatCalibration single_mode_cat_calibration(double alpha, const QuadratureSpec& spec) {
    if (!(alpha >= 0.5 && alpha <= 3.0))
        throw std::domain_error("alpha must be in [0.5, 3]");
    validate_spec(spec);

    const int n = spec.points_per_axis;
    const double half = alpha + spec.extent_sigma * 0.5; // vacuum width 1/2
    const std::vector<double> x = linspace(-half, half, n);
    const double h = x[1] - x[0];
    const double hfd = resolve_fd_step(spec, h);
    const Stencil st = make_stencil(spec.fd_order);

    const double n2 = 2.0 * (1.0 + std::exp(-2.0 * alpha * alpha));
    auto wcat = [&](double u, double v) {
        double g = 2.0 / pi / n2;
        double e1 = std::exp(-2.0 * ((u - alpha) * (u - alpha) + v * v));
        double e2 = std::exp(-2.0 * ((u + alpha) * (u + alpha) + v * v));
        double e3 = 2.0 * std::exp(-2.0 * (u * u + v * v)) * std::cos(4.0 * alpha * v);
        return g * (e1 + e2 + e3);
    };

    const std::vector<double> wt = trapezoid_weights(n);
    detail::KahanSum fnorm, ffun;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double u = x[static_cast<std::size_t>(i)];
            double v = x[static_cast<std::size_t>(j)];
            double w0 = wcat(u, v);
            double lap = 2.0 * st.c0 * w0;
            for (int m = 0; m < st.n_off; ++m) {
                double o = st.off[static_cast<std::size_t>(m)] * hfd;
                lap += st.c[static_cast<std::size_t>(m)] *
                       (wcat(u + o, v) + wcat(u, v + o));
            }
            lap /= hfd * hfd;
            double w2 = wt[static_cast<std::size_t>(i)] * wt[static_cast<std::size_t>(j)];
            fnorm.add(w0 * w2);
            ffun.add(w0 * (0.25 * lap + w0) * w2);
        }
    }
    double norm = fnorm.value() * h * h;
    if (std::abs(norm - 1.0) > 1e-8)
        throw std::domain_error("cat grid misses normalization mass");

    CatCalibration out;
    out.i_one_mode = std::max(0.0, -(pi / 2.0) * ffun.value() * h * h);

    // Mean excitation of the even cat from its Fock expansion: only even n
    // contribute, with weights alpha^(2n)/n!.
    double term = 1.0; // n = 0
    double wsum = term, nsum = 0.0;
    double a4 = alpha * alpha * alpha * alpha;
    for (int nn = 0; nn + 2 <= 400; nn += 2) {
        term *= a4 / ((nn + 1.0) * (nn + 2.0));
        wsum += term;
        nsum += (nn + 2.0) * term;
        if (term < 1e-20 * wsum) break;
    }
    out.mean_excitation = nsum / wsum;
    return out;
}

ConsistencyReport consistency_report(const std::vector<ModelParams>& grid,
                                     const QuadratureSpec& spec) {
    ConsistencyReport rep;
    rep.rows.reserve(grid.size());
    for (const ModelParams& p : grid) {
        ConsistencyRow row;
        row.params = p;
        try {
            // One grid pass per point covers the measure, moment and mass.
            check_feasible(p, true);
            detail::QuadratureEval q = detail::evaluate_by_quadrature(p, spec);
            row.i_closed = macroscopicity(p).value;
            row.i_quad = q.value;
            row.nph_closed = phonon_number(p);
            row.nph_quad = q.n_ph;
            row.norm_closed = normalization(p);
            row.norm_quad = q.norm;
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << "consistency point (n_particles=" << p.n_particles
                << ", gamma=" << p.gamma << ", nbar=" << p.nbar
                << ", d_factor=" << p.d_factor << ") failed: " << e.what();
            throw std::domain_error(msg.str());
        }
        if (row.i_closed == 0.0 && row.i_quad == 0.0) {
            row.indeterminate = true;
            row.ratio = std::numeric_limits<double>::quiet_NaN();
        } else if (row.i_quad == 0.0) {
            row.ratio = std::numeric_limits<double>::infinity();
        } else {
            row.ratio = row.i_closed / row.i_quad;
        }
        rep.rows.push_back(row);
    }

    detail::KahanSum mean_acc;
    int n_inc = 0;
    for (const ConsistencyRow& row : rep.rows) {
        if (row.indeterminate) {
            ++rep.n_indeterminate;
            continue;
        }
        if (!std::isfinite(row.ratio)) continue;
        mean_acc.add(row.ratio);
        ++n_inc;
    }
    rep.n_included = n_inc;
    if (n_inc == 0) return rep;

    rep.summary_defined = true;
    rep.mean_ratio = mean_acc.value() / n_inc;
    detail::KahanSum var_acc;
    for (const ConsistencyRow& row : rep.rows) {
        if (row.indeterminate || !std::isfinite(row.ratio)) continue;
        double d = row.ratio - rep.mean_ratio;
        var_acc.add(d * d);
    }
    double sd = std::sqrt(var_acc.value() / n_inc);
    rep.cv = (rep.mean_ratio != 0.0) ? sd / std::abs(rep.mean_ratio) : 0.0;
    rep.constant_ratio = rep.cv < 1e-4;
    return rep;
}

} // namespace macrowig
