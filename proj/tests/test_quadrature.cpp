#include "macrowig/quadrature.hpp"

#include "macrowig/macroscopicity.hpp"

#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace macrowig;

namespace {

QuadratureSpec fast_spec(int points = 61) {
    QuadratureSpec s;
    s.points_per_axis = points;
    return s;
}

} // namespace

TEST_CASE("quadrature spec validation") {
    ModelParams p = make_params(1, 1.0, 0.0, 0.0);

    QuadratureSpec even = fast_spec(60);
    CHECK_THROWS_AS(norm_by_quadrature(p, even), std::domain_error);
    QuadratureSpec small = fast_spec(39);
    CHECK_THROWS_AS(norm_by_quadrature(p, small), std::domain_error);

    QuadratureSpec narrow = fast_spec();
    narrow.extent_sigma = 3.9;
    CHECK_THROWS_AS(norm_by_quadrature(p, narrow), std::domain_error);

    QuadratureSpec order = fast_spec();
    order.fd_order = 3;
    CHECK_THROWS_AS(norm_by_quadrature(p, order), std::domain_error);

    QuadratureSpec coarse = fast_spec();
    coarse.fd_step = 1.0; // far above spacing / 4
    CHECK_THROWS_AS(norm_by_quadrature(p, coarse), std::domain_error);

    // oracle-feasible regime caps
    CHECK_THROWS_AS(measure_by_quadrature(make_params(4, 1.0, 0.0, 0.0), fast_spec()),
                    std::domain_error);
    CHECK_THROWS_AS(measure_by_quadrature(make_params(1, 3.5, 0.0, 0.0), fast_spec()),
                    std::domain_error);
    CHECK_THROWS_AS(measure_by_quadrature(make_params(1, 1.0, 2.5, 0.0), fast_spec()),
                    std::domain_error);
    // derivative-free integrals tolerate gamma up to 5
    CHECK_NOTHROW(norm_by_quadrature(make_params(1, 4.0, 0.0, 0.0), fast_spec()));
    CHECK_THROWS_AS(norm_by_quadrature(make_params(1, 5.5, 0.0, 0.0), fast_spec()),
                    std::domain_error);
}

TEST_CASE("fd stencil matches analytic second derivatives") {
    auto f = [](double x) { return std::exp(-x * x); };
    auto fpp = [](double x) { return (4.0 * x * x - 2.0) * std::exp(-x * x); };
    const double x0 = 0.7;

    // order-4 truncation at h = 0.02 is f^(6)*h^4/90 ~ 1.4e-7 absolute
    CHECK(std::abs(detail::fd_second_derivative(f, x0, 0.02, 4) - fpp(x0)) < 3e-7);
    CHECK(std::abs(detail::fd_second_derivative(f, x0, 0.005, 4) - fpp(x0)) < 2e-9);

    for (int order : {2, 4}) {
        double e1 = std::abs(detail::fd_second_derivative(f, x0, 0.08, order) - fpp(x0));
        double e2 = std::abs(detail::fd_second_derivative(f, x0, 0.04, order) - fpp(x0));
        double ratio = e1 / e2;
        double expected = std::pow(2.0, order);
        CHECK(ratio > expected * 0.8);
        CHECK(ratio < expected * 1.25);
    }

    CHECK_THROWS_AS(detail::fd_second_derivative(f, 0.0, 0.0, 4), std::domain_error);
}

TEST_CASE("norm_by_quadrature reproduces the analytic normalization") {
    CHECK(norm_by_quadrature(make_params(1, 0.0, 0.0, 0.0), fast_spec()) ==
          doctest::Approx(2.0).epsilon(1e-6));
    CHECK(norm_by_quadrature(make_params(1, 1.0, 0.0, 0.0), fast_spec()) ==
          doctest::Approx(1.3678794411714423).epsilon(1e-6));
    // diagonal-only large-gamma limit
    CHECK(norm_by_quadrature(make_params(1, 5.0, 0.0, 0.0), fast_spec(81)) ==
          doctest::Approx(1.0).epsilon(1e-6));

    // agreement holds across a small feasible grid, including d > 0
    for (int n : {1, 2})
        for (double g : {0.5, 1.5})
            for (double d : {0.0, 0.3}) {
                ModelParams p = make_params(n, g, 0.4, d);
                double ratio =
                    norm_by_quadrature(p, fast_spec()) / normalization(p);
                CHECK(ratio == doctest::Approx(1.0).epsilon(1e-6));
            }
}

TEST_CASE("phonons_by_quadrature matches the closed moment") {
    CHECK(std::abs(phonons_by_quadrature(make_params(1, 0.0, 0.0, 0.0), fast_spec())) <
          1e-8);
    CHECK(phonons_by_quadrature(make_params(2, 0.0, 1.0, 0.0), fast_spec()) ==
          doctest::Approx(2.0).epsilon(1e-6));
    CHECK(phonons_by_quadrature(make_params(1, 1.0, 0.0, 0.0), fast_spec()) ==
          doctest::Approx(0.7310585786300049).epsilon(1e-6));

    for (int n : {1, 2})
        for (double d : {0.0, 0.3}) {
            ModelParams p = make_params(n, 1.2, 0.5, d);
            CHECK(phonons_by_quadrature(p, fast_spec()) ==
                  doctest::Approx(phonon_number(p)).epsilon(1e-6));
        }
}

TEST_CASE("measure_by_quadrature evaluates the defining functional") {
    // gamma = 0: the measure vanishes
    CHECK(measure_by_quadrature(make_params(1, 0.0, 0.5, 0.0), fast_spec()) <= 1e-6);
    CHECK(measure_by_quadrature(make_params(2, 0.0, 0.0, 0.0), fast_spec()) <= 1e-6);

    // frozen value of the functional on the normalized state at (1,1,0,0);
    // at nbar = 0, d = 0 it reduces analytically to n_ph - N^2 gamma^2 / 2
    double v = measure_by_quadrature(make_params(1, 1.0, 0.0, 0.0), fast_spec(81));
    CHECK(v == doctest::Approx(0.2310585786300049).epsilon(5e-6));

    // the closed form is proportional, not equal: the ratio at this point
    // is recorded by the consistency report rather than asserted to be 1
    double closed = macroscopicity(make_params(1, 1.0, 0.0, 0.0)).value;
    CHECK(closed / v > 1.5);
    CHECK(closed / v < 2.2);
}

TEST_CASE("halving fd_step shrinks the change by 2^-fd_order") {
    ModelParams p = make_params(1, 1.0, 0.0, 0.0);
    QuadratureSpec spec = fast_spec();
    double h = 7.0 * std::sqrt(1.0) / 2.0 / 30.0; // axis-1 spacing at 61 points

    spec.fd_step = h / 4.0;
    double f1 = detail::functional_by_quadrature(p, spec);
    spec.fd_step = h / 8.0;
    double f2 = detail::functional_by_quadrature(p, spec);
    spec.fd_step = h / 16.0;
    double f3 = detail::functional_by_quadrature(p, spec);

    double ratio = std::abs(f3 - f2) / std::abs(f2 - f1);
    CHECK(ratio > 0.0625 * 0.6);
    CHECK(ratio < 0.0625 * 1.6);
}

TEST_CASE("grid refinement changes the measure below 1e-5") {
    ModelParams p = make_params(1, 1.0, 0.0, 0.0);
    double coarse = measure_by_quadrature(p, fast_spec(61));
    double fine = measure_by_quadrature(p, fast_spec(123));
    CHECK(std::abs(fine / coarse - 1.0) < 1e-5);
}

TEST_CASE("grid that misses mass raises the diagnostic") {
    QuadratureSpec tight = fast_spec();
    tight.extent_sigma = 4.0; // valid, but the trapezoid tail error exceeds 1e-8
    CHECK_THROWS_AS(norm_by_quadrature(make_params(1, 1.0, 0.0, 0.0), tight),
                    std::domain_error);
}

TEST_CASE("quadrature is deterministic across worker counts") {
    ModelParams p = make_params(1, 0.8, 0.3, 0.1);
    double a = measure_by_quadrature(p, fast_spec());
    double b = measure_by_quadrature(p, fast_spec());
    CHECK(a == b);
#ifdef _OPENMP
    int saved = omp_get_max_threads();
    omp_set_num_threads(3);
    double c = measure_by_quadrature(p, fast_spec());
    omp_set_num_threads(saved);
    CHECK(a == c);
#endif
}

TEST_CASE("single_mode_cat_calibration ties the measure to mean excitation") {
    for (double alpha : {0.5, 1.0, 2.0}) {
        CatCalibration cal = single_mode_cat_calibration(alpha, fast_spec(201));
        CHECK(std::abs(cal.i_one_mode / cal.mean_excitation - 1.0) < 0.01);
        // independent Fock-sum lock: equals alpha^2 tanh(alpha^2)
        CHECK(cal.mean_excitation ==
              doctest::Approx(alpha * alpha * std::tanh(alpha * alpha))
                  .epsilon(1e-10));
    }
    CHECK_THROWS_AS(single_mode_cat_calibration(0.4, fast_spec()), std::domain_error);
    CHECK_THROWS_AS(single_mode_cat_calibration(3.2, fast_spec()), std::domain_error);
}

TEST_CASE("consistency_report composition") {
    QuadratureSpec spec = fast_spec();

    ConsistencyReport empty = consistency_report({}, spec);
    CHECK(empty.rows.empty());
    CHECK(!empty.summary_defined);

    ConsistencyReport one =
        consistency_report({make_params(1, 1.0, 0.0, 0.0)}, spec);
    REQUIRE(one.rows.size() == 1);
    CHECK(one.summary_defined);
    CHECK(one.n_included == 1);
    CHECK(one.rows[0].ratio > 0.0);
    CHECK(std::isfinite(one.rows[0].ratio));
    CHECK(one.mean_ratio == doctest::Approx(1.858).epsilon(1e-3));
    CHECK(one.cv == 0.0);
    CHECK(one.constant_ratio);
    CHECK(one.rows[0].norm_quad ==
          doctest::Approx(one.rows[0].norm_closed).epsilon(1e-6));
    CHECK(one.rows[0].nph_quad ==
          doctest::Approx(one.rows[0].nph_closed).epsilon(1e-6));

    // all gamma = 0: both sides clamp to zero, ratio 0/0
    ConsistencyReport zero = consistency_report(
        {make_params(1, 0.0, 0.0, 0.0), make_params(2, 0.0, 0.5, 0.0)}, spec);
    CHECK(zero.n_indeterminate == 2);
    CHECK(!zero.summary_defined);
    for (const ConsistencyRow& row : zero.rows) {
        CHECK(row.indeterminate);
        CHECK(std::isnan(row.ratio));
    }

    // per-point failures name the offending params
    try {
        consistency_report({make_params(4, 1.0, 0.0, 0.0)}, spec);
        CHECK(false);
    } catch (const std::domain_error& e) {
        CHECK(std::string(e.what()).find("n_particles=4") != std::string::npos);
    }
}
